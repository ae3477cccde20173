#include "holderlab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "holderlab/conjugacy.hpp"
#include "holderlab/holder.hpp"
#include "holderlab/takagi.hpp"
#include "holderlab/thermo.hpp"
#include "holderlab/transition.hpp"

#ifndef HOLDERLAB_VERSION
#define HOLDERLAB_VERSION "0.0.0"
#endif

namespace holderlab {

using nlohmann::json;

namespace {

const std::set<std::string> kCommands = {"eval-t", "eval-c", "spectrum", "pressure",
                                         "gap",    "exponent", "conjugacy", "report"};

/// Typed access to a params object that records defaults and rejects
/// leftovers.
class Params {
 public:
  Params(const json& given, std::string command) : given_(given), command_(std::move(command)) {
    if (!given_.is_object()) throw ConfigurationError("params must be an object");
  }

  double number(const std::string& key, double fallback) {
    double v = fallback;
    if (auto* g = lookup(key)) {
      if (!g->is_number()) throw ConfigurationError(where(key) + " must be a number");
      v = g->get<double>();
    }
    if (!std::isfinite(v)) throw ConfigurationError(where(key) + " must be finite");
    filled_[key] = v;
    return v;
  }

  double positive(const std::string& key, double fallback) {
    double v = number(key, fallback);
    if (!(v > 0)) throw ConfigurationError(where(key) + " must be > 0");
    return v;
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min_value = 1) {
    std::size_t v = fallback;
    if (auto* g = lookup(key)) {
      if (!g->is_number_integer() || g->get<long long>() < 0)
        throw ConfigurationError(where(key) + " must be a nonnegative integer");
      v = g->get<std::size_t>();
    }
    if (v < min_value) throw ConfigurationError(where(key) + " must be at least " + std::to_string(min_value));
    filled_[key] = v;
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    bool v = fallback;
    if (auto* g = lookup(key)) {
      if (!g->is_boolean()) throw ConfigurationError(where(key) + " must be true or false");
      v = g->get<bool>();
    }
    filled_[key] = v;
    return v;
  }

  std::string choice(const std::string& key, const std::string& fallback, const std::set<std::string>& allowed) {
    std::string v = fallback;
    if (auto* g = lookup(key)) {
      if (!g->is_string()) throw ConfigurationError(where(key) + " must be a string");
      v = g->get<std::string>();
    }
    if (!allowed.count(v)) throw ConfigurationError(where(key) + " has unsupported value '" + v + "'");
    filled_[key] = v;
    return v;
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
    std::vector<double> v = fallback;
    if (auto* g = lookup(key)) {
      if (!g->is_array()) throw ConfigurationError(where(key) + " must be an array of numbers");
      v.clear();
      for (const auto& e : *g) {
        if (!e.is_number()) throw ConfigurationError(where(key) + " must be an array of numbers");
        v.push_back(e.get<double>());
      }
    }
    filled_[key] = v;
    return v;
  }

  MultiIndex index(const std::string& key, const MultiIndex& fallback, std::size_t dims) {
    MultiIndex v = fallback;
    if (auto* g = lookup(key)) {
      if (!g->is_array()) throw ConfigurationError(where(key) + " must be an array of nonnegative integers");
      v.clear();
      for (const auto& e : *g) {
        if (!e.is_number_integer() || e.get<long long>() < 0)
          throw ConfigurationError(where(key) + " must be an array of nonnegative integers");
        v.push_back(e.get<unsigned>());
      }
    }
    if (!v.empty() && v.size() != dims)
      throw ConfigurationError(where(key) + " must have one entry per free probability");
    filled_[key] = v;
    return v;
  }

  /// Throws on keys that no accessor asked for.
  json finish() const {
    for (const auto& item : given_.items())
      if (!filled_.contains(item.key())) throw ConfigurationError("unknown key '" + item.key() + "' in params");
    return filled_;
  }

 private:
  const json* lookup(const std::string& key) const {
    auto it = given_.find(key);
    return it == given_.end() ? nullptr : &*it;
  }
  std::string where(const std::string& key) const { return "params." + key + " (" + command_ + ")"; }

  const json& given_;
  std::string command_;
  json filled_ = json::object();
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json summary_json(const AlphaEndpoints& e) {
  return {{"alpha_minus", e.alpha_minus},
          {"alpha_plus", e.alpha_plus},
          {"alpha_zero", e.alpha_zero},
          {"delta", e.delta},
          {"rigidity", e.alpha_plus - e.alpha_minus <= 1e-9}};
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k)
    v[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return v;
}

/// Fills defaults for the command; used both for validation and for the cache key.
json normalize_params(const std::string& command, const json& given, const SystemSpec& spec) {
  Params p(given, command);
  const std::size_t s = spec.system.free_count();
  if (command == "eval-t") {
    p.count("grid_cells", 4096, 2);
    p.number("margin", 0.25);
    p.positive("tol", 1e-12);
  } else if (command == "eval-c") {
    MultiIndex e1(s, 0);
    e1[0] = 1;
    p.index("n", e1, s);
    p.count("grid_cells", 4096, 2);
    p.number("margin", 0.25);
    p.choice("method", "series", {"series", "pointwise"});
    p.count("depth", 64, 1);
    p.count("max_terms", 400, 1);
  } else if (command == "spectrum") {
    p.count("alpha_points", 101, 2);
    p.numbers("alpha_grid", {});
  } else if (command == "pressure") {
    p.number("beta_min", -10.0);
    p.number("beta_max", 10.0);
    p.count("beta_points", 201, 2);
  } else if (command == "gap") {
    p.positive("alpha", 0.6);
    p.count("n_max", 60, 4);
    p.count("grid_cells", 8192, 2);
  } else if (command == "exponent") {
    p.numbers("betas", {-2, -1, 0, 1, 2, 3, 4});
    p.count("word_len", 2000, 2);
    p.count("count", 200, 1);
    p.flag("empirical", false);
    p.index("n", {}, s);
    p.count("emp_count", 10, 1);
    p.count("emp_scales", 12, 8);
  } else if (command == "conjugacy") {
    p.count("samples", 1000, 1);
  } else if (command == "report") {
    p.positive("tol", 1e-9);
  }
  return p.finish();
}

CsvTable grid_table(const std::vector<double>& x, const std::vector<double>& v) {
  CsvTable t({"x", "value"});
  for (std::size_t k = 0; k < x.size(); ++k) t.add_row({x[k], v[k]});
  return t;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json key_document(const RunConfig& c) {
  return {{"version", HOLDERLAB_VERSION}, {"system", system_to_json(c.spec)}, {"command", c.command},
          {"params", c.params},           {"seed", c.seed},                  {"mode", mode_name(c.spec.mode)}};
}

std::uint64_t files_checksum(const FileSet& files) {
  std::string all;
  for (const auto& [name, bytes] : files) {
    all += name;
    all.push_back('\0');
    all += bytes;
    all.push_back('\0');
  }
  return fnv1a(all);
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string cache_key(const RunConfig& config) { return hex64(fnv1a(key_document(config).dump())); }

RunConfig load_config(const json& doc, const CliOverrides& overrides) {
  if (!doc.is_object()) throw ConfigurationError("config must be a JSON object");
  for (const auto& item : doc.items())
    if (!std::set<std::string>{"system", "command", "params", "output_dir", "seed"}.count(item.key()))
      throw ConfigurationError("unknown key '" + item.key() + "' in config");
  if (!doc.contains("system") || !doc.contains("command"))
    throw ConfigurationError("config needs 'system' and 'command'");
  RunConfig c;
  c.spec = parse_system(doc.at("system"));
  if (!doc.at("command").is_string()) throw ConfigurationError("command must be a string");
  c.command = doc.at("command").get<std::string>();
  if (!kCommands.count(c.command)) throw ConfigurationError("unknown command '" + c.command + "'");
  if (overrides.mode) c.spec.mode = *overrides.mode;
  c.params = normalize_params(c.command, doc.value("params", json::object()), c.spec);

  if (overrides.out) c.output_dir = *overrides.out;
  else if (doc.contains("output_dir")) c.output_dir = doc.at("output_dir").get<std::string>();
  else c.output_dir = "out";
  if (overrides.seed) c.seed = *overrides.seed;
  else if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigurationError("seed must be a nonnegative integer");
    c.seed = doc.at("seed").get<std::uint64_t>();
  }
  c.threads = std::max<std::size_t>(1, overrides.threads);
  if (const char* env = std::getenv("HOLDERLAB_CACHE"); env && *env) c.cache_dir = env;
  else c.cache_dir = c.output_dir / ".cache";
  return c;
}

FileSet execute(const RunConfig& c) {
  const IFSystem& sys = c.spec.system;
  const ProbVector& p = c.spec.p;
  const json& q = c.params;
  FileSet files;

  if (c.command == "eval-t") {
    auto nodes = hull_grid(sys, q["grid_cells"].get<std::size_t>(), q["margin"].get<double>());
    const double tol = q["tol"].get<double>();
    std::vector<double> values(nodes.size());
    if (c.spec.mode == NumericMode::Rational) {
      const Rational rtol = to_rational(tol);
      for (std::size_t k = 0; k < nodes.size(); ++k)
        values[k] = to_double(eval_T_exact(sys, p, to_rational(nodes[k]), rtol).value);
    } else {
      for (std::size_t k = 0; k < nodes.size(); ++k) values[k] = eval_T(sys, p, nodes[k], tol).value;
    }
    files["T.csv"] = grid_table(nodes, values).str();
  } else if (c.command == "eval-c") {
    MultiIndex n = q["n"].get<MultiIndex>();
    auto nodes = hull_grid(sys, q["grid_cells"].get<std::size_t>(), q["margin"].get<double>());
    CsvTable t({"x", "C_value", "err_bound"});
    if (q["method"] == "series") {
      TakagiSeries series = eval_C_series(sys, p, n, nodes, q["max_terms"].get<std::size_t>());
      const SeriesLevel& level = series.at(n);
      if (level.inconclusive) throw NumericError("eval-c: Neumann series terms are not decaying");
      for (std::size_t k = 0; k < nodes.size(); ++k)
        t.add_row({nodes[k], level.values.values()[k], level.error_bound()});
    } else {
      TakagiEvaluator ev(sys, p, n);
      const std::size_t depth = q["depth"].get<std::size_t>();
      for (double x : nodes) {
        CValue v = ev(x, depth);
        t.add_row({x, v.value, v.err_bound});
      }
    }
    files["C.csv"] = t.str();
  } else if (c.command == "spectrum") {
    AlphaEndpoints ends = alpha_endpoints(sys, p);
    std::vector<double> grid = q["alpha_grid"].get<std::vector<double>>();
    if (grid.empty()) {
      grid = ends.alpha_plus - ends.alpha_minus <= 1e-9
                 ? std::vector<double>{ends.alpha_minus}
                 : linspace(ends.alpha_minus, ends.alpha_plus, q["alpha_points"].get<std::size_t>());
    }
    CsvTable t({"alpha", "g", "beta_argmin"});
    const double nan = std::nan("");
    for (double a : grid) {
      SpectrumPoint sp = spectrum_point(sys, p, a, ends);
      t.add_row({sp.alpha, sp.g.value_or(nan), sp.beta_argmin.value_or(nan)});
    }
    files["spectrum.csv"] = t.str();
    files["summary.json"] = dump(summary_json(ends));
  } else if (c.command == "pressure") {
    auto betas = linspace(q["beta_min"].get<double>(), q["beta_max"].get<double>(),
                          q["beta_points"].get<std::size_t>());
    CsvTable t({"beta", "t", "t_prime"});
    for (const auto& s : pressure_curve(sys, p, betas)) t.add_row({s.beta, s.t, s.t_prime});
    files["pressure.csv"] = t.str();
    files["summary.json"] = dump(summary_json(alpha_endpoints(sys, p)));
  } else if (c.command == "gap") {
    const double alpha = q["alpha"].get<double>();
    const std::size_t n_max = q["n_max"].get<std::size_t>();
    const std::size_t cells = q["grid_cells"].get<std::size_t>();
    GapProbeReport r = gap_probe(sys, p, alpha, n_max, cells);
    GridFunction ramp = GridFunction::sample(hull_grid(sys, cells), hull_ramp(sys), 0.0, 1.0);
    ConvergenceDiagnostics d = iterate_M(sys, p, ramp, n_max);
    CsvTable t({"n", "sup_residual", "holder_seminorm"});
    for (std::size_t n = 0; n <= n_max; ++n)
      t.add_row({static_cast<double>(n), r.sup_residuals[n], r.seminorms[n]});
    files["gap.csv"] = t.str();
    files["gap.json"] = dump({{"alpha", alpha},
                              {"slope", r.slope},
                              {"slope_stderr", r.slope_stderr},
                              {"verdict", to_string(r.verdict)},
                              {"iterate_rate", d.rate},
                              {"iterate_r_squared", d.r_squared},
                              {"iterate_floor", d.floor},
                              {"iterate_diverging", d.diverging}});
  } else if (c.command == "exponent") {
    ExperimentConfig e;
    e.word_len = q["word_len"].get<std::size_t>();
    e.count = q["count"].get<std::size_t>();
    e.seed = c.seed;
    e.threads = c.threads;
    e.empirical = q["empirical"].get<bool>();
    e.n = q["n"].get<MultiIndex>();
    e.emp_count = q["emp_count"].get<std::size_t>();
    e.emp_scales = q["emp_scales"].get<std::size_t>();
    auto rows = spectrum_experiment(sys, p, q["betas"].get<std::vector<double>>(), e);
    CsvTable t({"beta", "alpha_pred", "g", "dyn_mean", "dyn_sigma", "emp_mean", "emp_sigma", "count", "seed"});
    for (const auto& r : rows)
      t.add_row({r.beta, r.alpha_pred, r.g, r.dyn_mean, r.dyn_sigma, r.emp_mean, r.emp_sigma,
                 static_cast<double>(r.count), static_cast<double>(r.seed)});
    files["exponents.csv"] = t.str();
  } else if (c.command == "conjugacy") {
    ResidualReport r = conjugacy_residual(sys, p, q["samples"].get<std::size_t>(), c.seed, c.threads);
    files["conjugacy.json"] = dump({{"max_residual", r.max_residual}, {"samples", r.samples}, {"rejected", r.rejected}});
  } else if (c.command == "report") {
    RigidityReport r = rigidity_report(sys, p, q["tol"].get<double>(), c.seed, c.threads);
    files["rigidity.json"] = dump({{"alpha_minus", r.alpha_minus},
                                   {"alpha_plus", r.alpha_plus},
                                   {"delta", r.delta},
                                   {"max_conjugacy_residual", r.max_conjugacy_residual},
                                   {"verdict", r.verdict()},
                                   {"sweep_cells", r.sweep_cells},
                                   {"sweep_seminorms", r.sweep_seminorms},
                                   {"seminorm_bounded", r.seminorm_bounded}});
    files["summary.json"] = dump(summary_json(alpha_endpoints(sys, p)));
  }
  return files;
}

bool run(const RunConfig& config, std::ostream& log) {
  namespace fs = std::filesystem;
  const json key_doc = key_document(config);
  const std::string key = key_doc.dump();
  const fs::path entry = config.cache_dir / (hex64(fnv1a(key)) + ".json");

  FileSet files;
  bool hit = false;
  if (fs::exists(entry)) {
    try {
      json cached = json::parse(read_file(entry));
      FileSet stored = cached.at("files").get<FileSet>();
      if (cached.at("key").get<std::string>() == key &&
          cached.at("checksum").get<std::string>() == hex64(files_checksum(stored))) {
        files = std::move(stored);
        hit = true;
      }
    } catch (const json::exception&) {
    }
    if (!hit) log << "warning: corrupt cache entry " << entry.string() << ", recomputing\n";
  }
  if (!hit) {
    files = execute(config);
    json stored = {{"key", key}, {"files", files}, {"checksum", hex64(files_checksum(files))}};
    write_atomic(entry, stored.dump());
  }

  json outputs = json::array();
  for (const auto& [name, bytes] : files) {
    write_atomic(config.output_dir / name, bytes);
    outputs.push_back({{"file", name}, {"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}});
  }
  json manifest = key_doc;
  manifest["outputs"] = outputs;
  write_atomic(config.output_dir / "manifest.json", dump(manifest));
  log << (hit ? "cache hit " : "computed ") << config.command << " -> " << config.output_dir.string() << "\n";
  return hit;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"holderlab: Takagi-type functions, pressure and Hoelder spectra of expanding interval maps"};
  app.set_version_flag("--version", std::string(HOLDERLAB_VERSION));
  std::string config_path, out_dir, mode;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config seed)");
  auto* mode_opt = app.add_option("--mode", mode, "numeric mode")->check(CLI::IsMember({"float", "rational"}));
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    if (!std::filesystem::exists(config_path))
      throw ConfigurationError("config file not found: " + config_path);
    json doc;
    try {
      doc = json::parse(read_file(config_path));
    } catch (const json::parse_error& e) {
      throw ConfigurationError(std::string("config is not valid JSON: ") + e.what());
    }
    CliOverrides o;
    if (*out_opt) o.out = out_dir;
    if (*seed_opt) o.seed = seed;
    if (*mode_opt) o.mode = parse_mode(mode);
    o.threads = threads;
    RunConfig config = load_config(doc, o);
    run(config, err);
    return kSuccess;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  }
}

}  // namespace holderlab
