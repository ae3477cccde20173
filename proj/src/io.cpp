#include "holderlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace holderlab {

namespace {

Rational number_from(const nlohmann::json& v, const char* what) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number()) return to_rational(v.get<double>());
  throw ConfigurationError(std::string("expected a number for ") + what);
}

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const char* where) {
  if (!obj.is_object()) throw ConfigurationError(std::string(where) + " must be an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw ConfigurationError("unknown key '" + item.key() + "' in " + where);
}

std::string rational_string(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

}  // namespace

std::string mode_name(NumericMode mode) { return mode == NumericMode::Float ? "float" : "rational"; }

NumericMode parse_mode(const std::string& name) {
  if (name == "float") return NumericMode::Float;
  if (name == "rational") return NumericMode::Rational;
  throw ConfigurationError("mode must be 'float' or 'rational', got '" + name + "'");
}

SystemSpec parse_system(const nlohmann::json& doc) {
  reject_unknown(doc, {"branches", "open_set", "p", "mode"}, "system");
  if (!doc.contains("branches") || !doc.contains("open_set") || !doc.contains("p"))
    throw ConfigurationError("system needs 'branches', 'open_set' and 'p'");

  SystemSpec spec;
  for (const auto& b : doc.at("branches")) {
    reject_unknown(b, {"slope", "intercept"}, "branch");
    if (!b.contains("slope") || !b.contains("intercept"))
      throw ConfigurationError("branch needs 'slope' and 'intercept'");
    spec.system.branches.push_back(
        Branch::affine(number_from(b.at("slope"), "slope"), number_from(b.at("intercept"), "intercept")));
  }
  const auto& o = doc.at("open_set");
  if (!o.is_array() || o.size() != 2) throw ConfigurationError("open_set must be [lo, hi]");
  spec.system.open_set = {to_double(number_from(o[0], "open_set")), to_double(number_from(o[1], "open_set"))};

  std::vector<Rational> free;
  for (const auto& v : doc.at("p")) free.push_back(number_from(v, "p"));
  if (free.size() + 1 != spec.system.size())
    throw ConfigurationError("'p' must list s = (branches - 1) free probabilities");
  spec.p = ProbVector::from_free(std::move(free));
  if (doc.contains("mode")) spec.mode = parse_mode(doc.at("mode").get<std::string>());
  spec.system = validated(std::move(spec.system), spec.p);
  return spec;
}

nlohmann::json system_to_json(const SystemSpec& spec) {
  nlohmann::json doc;
  doc["branches"] = nlohmann::json::array();
  for (const auto& b : spec.system.branches) {
    const auto& m = b.affine_map();
    doc["branches"].push_back({{"slope", rational_string(m.slope)}, {"intercept", rational_string(m.intercept)}});
  }
  doc["open_set"] = {format_number(spec.system.open_set.lo), format_number(spec.system.open_set.hi)};
  doc["p"] = nlohmann::json::array();
  for (Symbol i = 0; i + 1 < spec.p.size(); ++i) doc["p"].push_back(rational_string(spec.p.exact(i)));
  doc["mode"] = mode_name(spec.mode);
  return doc;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void CsvTable::add_row(const std::vector<double>& row) {
  if (row.size() != headers_.size()) throw std::invalid_argument("csv row width mismatch");
  rows_.push_back(row);
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < headers_.size(); ++i) out += (i ? "," : "") + headers_[i];
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace holderlab
