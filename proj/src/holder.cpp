#include "holderlab/holder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "holderlab/parallel.hpp"
#include "holderlab/stats.hpp"
#include "holderlab/thermo.hpp"

namespace holderlab {

namespace {

constexpr std::size_t kSuffixWindow = 48;

Word suffix(const Word& w, std::size_t from, std::size_t len) {
  std::size_t end = std::min(w.size(), from + len);
  return Word(w.begin() + static_cast<std::ptrdiff_t>(from), w.begin() + static_cast<std::ptrdiff_t>(end));
}

double potential_phi(const IFSystem& system, const Word& w, std::size_t k) {
  const Branch& b = system.branch(w[k]);
  if (b.is_affine()) return -std::log(b.slope_value());
  Interval c = cylinder(system, suffix(w, k, kSuffixWindow));
  return -std::log(b.derivative(c.mid()));
}

}  // namespace

ExponentTrace dyn_exponent(const IFSystem& system, const ProbVector& p, const Word& w) {
  if (w.size() < 2) throw std::invalid_argument("dyn_exponent: word length must be at least 2");
  ExponentTrace tr;
  tr.word = w;
  double sphi = 0.0, spsi = 0.0;
  const Interval o = system.open_set;
  for (std::size_t k = 0; k < w.size(); ++k) {
    sphi += potential_phi(system, w, k);
    spsi += std::log(p[w[k]]);
    tr.ratios.push_back(spsi / sphi);
    double y = cylinder(system, suffix(w, k + 1, kSuffixWindow)).mid();
    tr.boundary_distances.push_back(std::min(metric_d(y, o.lo), metric_d(y, o.hi)));
  }
  const std::size_t n = tr.ratios.size();
  tr.liminf = *std::min_element(tr.ratios.begin() + static_cast<std::ptrdiff_t>(n / 2), tr.ratios.end());
  return tr;
}

double periodic_point(const IFSystem& system, const Word& cycle) {
  if (cycle.empty()) throw std::invalid_argument("periodic_point: empty cycle");
  if (system.is_affine()) {
    InverseChain<Rational> exact(system);
    for (Symbol i : cycle) exact.push(i);
    return to_double(exact(Rational(0)) / (Rational(1) - exact.scale()));
  }
  InverseChain<double> chain(system);
  for (Symbol i : cycle) chain.push(i);
  double x = attractor_hull(system).mid();
  for (int it = 0; it < 400; ++it) {
    double next = chain(x);
    if (next == x) break;
    x = next;
  }
  return x;
}

double cycle_ratio(const IFSystem& system, const ProbVector& p, const Word& cycle) {
  double x = periodic_point(system, cycle);
  double sphi = 0.0, spsi = 0.0;
  for (Symbol i : cycle) {
    const Branch& b = system.branch(i);
    sphi += std::log(b.is_affine() ? b.slope_value() : b.derivative(x));
    spsi -= std::log(p[i]);
    x = b(x);
  }
  return spsi / sphi;
}

EmpiricalExponent emp_exponent(const Evaluator& c, double x, const std::vector<double>& scales) {
  if (scales.size() < 8) throw std::invalid_argument("emp_exponent: need at least 8 scales");
  for (std::size_t j = 0; j < scales.size(); ++j)
    if (!(scales[j] > 0) || (j > 0 && !(scales[j] < scales[j - 1])))
      throw std::invalid_argument("emp_exponent: scales must be positive and decreasing");
  EmpiricalExponent out;
  const CValue centre = c(x);
  const double rho = std::pow(2.0, -0.5);
  std::vector<double> lr, lo;
  for (double r : scales) {
    double osc = 0.0, err = 0.0;
    auto probe = [&](double y) {
      CValue v = c(y);
      osc = std::max(osc, std::abs(v.value - centre.value));
      err = std::max(err, v.err_bound);
    };
    double radius = r;
    for (int j = 0; j < 16; ++j, radius *= rho) {
      probe(x - radius);
      probe(x + radius);
    }
    for (int j = 1; j <= 16; ++j) {
      probe(x - r * j / 17.0);
      probe(x + r * j / 17.0);
    }
    if (!(osc > 4.0 * (err + centre.err_bound)) || osc == 0.0) {
      out.dropped_scales.push_back(r);
      continue;
    }
    out.scales.push_back(r);
    out.oscillations.push_back(osc);
    lr.push_back(std::log(r));
    lo.push_back(std::log(osc));
  }
  if (lr.size() < 2) {
    out.slope = out.min_ratio = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.slope = linear_fit(lr, lo).slope;
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < lr.size(); ++j)
    if (lr[j] < 0) out.min_ratio = std::min(out.min_ratio, lo[j] / lr[j]);
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return splitmix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

std::vector<TypicalSample> sample_typical(const IFSystem& system, const ProbVector& p, double beta,
                                          std::size_t word_len, std::size_t count, std::uint64_t seed,
                                          std::size_t threads) {
  if (!system.is_affine()) throw ConfigurationError("sample_typical: needs affine branches");
  if (word_len < 2) throw std::invalid_argument("sample_typical: word_len must be at least 2");
  GibbsWeights g = gibbs(system, p, beta);
  std::vector<double> cdf(g.q.size());
  std::partial_sum(g.q.begin(), g.q.end(), cdf.begin());
  cdf.back() = 1.0;
  const double predicted = -g.t_prime;
  std::vector<TypicalSample> out(count);
  parallel_for(count, threads, [&](std::size_t k) {
    CounterRng rng(seed, k);
    TypicalSample s;
    s.word.resize(word_len);
    double sphi = 0.0, spsi = 0.0;
    for (std::size_t j = 0; j < word_len; ++j) {
      double u = rng.uniform(j);
      Symbol i = static_cast<Symbol>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      i = std::min<Symbol>(i, system.last_symbol());
      s.word[j] = i;
      sphi -= std::log(system.branch(i).slope_value());
      spsi += std::log(p[i]);
    }
    s.x = pi_approx(system, s.word).point;
    s.predicted_alpha = predicted;
    s.dyn_ratio = spsi / sphi;
    out[k] = std::move(s);
  });
  return out;
}

std::vector<SpectrumRow> spectrum_experiment(const IFSystem& system, const ProbVector& p,
                                             const std::vector<double>& betas, const ExperimentConfig& config) {
  std::vector<SpectrumRow> rows;
  std::optional<TakagiEvaluator> takagi;
  if (config.empirical && !config.n.empty() && !is_zero(config.n)) takagi.emplace(system, p, config.n);
  const double lambda = system.lambda > 1 ? system.lambda : 2.0;
  for (std::size_t b = 0; b < betas.size(); ++b) {
    SpectrumRow row;
    row.beta = betas[b];
    GibbsWeights g = gibbs(system, p, row.beta);
    row.alpha_pred = -g.t_prime;
    row.g = g.t + row.beta * row.alpha_pred;
    row.seed = config.seed;
    // One independent stream family per beta row.
    const std::uint64_t row_seed = CounterRng(config.seed, b).bits(0);
    auto samples = sample_typical(system, p, row.beta, config.word_len, config.count, row_seed, config.threads);
    std::vector<double> dyn;
    for (const auto& s : samples) dyn.push_back(s.dyn_ratio);
    Moments m = moments(dyn);
    row.dyn_mean = m.mean;
    row.dyn_sigma = m.stddev;
    row.count = m.count;
    row.emp_mean = row.emp_sigma = std::numeric_limits<double>::quiet_NaN();
    if (config.empirical) {
      std::vector<double> scales;
      for (std::size_t j = 0; j < config.emp_scales; ++j) scales.push_back(std::pow(lambda, -4.0 - static_cast<double>(j)));
      Evaluator ev = [&](double x) -> CValue {
        if (takagi) return (*takagi)(x);
        auto t = eval_T(system, p, x, 1e-18);
        return {t.value, t.err_bound};
      };
      const std::size_t n_emp = std::min(config.emp_count, samples.size());
      std::vector<double> emp(n_emp, std::numeric_limits<double>::quiet_NaN());
      parallel_for(n_emp, config.threads, [&](std::size_t k) { emp[k] = emp_exponent(ev, samples[k].x, scales).slope; });
      std::vector<double> finite;
      for (double e : emp)
        if (std::isfinite(e)) finite.push_back(e);
      if (!finite.empty()) {
        Moments me = moments(finite);
        row.emp_mean = me.mean;
        row.emp_sigma = me.stddev;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace holderlab
