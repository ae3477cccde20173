#include "holderlab/thermo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

namespace holderlab {

namespace {

double logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

struct AffineData {
  std::vector<double> log_a;
  std::vector<double> log_p;
};

AffineData affine_data(const IFSystem& system, const ProbVector& p) {
  AffineData d;
  for (Symbol i = 0; i < system.size(); ++i) {
    d.log_a.push_back(std::log(system.branch(i).slope_value()));
    d.log_p.push_back(std::log(p[i]));
  }
  return d;
}

std::size_t capped_level(std::size_t level, std::size_t alphabet) {
  std::size_t n = std::clamp<std::size_t>(level, 1, 18);
  while (n > 1 && std::pow(static_cast<double>(alphabet), static_cast<double>(n)) > 262144.0) --n;
  return n;
}

/// Depth-n cylinder sums for custom branches. For every word the ergodic sum
/// S_n phi is bracketed by samples at the cylinder ends and a middle point.
struct CylinderSums {
  std::vector<double> lower;     // beta S psi + inf t S phi
  std::vector<double> upper;
  std::vector<Symbol> first;     // leading symbol of each word
};

CylinderSums cylinder_sums(const IFSystem& system, const ProbVector& p, double t, double beta,
                           std::size_t n) {
  const Interval hull = attractor_hull(system);
  CylinderSums out;
  // Words are grown by prepending: cylinder(i w) = f_i^{-1}(cylinder(w)) and
  // log f'_{i w}(x) = log f_i'(x) + log f'_w(f_i x).
  struct Sample {
    double x;
    double log_deriv;
  };
  std::function<void(std::size_t, const std::array<Sample, 3>&, double, Symbol)> rec;
  rec = [&](std::size_t depth, const std::array<Sample, 3>& s, double spsi, Symbol lead) {
    if (depth == n) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& sm : s) {
        double v = beta * spsi - t * sm.log_deriv;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      out.lower.push_back(lo);
      out.upper.push_back(hi);
      out.first.push_back(lead);
      return;
    }
    for (Symbol i = 0; i < system.size(); ++i) {
      const Branch& b = system.branch(i);
      std::array<Sample, 3> next;
      for (std::size_t k = 0; k < 3; ++k) {
        double x = b.inverse(s[k].x);
        next[k] = {x, s[k].log_deriv + std::log(b.derivative(x))};
      }
      rec(depth + 1, next, spsi + std::log(p[i]), i);
    }
  };
  rec(0, {Sample{hull.lo, 0.0}, Sample{hull.mid(), 0.0}, Sample{hull.hi, 0.0}}, 0.0, 0);
  return out;
}

}  // namespace

PressureBounds pressure(const IFSystem& system, const ProbVector& p, double t, double beta,
                        std::size_t level) {
  if (system.is_affine()) {
    AffineData d = affine_data(system, p);
    std::vector<double> e(d.log_a.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = beta * d.log_p[i] - t * d.log_a[i];
    double v = logsumexp(e);
    return {v, v};
  }
  const std::size_t n = capped_level(level, system.size());
  CylinderSums cs = cylinder_sums(system, p, t, beta, n);
  const double inv = 1.0 / static_cast<double>(n);
  return {inv * logsumexp(cs.lower), inv * logsumexp(cs.upper)};
}

namespace {

double solve_t_impl(const std::function<double(double)>& P, const std::function<double(double)>& dP,
                    double tol) {
  double lo = -10.0, hi = 10.0;
  int doublings = 0;
  while (!(P(lo) > 0.0 && P(hi) < 0.0)) {
    if (++doublings > 60) throw NumericError("solve_t: bracket expansion failed");
    lo *= 2.0;
    hi *= 2.0;
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    double v = P(mid);
    if (std::abs(v) <= tol && !dP) return mid;
    if (v > 0) lo = mid;
    else hi = mid;
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) break;
  }
  if (dP) {
    // Newton polish from the bisection point; keeps t(1) = 0 to rounding.
    for (int it = 0; it < 4; ++it) {
      double v = P(mid);
      if (v == 0.0) break;
      double step = v / dP(mid);
      if (!std::isfinite(step)) break;
      mid -= step;
    }
  }
  return mid;
}

}  // namespace

double solve_t(const IFSystem& system, const ProbVector& p, double beta, double tol, std::size_t level) {
  if (!(tol > 0)) throw std::invalid_argument("solve_t: tol must be positive");
  if (system.is_affine()) {
    AffineData d = affine_data(system, p);
    std::vector<double> e(d.log_a.size());
    auto weights = [&](double t) {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = beta * d.log_p[i] - t * d.log_a[i];
    };
    auto P = [&](double t) {
      weights(t);
      return logsumexp(e);
    };
    auto dP = [&](double t) {
      weights(t);
      double z = logsumexp(e), acc = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) acc -= std::exp(e[i] - z) * d.log_a[i];
      return acc;
    };
    return solve_t_impl(P, dP, tol);
  }
  auto P = [&](double t) { return pressure(system, p, t, beta, level).mid(); };
  return solve_t_impl(P, nullptr, tol);
}

GibbsWeights gibbs(const IFSystem& system, const ProbVector& p, double beta, std::size_t level) {
  GibbsWeights g;
  g.t = solve_t(system, p, beta, 1e-15, level);
  if (system.is_affine()) {
    AffineData d = affine_data(system, p);
    std::vector<double> e(d.log_a.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = beta * d.log_p[i] - g.t * d.log_a[i];
    double z = logsumexp(e);
    g.q.resize(e.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      g.q[i] = std::exp(e[i] - z);
      num += g.q[i] * d.log_p[i];
      den += g.q[i] * d.log_a[i];
    }
    g.t_prime = num / den;
    double var = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      double zi = d.log_p[i] - g.t_prime * d.log_a[i];
      var += g.q[i] * zi * zi;
    }
    g.t_second = var / den;
    return g;
  }
  const double h = 1e-4;
  g.t_prime = (solve_t(system, p, beta + h, 1e-15, level) - solve_t(system, p, beta - h, 1e-15, level)) / (2 * h);
  g.t_second = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = capped_level(level, system.size());
  CylinderSums cs = cylinder_sums(system, p, g.t, beta, n);
  std::vector<double> mids(cs.lower.size());
  for (std::size_t k = 0; k < mids.size(); ++k) mids[k] = 0.5 * (cs.lower[k] + cs.upper[k]);
  double z = logsumexp(mids);
  g.q.assign(system.size(), 0.0);
  for (std::size_t k = 0; k < mids.size(); ++k) g.q[cs.first[k]] += std::exp(mids[k] - z);
  return g;
}

double moran_dimension(const std::vector<double>& slopes) {
  if (slopes.size() <= 1) return 0.0;
  std::vector<double> la;
  for (double a : slopes) la.push_back(std::log(a));
  std::vector<double> e(la.size());
  auto P = [&](double t) {
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = -t * la[i];
    return logsumexp(e);
  };
  auto dP = [&](double t) {
    double z = P(t), acc = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) acc -= std::exp(e[i] - z) * la[i];
    return acc;
  };
  return solve_t_impl(P, dP, 1e-15);
}

AlphaEndpoints alpha_endpoints(const IFSystem& system, const ProbVector& p) {
  AlphaEndpoints out;
  const std::size_t level = 10;
  out.delta = solve_t(system, p, 0.0, 1e-15, level);
  out.alpha_zero = -gibbs(system, p, 0.0, level).t_prime;
  out.surrogate_minus = -gibbs(system, p, 50.0, level).t_prime;
  out.surrogate_plus = -gibbs(system, p, -50.0, level).t_prime;
  out.minus_uncertainty = std::abs(out.surrogate_minus + gibbs(system, p, 100.0, level).t_prime);
  out.plus_uncertainty = std::abs(out.surrogate_plus + gibbs(system, p, -100.0, level).t_prime);
  if (system.is_affine()) {
    // Bernoulli weights concentrate on the extremal per-symbol ratios.
    out.closed_form = true;
    out.alpha_minus = std::numeric_limits<double>::infinity();
    out.alpha_plus = -out.alpha_minus;
    for (Symbol i = 0; i < system.size(); ++i) {
      double r = -std::log(p[i]) / std::log(system.branch(i).slope_value());
      out.alpha_minus = std::min(out.alpha_minus, r);
      out.alpha_plus = std::max(out.alpha_plus, r);
    }
  } else {
    out.alpha_minus = out.surrogate_minus;
    out.alpha_plus = out.surrogate_plus;
  }
  return out;
}

std::vector<PressureSample> pressure_curve(const IFSystem& system, const ProbVector& p,
                                           const std::vector<double>& betas) {
  std::vector<PressureSample> out;
  for (double b : betas) {
    GibbsWeights g = gibbs(system, p, b);
    out.push_back({b, g.t, g.t_prime});
  }
  return out;
}

SpectrumPoint spectrum_point(const IFSystem& system, const ProbVector& p, double alpha,
                             const AlphaEndpoints& ends, double tol) {
  SpectrumPoint sp;
  sp.alpha = alpha;
  if (alpha < ends.alpha_minus - tol || alpha > ends.alpha_plus + tol) return sp;
  const double inf = std::numeric_limits<double>::infinity();
  if (ends.alpha_plus - ends.alpha_minus <= tol) {
    sp.g = ends.delta;
    sp.beta_argmin = 0.0;
    return sp;
  }
  const bool at_minus = std::abs(alpha - ends.alpha_minus) <= tol;
  const bool at_plus = std::abs(alpha - ends.alpha_plus) <= tol;
  if (at_minus || at_plus) {
    sp.beta_argmin = at_minus ? inf : -inf;
    if (system.is_affine()) {
      std::vector<double> slopes;
      for (Symbol i = 0; i < system.size(); ++i) {
        double a = system.branch(i).slope_value();
        double r = -std::log(p[i]) / std::log(a);
        if (std::abs(r - alpha) <= tol) slopes.push_back(a);
      }
      sp.g = moran_dimension(slopes);
    } else {
      double b = at_minus ? 100.0 : -100.0;
      sp.g = solve_t(system, p, b) + b * alpha;
    }
    return sp;
  }

  // t' is increasing; find beta with t'(beta) = -alpha.
  auto F = [&](double b) { return gibbs(system, p, b).t_prime + alpha; };
  double lo = -60.0, hi = 60.0;
  while (F(lo) > 0 && lo > -1e4) lo *= 2;
  while (F(hi) < 0 && hi < 1e4) hi *= 2;
  double beta = 0.0;
  bool solved = false;
  if (F(lo) <= 0 && F(hi) >= 0) {
    for (int it = 0; it < 200; ++it) {
      GibbsWeights g = gibbs(system, p, beta);
      double f = g.t_prime + alpha;
      if (std::abs(f) <= 1e-15) {
        solved = true;
        break;
      }
      if (f > 0) hi = beta;
      else lo = beta;
      double next = std::isfinite(g.t_second) && g.t_second > 0 ? beta - f / g.t_second : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - beta) <= 1e-15 * std::max(1.0, std::abs(beta))) {
        beta = next;
        solved = true;
        break;
      }
      beta = next;
    }
  }
  if (!solved) {
    // Golden-section on the convex objective over the bracket.
    auto obj = [&](double b) { return solve_t(system, p, b) + b * alpha; };
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, c = hi;
    double x1 = c - phi * (c - a), x2 = a + phi * (c - a);
    double f1 = obj(x1), f2 = obj(x2);
    for (int it = 0; it < 200 && c - a > 1e-12; ++it) {
      if (f1 <= f2) {
        c = x2;
        x2 = x1;
        f2 = f1;
        x1 = c - phi * (c - a);
        f1 = obj(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (c - a);
        f2 = obj(x2);
      }
    }
    beta = 0.5 * (a + c);
  }
  sp.beta_argmin = beta;
  sp.g = solve_t(system, p, beta) + beta * alpha;
  return sp;
}

std::vector<SpectrumPoint> spectrum(const IFSystem& system, const ProbVector& p,
                                    const std::vector<double>& alpha_grid) {
  AlphaEndpoints ends = alpha_endpoints(system, p);
  std::vector<SpectrumPoint> out;
  for (double a : alpha_grid) out.push_back(spectrum_point(system, p, a, ends));
  return out;
}

}  // namespace holderlab
