#include "holderlab/transition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "holderlab/stats.hpp"

namespace holderlab {

GridFunction::GridFunction(std::vector<double> nodes, std::vector<double> values, double left,
                           double right)
    : nodes_(std::move(nodes)), values_(std::move(values)), left_(left), right_(right) {
  if (nodes_.size() != values_.size() || nodes_.empty())
    throw std::invalid_argument("GridFunction: nodes and values must be non-empty and paired");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i - 1] < nodes_[i]))
      throw std::invalid_argument("GridFunction: nodes must be strictly increasing");
}

GridFunction GridFunction::sample(std::vector<double> nodes, const std::function<double(double)>& f,
                                  double left, double right) {
  std::vector<double> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = f(nodes[i]);
  return GridFunction(std::move(nodes), std::move(values), left, right);
}

GridFunction::Lookup GridFunction::lookup(double x) const {
  if (x < nodes_.front()) return {left_, std::abs(left_ - values_.front())};
  if (x > nodes_.back()) return {right_, std::abs(right_ - values_.back())};
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
  std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
  if (nodes_[j] == x) return {values_[j], 0.0};
  double x0 = nodes_[j - 1], x1 = nodes_[j];
  double v0 = values_[j - 1], v1 = values_[j];
  double t = (x - x0) / (x1 - x0);
  return {v0 + t * (v1 - v0), std::abs(v1 - v0)};
}

double GridFunction::sup_norm() const {
  double m = std::max(std::abs(left_), std::abs(right_));
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
  if (count < 2 || !(lo < hi)) throw std::invalid_argument("uniform_grid: need lo < hi and count >= 2");
  std::vector<double> out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
  out.back() = hi;
  return out;
}

std::vector<double> hull_grid(const IFSystem& system, std::size_t cells, double margin_fraction) {
  if (cells == 0) throw std::invalid_argument("hull_grid: cells must be positive");
  Interval hull = attractor_hull(system);
  const double step = hull.width() / static_cast<double>(cells);
  const auto margin = static_cast<long>(std::ceil(margin_fraction * static_cast<double>(cells)));
  const long total = static_cast<long>(cells);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(total + 2 * margin + 1));
  for (long j = -margin; j <= total + margin; ++j) {
    if (j == 0) out.push_back(hull.lo);
    else if (j == total) out.push_back(hull.hi);
    else out.push_back(hull.lo + static_cast<double>(j) * step);
  }
  return out;
}

AppliedGrid apply_M(const IFSystem& system, const ProbVector& p, const GridFunction& h) {
  const Symbol last = system.last_symbol();
  std::vector<double> out(h.size());
  double bound = 0.0;
  std::vector<GridFunction::Lookup> parts(system.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double x = h.nodes()[k];
    for (Symbol i = 0; i <= last; ++i) parts[i] = h.lookup(system.branch(i)(x));
    double v = parts[last].value;
    double err = p[last] * parts[last].error;
    for (Symbol i = 0; i < last; ++i) {
      v += p[i] * (parts[i].value - parts[last].value);
      err += p[i] * parts[i].error;
    }
    out[k] = v;
    bound = std::max(bound, err);
  }
  return {GridFunction(h.nodes(), std::move(out), h.boundary_left(), h.boundary_right()), bound};
}

namespace {

template <class S>
TValue<S> eval_T_impl(const IFSystem& system, const ProbVector& p, const BasicInterval<S>& hull,
                      const S& x, const S& tol) {
  using Ops = ScalarOps<S>;
  if (!(tol > 0)) throw std::invalid_argument("eval_T: tol must be positive");
  if (x <= hull.lo) return {S(0), S(0)};
  if (x >= hull.hi) return {S(1), S(0)};
  CodingWalker<S> walker(system, hull, x);
  S partial(0);
  S mass(1);
  while (mass > tol) {
    switch (walker.location()) {
      case Location::LeftEndpoint:
        return {partial, S(0)};
      case Location::RightEndpoint:
        return {partial + mass, S(0)};
      default:
        break;
    }
    if (!walker.advance()) {
      Symbol below = walker.gap_after().value_or(0);
      S left = Ops::left(p, below) + Ops::prob(p, below);
      return {partial + mass * left, S(0)};
    }
    Symbol i = walker.word().back();
    partial += mass * Ops::left(p, i);
    mass *= Ops::prob(p, i);
  }
  return {partial, mass};
}

}  // namespace

TValue<double> eval_T(const IFSystem& system, const ProbVector& p, double x, double tol) {
  return eval_T_impl<double>(system, p, attractor_hull(system), x, tol);
}

TValue<Rational> eval_T_exact(const IFSystem& system, const ProbVector& p, const Rational& x,
                              const Rational& tol) {
  if (!system.is_affine()) throw ConfigurationError("eval_T_exact: rational mode needs affine branches");
  return eval_T_impl<Rational>(system, p, attractor_hull_exact(system), x, tol);
}

GridFunction T_grid(const IFSystem& system, const ProbVector& p, std::vector<double> nodes, double tol) {
  Interval hull = attractor_hull(system);
  std::vector<double> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    values[i] = eval_T_impl<double>(system, p, hull, nodes[i], tol).value;
  return GridFunction(std::move(nodes), std::move(values), 0.0, 1.0);
}

ConvergenceDiagnostics iterate_M(const IFSystem& system, const ProbVector& p, const GridFunction& h0,
                                 std::size_t n_max) {
  const double L = h0.boundary_left(), R = h0.boundary_right();
  GridFunction limit = T_grid(system, p, h0.nodes(), 1e-17);
  for (double& v : limit.values()) v = L + (R - L) * v;

  ConvergenceDiagnostics diag;
  GridFunction h = h0;
  auto residual = [&](const GridFunction& g) {
    double r = 0;
    for (std::size_t k = 0; k < g.size(); ++k) r = std::max(r, std::abs(g.values()[k] - limit.values()[k]));
    return r;
  };
  diag.residuals.push_back(residual(h));
  for (std::size_t n = 1; n <= n_max; ++n) {
    h = apply_M(system, p, h).h;
    diag.residuals.push_back(residual(h));
  }

  // Residuals below a few hundred ulps of the data are rounding, not signal.
  const double scale = std::max({std::abs(L), std::abs(R), limit.sup_norm(), 1.0});
  const double noise = 256 * std::numeric_limits<double>::epsilon() * scale;
  // The grid stops resolving M^n once a depth-n cylinder holds fewer than 8
  // nodes; past that horizon the residual is a subsampled sup, not the rate.
  const Interval hull = attractor_hull(system);
  std::size_t inside = 0;
  for (double x : h0.nodes()) inside += hull.contains(x) ? 1 : 0;
  double max_slope = 1.0;
  for (const auto& b : system.branches)
    for (double x : {hull.lo, hull.mid(), hull.hi}) max_slope = std::max(max_slope, b.derivative(b.inverse(x)));
  const double horizon = std::log(std::max(1.0, (static_cast<double>(inside) - 1.0) / 8.0)) / std::log(max_slope);
  const std::size_t last = std::min(diag.residuals.size() - 1, static_cast<std::size_t>(std::max(1.0, std::floor(horizon))));
  diag.fit_begin = std::min<std::size_t>(1, diag.residuals.size() - 1);
  diag.fit_end = diag.fit_begin;
  while (diag.fit_end <= last && diag.residuals[diag.fit_end] > noise) ++diag.fit_end;
  diag.floor = diag.residuals.back();

  std::vector<double> xs, ys;
  for (std::size_t n = diag.fit_begin; n < diag.fit_end; ++n) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log(diag.residuals[n]));
  }
  if (xs.size() >= 2) {
    LinearFit fit = linear_fit(xs, ys);
    diag.rate = std::exp(fit.slope);
    diag.r_squared = fit.r_squared;
  } else {
    diag.rate = 0.0;
    diag.r_squared = 1.0;
  }
  const double first = diag.residuals.front(), end = diag.residuals.back();
  diag.diverging = !std::isfinite(end) || (end > noise && end > first && diag.rate > 1.0);
  return diag;
}

namespace {

double compact(double x) { return x / (1.0 + std::abs(x)); }

}  // namespace

double holder_seminorm(const GridFunction& h, double alpha, SeminormMode mode) {
  const auto& xs = h.nodes();
  const auto& vs = h.values();
  const std::size_t n = xs.size();
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = compact(xs[i]);

  double best = 0.0;
  auto consider = [&](double dv, double d) {
    if (d > 0 && dv != 0) best = std::max(best, std::abs(dv) / std::pow(d, alpha));
  };
  consider(h.boundary_right() - h.boundary_left(), 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    consider(vs[i] - h.boundary_left(), c[i] + 1.0);
    consider(h.boundary_right() - vs[i], 1.0 - c[i]);
  }
  if (mode == SeminormMode::Exact) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) consider(vs[j] - vs[i], metric_d(xs[i], xs[j]));
  } else {
    for (std::size_t stride = 1; stride < n; stride *= 2)
      for (std::size_t i = 0; i + stride < n; ++i)
        consider(vs[i + stride] - vs[i], metric_d(xs[i], xs[i + stride]));
  }
  return best;
}

std::function<double(double)> hull_ramp(const IFSystem& system) {
  Interval hull = attractor_hull(system);
  return [hull](double x) {
    if (x <= hull.lo) return 0.0;
    if (x >= hull.hi) return 1.0;
    double t = (x - hull.lo) / hull.width();
    return t * t * (3.0 - 2.0 * t);
  };
}

namespace {

/// Per-point trajectory of M^n phi along the coding, plus the depth-n cylinder
/// pair ratio p_w |phi(b) - phi(a)| / d(cylinder)^alpha when it exists.
struct PointTrajectory {
  std::vector<double> values;
  std::vector<double> cylinder_mass;   // p_{w|n}, 0 once no depth-n cylinder exists
  std::vector<double> cylinder_lo;
  std::vector<double> cylinder_width;
};

PointTrajectory trace_point(const IFSystem& system, const ProbVector& p, const Interval& hull,
                            const std::function<double(double)>& phi, double x, std::size_t n_max) {
  PointTrajectory tr;
  tr.values.assign(n_max + 1, 0.0);
  tr.cylinder_mass.assign(n_max + 1, 0.0);
  tr.cylinder_lo.assign(n_max + 1, 0.0);
  tr.cylinder_width.assign(n_max + 1, 0.0);
  if (x < hull.lo || x > hull.hi) {
    double v = phi(x);
    std::fill(tr.values.begin(), tr.values.end(), v);
    return tr;
  }
  CodingWalker<double> walker(system, hull, x);
  double partial = 0.0, mass = 1.0;
  double y = x;
  bool frozen = false;
  double frozen_value = 0.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    if (!frozen) {
      if (walker.location() == Location::LeftEndpoint) {
        frozen = true;
        frozen_value = partial + mass * phi(hull.lo);
      } else if (walker.location() == Location::RightEndpoint) {
        frozen = true;
        frozen_value = partial + mass * phi(hull.hi);
      }
    }
    if (frozen) {
      tr.values[n] = frozen_value;
    } else {
      tr.values[n] = partial + mass * phi(y);
    }
    if (walker.location() != Location::Gap && walker.depth() == n) {
      const auto& cyl = walker.cylinder();
      tr.cylinder_mass[n] = mass;
      tr.cylinder_lo[n] = cyl.lo;
      tr.cylinder_width[n] = walker.chain().affine() ? std::abs(walker.chain().scale()) * hull.width()
                                                     : cyl.hi - cyl.lo;
    }
    if (n == n_max) break;
    if (!walker.advance()) {
      if (!frozen) {
        Symbol below = walker.gap_after().value_or(0);
        frozen = true;
        frozen_value = partial + mass * (p.left_mass(below) + p[below]);
      }
      continue;
    }
    Symbol i = walker.word().back();
    partial += mass * p.left_mass(i);
    mass *= p[i];
    if (!frozen) y = system.branch(i)(y);
  }
  return tr;
}

}  // namespace

std::vector<double> iterate_pointwise(const IFSystem& system, const ProbVector& p,
                                      const std::function<double(double)>& phi, double x,
                                      std::size_t n_max) {
  return trace_point(system, p, attractor_hull(system), phi, x, n_max).values;
}

const char* to_string(GapVerdict v) {
  switch (v) {
    case GapVerdict::Bounded: return "bounded";
    case GapVerdict::Growing: return "growing";
    default: return "inconclusive";
  }
}

GapProbeReport gap_probe(const IFSystem& system, const ProbVector& p, double alpha, std::size_t n_max,
                         std::size_t grid_cells) {
  if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("gap_probe: alpha must lie in (0, 1]");
  if (n_max < 4) throw std::invalid_argument("gap_probe: n_max must be at least 4");
  const Interval hull = attractor_hull(system);
  const auto phi = hull_ramp(system);
  const std::vector<double> nodes = hull_grid(system, grid_cells);
  const double dphi = phi(hull.hi) - phi(hull.lo);

  std::vector<std::vector<double>> values(n_max + 1, std::vector<double>(nodes.size()));
  std::vector<double> cyl_best(n_max + 1, 0.0);
  std::vector<double> t_values(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    PointTrajectory tr = trace_point(system, p, hull, phi, nodes[k], n_max);
    for (std::size_t n = 0; n <= n_max; ++n) {
      values[n][k] = tr.values[n];
      if (tr.cylinder_mass[n] > 0 && tr.cylinder_width[n] > 0) {
        double d = metric_d_width(tr.cylinder_lo[n], tr.cylinder_width[n]);
        cyl_best[n] = std::max(cyl_best[n], tr.cylinder_mass[n] * std::abs(dphi) / std::pow(d, alpha));
      }
    }
    t_values[k] = eval_T_impl<double>(system, p, hull, nodes[k], 1e-17).value;
  }

  GapProbeReport report;
  report.alpha = alpha;
  for (std::size_t n = 0; n <= n_max; ++n) {
    GridFunction g(nodes, values[n], phi(hull.lo - 1.0), phi(hull.hi + 1.0));
    double semi = std::max(holder_seminorm(g, alpha, SeminormMode::Multiscale), cyl_best[n]);
    double resid = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) resid = std::max(resid, std::abs(values[n][k] - t_values[k]));
    report.seminorms.push_back(semi);
    report.norms.push_back(semi + g.sup_norm());
    report.sup_residuals.push_back(resid);
  }

  std::vector<double> xs, ys;
  for (std::size_t n = n_max / 2; n <= n_max; ++n) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log(report.norms[n]));
  }
  LinearFit fit = linear_fit(xs, ys);
  report.slope = fit.slope;
  report.slope_stderr = fit.slope_stderr;
  // A decaying norm is as bounded as a flat one.
  if (fit.slope < 1e-3) report.verdict = GapVerdict::Bounded;
  else if (fit.slope > 5e-3) report.verdict = GapVerdict::Growing;
  else report.verdict = GapVerdict::Inconclusive;
  return report;
}

}  // namespace holderlab
