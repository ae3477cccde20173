#include "holderlab/conjugacy.hpp"

#include <algorithm>
#include <cmath>

#include "holderlab/holder.hpp"
#include "holderlab/parallel.hpp"
#include "holderlab/thermo.hpp"
#include "holderlab/transition.hpp"

namespace holderlab {

IFSystem linear_model(const ProbVector& p) {
  IFSystem model;
  for (Symbol i = 0; i < p.size(); ++i) {
    const Rational& pi = p.exact(i);
    model.branches.push_back(Branch::affine(Rational(1) / pi, -p.left_mass_exact(i) / pi));
  }
  model.open_set = {0.0, 1.0};
  return validated(std::move(model), p);
}

PointEstimate phi(const IFSystem& system, const ProbVector& p, double x, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("phi: tol must be positive");
  const Interval hull = attractor_hull(system);
  CodingWalker<double> walker(system, hull, x);
  double mass = 1.0;
  double tail = 0.5;
  double err = 0.5;
  while (true) {
    if (walker.location() == Location::LeftEndpoint) {
      tail = 0.0;
      err = 0.0;
      break;
    }
    if (walker.location() == Location::RightEndpoint) {
      tail = 1.0;
      err = 0.0;
      break;
    }
    if (mass <= tol) {
      err = 0.5 * mass;
      break;
    }
    if (!walker.advance()) {
      // Constant on the gap: the model coordinate just right of child i.
      Symbol i = walker.gap_after().value_or(0);
      tail = p.left_mass(i) + p[i];
      err = 0.0;
      break;
    }
    mass *= p[walker.word().back()];
  }
  // pi_p(w) = h_{w_1} o ... o h_{w_k}(tail) with h_i(y) = p_i y + L_i.
  const Word& w = walker.word();
  double y = tail;
  for (auto it = w.rbegin(); it != w.rend(); ++it) y = p[*it] * y + p.left_mass(*it);
  return {y, err};
}

ResidualReport conjugacy_residual(const IFSystem& system, const ProbVector& p, std::size_t sample_count,
                                  std::uint64_t seed, std::size_t threads) {
  constexpr std::size_t kDepth = 48;
  constexpr std::size_t kShallow = 12;
  const double tol = 1e-13;
  const Interval hull = attractor_hull(system);
  const double eps = 1e-12 * hull.width();
  const std::size_t alphabet = system.size();

  std::vector<double> residual(sample_count, 0.0);
  std::vector<std::size_t> rejected(sample_count, 0);
  parallel_for(sample_count, threads, [&](std::size_t k) {
    CounterRng rng(seed, k);
    std::uint64_t counter = 0;
    while (true) {
      Word w(kDepth);
      for (auto& sym : w) sym = static_cast<Symbol>(rng.bits(counter++) % alphabet);
      double x = hull_cylinder(system, w).mid();
      Word shallow(w.begin(), w.begin() + kShallow);
      Interval c = hull_cylinder(system, shallow);
      if (x - c.lo < eps || c.hi - x < eps) {
        ++rejected[k];
        continue;
      }
      Coding code = encode(system, x, 1);
      Symbol i = code.word.at(0);
      PointEstimate a = phi(system, p, x, tol);
      PointEstimate b = phi(system, p, system.branch(i)(x), tol);
      double model = (a.point - p.left_mass(i)) / p[i];
      residual[k] = std::abs(b.point - model);
      break;
    }
  });
  ResidualReport out;
  out.samples = sample_count;
  for (std::size_t k = 0; k < sample_count; ++k) {
    out.max_residual = std::max(out.max_residual, residual[k]);
    out.rejected += rejected[k];
  }
  return out;
}

RigidityReport rigidity_report(const IFSystem& system, const ProbVector& p, double tol, std::uint64_t seed,
                               std::size_t threads) {
  RigidityReport r;
  AlphaEndpoints ends = alpha_endpoints(system, p);
  r.alpha_minus = ends.alpha_minus;
  r.alpha_plus = ends.alpha_plus;
  r.delta = ends.delta;
  r.rigid = ends.alpha_plus - ends.alpha_minus <= tol;
  r.max_conjugacy_residual = conjugacy_residual(system, p, 1000, seed, threads).max_residual;
  for (std::size_t cells : {256u, 1024u, 4096u}) {
    GridFunction t = T_grid(system, p, hull_grid(system, cells), 1e-16);
    r.sweep_cells.push_back(cells);
    r.sweep_seminorms.push_back(holder_seminorm(t, std::min(1.0, r.delta), SeminormMode::Multiscale));
  }
  // Two refinements by 4: growth past 25% means the seminorm is not settling.
  r.seminorm_bounded = r.sweep_seminorms.back() <= 1.25 * r.sweep_seminorms.front();
  return r;
}

}  // namespace holderlab
