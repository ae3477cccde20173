#pragma once
// The piecewise-linear model g_i(x) = (x - sum_{j<i} p_j) / p_i, the
// conjugacy Phi_p = pi_p o coding, and the rigidity dichotomy report.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "holderlab/ifs.hpp"

namespace holderlab {

/// Affine system with slopes 1/p_i on O = (0, 1); exact rational coefficients.
IFSystem linear_model(const ProbVector& p);

/// Phi_p(x): the linear-model point with the same coding as x, evaluated by
/// nesting the model inverses y -> p_i y + sum_{j<i} p_j until the remaining
/// mass is at most tol. err_bound <= tol.
PointEstimate phi(const IFSystem& system, const ProbVector& p, double x, double tol = 1e-13);

struct ResidualReport {
  double max_residual = 0.0;
  std::size_t samples = 0;
  std::size_t rejected = 0;  // draws too close to a shallow cylinder endpoint
};

/// max |Phi(f(x)) - g_{w_1}(Phi(x))| over points drawn as midpoints of random
/// depth-48 cylinders, where w_1 is the first coding symbol of x.
ResidualReport conjugacy_residual(const IFSystem& system, const ProbVector& p, std::size_t sample_count,
                                  std::uint64_t seed, std::size_t threads = 1);

struct RigidityReport {
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double delta = 0.0;
  double max_conjugacy_residual = 0.0;
  bool rigid = false;
  std::vector<std::size_t> sweep_cells;   // hull grid sizes
  std::vector<double> sweep_seminorms;    // V_delta(T) on each grid
  bool seminorm_bounded = false;

  std::string verdict() const { return rigid ? "rigid" : "non-rigid"; }
};

RigidityReport rigidity_report(const IFSystem& system, const ProbVector& p, double tol = 1e-9,
                               std::uint64_t seed = 0, std::size_t threads = 1);

}  // namespace holderlab
