#pragma once
// Pressure P(t phi + beta psi) with phi = -log f' and psi = log p, the implicit
// curve t(beta), Bernoulli Gibbs weights and the Legendre spectrum
// g(alpha) = inf_beta (t(beta) + beta alpha).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "holderlab/ifs.hpp"

namespace holderlab {

struct PressureBounds {
  double lower = 0.0;
  double upper = 0.0;
  double mid() const { return 0.5 * (lower + upper); }
  double width() const { return upper - lower; }
};

/// Affine branches: exact log sum_i p_i^beta a_i^-t (lower == upper, level
/// ignored). Custom branches: inf/sup sandwich of the depth-`level` cylinder
/// sums, level capped at 18 and at 2^18 words.
PressureBounds pressure(const IFSystem& system, const ProbVector& p, double t, double beta,
                        std::size_t level = 10);

/// Root of the strictly decreasing map t -> P(t phi + beta psi), |P| <= tol.
double solve_t(const IFSystem& system, const ProbVector& p, double beta, double tol = 1e-15,
               std::size_t level = 10);

struct GibbsWeights {
  std::vector<double> q;  // per-symbol Bernoulli weights (depth-1 marginals for custom branches)
  double t = 0.0;
  double t_prime = 0.0;
  double t_second = 0.0;  // NaN for custom branches
};

GibbsWeights gibbs(const IFSystem& system, const ProbVector& p, double beta, std::size_t level = 10);

struct AlphaEndpoints {
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  double alpha_zero = 0.0;
  double delta = 0.0;
  // -t'(+-50); the uncertainty is the change against -t'(+-100).
  double surrogate_minus = 0.0;
  double surrogate_plus = 0.0;
  double minus_uncertainty = 0.0;
  double plus_uncertainty = 0.0;
  bool closed_form = false;
};

AlphaEndpoints alpha_endpoints(const IFSystem& system, const ProbVector& p);

/// Solution of sum_i a_i^-t = 1 over the given slopes; 0 for a single slope.
double moran_dimension(const std::vector<double>& slopes);

struct SpectrumPoint {
  double alpha = 0.0;
  std::optional<double> g;            // empty outside [alpha_-, alpha_+]
  std::optional<double> beta_argmin;  // +-inf at the endpoints
};

struct PressureSample {
  double beta = 0.0;
  double t = 0.0;
  double t_prime = 0.0;
};

std::vector<PressureSample> pressure_curve(const IFSystem& system, const ProbVector& p,
                                           const std::vector<double>& betas);

/// Legendre spectrum, affine systems only.
SpectrumPoint spectrum_point(const IFSystem& system, const ProbVector& p, double alpha,
                             const AlphaEndpoints& ends, double tol = 1e-12);
std::vector<SpectrumPoint> spectrum(const IFSystem& system, const ProbVector& p,
                                    const std::vector<double>& alpha_grid);

}  // namespace holderlab
