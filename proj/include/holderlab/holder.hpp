#pragma once
// Pointwise Hoelder exponents: the ergodic-sum ratio S_k psi / S_k phi along a
// coding, and oscillation scaling of an evaluator around a point.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "holderlab/ifs.hpp"
#include "holderlab/takagi.hpp"

namespace holderlab {

struct ExponentTrace {
  Word word;
  std::vector<double> ratios;              // r_k, k = 1..|w|
  std::vector<double> boundary_distances;  // d(f_{w|k}(x), boundary of O), k = 1..|w|
  double liminf = 0.0;                     // min of r_k over k in [n/2, n]
};

ExponentTrace dyn_exponent(const IFSystem& system, const ProbVector& p, const Word& w);

/// Exact ratio of a periodic coding: sum log(1/p) / sum log a over one cycle.
double cycle_ratio(const IFSystem& system, const ProbVector& p, const Word& cycle);

/// The point with coding cycle^infinity.
double periodic_point(const IFSystem& system, const Word& cycle);

struct EmpiricalExponent {
  double slope = 0.0;      // least squares of log osc against log r
  double min_ratio = 0.0;  // min over kept scales of log osc / log r
  std::vector<double> scales;
  std::vector<double> oscillations;
  std::vector<double> dropped_scales;  // oscillation under the evaluator error floor
};

using Evaluator = std::function<CValue(double)>;

/// Oscillation sup |C(y) - C(x)| over B(x, r) probed on a geometric cloud of
/// 32 points plus 32 evenly spaced ones, for each r in a decreasing list of at
/// least 8 scales.
EmpiricalExponent emp_exponent(const Evaluator& c, double x, const std::vector<double>& scales);

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so parallel sampling is order independent.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t bits(std::uint64_t counter) const;
  double uniform(std::uint64_t counter) const;  // in [0, 1)

 private:
  std::uint64_t key_;
};

struct TypicalSample {
  Word word;
  double x = 0.0;
  double predicted_alpha = 0.0;
  double dyn_ratio = 0.0;  // S_n psi / S_n phi over the whole word
};

/// i.i.d. words from the Gibbs weights q(beta) of an affine system.
std::vector<TypicalSample> sample_typical(const IFSystem& system, const ProbVector& p, double beta,
                                          std::size_t word_len, std::size_t count, std::uint64_t seed,
                                          std::size_t threads = 1);

struct ExperimentConfig {
  std::size_t word_len = 2000;
  std::size_t count = 200;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool empirical = false;       // oscillation exponents of C_n at the samples (slow)
  MultiIndex n;                 // empty means T_p
  std::size_t emp_count = 10;   // samples that get an empirical exponent
  std::size_t emp_scales = 12;  // scales lambda^-4 .. lambda^-(4 + emp_scales - 1)
};

struct SpectrumRow {
  double beta = 0.0;
  double alpha_pred = 0.0;
  double g = 0.0;
  double dyn_mean = 0.0;
  double dyn_sigma = 0.0;
  double emp_mean = 0.0;  // NaN when not requested
  double emp_sigma = 0.0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

std::vector<SpectrumRow> spectrum_experiment(const IFSystem& system, const ProbVector& p,
                                             const std::vector<double>& betas, const ExperimentConfig& config);

}  // namespace holderlab
