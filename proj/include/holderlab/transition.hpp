#pragma once
// The transition operator M_p h = sum_i p_i h o f_i acting on grid functions,
// evaluation of its fixed point T_p, Hoelder seminorms and the spectral-gap
// probes.

#include <cstddef>
#include <functional>
#include <vector>

#include "holderlab/ifs.hpp"

namespace holderlab {

/// Samples of a function on strictly increasing nodes, with constants standing
/// for the values at -inf and +inf. Between nodes the function is read by
/// piecewise-linear interpolation, beyond the node span by the constants.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<double> nodes, std::vector<double> values, double left, double right);

  static GridFunction sample(std::vector<double> nodes, const std::function<double(double)>& f,
                             double left, double right);

  struct Lookup {
    double value = 0.0;
    double error = 0.0;  // 0 on an exact node hit, otherwise the cell variation
  };
  Lookup lookup(double x) const;
  double operator()(double x) const { return lookup(x).value; }

  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double boundary_left() const { return left_; }
  double boundary_right() const { return right_; }
  std::size_t size() const { return nodes_.size(); }
  double sup_norm() const;

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  double left_ = 0.0;
  double right_ = 0.0;
};

std::vector<double> uniform_grid(double lo, double hi, std::size_t count);

/// `cells` equal cells across the attractor hull, extended on both sides by
/// whole cells covering margin_fraction * diam(hull).
std::vector<double> hull_grid(const IFSystem& system, std::size_t cells = 4096,
                              double margin_fraction = 0.25);

struct AppliedGrid {
  GridFunction h;
  double interpolation_bound = 0.0;
};

/// M_p h on the nodes of h. Constants are preserved exactly.
AppliedGrid apply_M(const IFSystem& system, const ProbVector& p, const GridFunction& h);

template <class S>
struct TValue {
  S value{};
  S err_bound{};
};

/// T_p(x) by summing the masses of cylinders left of the coding of x, until
/// the remaining cylinder mass drops to tol.
TValue<double> eval_T(const IFSystem& system, const ProbVector& p, double x, double tol = 1e-15);
TValue<Rational> eval_T_exact(const IFSystem& system, const ProbVector& p, const Rational& x,
                              const Rational& tol);

GridFunction T_grid(const IFSystem& system, const ProbVector& p, std::vector<double> nodes,
                    double tol = 1e-15);

struct ConvergenceDiagnostics {
  std::vector<double> residuals;  // sup-distance to the predicted limit, index n
  double rate = 0.0;              // fitted per-step contraction factor
  double r_squared = 0.0;
  double floor = 0.0;              // residual left after n_max steps
  std::size_t fit_begin = 0;
  std::size_t fit_end = 0;  // exclusive
  bool diverging = false;
};

/// Iterates M_p on the grid of h0 and compares against
/// (h0(+inf) - h0(-inf)) T_p + h0(-inf).
ConvergenceDiagnostics iterate_M(const IFSystem& system, const ProbVector& p, const GridFunction& h0,
                                 std::size_t n_max);

enum class SeminormMode { Exact, Multiscale };

/// sup |h(x) - h(y)| / d(x, y)^alpha over the nodes and the two points at
/// infinity. Multiscale restricts to node pairs at power-of-two index strides.
double holder_seminorm(const GridFunction& h, double alpha, SeminormMode mode = SeminormMode::Exact);

/// (M_p^n phi)(x) for n = 0..n_max, evaluated along the coding of x. phi must
/// be continuous and constant left of min J and right of max J.
std::vector<double> iterate_pointwise(const IFSystem& system, const ProbVector& p,
                                      const std::function<double(double)>& phi, double x,
                                      std::size_t n_max);

/// Smoothstep ramp rising from 0 at min J to 1 at max J.
std::function<double(double)> hull_ramp(const IFSystem& system);

enum class GapVerdict { Bounded, Growing, Inconclusive };
const char* to_string(GapVerdict v);

struct GapProbeReport {
  double alpha = 0.0;
  std::vector<double> norms;       // V_alpha + sup norm of M^n phi0
  std::vector<double> seminorms;   // V_alpha part
  std::vector<double> sup_residuals;  // |M^n phi0 - T| on the grid
  double slope = 0.0;              // of log(norm) against n over the last half
  double slope_stderr = 0.0;
  GapVerdict verdict = GapVerdict::Inconclusive;
};

/// Tracks ||M_p^n phi0||_alpha for the hull ramp phi0. Seminorms are lower
/// estimates from grid-node pairs plus, for every grid node, the endpoint pair
/// of its depth-n coding cylinder.
GapProbeReport gap_probe(const IFSystem& system, const ProbVector& p, double alpha, std::size_t n_max,
                         std::size_t grid_cells = 8192);

}  // namespace holderlab
