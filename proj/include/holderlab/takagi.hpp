#pragma once
// Generalised Takagi functions C_n = d^{|n|} T_p / dp^n and the matrix cocycle
// governing their increments over cylinders.
//
// Sign convention: U(a, b) = (C_m(a) - C_m(b))_m with a = min J, b = max J, so
// u_0 = -1. The increment C_n(y_w) - C_n(x_w) over the hull cylinder of w is
// A_0(w)_{n,0}.

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "holderlab/ifs.hpp"
#include "holderlab/transition.hpp"

namespace holderlab {

using MultiIndex = std::vector<unsigned>;

unsigned order(const MultiIndex& n);
bool is_zero(const MultiIndex& n);

/// All multi-indices m <= bound componentwise, sorted by |m| then
/// lexicographically. Index 0 is always the zero multi-index, and m <= n
/// implies position(m) <= position(n).
class IndexSet {
 public:
  explicit IndexSet(MultiIndex bound);

  std::size_t size() const { return items_.size(); }
  std::size_t dims() const { return bound_.size(); }
  const MultiIndex& bound() const { return bound_; }
  const MultiIndex& operator[](std::size_t k) const { return items_.at(k); }
  std::optional<std::size_t> find(const MultiIndex& m) const;
  std::size_t position(const MultiIndex& m) const;  // throws when absent
  /// position of m + e_j, if inside the set
  std::optional<std::size_t> raise(std::size_t k, std::size_t j) const { return up_[k][j]; }

 private:
  std::size_t flat(const MultiIndex& m) const;

  MultiIndex bound_;
  std::vector<MultiIndex> items_;
  std::vector<std::size_t> by_flat_;
  std::vector<std::vector<std::optional<std::size_t>>> up_;
};

enum class Normalization { Raw, Weighted };

/// Dense square matrix over an IndexSet. The set must outlive the matrix.
template <class S>
class CocycleMatrix {
 public:
  CocycleMatrix(const IndexSet& set, Normalization norm);
  static CocycleMatrix identity(const IndexSet& set, Normalization norm);

  const IndexSet& index_set() const { return *set_; }
  Normalization normalization() const { return norm_; }
  std::size_t size() const { return n_; }
  S& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  const S& operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

  CocycleMatrix operator*(const CocycleMatrix& rhs) const;
  bool operator==(const CocycleMatrix& rhs) const { return data_ == rhs.data_; }

  /// this <- this * step(i), where step is the (raw or weighted) one-symbol
  /// matrix. O(size^2 * s).
  void multiply_step(Symbol i, const ProbVector& p);

 private:
  const IndexSet* set_;
  Normalization norm_;
  std::size_t n_;
  std::vector<S> data_;
};

/// A_0 for a single symbol (raw) or A_0 / p_i (weighted).
template <class S>
CocycleMatrix<S> step_matrix(const IndexSet& set, Symbol i, const ProbVector& p,
                             Normalization norm = Normalization::Raw);

/// Ordered product step(w_1) * ... * step(w_k).
template <class S>
CocycleMatrix<S> cocycle(const IndexSet& set, const Word& w, const ProbVector& p,
                         Normalization norm = Normalization::Raw);

/// U(x_w, y_w) = -(column 0 of A_0(w)), indexed like the set.
std::vector<double> cylinder_increment(const IndexSet& set, const Word& w, const ProbVector& p);
std::vector<Rational> cylinder_increment_exact(const IndexSet& set, const Word& w, const ProbVector& p);

struct CValue {
  double value = 0.0;
  double err_bound = 0.0;
};

/// Pointwise C_n for one (system, p, n). Construction estimates sup |C_m| for
/// every m <= n from exact cylinder-endpoint values, used for tail bounds.
class TakagiEvaluator {
 public:
  TakagiEvaluator(const IFSystem& system, const ProbVector& p, MultiIndex n);

  /// C_n(x) by summing the increments of the sibling cylinders left of the
  /// coding of x, down to the given depth.
  CValue operator()(double x, std::size_t depth = 64) const;

  /// C_n at the left (right_end = false) or right endpoint of the hull
  /// cylinder of w. Exact up to rounding.
  double endpoint(const Word& w, bool right_end) const { return endpoint_row(w, right_end, target_); }

  /// Estimated sup over the hull of |C_m - C_m(min J)|, indexed like the set.
  const std::vector<double>& oscillation() const { return osc_; }
  const IndexSet& index_set() const { return set_; }

 private:
  double endpoint_row(const Word& w, bool right_end, std::size_t row) const;
  void step_row(std::vector<double>& r, Symbol i) const;
  double sibling_increment(const std::vector<double>& r, Symbol i) const;

  const IFSystem* system_;
  ProbVector p_;
  MultiIndex n_;
  IndexSet set_;
  std::size_t target_;
  Interval hull_;
  std::vector<double> osc_;
};

CValue eval_C(const IFSystem& system, const ProbVector& p, const MultiIndex& n, double x,
              std::size_t depth = 64);

struct SeriesLevel {
  GridFunction values;
  double interpolation_bound = 0.0;
  double propagated = 0.0;  // inherited from the lower-order levels
  double tail = 0.0;
  double rounding = 0.0;
  std::size_t terms = 0;
  bool inconclusive = false;

  double error_bound() const { return interpolation_bound + propagated + tail + rounding; }
};

struct TakagiSeries {
  std::vector<double> nodes;
  std::map<MultiIndex, SeriesLevel> levels;  // every m <= n, including m = 0 (T_p)

  const SeriesLevel& at(const MultiIndex& m) const;
};

/// C_m for all m <= n on the given nodes via C_m = sum_k M_p^k g_m with
/// g_m = sum_i m_i (C_{m-e_i} o f_i - C_{m-e_i} o f_{s+1}).
TakagiSeries eval_C_series(const IFSystem& system, const ProbVector& p, const MultiIndex& n,
                           std::vector<double> nodes, std::size_t max_terms = 400);

/// g_n on the series nodes and the sup of |C_n - M_p C_n - g_n| there.
GridFunction forcing_term(const IFSystem& system, const TakagiSeries& series, const MultiIndex& n);
double functional_equation_residual(const IFSystem& system, const ProbVector& p,
                                    const TakagiSeries& series, const MultiIndex& n);

/// Central finite differences of T_p in the free coordinates, step h, with
/// p_{s+1} = 1 - sum. Entries of n may not exceed 2.
double fd_oracle(const IFSystem& system, const ProbVector& p, const MultiIndex& n, double x, double h);

}  // namespace holderlab
