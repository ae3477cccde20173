#pragma once
// Expanding interval branches, the iterated function system they generate,
// symbolic coding, cylinders, ergodic sums and the compactification metric.
//
// Conventions used throughout the library:
//   * Symbols are 0-based: symbol k names branch k+1, the last symbol is s.
//   * A word w = (w_1, ..., w_n) acts by f_w = f_{w_n} o ... o f_{w_1}, so the
//     cylinder of w is f_{w_1}^{-1} o ... o f_{w_n}^{-1} applied to a base set.
//   * Boundary points shared by two cylinders code with the smaller symbol.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace holderlab {

using Rational = boost::multiprecision::cpp_rational;
using Symbol = std::size_t;
using Word = std::vector<Symbol>;

enum class NumericMode { Float, Rational };

/// Raised for malformed systems: bad ordering, non-expanding branches, empty O.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numeric procedure cannot deliver its contract.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Rational parse_rational(const std::string& text);
Rational to_rational(double value);
inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double v) { return v; }

template <class S>
struct BasicInterval {
  S lo{};
  S hi{};
  S width() const { return hi - lo; }
  S mid() const { return (lo + hi) / 2; }
  bool contains(const S& x) const { return lo <= x && x <= hi; }
};
using Interval = BasicInterval<double>;

struct AffineMap {
  Rational slope;
  Rational intercept;
};

/// Evaluator contracts for a non-affine branch. All three must be supplied.
struct CustomMap {
  std::function<double(double)> eval;
  std::function<double(double)> derivative;
  std::function<double(double)> inverse;
};

class Branch {
 public:
  static Branch affine(Rational slope, Rational intercept);
  static Branch affine(double slope, double intercept);
  static Branch custom(CustomMap map);

  bool is_affine() const { return std::holds_alternative<AffineMap>(kind_); }
  const AffineMap& affine_map() const;

  double operator()(double x) const;
  double derivative(double x) const;
  double inverse(double y) const;

  Rational apply(const Rational& x) const;
  Rational inverse(const Rational& y) const;

  double slope_value() const { return slope_; }
  double intercept_value() const { return intercept_; }

 private:
  std::variant<AffineMap, CustomMap> kind_;
  double slope_ = 0.0;
  double intercept_ = 0.0;
};

struct ConditionFlags {
  bool osc = false;
  bool separating = false;
};

struct IFSystem {
  std::vector<Branch> branches;
  Interval open_set;
  double lambda = 0.0;  // expansion bound; 0 means "measure it"
  ConditionFlags flags;

  std::size_t size() const { return branches.size(); }
  std::size_t free_count() const { return branches.size() - 1; }
  Symbol last_symbol() const { return branches.size() - 1; }
  bool is_affine() const;
  const Branch& branch(Symbol i) const { return branches.at(i); }
};

/// Probability weights p_1..p_{s+1}; only p_1..p_s are free, the last one is
/// always recomputed as 1 - sum so the vector sums to one exactly.
class ProbVector {
 public:
  ProbVector() = default;
  static ProbVector from_free(std::vector<Rational> free);
  static ProbVector from_free(const std::vector<double>& free);

  std::size_t size() const { return values_.size(); }
  double operator[](Symbol i) const { return values_.at(i); }
  const Rational& exact(Symbol i) const { return exact_.at(i); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double> free_values() const;

  /// Mass of all symbols strictly below i.
  double left_mass(Symbol i) const { return left_.at(i); }
  const Rational& left_mass_exact(Symbol i) const { return left_exact_.at(i); }

 private:
  std::vector<Rational> exact_;
  std::vector<double> values_;
  std::vector<Rational> left_exact_;
  std::vector<double> left_;
};

template <class S>
struct ScalarOps;

template <>
struct ScalarOps<double> {
  static double inverse(const Branch& b, double y) { return b.inverse(y); }
  static double apply(const Branch& b, double x) { return b(x); }
  static double prob(const ProbVector& p, Symbol i) { return p[i]; }
  static double left(const ProbVector& p, Symbol i) { return p.left_mass(i); }
  static double from(double v) { return v; }
};

template <>
struct ScalarOps<Rational> {
  static Rational inverse(const Branch& b, const Rational& y) { return b.inverse(y); }
  static Rational apply(const Branch& b, const Rational& x) { return b.apply(x); }
  static const Rational& prob(const ProbVector& p, Symbol i) { return p.exact(i); }
  static const Rational& left(const ProbVector& p, Symbol i) { return p.left_mass_exact(i); }
  static Rational from(double v) { return to_rational(v); }
};

/// The map y -> f_{w_1}^{-1} o ... o f_{w_n}^{-1}(y) for the word pushed so
/// far. Affine systems keep a closed-form scale/offset pair.
template <class S>
class InverseChain {
 public:
  explicit InverseChain(const IFSystem& system)
      : system_(&system), affine_(system.is_affine()) {}

  void push(Symbol i) {
    if (affine_) {
      const auto& m = system_->branch(i);
      S a = slope_of(m);
      S b = intercept_of(m);
      offset_ = offset_ - scale_ * b / a;
      scale_ = scale_ / a;
    }
    word_.push_back(i);
  }

  S operator()(const S& y) const {
    if (affine_) return scale_ * y + offset_;
    S v = y;
    for (auto it = word_.rbegin(); it != word_.rend(); ++it)
      v = ScalarOps<S>::inverse(system_->branch(*it), v);
    return v;
  }

  /// f_w(x) for x in the current cylinder.
  S forward(const S& x) const {
    if (affine_) return (x - offset_) / scale_;
    S v = x;
    for (Symbol i : word_) v = ScalarOps<S>::apply(system_->branch(i), v);
    return v;
  }

  /// Derivative of the chain (product of inverse slopes), affine only.
  const S& scale() const { return scale_; }
  bool affine() const { return affine_; }
  const Word& word() const { return word_; }

 private:
  static S slope_of(const Branch& b) {
    if constexpr (std::is_same_v<S, double>) return b.slope_value();
    else return b.affine_map().slope;
  }
  static S intercept_of(const Branch& b) {
    if constexpr (std::is_same_v<S, double>) return b.intercept_value();
    else return b.affine_map().intercept;
  }

  const IFSystem* system_;
  bool affine_;
  S scale_ = S(1);
  S offset_ = S(0);
  Word word_;
};

enum class Location { Interior, LeftEndpoint, RightEndpoint, Gap };

/// Walks the nested hull cylinders containing a point, one level per call to
/// advance(), choosing the smallest symbol at shared boundaries.
///
/// Once the point sits exactly on an endpoint of its cylinder the coding is
/// forced (all 1s on a left endpoint, all s+1 on a right one) and the walker
/// keeps descending without comparing coordinates. Points in a gap between
/// sibling cylinders cannot descend further.
template <class S>
class CodingWalker {
 public:
  CodingWalker(const IFSystem& system, const BasicInterval<S>& hull, S x)
      : system_(&system), hull_(hull), x_(std::move(x)), chain_(system), cylinder_(hull) {
    if (x_ < hull_.lo || x_ > hull_.hi)
      throw std::domain_error("not in attractor hull");
    classify();
  }

  /// Descend one level. Returns false (and stays put) in a gap.
  bool advance() {
    if (location_ == Location::Gap) return false;
    const Symbol last = system_->last_symbol();
    if (location_ == Location::LeftEndpoint) {
      descend(0);
      return true;
    }
    if (location_ == Location::RightEndpoint) {
      descend(last);
      return true;
    }
    std::optional<Symbol> below;
    for (Symbol i = 0; i <= last; ++i) {
      BasicInterval<S> child = child_interval(i);
      if (child.contains(x_)) {
        descend(i, child);
        return true;
      }
      if (child.hi < x_) below = i;
    }
    location_ = Location::Gap;
    gap_after_ = below;
    return false;
  }

  Location location() const { return location_; }
  /// Largest sibling symbol lying entirely left of the point (gap only).
  std::optional<Symbol> gap_after() const { return gap_after_; }
  std::size_t depth() const { return chain_.word().size(); }
  const Word& word() const { return chain_.word(); }
  const BasicInterval<S>& cylinder() const { return cylinder_; }
  const InverseChain<S>& chain() const { return chain_; }
  const S& point() const { return x_; }
  /// Depth at which the point first landed on a cylinder endpoint.
  std::optional<std::size_t> endpoint_depth() const { return endpoint_depth_; }

  BasicInterval<S> child_interval(Symbol i) const {
    const Branch& b = system_->branch(i);
    BasicInterval<S> base{ScalarOps<S>::inverse(b, hull_.lo), ScalarOps<S>::inverse(b, hull_.hi)};
    return {chain_(base.lo), chain_(base.hi)};
  }

 private:
  void descend(Symbol i) { descend(i, child_interval(i)); }

  void descend(Symbol i, const BasicInterval<S>& child) {
    chain_.push(i);
    if (location_ == Location::LeftEndpoint) {
      cylinder_ = {x_, child.hi};
    } else if (location_ == Location::RightEndpoint) {
      cylinder_ = {child.lo, x_};
    } else {
      cylinder_ = child;
      classify();
    }
  }

  void classify() {
    if (x_ == cylinder_.lo) location_ = Location::LeftEndpoint;
    else if (x_ == cylinder_.hi) location_ = Location::RightEndpoint;
    else return;
    endpoint_depth_ = depth();
  }

  const IFSystem* system_;
  BasicInterval<S> hull_;
  S x_;
  InverseChain<S> chain_;
  BasicInterval<S> cylinder_;
  Location location_ = Location::Interior;
  std::optional<Symbol> gap_after_;
  std::optional<std::size_t> endpoint_depth_;
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string witness;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  ConditionFlags flags;
  double lambda = 0.0;
  bool all_passed() const;
};

/// Checks the standing assumptions and returns the strongest verified flags.
/// Throws ConfigurationError for a non-monotone branch, an expansion bound
/// violation, or an empty open set.
ValidationReport validate(const IFSystem& system, const ProbVector& p);

/// Same as validate() but returns a copy of the system with flags and lambda
/// set from the report.
IFSystem validated(IFSystem system, const ProbVector& p);

/// f_{w_1}^{-1} o ... o f_{w_n}^{-1} applied to the closure of O.
Interval cylinder(const IFSystem& system, const Word& w);
/// Same construction over the hull of the attractor.
Interval hull_cylinder(const IFSystem& system, const Word& w);
BasicInterval<Rational> hull_cylinder_exact(const IFSystem& system, const Word& w);

struct Coding {
  Word word;
  bool in_gap = false;
  std::optional<Symbol> gap_after;
};

/// Symbolic coding of x to the requested depth (shorter when x sits in a gap).
Coding encode(const IFSystem& system, double x, std::size_t depth);

struct PointEstimate {
  double point = 0.0;
  double err_bound = 0.0;
};
PointEstimate pi_approx(const IFSystem& system, const Word& w);

struct ErgodicSums {
  double phi = 0.0;  // S_n phi, phi = -log f'
  double psi = 0.0;  // S_n psi, psi = log p
  double phi_error = 0.0;
};
ErgodicSums ergodic_sums(const IFSystem& system, const ProbVector& p, const Word& w);

Interval attractor_hull(const IFSystem& system);
BasicInterval<Rational> attractor_hull_exact(const IFSystem& system);

double distortion_constant(const IFSystem& system, std::size_t depth);

/// Compactification metric |h(x) - h(y)| with h(x) = x / (1 + |x|), h(+-inf) = +-1.
double metric_d(double x, double y);
/// metric_d(lo, lo + width) evaluated without cancellation for tiny widths.
double metric_d_width(double lo, double width);

}  // namespace holderlab
