#include "holderlab/ifs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace holderlab {

namespace {

constexpr std::size_t kMonotoneSamples = 257;

std::string format_interval(const Interval& iv) {
  std::ostringstream os;
  os.precision(17);
  os << '[' << iv.lo << ", " << iv.hi << ']';
  return os.str();
}

double affine_fixed_point(const Branch& b) {
  // a x + c = x  =>  x = c / (1 - a)
  return b.intercept_value() / (1.0 - b.slope_value());
}

double custom_fixed_point(const Branch& b, const Interval& open_set) {
  auto g = [&](double x) { return b(x) - x; };
  double lo = open_set.lo;
  double hi = open_set.hi;
  double span = std::max(hi - lo, 1.0);
  int doublings = 0;
  while (!(g(lo) <= 0.0 && g(hi) >= 0.0)) {
    if (++doublings > 60) throw ConfigurationError("no fixed point found near the open set");
    lo -= span;
    hi += span;
    span *= 2.0;
  }
  while (hi - lo > 1e-14 * std::max(1.0, std::abs(lo))) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void enumerate_words(std::size_t alphabet, std::size_t length,
                     const std::function<void(const Word&)>& visit) {
  Word w(length, 0);
  while (true) {
    visit(w);
    std::size_t k = length;
    while (k > 0) {
      if (++w[k - 1] < alphabet) break;
      w[k - 1] = 0;
      --k;
    }
    if (k == 0) return;
  }
}

}  // namespace

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    Rational num(text.substr(0, slash));
    Rational den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return num / den;
  }
  auto dot = text.find('.');
  if (dot == std::string::npos && text.find_first_of("eE") == std::string::npos)
    return Rational(text);
  if (text.find_first_of("eE") != std::string::npos)
    return to_rational(std::stod(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  std::size_t decimals = text.size() - dot - 1;
  boost::multiprecision::cpp_int scale = 1;
  for (std::size_t k = 0; k < decimals; ++k) scale *= 10;
  if (digits.empty() || digits == "-" || digits == "+") digits += "0";
  return Rational(boost::multiprecision::cpp_int(digits)) / Rational(scale);
}

Rational to_rational(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite value has no rational form");
  if (value == 0.0) return Rational(0);
  int exponent = 0;
  double mantissa = std::frexp(value, &exponent);
  auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r(scaled);
  boost::multiprecision::cpp_int two_pow = 1;
  two_pow <<= std::abs(exponent);
  return exponent >= 0 ? r * Rational(two_pow) : r / Rational(two_pow);
}

// ---------------------------------------------------------------- Branch

Branch Branch::affine(Rational slope, Rational intercept) {
  Branch b;
  b.slope_ = to_double(slope);
  b.intercept_ = to_double(intercept);
  b.kind_ = AffineMap{std::move(slope), std::move(intercept)};
  return b;
}

Branch Branch::affine(double slope, double intercept) {
  return affine(to_rational(slope), to_rational(intercept));
}

Branch Branch::custom(CustomMap map) {
  if (!map.eval || !map.derivative || !map.inverse)
    throw ConfigurationError("custom branch needs evaluator, derivative and inverse");
  Branch b;
  b.kind_ = std::move(map);
  return b;
}

const AffineMap& Branch::affine_map() const {
  if (const auto* m = std::get_if<AffineMap>(&kind_)) return *m;
  throw std::logic_error("branch is not affine");
}

double Branch::operator()(double x) const {
  if (is_affine()) return slope_ * x + intercept_;
  return std::get<CustomMap>(kind_).eval(x);
}

double Branch::derivative(double x) const {
  if (is_affine()) return slope_;
  return std::get<CustomMap>(kind_).derivative(x);
}

double Branch::inverse(double y) const {
  if (is_affine()) return (y - intercept_) / slope_;
  return std::get<CustomMap>(kind_).inverse(y);
}

Rational Branch::apply(const Rational& x) const {
  const auto& m = affine_map();
  return m.slope * x + m.intercept;
}

Rational Branch::inverse(const Rational& y) const {
  const auto& m = affine_map();
  return (y - m.intercept) / m.slope;
}

bool IFSystem::is_affine() const {
  return std::all_of(branches.begin(), branches.end(), [](const Branch& b) { return b.is_affine(); });
}

// ---------------------------------------------------------------- ProbVector

ProbVector ProbVector::from_free(std::vector<Rational> free) {
  if (free.empty()) throw ConfigurationError("need at least one free probability");
  ProbVector p;
  Rational total = 0;
  for (const auto& v : free) {
    if (v <= 0 || v >= 1) throw ConfigurationError("probabilities must lie in (0,1)");
    total += v;
  }
  if (total >= 1) throw ConfigurationError("free probabilities must sum to less than 1");
  p.exact_ = std::move(free);
  p.exact_.push_back(Rational(1) - total);
  Rational running = 0;
  for (const auto& v : p.exact_) {
    p.values_.push_back(to_double(v));
    p.left_exact_.push_back(running);
    p.left_.push_back(to_double(running));
    running += v;
  }
  return p;
}

ProbVector ProbVector::from_free(const std::vector<double>& free) {
  std::vector<Rational> exact;
  exact.reserve(free.size());
  for (double v : free) exact.push_back(to_rational(v));
  return from_free(std::move(exact));
}

std::vector<double> ProbVector::free_values() const {
  return {values_.begin(), values_.end() - 1};
}

// ---------------------------------------------------------------- validation

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

ValidationReport validate(const IFSystem& system, const ProbVector& p) {
  ValidationReport report;
  const Interval& o = system.open_set;
  if (!(o.lo < o.hi)) throw ConfigurationError("open set O is empty");
  if (system.size() < 2) throw ConfigurationError("need at least two branches");
  if (p.size() != system.size())
    throw ConfigurationError("probability vector length does not match branch count");

  std::vector<Interval> pre;
  double min_derivative = std::numeric_limits<double>::infinity();
  double worst_roundtrip = 0.0;

  for (Symbol i = 0; i < system.size(); ++i) {
    const Branch& b = system.branch(i);
    double prev = b(o.lo);
    for (std::size_t k = 1; k < kMonotoneSamples; ++k) {
      double x = o.lo + (o.hi - o.lo) * static_cast<double>(k) / (kMonotoneSamples - 1);
      double y = b(x);
      if (!(y > prev))
        throw ConfigurationError("branch " + std::to_string(i + 1) + " is not increasing on O");
      prev = y;
    }
    Interval iv{b.inverse(o.lo), b.inverse(o.hi)};
    pre.push_back(iv);
    for (std::size_t k = 0; k < kMonotoneSamples; ++k) {
      double v = iv.lo + iv.width() * static_cast<double>(k) / (kMonotoneSamples - 1);
      min_derivative = std::min(min_derivative, b.derivative(v));
      worst_roundtrip = std::max(worst_roundtrip, std::abs(b.inverse(b(v)) - v) / std::max(1.0, std::abs(v)));
    }
  }

  double lambda = system.lambda > 0.0 ? system.lambda : min_derivative;
  if (!(lambda > 1.0)) throw ConfigurationError("branches are not expanding (derivative sample <= 1)");
  if (min_derivative < lambda)
    throw ConfigurationError("derivative sample below the expansion bound lambda");
  report.lambda = lambda;
  report.checks.push_back({"expanding", true, "min sampled derivative " + std::to_string(min_derivative)});
  report.checks.push_back({"inverse_roundtrip", worst_roundtrip <= 1e-12,
                           "max relative error " + std::to_string(worst_roundtrip)});

  // Rational coefficients decide touching preimages exactly.
  const bool exact = system.is_affine();
  std::vector<BasicInterval<Rational>> pre_exact;
  const BasicInterval<Rational> o_exact{exact ? to_rational(o.lo) : Rational(0), exact ? to_rational(o.hi) : Rational(0)};
  if (exact)
    for (const Branch& b : system.branches) pre_exact.push_back({b.inverse(o_exact.lo), b.inverse(o_exact.hi)});

  bool invariant = true;
  std::string invariant_witness;
  for (Symbol i = 0; i < pre.size(); ++i) {
    bool outside = exact ? (pre_exact[i].lo < o_exact.lo || pre_exact[i].hi > o_exact.hi)
                         : (pre[i].lo < o.lo || pre[i].hi > o.hi);
    if (outside) {
      invariant = false;
      invariant_witness = "f_" + std::to_string(i + 1) + "^{-1}(O) = " + format_interval(pre[i]);
    }
  }
  report.checks.push_back({"invariance", invariant, invariant_witness});

  bool ordered = true;
  bool open_disjoint = true;
  bool closed_disjoint = true;
  std::string order_witness, open_witness, closed_witness;
  for (Symbol i = 0; i < pre.size(); ++i) {
    for (Symbol j = i + 1; j < pre.size(); ++j) {
      const Interval& a = pre[i];
      const Interval& b = pre[j];
      auto relate = [](const auto& u, const auto& v) {
        return std::array<bool, 3>{u.hi > v.lo, std::max(u.lo, v.lo) < std::min(u.hi, v.hi),
                                   std::max(u.lo, v.lo) <= std::min(u.hi, v.hi)};
      };
      auto [misordered, open_overlap, closed_overlap] = exact ? relate(pre_exact[i], pre_exact[j]) : relate(a, b);
      if (misordered) {
        ordered = false;
        order_witness = format_interval(a) + " vs " + format_interval(b);
      }
      if (open_overlap) {
        open_disjoint = false;
        open_witness = format_interval(a) + " overlaps " + format_interval(b);
      }
      if (closed_overlap) {
        closed_disjoint = false;
        closed_witness = format_interval(a) + " meets " + format_interval(b);
      }
    }
  }
  report.checks.push_back({"ordering", ordered, order_witness});
  report.checks.push_back({"open_set_condition", invariant && open_disjoint, open_witness});
  report.checks.push_back({"separating_condition", invariant && closed_disjoint, closed_witness});

  double psum = 0.0;
  for (double v : p.values()) psum += v;
  report.checks.push_back({"probability_sum", std::abs(psum - 1.0) <= 1e-15, std::to_string(psum)});

  report.flags.osc = invariant && open_disjoint && ordered;
  report.flags.separating = report.flags.osc && closed_disjoint;
  return report;
}

IFSystem validated(IFSystem system, const ProbVector& p) {
  ValidationReport r = validate(system, p);
  system.flags = r.flags;
  system.lambda = r.lambda;
  return system;
}

// ---------------------------------------------------------------- cylinders

namespace {

template <class S>
BasicInterval<S> pull_back(const IFSystem& system, const Word& w, BasicInterval<S> base) {
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    const Branch& b = system.branch(*it);
    base = {ScalarOps<S>::inverse(b, base.lo), ScalarOps<S>::inverse(b, base.hi)};
  }
  return base;
}

}  // namespace

Interval cylinder(const IFSystem& system, const Word& w) {
  return pull_back<double>(system, w, system.open_set);
}

Interval hull_cylinder(const IFSystem& system, const Word& w) {
  return pull_back<double>(system, w, attractor_hull(system));
}

BasicInterval<Rational> hull_cylinder_exact(const IFSystem& system, const Word& w) {
  return pull_back<Rational>(system, w, attractor_hull_exact(system));
}

Coding encode(const IFSystem& system, double x, std::size_t depth) {
  CodingWalker<double> walker(system, attractor_hull(system), x);
  Coding out;
  while (walker.depth() < depth) {
    if (!walker.advance()) {
      out.in_gap = true;
      out.gap_after = walker.gap_after();
      break;
    }
  }
  out.word = walker.word();
  return out;
}

PointEstimate pi_approx(const IFSystem& system, const Word& w) {
  Interval c = cylinder(system, w);
  return {c.mid(), 0.5 * c.width()};
}

ErgodicSums ergodic_sums(const IFSystem& system, const ProbVector& p, const Word& w) {
  ErgodicSums out;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const Branch& b = system.branch(w[k]);
    out.psi += std::log(p[w[k]]);
    if (b.is_affine()) {
      out.phi -= std::log(b.slope_value());
      continue;
    }
    Word suffix(w.begin() + static_cast<std::ptrdiff_t>(k), w.end());
    Interval c = cylinder(system, suffix);
    double d_lo = b.derivative(c.lo);
    double d_hi = b.derivative(c.hi);
    double d_mid = b.derivative(c.mid());
    out.phi -= std::log(d_mid);
    double hi = std::max({d_lo, d_hi, d_mid});
    double lo = std::min({d_lo, d_hi, d_mid});
    out.phi_error += std::log(hi / lo);
  }
  return out;
}

Interval attractor_hull(const IFSystem& system) {
  const Branch& first = system.branches.front();
  const Branch& last = system.branches.back();
  double lo = first.is_affine() ? affine_fixed_point(first) : custom_fixed_point(first, system.open_set);
  double hi = last.is_affine() ? affine_fixed_point(last) : custom_fixed_point(last, system.open_set);
  const double slack = 1e-12 * std::max(1.0, system.open_set.hi - system.open_set.lo);
  if (lo < system.open_set.lo - slack || hi > system.open_set.hi + slack || !(lo < hi))
    throw ConfigurationError("extreme branch fixed points do not lie in the closure of O");
  return {lo, hi};
}

BasicInterval<Rational> attractor_hull_exact(const IFSystem& system) {
  const auto& first = system.branches.front().affine_map();
  const auto& last = system.branches.back().affine_map();
  BasicInterval<Rational> hull{first.intercept / (Rational(1) - first.slope),
                               last.intercept / (Rational(1) - last.slope)};
  if (!(hull.lo < hull.hi)) throw ConfigurationError("degenerate attractor hull");
  return hull;
}

double distortion_constant(const IFSystem& system, std::size_t depth) {
  if (depth == 0 || system.is_affine()) return 1.0;
  constexpr int kSamples = 9;
  double worst = 1.0;
  for (std::size_t len = 1; len <= depth; ++len) {
    enumerate_words(system.size(), len, [&](const Word& w) {
      Interval c = cylinder(system, w);
      double dmin = std::numeric_limits<double>::infinity();
      double dmax = 0.0;
      for (int k = 0; k < kSamples; ++k) {
        double v = c.lo + c.width() * k / (kSamples - 1);
        double deriv = 1.0;
        for (Symbol i : w) {
          const Branch& b = system.branch(i);
          deriv *= b.derivative(v);
          v = b(v);
        }
        dmin = std::min(dmin, deriv);
        dmax = std::max(dmax, deriv);
      }
      worst = std::max(worst, dmax / dmin);
    });
  }
  return worst;
}

namespace {
double compactify(double x) {
  if (std::isinf(x)) return x > 0 ? 1.0 : -1.0;
  return x / (1.0 + std::abs(x));
}
}  // namespace

double metric_d(double x, double y) { return std::abs(compactify(x) - compactify(y)); }

double metric_d_width(double lo, double width) {
  double hi = lo + width;
  if (lo >= 0.0) return width / ((1.0 + lo) * (1.0 + hi));
  if (hi <= 0.0) return width / ((1.0 - lo) * (1.0 - hi));
  return metric_d(lo, hi);
}

}  // namespace holderlab
