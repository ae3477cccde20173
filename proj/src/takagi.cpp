#include "holderlab/takagi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace holderlab {

unsigned order(const MultiIndex& n) { return std::accumulate(n.begin(), n.end(), 0u); }

bool is_zero(const MultiIndex& n) {
  return std::all_of(n.begin(), n.end(), [](unsigned v) { return v == 0; });
}

IndexSet::IndexSet(MultiIndex bound) : bound_(std::move(bound)) {
  if (bound_.empty()) throw std::invalid_argument("IndexSet: need at least one free coordinate");
  std::size_t total = 1;
  for (unsigned b : bound_) total *= b + 1;
  // Enumerate the box in mixed radix, then sort.
  MultiIndex m(bound_.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    items_.push_back(m);
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (m[j] < bound_[j]) {
        ++m[j];
        break;
      }
      m[j] = 0;
    }
  }
  std::sort(items_.begin(), items_.end(), [](const MultiIndex& a, const MultiIndex& b) {
    unsigned oa = order(a), ob = order(b);
    return oa != ob ? oa < ob : a < b;
  });
  by_flat_.assign(total, 0);
  for (std::size_t k = 0; k < items_.size(); ++k) by_flat_[flat(items_[k])] = k;
  up_.assign(items_.size(), std::vector<std::optional<std::size_t>>(bound_.size()));
  for (std::size_t k = 0; k < items_.size(); ++k)
    for (std::size_t j = 0; j < bound_.size(); ++j) {
      if (items_[k][j] == bound_[j]) continue;
      MultiIndex r = items_[k];
      ++r[j];
      up_[k][j] = by_flat_[flat(r)];
    }
}

std::size_t IndexSet::flat(const MultiIndex& m) const {
  std::size_t f = 0;
  for (std::size_t j = m.size(); j-- > 0;) f = f * (bound_[j] + 1) + m[j];
  return f;
}

std::optional<std::size_t> IndexSet::find(const MultiIndex& m) const {
  if (m.size() != bound_.size()) return std::nullopt;
  for (std::size_t j = 0; j < m.size(); ++j)
    if (m[j] > bound_[j]) return std::nullopt;
  return by_flat_[flat(m)];
}

std::size_t IndexSet::position(const MultiIndex& m) const {
  auto k = find(m);
  if (!k) throw std::out_of_range("multi-index outside the index set");
  return *k;
}

template <class S>
CocycleMatrix<S>::CocycleMatrix(const IndexSet& set, Normalization norm)
    : set_(&set), norm_(norm), n_(set.size()), data_(n_ * n_, S(0)) {}

template <class S>
CocycleMatrix<S> CocycleMatrix<S>::identity(const IndexSet& set, Normalization norm) {
  CocycleMatrix m(set, norm);
  for (std::size_t k = 0; k < m.n_; ++k) m(k, k) = S(1);
  return m;
}

template <class S>
CocycleMatrix<S> CocycleMatrix<S>::operator*(const CocycleMatrix& rhs) const {
  if (set_ != rhs.set_ && set_->bound() != rhs.set_->bound())
    throw std::invalid_argument("cocycle product over different index sets");
  CocycleMatrix out(*set_, norm_);
  for (std::size_t r = 0; r < n_; ++r)
    for (std::size_t m = 0; m <= r; ++m) {
      const S& a = (*this)(r, m);
      if (a == 0) continue;
      for (std::size_t c = 0; c <= m; ++c) out(r, c) += a * rhs(m, c);
    }
  return out;
}

namespace {

template <class S>
S prob_of(const ProbVector& p, Symbol i) {
  if constexpr (std::is_same_v<S, double>) return p[i];
  else return p.exact(i);
}

}  // namespace

template <class S>
void CocycleMatrix<S>::multiply_step(Symbol i, const ProbVector& p) {
  const std::size_t s = set_->dims();
  if (i > s) throw std::out_of_range("symbol outside the alphabet");
  const S pi = prob_of<S>(p, i);
  const S diag = norm_ == Normalization::Raw ? pi : S(1);
  const S scale = norm_ == Normalization::Raw ? S(1) : S(1) / pi;
  std::vector<S> row(n_);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t c = 0; c <= r; ++c) {
      S v = (*this)(r, c) * diag;
      const MultiIndex& mc = (*set_)[c];
      if (i < s) {
        if (auto up = set_->raise(c, i); up && *up <= r)
          v += (*this)(r, *up) * S(mc[i] + 1) * scale;
      } else {
        for (std::size_t j = 0; j < s; ++j)
          if (auto up = set_->raise(c, j); up && *up <= r)
            v -= (*this)(r, *up) * S(mc[j] + 1) * scale;
      }
      row[c] = v;
    }
    for (std::size_t c = 0; c <= r; ++c) (*this)(r, c) = row[c];
  }
}

template <class S>
CocycleMatrix<S> step_matrix(const IndexSet& set, Symbol i, const ProbVector& p, Normalization norm) {
  auto m = CocycleMatrix<S>::identity(set, norm);
  m.multiply_step(i, p);
  return m;
}

template <class S>
CocycleMatrix<S> cocycle(const IndexSet& set, const Word& w, const ProbVector& p, Normalization norm) {
  auto m = CocycleMatrix<S>::identity(set, norm);
  for (Symbol i : w) m.multiply_step(i, p);
  return m;
}

template class CocycleMatrix<double>;
template class CocycleMatrix<Rational>;
template CocycleMatrix<double> step_matrix(const IndexSet&, Symbol, const ProbVector&, Normalization);
template CocycleMatrix<Rational> step_matrix(const IndexSet&, Symbol, const ProbVector&, Normalization);
template CocycleMatrix<double> cocycle(const IndexSet&, const Word&, const ProbVector&, Normalization);
template CocycleMatrix<Rational> cocycle(const IndexSet&, const Word&, const ProbVector&, Normalization);

std::vector<double> cylinder_increment(const IndexSet& set, const Word& w, const ProbVector& p) {
  auto a = cocycle<double>(set, w, p);
  std::vector<double> u(set.size());
  for (std::size_t k = 0; k < set.size(); ++k) u[k] = -a(k, 0);
  return u;
}

std::vector<Rational> cylinder_increment_exact(const IndexSet& set, const Word& w, const ProbVector& p) {
  auto a = cocycle<Rational>(set, w, p);
  std::vector<Rational> u(set.size());
  for (std::size_t k = 0; k < set.size(); ++k) u[k] = -a(k, 0);
  return u;
}

// Pointwise evaluation works with a single row r of the running product
// A_0(w): right-multiplying by a step only needs r itself.

TakagiEvaluator::TakagiEvaluator(const IFSystem& system, const ProbVector& p, MultiIndex n)
    : system_(&system), p_(p), n_(std::move(n)), set_(n_), hull_(attractor_hull(system)) {
  if (n_.size() != system.free_count())
    throw std::invalid_argument("multi-index length must equal the number of free probabilities");
  target_ = set_.position(n_);
  osc_.assign(set_.size(), 0.0);
  osc_[0] = 1.0;
  const std::size_t alphabet = system.size();
  std::size_t depth = 1;
  while (depth < 12 && std::pow(static_cast<double>(alphabet), static_cast<double>(depth + 1)) <= 4096.0) ++depth;
  std::size_t words = 1;
  for (std::size_t d = 0; d < depth; ++d) words *= alphabet;
  Word w(depth);
  for (std::size_t k = 1; k < set_.size(); ++k) {
    double best = 0.0;
    for (std::size_t code = 0; code < words; ++code) {
      std::size_t c = code;
      for (std::size_t d = 0; d < depth; ++d) {
        w[d] = c % alphabet;
        c /= alphabet;
      }
      best = std::max({best, std::abs(endpoint_row(w, false, k)), std::abs(endpoint_row(w, true, k))});
    }
    // Endpoint samples under-read the supremum; a factor 2 covers the
    // in-between excursions seen on the test systems.
    osc_[k] = 2.0 * best;
  }
}

void TakagiEvaluator::step_row(std::vector<double>& r, Symbol i) const {
  const std::size_t s = set_.dims();
  const double pi = p_[i];
  for (std::size_t c = 0; c < r.size(); ++c) {
    double v = r[c] * pi;
    const MultiIndex& mc = set_[c];
    if (i < s) {
      if (auto up = set_.raise(c, i)) v += r[*up] * (mc[i] + 1);
    } else {
      for (std::size_t j = 0; j < s; ++j)
        if (auto up = set_.raise(c, j)) v -= r[*up] * (mc[j] + 1);
    }
    r[c] = v;  // raise() only looks at higher positions, still unmodified
  }
}

double TakagiEvaluator::sibling_increment(const std::vector<double>& r, Symbol i) const {
  const std::size_t s = set_.dims();
  double v = r[0] * p_[i];
  if (i < s) {
    if (auto up = set_.raise(0, i)) v += r[*up];
  } else {
    for (std::size_t j = 0; j < s; ++j)
      if (auto up = set_.raise(0, j)) v -= r[*up];
  }
  return v;
}

double TakagiEvaluator::endpoint_row(const Word& w, bool right_end, std::size_t row) const {
  std::vector<double> r(set_.size(), 0.0);
  r[row] = 1.0;
  double value = 0.0;
  for (Symbol k : w) {
    for (Symbol i = 0; i < k; ++i) value += sibling_increment(r, i);
    step_row(r, k);
  }
  return right_end ? value + r[0] : value;
}

CValue TakagiEvaluator::operator()(double x, std::size_t depth) const {
  if (target_ == 0) {
    auto t = eval_T(*system_, p_, x, 1e-17);
    return {t.value, t.err_bound};
  }
  if (x <= hull_.lo || x >= hull_.hi) return {0.0, 0.0};
  CodingWalker<double> walker(*system_, hull_, x);
  std::vector<double> r(set_.size(), 0.0);
  r[target_] = 1.0;
  double value = 0.0;
  while (walker.depth() < depth) {
    if (walker.location() == Location::LeftEndpoint) return {value, 0.0};
    if (walker.location() == Location::RightEndpoint) return {value + r[0], 0.0};
    if (!walker.advance()) {
      if (auto below = walker.gap_after())
        for (Symbol i = 0; i <= *below; ++i) value += sibling_increment(r, i);
      return {value, 0.0};
    }
    Symbol k = walker.word().back();
    for (Symbol i = 0; i < k; ++i) value += sibling_increment(r, i);
    step_row(r, k);
  }
  if (walker.location() == Location::LeftEndpoint) return {value, 0.0};
  if (walker.location() == Location::RightEndpoint) return {value + r[0], 0.0};
  double tail = 0.0;
  for (std::size_t m = 0; m < r.size(); ++m) tail += std::abs(r[m]) * osc_[m];
  return {value, tail};
}

CValue eval_C(const IFSystem& system, const ProbVector& p, const MultiIndex& n, double x, std::size_t depth) {
  return TakagiEvaluator(system, p, n)(x, depth);
}

const SeriesLevel& TakagiSeries::at(const MultiIndex& m) const {
  auto it = levels.find(m);
  if (it == levels.end()) throw std::out_of_range("series level not computed");
  return it->second;
}

namespace {

struct Forcing {
  GridFunction g;
  double interpolation = 0.0;
};

Forcing forcing(const IFSystem& system, const TakagiSeries& series, const MultiIndex& m) {
  const Symbol last = system.last_symbol();
  const auto& nodes = series.nodes;
  std::vector<double> g(nodes.size(), 0.0);
  double interp = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double x = nodes[k];
    double err = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      MultiIndex lower = m;
      --lower[i];
      const GridFunction& c = series.at(lower).values;
      auto a = c.lookup(system.branch(i)(x));
      auto b = c.lookup(system.branch(last)(x));
      g[k] += m[i] * (a.value - b.value);
      err += m[i] * (a.error + b.error);
    }
    interp = std::max(interp, err);
  }
  return {GridFunction(nodes, std::move(g), 0.0, 0.0), interp};
}

}  // namespace

GridFunction forcing_term(const IFSystem& system, const TakagiSeries& series, const MultiIndex& n) {
  return forcing(system, series, n).g;
}

TakagiSeries eval_C_series(const IFSystem& system, const ProbVector& p, const MultiIndex& n,
                           std::vector<double> nodes, std::size_t max_terms) {
  if (n.size() != system.free_count())
    throw std::invalid_argument("multi-index length must equal the number of free probabilities");
  const double eps = std::numeric_limits<double>::epsilon();
  TakagiSeries series;
  series.nodes = std::move(nodes);
  IndexSet set(n);

  SeriesLevel base;
  base.values = T_grid(system, p, series.nodes, 1e-17);
  base.tail = 1e-17;
  base.rounding = 8 * eps;
  series.levels.emplace(set[0], std::move(base));

  double pmax = 0.0;
  for (double v : p.values()) pmax = std::max(pmax, v);
  // sum_k sup|M^k d| <= 2 sup|d| / (1 - pmax) for d vanishing off the hull.
  const double amplification = 2.0 / (1.0 - pmax);

  for (std::size_t k = 1; k < set.size(); ++k) {
    const MultiIndex& m = set[k];
    Forcing f = forcing(system, series, m);
    SeriesLevel level;
    double inherited = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m[i] == 0) continue;
      MultiIndex lower = m;
      --lower[i];
      inherited += 2.0 * m[i] * series.at(lower).error_bound();
    }
    level.propagated = amplification * inherited;

    std::vector<double> sum = f.g.values();
    GridFunction term = f.g;
    double interp = amplification * f.interpolation;
    double prev = term.sup_norm(), cur = prev;
    double ratio = 0.0;
    std::size_t terms = 1;
    double sup_sum = 0.0;
    while (terms < max_terms && cur > 0.0) {
      AppliedGrid next = apply_M(system, p, term);
      interp += amplification * next.interpolation_bound;
      term = std::move(next.h);
      ++terms;
      prev = cur;
      cur = term.sup_norm();
      ratio = prev > 0 ? cur / prev : 0.0;
      for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += term.values()[j];
      if (cur <= 1e-19 * std::max(1.0, prev)) break;
    }
    for (double v : sum) sup_sum = std::max(sup_sum, std::abs(v));
    level.terms = terms;
    if (cur == 0.0) {
      level.tail = 0.0;
    } else if (terms >= 2 && ratio < 1.0) {
      level.tail = cur * ratio / (1.0 - ratio);
    } else {
      level.tail = std::numeric_limits<double>::infinity();
      level.inconclusive = true;
    }
    level.interpolation_bound = interp;
    level.rounding = 4.0 * eps * static_cast<double>(terms) * std::max(sup_sum, f.g.sup_norm());
    level.values = GridFunction(series.nodes, std::move(sum), 0.0, 0.0);
    series.levels.emplace(m, std::move(level));
  }
  return series;
}

double functional_equation_residual(const IFSystem& system, const ProbVector& p,
                                    const TakagiSeries& series, const MultiIndex& n) {
  const GridFunction& c = series.at(n).values;
  GridFunction mc = apply_M(system, p, c).h;
  GridFunction g = forcing(system, series, n).g;
  double r = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k)
    r = std::max(r, std::abs(c.values()[k] - mc.values()[k] - g.values()[k]));
  return r;
}

double fd_oracle(const IFSystem& system, const ProbVector& p, const MultiIndex& n, double x, double h) {
  const std::size_t s = system.free_count();
  if (n.size() != s) throw std::invalid_argument("multi-index length must equal the number of free probabilities");
  if (!(h > 0)) throw std::invalid_argument("fd_oracle: h must be positive");
  for (unsigned v : n)
    if (v > 2) throw std::invalid_argument("fd_oracle: stencils only for partial orders up to 2");
  const unsigned total = order(n);
  const double tol = std::min(1e-17, 1e-3 * std::pow(h, total + 1));
  const std::vector<double> base = p.free_values();

  // Per coordinate: offsets (in units of h) and weights.
  struct Tap {
    int offset;
    double weight;
  };
  std::vector<std::vector<Tap>> taps(s);
  for (std::size_t j = 0; j < s; ++j) {
    switch (n[j]) {
      case 0: taps[j] = {{0, 1.0}}; break;
      case 1: taps[j] = {{1, 0.5 / h}, {-1, -0.5 / h}}; break;
      default: taps[j] = {{1, 1.0 / (h * h)}, {0, -2.0 / (h * h)}, {-1, 1.0 / (h * h)}}; break;
    }
  }
  std::vector<std::size_t> pick(s, 0);
  double acc = 0.0;
  while (true) {
    std::vector<double> q = base;
    double weight = 1.0, free_sum = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      q[j] += taps[j][pick[j]].offset * h;
      weight *= taps[j][pick[j]].weight;
      if (!(q[j] > 0 && q[j] < 1)) throw std::domain_error("fd_oracle: stencil leaves the simplex");
      free_sum += q[j];
    }
    if (!(free_sum < 1)) throw std::domain_error("fd_oracle: stencil leaves the simplex");
    acc += weight * eval_T(system, ProbVector::from_free(q), x, tol).value;
    std::size_t j = 0;
    for (; j < s; ++j) {
      if (++pick[j] < taps[j].size()) break;
      pick[j] = 0;
    }
    if (j == s) break;
  }
  return acc;
}

}  // namespace holderlab
