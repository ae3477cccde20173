#pragma once
// Systems shared by the unit tests and the acceptance binary.

#include <vector>

#include "holderlab/ifs.hpp"

namespace fixtures {

using holderlab::Branch;
using holderlab::IFSystem;
using holderlab::ProbVector;
using holderlab::Rational;

inline ProbVector prob(std::vector<Rational> free) { return ProbVector::from_free(std::move(free)); }
inline ProbVector prob(std::vector<double> free) { return ProbVector::from_free(free); }

inline IFSystem affine(const std::vector<std::pair<Rational, Rational>>& maps, double lo, double hi,
                       const ProbVector& p) {
  IFSystem s;
  for (const auto& [a, b] : maps) s.branches.push_back(Branch::affine(a, b));
  s.open_set = {lo, hi};
  return holderlab::validated(std::move(s), p);
}

// f1 = 2x, f2 = 2x - 1 on (0, 1)
inline IFSystem dyadic(const ProbVector& p) {
  return affine({{Rational(2), Rational(0)}, {Rational(2), Rational(-1)}}, 0.0, 1.0, p);
}

// f1 = 3x, f2 = 3x - 2 on (0, 1)
inline IFSystem cantor(const ProbVector& p) {
  return affine({{Rational(3), Rational(0)}, {Rational(3), Rational(-2)}}, 0.0, 1.0, p);
}

// f1 = 3x, f2 = 3x - 1, f3 = 3x - 2: three touching branches, s = 2
inline IFSystem triadic(const ProbVector& p) {
  return affine({{Rational(3), Rational(0)}, {Rational(3), Rational(-1)}, {Rational(3), Rational(-2)}}, 0.0, 1.0, p);
}

inline ProbVector quarter() { return prob(std::vector<Rational>{Rational(1, 4)}); }
inline ProbVector half() { return prob(std::vector<Rational>{Rational(1, 2)}); }

}  // namespace fixtures
