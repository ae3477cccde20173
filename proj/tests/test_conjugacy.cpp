#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "holderlab/conjugacy.hpp"
#include "holderlab/holder.hpp"
#include "holderlab/thermo.hpp"
#include "holderlab/transition.hpp"

using namespace holderlab;

TEST_CASE("linear model") {
  auto ph = fixtures::half();
  auto m = linear_model(ph);
  CHECK(m.branch(0).affine_map().slope == 2);
  CHECK(m.branch(0).affine_map().intercept == 0);
  CHECK(m.branch(1).affine_map().slope == 2);
  CHECK(m.branch(1).affine_map().intercept == -1);

  auto pq = fixtures::quarter();
  auto q = linear_model(pq);
  CHECK(q.branch(0).affine_map().slope == 4);
  CHECK(q.branch(1).affine_map().slope == Rational(4, 3));
  CHECK(q.branch(1).affine_map().intercept == Rational(-1, 3));
  CHECK(q.flags.osc);

  auto three = linear_model(ProbVector::from_free(std::vector<Rational>{Rational(1, 5), Rational(3, 10)}));
  CHECK(three.flags.osc);
  auto hull = attractor_hull(three);
  CHECK(hull.lo == 0.0);
  CHECK(hull.hi == 1.0);
}

TEST_CASE("phi examples") {
  auto pq = fixtures::quarter();
  auto d = fixtures::dyadic(pq);
  CHECK(phi(d, pq, 0.0).point == 0.0);
  CHECK(phi(d, pq, 0.5).point == 0.25);
  CHECK(phi(d, pq, 1.0).point == 1.0);
  auto ph = fixtures::half();
  auto c = fixtures::cantor(ph);
  CHECK(phi(c, ph, 1.0).point == 1.0);
  CHECK(phi(c, ph, 0.5).point == 0.5);
}

TEST_CASE("phi agrees with T and is monotone") {
  auto pq = fixtures::quarter();
  for (const auto& s : {fixtures::dyadic(pq), fixtures::cantor(pq)}) {
    std::mt19937_64 gen(61);
    std::vector<double> xs;
    for (int k = 0; k < 1000; ++k) {
      Word w(40);
      for (auto& sym : w) sym = gen() % 2;
      xs.push_back(hull_cylinder(s, w).mid());
    }
    std::sort(xs.begin(), xs.end());
    double last = -1.0;
    for (double x : xs) {
      auto a = phi(s, pq, x, 1e-14);
      auto t = eval_T(s, pq, x, 1e-14);
      CHECK(std::abs(a.point - t.value) <= 2e-14 + 1e-15);
      CHECK(a.point >= last);
      last = a.point;
    }
  }
}

TEST_CASE("conjugacy residual") {
  auto ph = fixtures::half();
  auto pq = fixtures::quarter();
  auto dyadic_half = conjugacy_residual(fixtures::dyadic(ph), ph, 500, 1, 1);
  CHECK(dyadic_half.max_residual <= 1e-10);
  CHECK(dyadic_half.samples == 500);
  CHECK(conjugacy_residual(fixtures::dyadic(pq), pq, 500, 2, 2).max_residual <= 1e-9);
  CHECK(conjugacy_residual(fixtures::cantor(ph), ph, 500, 3, 2).max_residual <= 1e-9);
  auto a = conjugacy_residual(fixtures::dyadic(pq), pq, 200, 8, 1);
  auto b = conjugacy_residual(fixtures::dyadic(pq), pq, 200, 8, 3);
  CHECK(a.max_residual == b.max_residual);
}

TEST_CASE("rigidity reports") {
  auto ph = fixtures::half();
  auto fair = rigidity_report(fixtures::dyadic(ph), ph);
  CHECK(fair.rigid);
  CHECK(fair.verdict() == "rigid");
  CHECK(fair.delta == doctest::Approx(1.0));
  CHECK(fair.seminorm_bounded);

  auto pq = fixtures::quarter();
  auto biased = rigidity_report(fixtures::dyadic(pq), pq);
  CHECK_FALSE(biased.rigid);
  CHECK(biased.verdict() == "non-rigid");
  CHECK_FALSE(biased.seminorm_bounded);
  CHECK(biased.sweep_cells.size() == biased.sweep_seminorms.size());

  // p_i = a_i^-delta with slopes (2, 4)
  double delta = moran_dimension({2.0, 4.0});
  auto p = ProbVector::from_free(std::vector<double>{std::pow(2.0, -delta)});
  IFSystem s;
  s.branches = {Branch::affine(2.0, 0.0), Branch::affine(4.0, -3.0)};
  s.open_set = {0.0, 1.0};
  s = validated(s, p);
  auto r = rigidity_report(s, p, 1e-9);
  CHECK(r.rigid);
  CHECK(std::abs(r.alpha_minus - r.delta) <= 1e-9);
  CHECK(r.seminorm_bounded);
  CHECK(r.max_conjugacy_residual <= 1e-9);
}
