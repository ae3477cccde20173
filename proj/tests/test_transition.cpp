#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "holderlab/transition.hpp"
#include "oracles.hpp"

using namespace holderlab;

namespace {

GridFunction constant(const std::vector<double>& nodes, double c) {
  return GridFunction(nodes, std::vector<double>(nodes.size(), c), c, c);
}

}  // namespace

TEST_CASE("grid function lookup") {
  GridFunction h({0.0, 1.0, 2.0}, {0.0, 2.0, 3.0}, -1.0, 5.0);
  CHECK(h(0.5) == 1.0);
  CHECK(h(1.0) == 2.0);
  CHECK(h.lookup(1.0).error == 0.0);
  CHECK(h.lookup(1.5).error == doctest::Approx(1.0));
  CHECK(h(-3.0) == -1.0);
  CHECK(h(7.0) == 5.0);
  CHECK(h.sup_norm() == 5.0);
  CHECK_THROWS(GridFunction({0.0, 0.0}, {1.0, 1.0}, 0.0, 0.0));
}

TEST_CASE("hull grid is aligned with the hull") {
  auto p = fixtures::half();
  auto s = fixtures::dyadic(p);
  auto nodes = hull_grid(s, 256, 0.25);
  CHECK(nodes.size() == 256 + 1 + 2 * 64);
  CHECK(nodes[64] == 0.0);
  CHECK(nodes[64 + 256] == 1.0);
  CHECK(nodes.front() == -0.25);
}

TEST_CASE("apply_M basic properties") {
  auto p = fixtures::quarter();
  auto s = fixtures::dyadic(p);
  auto nodes = hull_grid(s, 512);

  SUBCASE("constants are preserved exactly") {
    auto m = apply_M(s, p, constant(nodes, 0.7));
    for (double v : m.h.values()) CHECK(v == 0.7);
    CHECK(m.h.boundary_left() == 0.7);
    CHECK(m.h.boundary_right() == 0.7);
  }
  SUBCASE("monotone and sup-contracting") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(nodes.size()), b(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      a[k] = u(gen);
      b[k] = a[k] + std::abs(u(gen));
    }
    GridFunction ha(nodes, a, -0.5, 0.5), hb(nodes, b, -0.5, 0.9);
    auto ma = apply_M(s, p, ha).h;
    auto mb = apply_M(s, p, hb).h;
    for (std::size_t k = 0; k < nodes.size(); ++k) CHECK(ma.values()[k] <= mb.values()[k]);
    CHECK(ma.sup_norm() <= ha.sup_norm());
    CHECK(mb.sup_norm() <= hb.sup_norm());
  }
  SUBCASE("T is a fixed point up to interpolation") {
    auto t = T_grid(s, p, nodes, 1e-16);
    auto m = apply_M(s, p, t);
    for (std::size_t k = 0; k < nodes.size(); ++k)
      CHECK(std::abs(m.h.values()[k] - t.values()[k]) <= m.interpolation_bound + 1e-15);
  }
}

TEST_CASE("apply_M on the clipped identity") {
  auto p = fixtures::half();
  auto s = fixtures::dyadic(p);
  auto nodes = hull_grid(s, 64);
  auto h = GridFunction::sample(nodes, [](double x) { return std::clamp(x, 0.0, 1.0); }, 0.0, 1.0);
  auto m = apply_M(s, p, h).h;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (nodes[k] >= 0.0 && nodes[k] <= 1.0) CHECK(m.values()[k] == doctest::Approx(nodes[k]).epsilon(1e-15));
  CHECK(m(0.5) == 0.5);
}

TEST_CASE("eval_T examples") {
  auto ph = fixtures::half();
  auto dh = fixtures::dyadic(ph);
  auto v = eval_T(dh, ph, 0.3, 1e-15);
  CHECK(std::abs(v.value - 0.3) <= 1e-15);
  CHECK(v.err_bound <= 1e-15);

  auto pq = fixtures::quarter();
  auto dq = fixtures::dyadic(pq);
  CHECK(eval_T(dq, pq, 0.5).value == 0.25);
  CHECK(eval_T(dq, pq, -5.0).value == 0.0);
  CHECK(eval_T(dq, pq, 0.0).value == 0.0);
  CHECK(eval_T(dq, pq, 1.0).value == 1.0);
  CHECK(eval_T(dq, pq, 9.0).value == 1.0);
  CHECK_THROWS_AS(eval_T(dq, pq, 0.5, 0.0), std::invalid_argument);

  auto c = fixtures::cantor(ph);
  CHECK(eval_T(c, ph, 0.5).value == 0.5);
  CHECK(eval_T(c, ph, 0.2).value == 0.25);
}

TEST_CASE("eval_T against the cylinder-mass oracle") {
  auto pq = fixtures::quarter();
  auto dq = fixtures::dyadic(pq);
  oracle::CylinderCdf cdf({{Rational(2), Rational(0)}, {Rational(2), Rational(-1)}}, {Rational(1, 4), Rational(3, 4)},
                         Rational(0), Rational(1), 12);
  std::mt19937_64 gen(17);
  double last = -1.0;
  for (int k = 0; k <= 4096; k += 1 + static_cast<int>(gen() % 7)) {
    Rational x(k, 4096);
    Rational expected = cdf(x);
    auto exact = eval_T_exact(dq, pq, x, Rational(1, 1) / Rational(boost::multiprecision::cpp_int(1) << 200));
    CHECK(exact.value == expected);
    CHECK(exact.err_bound == 0);
    double f = eval_T(dq, pq, to_double(x), 1e-17).value;
    CHECK(std::abs(f - to_double(expected)) <= 1e-15);
    CHECK(f >= last);
    last = f;
  }

  auto pc = fixtures::quarter();
  auto c = fixtures::cantor(pc);
  oracle::CylinderCdf ccdf({{Rational(3), Rational(0)}, {Rational(3), Rational(-2)}},
                          {Rational(1, 4), Rational(3, 4)}, Rational(0), Rational(1), 8);
  for (Rational x : {Rational(1, 3), Rational(2, 3), Rational(7, 27), Rational(20, 81), Rational(1, 2)})
    CHECK(eval_T_exact(c, pc, x, Rational(1, 1000000)).value == ccdf(x));
}

TEST_CASE("iterate_M") {
  auto ph = fixtures::half();
  auto dh = fixtures::dyadic(ph);
  auto nodes = hull_grid(dh, 1024);

  SUBCASE("step at the midpoint converges to the identity") {
    auto h0 = GridFunction::sample(nodes, [](double x) { return x < 0.5 ? 0.0 : 1.0; }, 0.0, 1.0);
    auto d = iterate_M(dh, ph, h0, 30);
    CHECK_FALSE(d.diverging);
    CHECK(d.residuals.back() < d.residuals.front() * 1e-3);
    CHECK(d.rate > 0.0);
    CHECK(d.rate < 1.0);
  }
  SUBCASE("equal boundaries give a constant limit") {
    auto h0 = GridFunction::sample(nodes, [](double x) { return std::sin(7 * x); }, 0.3, 0.3);
    auto d = iterate_M(dh, ph, h0, 40);
    CHECK(d.residuals.back() < 1e-6);
  }
  SUBCASE("T itself sits at the floor") {
    auto pq = fixtures::quarter();
    auto dq = fixtures::dyadic(pq);
    auto t = T_grid(dq, pq, hull_grid(dq, 1024), 1e-16);
    auto d = iterate_M(dq, pq, t, 10);
    for (double r : d.residuals) CHECK(r <= 1e-13);
  }
}

TEST_CASE("holder seminorm") {
  auto nodes = uniform_grid(0.0, 1.0, 1025);
  CHECK(holder_seminorm(constant(nodes, 2.0), 0.5) == 0.0);
  auto id = GridFunction::sample(nodes, [](double x) { return x; }, 0.0, 1.0);
  double v = holder_seminorm(id, 1.0);
  CHECK(v >= 1.0);
  CHECK(v <= 4.0);
  CHECK(holder_seminorm(id, 1.0, SeminormMode::Multiscale) <= v);

  auto pq = fixtures::quarter();
  auto dq = fixtures::dyadic(pq);
  std::vector<double> sweep;
  for (std::size_t cells : {256u, 1024u, 4096u})
    sweep.push_back(holder_seminorm(T_grid(dq, pq, hull_grid(dq, cells)), 0.5, SeminormMode::Multiscale));
  CHECK(sweep[1] > sweep[0] * 1.1);
  CHECK(sweep[2] > sweep[1] * 1.1);
}

TEST_CASE("gap probe verdicts") {
  auto pq = fixtures::quarter();
  auto dq = fixtures::dyadic(pq);
  CHECK(gap_probe(dq, pq, 0.3, 40, 4096).verdict == GapVerdict::Bounded);
  auto grow = gap_probe(dq, pq, 0.6, 40, 4096);
  CHECK(grow.verdict == GapVerdict::Growing);
  CHECK(grow.norms.size() == 41);
  for (double n : grow.norms) CHECK(n >= 0.0);

  auto ph = fixtures::half();
  auto dh = fixtures::dyadic(ph);
  CHECK(gap_probe(dh, ph, 0.9, 40, 4096).verdict == GapVerdict::Bounded);
  CHECK(std::string(to_string(GapVerdict::Inconclusive)) == "inconclusive");
}
