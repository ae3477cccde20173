// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "holderlab/conjugacy.hpp"
#include "holderlab/holder.hpp"
#include "holderlab/stats.hpp"
#include "holderlab/takagi.hpp"
#include "holderlab/thermo.hpp"
#include "holderlab/transition.hpp"
#include "oracles.hpp"

using namespace holderlab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const char* name, double limit_seconds, const std::function<void(Outcome&)>& body) {
  Outcome out;
  auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail << " [exception: " << e.what() << "]";
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > limit_seconds) {
    out.pass = false;
    out.detail << " [runtime over " << limit_seconds << " s]";
  }
  if (!out.pass) ++failures;
  std::printf("%s %2d %s:%s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.str().c_str(), secs);
  std::fflush(stdout);
}

Word random_word(std::mt19937_64& gen, std::size_t len, std::size_t alphabet) {
  Word w(len);
  for (auto& s : w) s = gen() % alphabet;
  return w;
}

const double kLog2 = std::log(2.0);

}  // namespace

int main() {
  criterion(1, "identity at p = 1/2", 1.0, [](Outcome& o) {
    auto p = fixtures::half();
    auto s = fixtures::dyadic(p);
    const double tol = std::ldexp(1.0, -50);
    double worst = 0.0;
    for (int k = 0; k <= 4096; ++k) {
      double x = k / 4096.0;
      worst = std::max(worst, std::abs(eval_T(s, p, x, tol).value - x));
      double y = (k + (std::sqrt(5.0) - 1) / 2) / 4097.0;  // off the dyadic lattice
      worst = std::max(worst, std::abs(eval_T(s, p, y, tol).value - y));
    }
    o.detail << " max |T(x) - x| = " << worst;
    o.require(worst <= 1e-12, "deviation above 1e-12");
  });

  criterion(2, "exact CDF oracle at p = (1/4, 3/4)", 5.0, [](Outcome& o) {
    auto p = fixtures::quarter();
    auto s = fixtures::dyadic(p);
    oracle::CylinderCdf cdf({{Rational(2), Rational(0)}, {Rational(2), Rational(-1)}},
                           {Rational(1, 4), Rational(3, 4)}, Rational(0), Rational(1), 10);
    const Rational rtol = Rational(1) / Rational(boost::multiprecision::cpp_int(1) << 120);
    double worst = 0.0;
    std::size_t exact_mismatch = 0;
    bool monotone = true;
    double last = -1.0;
    for (int k = 0; k <= 1024; ++k) {
      Rational x(k, 1024);
      Rational truth = cdf(x);
      double f = eval_T(s, p, to_double(x), 1e-17).value;
      worst = std::max(worst, std::abs(f - to_double(truth)));
      if (eval_T_exact(s, p, x, rtol).value != truth) ++exact_mismatch;
      monotone = monotone && f >= last;
      last = f;
    }
    o.detail << " float max dev " << worst << ", rational mismatches " << exact_mismatch
             << ", monotone " << (monotone ? "yes" : "no");
    o.require(worst <= 1e-14, "float deviation");
    o.require(exact_mismatch == 0, "rational mismatch");
    o.require(monotone, "monotonicity");
  });

  criterion(3, "series vs finite differences at p = 0.3", 30.0, [](Outcome& o) {
    auto p = fixtures::prob(std::vector<double>{0.3});
    auto s = fixtures::dyadic(p);
    auto series = eval_C_series(s, p, {1}, hull_grid(s, 1024));
    const auto& c = series.at({1}).values;
    double dev_h = 0.0, dev_h2 = 0.0;
    for (std::size_t k = 0; k < series.nodes.size(); ++k) {
      double x = series.nodes[k];
      if (x < 0.0 || x > 1.0) continue;
      dev_h = std::max(dev_h, std::abs(c.values()[k] - fd_oracle(s, p, {1}, x, 1e-4)));
      dev_h2 = std::max(dev_h2, std::abs(c.values()[k] - fd_oracle(s, p, {1}, x, 5e-5)));
    }
    double ratio = dev_h / dev_h2;
    o.detail << " dev(h=1e-4) " << dev_h << ", dev(h/2) " << dev_h2 << ", ratio " << ratio;
    o.require(dev_h <= 1e-5, "deviation above 1e-5");
    o.require(ratio >= 3.0, "halving h gains less than 3x");
  });

  criterion(4, "functional-equation residual", 10.0, [](Outcome& o) {
    auto p = fixtures::quarter();
    auto s = fixtures::dyadic(p);
    // an aligned hull grid and a uniform grid that is not mapped onto itself
    std::vector<std::vector<double>> grids{hull_grid(s, 2048), uniform_grid(-0.3, 1.3, 3001)};
    for (const auto& nodes : grids) {
      auto series = eval_C_series(s, p, {2}, nodes);
      for (MultiIndex n : {MultiIndex{1}, MultiIndex{2}}) {
        double r = functional_equation_residual(s, p, series, n);
        double bound = series.at(n).error_bound();
        o.detail << " n=" << n[0] << ": " << r << " <= 5 * " << bound << ";";
        o.require(r <= 5 * bound, "residual above 5x bound");
      }
    }
  });

  criterion(5, "pressure anchors", 1.0, [](Outcome& o) {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> slope(2.0, 6.0), prob(0.05, 0.95);
    double worst_t1 = 0.0, worst_moran = 0.0;
    for (int k = 0; k < 10; ++k) {
      double a1 = slope(gen), a2 = slope(gen);
      auto p = fixtures::prob(std::vector<double>{prob(gen)});
      IFSystem s;
      s.branches = {Branch::affine(a1, 0.0), Branch::affine(a2, 1.0 - a2)};
      s.open_set = {0.0, 1.0};
      s = validated(s, p);
      worst_t1 = std::max(worst_t1, std::abs(solve_t(s, p, 1.0)));
      double t0 = solve_t(s, p, 0.0);
      worst_moran = std::max(worst_moran, std::abs(std::pow(a1, -t0) + std::pow(a2, -t0) - 1.0));
    }
    auto ph = fixtures::half();
    double cantor = std::abs(solve_t(fixtures::cantor(ph), ph, 0.0) - oracle::moran_equal(2, 3.0));
    o.detail << " max |t(1)| " << worst_t1 << ", Moran residual " << worst_moran << ", Cantor t(0) error " << cantor;
    o.require(worst_t1 <= 1e-13, "t(1)");
    o.require(worst_moran <= 1e-12, "Moran residual");
    o.require(cantor <= 1e-12, "Cantor dimension");
  });

  criterion(6, "spectrum shape at p = (1/4, 3/4)", 10.0, [](Outcome& o) {
    auto p = fixtures::quarter();
    auto s = fixtures::dyadic(p);
    auto ends = alpha_endpoints(s, p);
    double am_err = std::abs(ends.alpha_minus - std::log(4.0 / 3.0) / kLog2);
    double ap_err = std::abs(ends.surrogate_plus - 2.0);
    auto top = spectrum_point(s, p, ends.alpha_zero, ends);
    double g0_err = top.g ? std::abs(*top.g - 1.0) : INFINITY;

    std::vector<double> alphas, g;
    for (int k = 0; k < 200; ++k) {
      double a = ends.alpha_minus + (ends.alpha_plus - ends.alpha_minus) * k / 199.0;
      auto pt = spectrum_point(s, p, a, ends);
      alphas.push_back(a);
      g.push_back(pt.g.value_or(NAN));
    }
    double max_second = -INFINITY;
    for (std::size_t k = 1; k + 1 < g.size(); ++k) max_second = std::max(max_second, g[k - 1] - 2 * g[k] + g[k + 1]);

    double duality = 0.0;
    for (int k = 0; k < 200; ++k) {
      double beta = -10.0 + 20.0 * k / 199.0;
      auto w = gibbs(s, p, beta);
      auto pt = spectrum_point(s, p, -w.t_prime, ends);
      duality = std::max(duality, pt.g ? std::abs(*pt.g - (w.t - beta * w.t_prime)) : INFINITY);
    }
    o.detail << " alpha_- err " << am_err << ", alpha_+ surrogate err " << ap_err << ", g(alpha_0) err " << g0_err
             << ", max second difference " << max_second << ", duality " << duality;
    o.require(am_err <= 1e-10, "alpha_-");
    o.require(ap_err <= 1e-6, "alpha_+");
    o.require(g0_err <= 1e-9, "g(alpha_0)");
    o.require(max_second <= 1e-8, "concavity");
    o.require(duality <= 1e-9, "duality");
  });

  criterion(7, "cocycle suite", 30.0, [](Outcome& o) {
    auto p = fixtures::quarter();
    {
      IndexSet set({1});
      CocycleMatrix<Rational> a = CocycleMatrix<Rational>::identity(set, Normalization::Weighted);
      std::size_t bad = 0;
      for (std::size_t k = 1; k <= 1000; ++k) {
        a.multiply_step(0, p);
        if (a(1, 0) != Rational(k) / p.exact(0)) ++bad;
      }
      o.detail << " A(1^k)_{1,0} mismatches " << bad << ";";
      o.require(bad == 0, "A(1^k)_{1,0} = k/p_1");
    }
    {
      auto p3 = ProbVector::from_free(std::vector<Rational>{Rational(1, 5), Rational(3, 10)});
      IndexSet set({2, 2});
      std::mt19937_64 gen(7);
      std::size_t bad = 0;
      for (int trial = 0; trial < 1000; ++trial) {
        Word w = random_word(gen, 1 + gen() % 24, 3);
        auto a = cocycle<Rational>(set, w, p3, Normalization::Weighted);
        for (std::size_t r = 0; r < set.size(); ++r)
          for (std::size_t c = 0; c < set.size(); ++c) {
            bool below = true;
            for (std::size_t j = 0; j < set.dims(); ++j) below = below && set[c][j] <= set[r][j];
            if (r == c && a(r, c) != 1) ++bad;
            if (!below && a(r, c) != 0) ++bad;
          }
      }
      o.detail << " diagonal/triangularity violations " << bad << ";";
      o.require(bad == 0, "diagonal/triangularity");
    }
    // growth bound |A_{q,r}| <= K k^{|q|}: K from words of length <= 500,
    // checked on the lengths 501..1000
    auto growth = [&](const ProbVector& q, const MultiIndex& bound, std::size_t alphabet, std::uint64_t seed) {
      IndexSet set(bound);
      std::mt19937_64 gen(seed);
      double k_fit = 0.0, worst_ratio = 0.0;
      for (int trial = 0; trial < 1000; ++trial) {
        std::size_t len = 1 + gen() % 1000;
        auto a = cocycle<double>(set, random_word(gen, len, alphabet), q, Normalization::Weighted);
        double ratio = 0.0;
        for (std::size_t r = 0; r < set.size(); ++r)
          for (std::size_t c = 0; c < set.size(); ++c)
            ratio = std::max(ratio, std::abs(a(r, c)) / std::pow(static_cast<double>(len), order(set[r])));
        if (len <= 500) k_fit = std::max(k_fit, ratio);
        else worst_ratio = std::max(worst_ratio, ratio);
      }
      return std::pair{k_fit, worst_ratio};
    };
    auto [k1, w1] = growth(p, {3}, 2, 11);
    auto [k2, w2] = growth(ProbVector::from_free(std::vector<Rational>{Rational(1, 5), Rational(3, 10)}), {2, 2}, 3, 13);
    o.detail << " K fitted " << k1 << " / " << k2 << ", held-out max ratio " << w1 << " / " << w2;
    o.require(w1 <= k1 && w2 <= k2, "growth bound on held-out words");
  });

  criterion(8, "classical Takagi proportionality", 10.0, [](Outcome& o) {
    auto p = fixtures::half();
    auto s = fixtures::dyadic(p);
    auto series = eval_C_series(s, p, {1}, hull_grid(s, 4096));
    const auto& c = series.at({1}).values;
    double lo = INFINITY, hi = -INFINITY;
    std::size_t used = 0;
    for (std::size_t k = 0; k < series.nodes.size(); ++k) {
      double x = series.nodes[k];
      if (x < 0.0 || x > 1.0) continue;
      double tau = oracle::takagi_partial(x, 30);
      if (tau <= 0.05) continue;
      double r = c.values()[k] / tau;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      ++used;
    }
    double mid = 0.5 * (lo + hi);
    o.detail << " measured constant " << mid << ", relative spread " << (hi - lo) / std::abs(mid) << " over " << used
             << " nodes";
    o.require(used > 0 && (hi - lo) <= 1e-3 * std::abs(mid), "ratio not constant");
  });

  criterion(9, "conjugacy residuals", 10.0, [](Outcome& o) {
    auto ph = fixtures::half();
    auto pq = fixtures::quarter();
    struct Case {
      const char* name;
      IFSystem s;
      ProbVector p;
    };
    std::vector<Case> cases{{"dyadic 1/2", fixtures::dyadic(ph), ph},
                            {"dyadic 1/4", fixtures::dyadic(pq), pq},
                            {"Cantor 1/2", fixtures::cantor(ph), ph}};
    for (std::size_t k = 0; k < cases.size(); ++k) {
      auto r = conjugacy_residual(cases[k].s, cases[k].p, 1000, 100 + k, 1);
      o.detail << " " << cases[k].name << ": " << r.max_residual << ";";
      o.require(r.max_residual <= 1e-9, cases[k].name);
    }
  });

  criterion(10, "gap dichotomy", 60.0, [](Outcome& o) {
    auto p = fixtures::quarter();
    auto s = fixtures::dyadic(p);
    auto low = gap_probe(s, p, 0.35, 60, 8192);
    auto high = gap_probe(s, p, 0.6, 60, 8192);
    auto nodes = hull_grid(s, 8192);
    auto h0 = GridFunction::sample(nodes, hull_ramp(s), 0.0, 1.0);
    auto d = iterate_M(s, p, h0, 60);
    o.detail << " alpha 0.35: " << to_string(low.verdict) << " (slope " << low.slope << "), alpha 0.6: "
             << to_string(high.verdict) << " (slope " << high.slope << "), iterate rate " << d.rate << " R^2 "
             << d.r_squared << " over n in [" << d.fit_begin << ", " << d.fit_end << ")";
    o.require(low.verdict == GapVerdict::Bounded, "verdict at 0.35");
    o.require(high.verdict == GapVerdict::Growing, "verdict at 0.6");
    o.require(d.r_squared >= 0.99 && !d.diverging, "exponential fit");
  });

  criterion(11, "global Hoelder sharpness", 60.0, [](Outcome& o) {
    auto p = fixtures::quarter();
    auto s = fixtures::dyadic(p);
    const double am = std::log(4.0 / 3.0) / kLog2;
    std::vector<std::size_t> cells{256, 512, 1024, 2048, 4096};
    std::vector<double> below, above;
    for (std::size_t c : cells) {
      auto t = T_grid(s, p, hull_grid(s, c), 1e-17);
      below.push_back(holder_seminorm(t, am - 0.01));
      above.push_back(holder_seminorm(t, am + 0.05));
    }
    auto [mn, mx] = std::minmax_element(below.begin(), below.end());
    bool stable = *mx <= 1.2 * below.front() && *mn >= 0.8 * below.front();
    double worst_growth = INFINITY;
    for (std::size_t k = 0; k + 2 < above.size(); ++k) worst_growth = std::min(worst_growth, above[k + 2] / above[k]);

    auto ph = fixtures::half();
    auto sh = fixtures::dyadic(ph);
    std::vector<double> lip;
    for (std::size_t c : cells) lip.push_back(holder_seminorm(eval_C_series(sh, ph, {1}, hull_grid(sh, c)).at({1}).values, 1.0));
    bool c1_grows = std::is_sorted(lip.begin(), lip.end()) && lip.back() > lip.front();

    o.detail << " V below alpha_-: " << below.front() << " .. " << below.back() << (stable ? " (stable)" : " (unstable)")
             << "; V above alpha_-: " << above.front() << " .. " << above.back() << ", min growth per two refinements "
             << worst_growth << "; V_1(C_1): " << lip.front() << " .. " << lip.back();
    o.require(stable, "stability below alpha_-");
    o.require(worst_growth >= 1.2, "growth >= 1.2x per two refinements above alpha_-");
    o.require(c1_grows, "V_1(C_1) growth");
  });

  criterion(12, "exponent consistency on the Cantor system", 120.0, [](Outcome& o) {
    auto p = fixtures::quarter();
    auto s = fixtures::cantor(p);
    Evaluator t = [&](double x) {
      auto v = eval_T(s, p, x, 1e-20);
      return CValue{v.value, v.err_bound};
    };
    std::vector<double> scales;
    for (int j = 1; j <= 20; ++j) scales.push_back(std::pow(3.0, -j));
    auto words = oracle::primitive_words(4);
    words.resize(20);
    double worst = 0.0;
    for (const auto& w : words) {
      double cr = cycle_ratio(s, p, w);
      auto e = emp_exponent(t, periodic_point(s, w), scales);
      worst = std::max(worst, std::abs(e.slope - cr) / cr);
    }
    o.detail << " 20 periodic words, worst relative error " << worst;
    o.require(worst <= 0.10, "relative error above 10%");
  });

  criterion(13, "non-differentiability probe", 5.0, [](Outcome& o) {
    auto p = fixtures::half();
    auto s = fixtures::dyadic(p);
    Word alt;
    for (int k = 0; k < 40; ++k) alt.push_back(k % 2);
    double x = periodic_point(s, {0, 1});
    Word coding = encode(s, x, 40).word;
    o.require(coding == alt, "coding of the periodic point");
    TakagiEvaluator c1(s, p, {1});
    auto reference = oracle::dyadic_quotients(alt);
    double lo = INFINITY, hi = -INFINITY, worst_ref = 0.0;
    for (std::size_t n = 20; n <= 40; ++n) {
      Word prefix(alt.begin(), alt.begin() + static_cast<std::ptrdiff_t>(n));
      Interval cyl = hull_cylinder(s, prefix);
      double gamma = (c1.endpoint(prefix, true) - c1.endpoint(prefix, false)) / cyl.width();
      lo = std::min(lo, gamma);
      hi = std::max(hi, gamma);
      worst_ref = std::max(worst_ref, std::abs(gamma - reference[n - 1]));
    }
    o.detail << " sup - inf of gamma_n over n in [20, 40] = " << hi - lo << ", max deviation from direct summation "
             << worst_ref;
    o.require(hi - lo >= 0.5, "oscillation below 0.5");
    o.require(worst_ref <= 1e-6, "disagrees with direct summation");
  });

  std::printf("%d of 13 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
