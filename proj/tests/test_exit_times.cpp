#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "diffcover/exit_times.hpp"
#include "diffcover/presets.hpp"

using namespace diffcover;

namespace {

// Independent oracle: P{tau < t} for standard 1-d BM exiting (-a, a) from 0,
// by the reflection series  S(t) = sum_k (-1)^k [Phi((2k+1)a/rt) - Phi((2k-1)a/rt)].
double bm_exit_prob(double t, double a = 1.0) {
  double rt = std::sqrt(t), s = 0.0;
  for (int k = -60; k <= 60; ++k) {
    double term = normal_cdf((2 * k + 1) * a / rt) - normal_cdf((2 * k - 1) * a / rt);
    s += (k % 2 == 0 ? term : -term);
  }
  return 1.0 - s;
}

}  // namespace

TEST_CASE("zero system never exits") {
  SdeSystem zero = presets::pure_drift(2, [](const Vec&) { return Vec::zero(2); });
  Region ball = ball_region(Vec::zero(2), 1.0);
  auto cdf = estimate_exit_cdf(zero, Vec{0.2, 0.0}, ball, {0.1, 0.5, 1.0}, 200,
                               0.01, 5);
  for (double p : cdf.p_hat) CHECK(p == 0.0);
  CHECK(cdf.censored_fraction == 1.0);
}

TEST_CASE("pure drift exits the unit ball at t = 0.5") {
  SdeSystem sys = presets::pure_drift(2, [](const Vec&) { return Vec{2.0, 0.0}; });
  Region ball = ball_region(Vec::zero(2), 1.0);
  auto cdf = estimate_exit_cdf(sys, Vec::zero(2), ball,
                               {0.2, 0.4, 0.499, 0.501, 0.8}, 100, 1e-3, 5);
  CHECK(cdf.p_hat[0] == 0.0);
  CHECK(cdf.p_hat[1] == 0.0);
  CHECK(cdf.p_hat[2] == 0.0);
  CHECK(cdf.p_hat[3] == 1.0);
  CHECK(cdf.p_hat[4] == 1.0);
  CHECK(cdf.censored_fraction == 0.0);
}

TEST_CASE("BM exit CDF matches the reflection-series oracle") {
  SdeSystem bm = presets::brownian(1);
  Region interval = ball_region(Vec::zero(1), 1.0);
  std::vector<double> grid{0.1, 0.2};
  auto cdf = estimate_exit_cdf(bm, Vec::zero(1), interval, grid, 20000, 2e-4, 99);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double oracle = bm_exit_prob(grid[i]);
    double hw = 0.5 * (cdf.ci_upper[i] - cdf.ci_lower[i]);
    INFO("t=" << grid[i] << " p_hat=" << cdf.p_hat[i] << " oracle=" << oracle);
    CHECK(std::abs(cdf.p_hat[i] - oracle) <= 3.0 * hw);
  }
  // monotone, sandwiched, and the Dirichlet identity 1 - P_t^U 1(x) = p_hat
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) CHECK(cdf.p_hat[i] >= cdf.p_hat[i - 1]);
    CHECK(cdf.ci_lower[i] <= cdf.p_hat[i]);
    CHECK(cdf.p_hat[i] <= cdf.ci_upper[i]);
    CHECK(cdf.dirichlet_survival[i] == 1.0 - cdf.p_hat[i]);
  }
}

TEST_CASE("analytic value sits inside the CI on >= 90% of points, 20 seeds") {
  SdeSystem bm = presets::brownian(1);
  Region interval = ball_region(Vec::zero(1), 1.0);
  std::vector<double> grid{0.1, 0.2, 0.3};
  int inside = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto cdf = estimate_exit_cdf(bm, Vec::zero(1), interval, grid, 2000, 2e-4,
                                 1000 + seed, 1e6, 2);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double oracle = bm_exit_prob(grid[i]);
      ++total;
      if (oracle >= cdf.ci_lower[i] && oracle <= cdf.ci_upper[i]) ++inside;
    }
  }
  INFO("inside " << inside << "/" << total);
  CHECK(inside * 10 >= total * 9);
}

TEST_CASE("explosions inside an unbounded region are counted, not exits") {
  SdeSystem explosive =
      presets::pure_drift(1, [](const Vec& x) { return Vec{x[0] * x[0]}; });
  Region huge = ball_region(Vec::zero(1), 1e9);
  auto cdf = estimate_exit_cdf(explosive, Vec{1.0}, huge, {0.5, 2.0}, 50, 1e-3,
                               0, /*explosion_radius=*/1e3);
  CHECK(cdf.exploded_count == 50);
  CHECK(cdf.p_hat.back() == 0.0);  // explosion is not a region exit
  CHECK(cdf.censored_fraction == 1.0);
}

TEST_CASE("estimate_exit_cdf rejects bad arguments") {
  SdeSystem bm = presets::brownian(1);
  Region interval = ball_region(Vec::zero(1), 1.0);
  CHECK_THROWS_AS(
      estimate_exit_cdf(bm, Vec{2.0}, interval, {0.1}, 10, 0.01, 0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      estimate_exit_cdf(bm, Vec{0.0}, interval, {0.2, 0.1}, 10, 0.01, 0),
      std::invalid_argument);
}

TEST_CASE("quadratic tail check on the BM benchmark") {
  SdeSystem bm = presets::brownian(1);
  Region interval = ball_region(Vec::zero(1), 1.0);
  auto cdf = estimate_exit_cdf(bm, Vec::zero(1), interval, {0.02, 0.05, 0.1},
                               10000, 1e-3, 7);
  auto rep = check_quadratic_tail(cdf, 0.3, 1.0);
  INFO("max ratio " << rep.max_ratio);
  CHECK(rep.pass);
  // the true ratio e^{-c/t}/t^2 decreases as t drops through the grid
  CHECK(bm_exit_prob(0.02) / (0.02 * 0.02) < bm_exit_prob(0.05) / (0.05 * 0.05));
  CHECK(bm_exit_prob(0.05) / (0.05 * 0.05) < bm_exit_prob(0.1) / (0.1 * 0.1));
}

TEST_CASE("deterministic exit fails the tail bound at the right grid point") {
  SdeSystem sys = presets::pure_drift(1, [](const Vec&) { return Vec{2.0}; });
  Region interval = ball_region(Vec::zero(1), 1.0);
  auto cdf = estimate_exit_cdf(sys, Vec::zero(1), interval, {0.4, 0.6}, 1000,
                               1e-3, 0);
  auto rep = check_quadratic_tail(cdf, 0.7, 0.1);
  CHECK_FALSE(rep.pass);
  CHECK(rep.violating_t == 0.6);
}

TEST_CASE("synthetic Hsu tail e^{-a/t} passes below delta0") {
  double a = 0.8 * 2.0 / M_E;  // below the no-root threshold
  double d0 = hsu_delta0(a);
  ExitTimeCdf cdf;
  for (double f : {0.2, 0.5, 0.9}) {
    double t = f * d0;
    cdf.t_grid.push_back(t);
    double v = std::exp(-a / t);
    cdf.p_hat.push_back(v);
    cdf.ci_lower.push_back(v);
    cdf.ci_upper.push_back(v);
    cdf.dirichlet_survival.push_back(1 - v);
  }
  cdf.n_paths = 1;
  auto rep = check_quadratic_tail(cdf, d0, 1.0);
  CHECK(rep.pass);
  CHECK_THROWS_AS(check_quadratic_tail(cdf, cdf.t_grid.front() * 0.5, 1.0),
                  std::invalid_argument);
}

TEST_CASE("hsu_delta0 root and contract") {
  SECTION("a = ln 2 has smallest root 1/4, verified by substitution") {
    double a = std::log(2.0);
    double d0 = hsu_delta0(a);
    CHECK(d0 == Catch::Approx(0.25).margin(1e-10));
    CHECK(std::abs(std::exp(-a / d0) - d0 * d0) <= 1e-9);
  }
  SECTION("contract: e^{-a/t} <= t^2 strictly below the returned value") {
    for (double a : {0.05, 0.2, std::log(2.0), 0.7}) {
      double d0 = hsu_delta0(a);
      for (int i = 1; i <= 200; ++i) {
        double t = d0 * i / 201.0;
        CHECK(std::exp(-a / t) <= t * t * (1.0 + 1e-9));
      }
    }
  }
  SECTION("monotone in a and vanishing as a -> 0") {
    double prev = 0.0;
    for (double a : {1e-3, 1e-2, 1e-1}) {
      double d0 = hsu_delta0(a);
      CHECK(d0 > prev);
      prev = d0;
    }
    CHECK(hsu_delta0(1e-3) < 1e-2);
  }
  SECTION("large a hits the cap") {
    CHECK(hsu_delta0(5.0, 0.75) == 0.75);
    CHECK(hsu_delta0(2.0 / M_E + 1e-6) == 1.0);
  }
  SECTION("invalid a") {
    CHECK_THROWS_AS(hsu_delta0(0.0), std::invalid_argument);
    CHECK_THROWS_AS(hsu_delta0(-1.0), std::invalid_argument);
  }
}

TEST_CASE("ricci delta sequences") {
  SECTION("flat curvature gives a constant divergent sequence") {
    auto d = ricci_delta_sequence([](double) { return 0.0; }, 1.0, 0.4, 1000);
    for (double v : d.values) CHECK(v == 0.4);
    CHECK(d.verdict == SeriesVerdict::kDivergent);
  }
  SECTION("quadratic decay: harmonic-type divergence, partial sum >= 2.7") {
    auto d = ricci_delta_sequence([](double r) { return r * r; }, 1.0, 1.0,
                                  10000);
    for (std::size_t n = 1; n <= 5; ++n)
      CHECK(d.values[n - 1] ==
            Catch::Approx(1.0 / (3.0 * n + 1.0)).margin(1e-12));
    CHECK(d.partial_sums.back() >= 2.7);
    CHECK(d.verdict == SeriesVerdict::kDivergent);
  }
  SECTION("sixth-power decay: convergent with tiny tail past n = 100") {
    auto d = ricci_delta_sequence(
        [](double r) { return std::pow(r, 6.0); }, 1.0, 1.0, 2000);
    CHECK(d.verdict == SeriesVerdict::kConvergent);
    double tail = d.partial_sums.back() - d.partial_sums[99];
    CHECK(tail < 1e-2);
  }
  SECTION("negative curvature evaluation is rejected") {
    CHECK_THROWS_AS(
        ricci_delta_sequence([](double) { return -1.0; }, 1.0, 1.0, 10),
        std::invalid_argument);
  }
  SECTION("short sequences are inconclusive") {
    auto d = user_delta_sequence({1.0, 0.5, 0.25});
    CHECK(d.verdict == SeriesVerdict::kInconclusive);
  }
  SECTION("geometric decay is convergent") {
    std::vector<double> v;
    double x = 1.0;
    for (int i = 0; i < 64; ++i) { v.push_back(x); x *= 0.5; }
    CHECK(user_delta_sequence(v).verdict == SeriesVerdict::kConvergent);
  }
}

TEST_CASE("chain over the linear-growth cover, BM on R^2") {
  WeakUniformCover cover =
      to_weak_cover(build_growth_cover(GrowthMode::linear(), 200.0), 1.0);
  SdeSystem bm = presets::brownian(2);
  Vec x0{0.5, 0.0};
  std::vector<double> grid{0.05, 0.1, 0.2};
  ChainStats st = simulate_chain(bm, cover, x0, 2.0, 5000, 1e-3, 31, grid,
                                 1e6, 2, 8);

  SECTION("omega counts partition {T_j < infinity} for every j") {
    for (int j = 1; j <= 8; ++j) {
      std::size_t total = 0;
      for (const auto& [key, count] : st.omega_counts)
        if (key.first == j) total += count;
      std::size_t reached_minus_violations = 0;
      // paths whose j-th landing was recorded (coverage violations stop
      // before recording a landing set)
      for (const auto& rec : st.paths)
        if (rec.landing_sets.size() >= static_cast<std::size_t>(j))
          ++reached_minus_violations;
      CHECK(total == reached_minus_violations);
    }
    CHECK(st.coverage_violations == 0);
  }

  SECTION("per-path increments sum to the total exactly") {
    for (const auto& rec : st.paths) {
      double sum = 0.0;
      for (double inc : rec.increments) sum += inc;
      CHECK(sum == rec.total);
    }
  }

  SECTION("increment tails satisfy the per-set certified quadratic bound") {
    // Certify C on individual sets from worst-case starts on the inner edge.
    double C = 0.0;
    for (int idx : {0, 1, 2, 3}) {
      const SetPair& sp = cover.pairs[idx];
      Vec start = sp.inner.center +
                  Vec{sp.inner.radius * 0.999, 0.0};
      Region outer{[&sp](const Vec& y) { return sp.outer.contains(y); },
                   sp.outer, idx};
      auto cdf = estimate_exit_cdf(bm, start, outer, grid, 10000, 1e-3,
                                   500 + idx, 1e6, 2);
      auto rep = check_quadratic_tail(cdf, 1.0, 1e9);  // measure the ratio
      C = std::max(C, rep.max_ratio);
    }
    INFO("certified C = " << C);
    for (int k = 0; k < 3; ++k)
      for (std::size_t g = 0; g < grid.size(); ++g) {
        INFO("k=" << k << " t=" << grid[g]
                  << " ci_hi=" << st.increment_ci_hi[k][g]);
        CHECK(st.increment_ci_hi[k][g] <= C * grid[g] * grid[g] * 1.05);
      }
  }
}

TEST_CASE("zero system: no link ever completes") {
  WeakUniformCover cover =
      to_weak_cover(build_growth_cover(GrowthMode::linear(), 50.0), 1.0);
  SdeSystem zero = presets::pure_drift(2, [](const Vec&) { return Vec::zero(2); });
  zero.diffusion = [](const Vec&) { return Mat::zero(2, 2); };
  ChainStats st = simulate_chain(zero, cover, Vec{0.5, 0.0}, 1.0, 100, 1e-2, 1);
  CHECK(st.reached[0] == 0);
}

TEST_CASE("coverage gap is reported and the path censored") {
  WeakUniformCover gappy;
  gappy.dim = 2;
  gappy.pairs.push_back({Ball{Vec{0.0, 0.0}, 1.0}, Ball{Vec{0.0, 0.0}, 1.2}});
  gappy.pairs.push_back({Ball{Vec{6.0, 0.0}, 0.5}, Ball{Vec{6.0, 0.0}, 0.7}});
  gappy.exhaustion_radii = {8.0};
  gappy.deltas = {1.0};
  validate_weak_cover(gappy);
  SdeSystem bm = presets::brownian(2);
  ChainStats st = simulate_chain(bm, gappy, Vec{0.0, 0.0}, 4.0, 50, 1e-3, 3);
  CHECK(st.coverage_violations == 50);
}

TEST_CASE("x0 outside all inner sets is rejected") {
  WeakUniformCover cover =
      to_weak_cover(build_growth_cover(GrowthMode::linear(), 50.0), 1.0);
  SdeSystem bm = presets::brownian(2);
  CHECK_THROWS_AS(simulate_chain(bm, cover, Vec{500.0, 0.0}, 1.0, 10, 1e-2, 0),
                  std::invalid_argument);
}

TEST_CASE("nonexplosion certificate arithmetic") {
  // Harmonic renormalized deltas: s = (1, 1/2, 1/3, ...).
  std::vector<double> ones(400, 1.0);
  DeltaSequence s = user_delta_sequence(renormalize_deltas(ones, 400),
                                        "renormalized");
  SECTION("bound equals eps^2 times the squared prefix, C = 1") {
    auto cert = nonexplosion_certificate(s, 1.0, 0, 0.4, 0.5);
    double prefix = 0.0;
    for (std::size_t k = 0; k < cert.p; ++k)
      prefix += s.values[k] * s.values[k];
    CHECK(cert.bound == 0.25 * prefix);
    CHECK(cert.sum_sq_prefix <= M_PI * M_PI / 6.0);
  }
  SECTION("halving eps quarters the bound exactly at fixed p") {
    // tiny t so p = 1 for both eps values
    auto c1 = nonexplosion_certificate(s, 1.0, 0, 1e-3, 0.5);
    auto c2 = nonexplosion_certificate(s, 1.0, 0, 1e-3, 0.25);
    REQUIRE(c1.p == c2.p);
    CHECK(c2.bound == 0.25 * c1.bound);
  }
  SECTION("eps sweep drives the certified bound to zero") {
    double prev = 1e300;
    for (double eps : {0.5, 0.1, 0.02}) {
      auto cert = nonexplosion_certificate(s, 1.0, 0, 0.01, eps);
      CHECK(cert.bound < prev);
      prev = cert.bound;
    }
    CHECK(prev < 1e-3);
  }
  SECTION("insufficient convergent sequence raises") {
    std::vector<double> small;
    for (int n = 1; n <= 100; ++n) small.push_back(std::pow(n, -3.0));
    DeltaSequence conv = user_delta_sequence(small);
    CHECK_THROWS_AS(nonexplosion_certificate(conv, 1.0, 0, 1.0, 0.5),
                    InsufficientSequenceError);
  }
  SECTION("invalid eps") {
    CHECK_THROWS_AS(nonexplosion_certificate(s, 1.0, 0, 1.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(nonexplosion_certificate(s, 1.0, 0, 1.0, 1.0),
                    std::invalid_argument);
  }
}
