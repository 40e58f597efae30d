#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "diffcover/cover.hpp"
#include "diffcover/presets.hpp"

using namespace diffcover;

TEST_CASE("alpha = 0 degenerates to equal chart radii") {
  UniformCover c = build_growth_cover(GrowthMode::sublinear(0.0), 10.0);
  REQUIRE(c.charts.size() > 10);
  for (std::size_t i = 1; i < c.charts.size(); ++i) {
    CHECK(c.charts[i].cover_radius_m == Catch::Approx(1.0 / 6.0).margin(1e-12));
    CHECK(c.charts[i].outer_radius_m == Catch::Approx(0.5).margin(1e-12));
  }
}

TEST_CASE("sublinear(0.5) cover: 200x200 grid on the disc is covered") {
  UniformCover c = build_growth_cover(GrowthMode::sublinear(0.5), 100.0);
  CoverageReport rep = check_coverage(c, 100.0, 200);
  INFO("first gap at " << (rep.covered ? 0.0 : rep.first_gap[0]) << ","
                       << (rep.covered ? 0.0 : rep.first_gap[1]));
  CHECK(rep.covered);
  CHECK(rep.checked > 30000);
}

TEST_CASE("linear growth cover covers its region (coarser grid)") {
  UniformCover c = build_growth_cover(GrowthMode::linear(), 500.0);
  CHECK(check_coverage(c, 500.0, 151).covered);
}

TEST_CASE("3-d linear growth cover covers a small region") {
  UniformCover c = build_growth_cover(GrowthMode::linear(), 10.0, 3);
  CHECK(check_coverage(c, 10.0, 25).covered);
}

TEST_CASE("angular diameter bound tan(theta/2) <= |p|^(alpha-1)/2") {
  const double alpha = 0.5;
  UniformCover c = build_growth_cover(GrowthMode::sublinear(alpha), 60.0);
  for (std::size_t i = 1; i < c.charts.size(); ++i) {
    double pn = c.charts[i].center.norm();
    double tan_half = c.charts[i].outer_radius_m / pn;
    CHECK(tan_half <= std::pow(pn, alpha - 1.0) / 2.0 + 1e-12);
  }
}

TEST_CASE("rejects bad growth parameters") {
  CHECK_THROWS_AS(build_growth_cover(GrowthMode::sublinear(1.0), 50.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_growth_cover(GrowthMode::sublinear(0.5), 5.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      build_growth_cover(GrowthMode::sublinear(0.5), 100.0, 2, 18.0, 100),
      ConstructionError);
}

TEST_CASE("verify_uniform_cover: zero system passes any positive bound") {
  UniformCover c = build_growth_cover(GrowthMode::sublinear(0.5), 20.0, 2, 0.5);
  SdeSystem zero = presets::pure_drift(2, [](const Vec&) { return Vec::zero(2); });
  zero.diffusion = [](const Vec&) { return Mat::zero(2, 2); };
  auto rep = verify_uniform_cover(c, zero);
  CHECK(rep.pass);
  CHECK(rep.worst_bound == 0.0);
}

TEST_CASE("verify_uniform_cover: sublinear coefficients stay below 18K") {
  UniformCover c = build_growth_cover(GrowthMode::sublinear(0.5), 40.0, 2, 18.0);
  SdeSystem sys = presets::sublinear(0.5);  // K = 1
  auto rep = verify_uniform_cover(c, sys, 9, 2);
  INFO("worst bound " << rep.worst_bound << " at chart " << rep.worst_chart);
  CHECK(rep.pass);
  CHECK(rep.worst_bound <= 18.0);
  CHECK(rep.worst_bound > 1.0);  // the sup is genuinely attained
}

TEST_CASE("verify_uniform_cover: nonzero sublinear drift stays below 18K") {
  UniformCover c = build_growth_cover(GrowthMode::sublinear(0.5), 30.0, 2, 18.0);
  SdeSystem sys = presets::sublinear(0.5);
  sys.drift = [](const Vec& x) {
    return Vec{1.0 + std::pow(x.norm(), 0.5), 0.0};  // |A| <= K(|x|^a + 1)
  };
  auto rep = verify_uniform_cover(c, sys, 9, 2);
  CHECK(rep.pass);
  CHECK(rep.worst_generator > 1.0);  // the generator side is exercised
  CHECK(rep.worst_bound <= 18.0);
}

TEST_CASE("verify_uniform_cover: linear growth passes k=18K, fails k=1") {
  SdeSystem sys = presets::linear_growth(2);  // K = 1
  UniformCover pass_cover = build_growth_cover(GrowthMode::linear(), 50.0, 2, 18.0);
  auto rep = verify_uniform_cover(pass_cover, sys);
  CHECK(rep.pass);
  UniformCover fail_cover = build_growth_cover(GrowthMode::linear(), 50.0, 2, 1.0);
  auto rep2 = verify_uniform_cover(fail_cover, sys);
  CHECK_FALSE(rep2.pass);
  CHECK(rep2.worst_bound > 1.0);
}

TEST_CASE("broken chart inverses raise chart-domain errors naming the chart") {
  UniformCover c = build_growth_cover(GrowthMode::linear(), 20.0);
  c.charts[3].inverse = [](const Vec& v) {
    return Vec{0.0 / 0.0, v[1]};  // NaN
  };
  SdeSystem bm = presets::brownian(2);
  try {
    verify_uniform_cover(c, bm);
    FAIL("expected ChartDomainError");
  } catch (const ChartDomainError& e) {
    CHECK(std::string(e.what()).find("chart 3") != std::string::npos);
  }
}

TEST_CASE("verification grids fall back to quasi-random points above 3 dims") {
  // Hand-built 4-d affine charts; a zero system passes any positive bound.
  UniformCover c;
  c.dim = 4;
  c.bound_k = 1.0;
  for (double off : {0.0, 1.0})
    c.charts.push_back(affine_chart(Vec::filled(4, off), 2.0, 0.5, 1.0, 0.25, 0.5));
  SdeSystem zero;
  zero.dim_state = 4;
  zero.dim_noise = 4;
  zero.drift = [](const Vec&) { return Vec::zero(4); };
  zero.diffusion = [](const Vec&) { return Mat::zero(4, 4); };
  auto rep = verify_uniform_cover(c, zero);
  CHECK(rep.pass);
  CHECK(rep.charts_checked == 2);
}

TEST_CASE("locator stays sound when chart radii are not monotone in |p|") {
  // Middle shell has a much larger inner ball than its neighbours; a naive
  // radial-window walk would stop before reaching it.
  UniformCover c;
  c.dim = 1;
  c.bound_k = 1.0;
  c.charts.push_back(affine_chart(Vec{1.0}, 1.0, 1.0, 1.0, 0.2, 0.4));
  c.charts.push_back(affine_chart(Vec{2.0}, 1.0, 1.0, 1.0, 1.5, 1.8));
  c.charts.push_back(affine_chart(Vec{3.0}, 1.0, 1.0, 1.0, 0.2, 0.4));
  CoverLocator loc(c);
  CHECK(loc.locate_inner(Vec{3.4}) == 1);   // only the fat middle ball holds it
  CHECK(loc.locate_inner(Vec{0.75}) == 1);  // and on the inward side too
  CHECK(loc.locate_inner(Vec{2.9}) == 1);   // first-index rule: 1 before 2
  CHECK(loc.locate_inner(Vec{5.0}) == -1);
}

TEST_CASE("check_regular works on weak covers directly") {
  WeakUniformCover w =
      to_weak_cover(build_growth_cover(GrowthMode::linear(), 1500.0), 1.0);
  std::vector<Vec> approach{Vec{10.0, 0.0}, Vec{100.0, 0.0}, Vec{1000.0, 0.0}};
  CHECK(check_regular(w, Compactification::one_point(2), approach).regular);
  CHECK_FALSE(
      check_regular(w, Compactification::sphere_at_infinity(2), approach)
          .regular);
}

TEST_CASE("renormalize_deltas hand-executed cases") {
  SECTION("single term") {
    auto s = renormalize_deltas({1.0}, 5);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == 1.0);
  }
  SECTION("constant ones give the harmonic prefix exactly") {
    std::vector<double> t(12, 1.0);
    auto s = renormalize_deltas(t, 12);
    REQUIRE(s.size() == 12);
    for (std::size_t n = 0; n < s.size(); ++n)
      CHECK(s[n] == 1.0 / static_cast<double>(n + 1));
  }
  SECTION("t_n = 1/n groups as {1},{1/2,1/3,1/4},...") {
    std::vector<double> t;
    for (int n = 1; n <= 10; ++n) t.push_back(1.0 / n);
    auto s = renormalize_deltas(t, 10);
    CHECK(s[0] == 1.0);
    CHECK(s[1] == Catch::Approx(0.25).margin(1e-15));        // (1/2)/2
    CHECK(s[2] == Catch::Approx(1.0 / 6.0).margin(1e-15));   // (1/3)/2
    CHECK(s[3] == Catch::Approx(0.125).margin(1e-15));       // (1/4)/2
    CHECK(s[4] == Catch::Approx(0.2 / 3.0).margin(1e-15));   // (1/5)/3
  }
  SECTION("invalid inputs") {
    CHECK_THROWS_AS(renormalize_deltas({1.0, 0.0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(renormalize_deltas({0.5, 0.7}, 2), std::invalid_argument);
    CHECK_THROWS_AS(renormalize_deltas({}, 2), std::invalid_argument);
  }
}

TEST_CASE("renormalize_deltas properties on random admissible sequences") {
  RandomStream rs(RngStream{314, 0});
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> t;
    double cur = 0.5 + 2.0 * rs.next_uniform();
    for (int n = 0; n < 3000; ++n) {
      t.push_back(cur);
      cur *= (0.9985 + 0.0015 * rs.next_uniform());
    }
    auto s = renormalize_deltas(t, t.size());
    REQUIRE(s.size() == t.size());
    double sumsq = 0.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
      CHECK(s[n] > 0.0);
      CHECK(s[n] <= t[n] + 1e-15);
      if (n > 0) CHECK(s[n] <= s[n - 1] + 1e-15);
      sumsq += s[n] * s[n];
    }
    CHECK(sumsq <= 2.29);
  }
}

namespace {

// A synthetic 1-d chain cover: inner balls centered at 0,1,2,3,4 of radius
// 0.6 (adjacent sets overlap, non-adjacent do not), outers of radius 0.9.
WeakUniformCover chain_cover() {
  WeakUniformCover w;
  w.dim = 1;
  for (int i = 0; i < 5; ++i) {
    Vec c{static_cast<double>(i)};
    w.pairs.push_back({Ball{c, 0.6}, Ball{c, 0.9}});
  }
  w.exhaustion_radii = {8.0, 32.0};
  w.deltas = {1.0, 1.0};
  return w;
}

}  // namespace

TEST_CASE("wp_neighborhoods on the 5-chain") {
  WeakUniformCover w = chain_cover();
  validate_weak_cover(w);
  SECTION("start 0 (x at center 0): p = 2 reaches {0,1,2}") {
    auto r = wp_neighborhoods(w, 0, 2);
    CHECK(r == std::vector<int>{0, 1, 2});
  }
  SECTION("monotone in p") {
    for (int p = 1; p <= 5; ++p) {
      auto a = wp_neighborhoods(w, 0, p);
      auto b = wp_neighborhoods(w, 0, p + 1);
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
  }
  SECTION("isolated set returns only sets containing x") {
    WeakUniformCover iso;
    iso.dim = 1;
    iso.pairs.push_back({Ball{Vec{0.0}, 0.4}, Ball{Vec{0.0}, 0.6}});
    iso.pairs.push_back({Ball{Vec{5.0}, 0.4}, Ball{Vec{5.0}, 0.6}});
    iso.exhaustion_radii = {8.0};
    iso.deltas = {1.0};
    auto r = wp_neighborhoods(iso, 0, 1);
    CHECK(r == std::vector<int>{0});
  }
}

TEST_CASE("weak cover validation catches violations") {
  WeakUniformCover w = chain_cover();
  SECTION("inner escaping outer") {
    w.pairs[2].inner.radius = 1.5;
    CHECK_THROWS_AS(validate_weak_cover(w), std::invalid_argument);
  }
  SECTION("increasing deltas") {
    w.deltas = {0.5, 1.0};
    CHECK_THROWS_AS(validate_weak_cover(w), std::invalid_argument);
  }
  SECTION("set crossing two exhaustion boundaries") {
    w.exhaustion_radii = {1.2, 1.4, 32.0};
    w.deltas = {1.0, 1.0, 1.0};
    // pair at center 1 radius 0.9 spans (0.1, 1.9): crosses 1.2 and 1.4
    CHECK_THROWS_AS(validate_weak_cover(w), std::invalid_argument);
  }
}

TEST_CASE("to_weak_cover assigns exhaustion and unit deltas") {
  UniformCover u = build_growth_cover(GrowthMode::linear(), 100.0);
  WeakUniformCover w = to_weak_cover(u, 2.0);
  validate_weak_cover(w);
  CHECK(w.tail_constant == 2.0);
  CHECK(w.pairs.size() == u.charts.size());
  for (double d : w.deltas) CHECK(d == 1.0);
  // Exhaustion order invariant: every set sits inside some K_m and meets at
  // most one boundary (validate_weak_cover already enforced it).
  for (std::size_t n = 0; n < w.pairs.size(); ++n)
    CHECK(exhaustion_index(w, static_cast<int>(n)) >= 0);
}

TEST_CASE("check_regular on the growth covers") {
  std::vector<Vec> approach{Vec{10.0, 0.0}, Vec{100.0, 0.0}, Vec{1000.0, 0.0}};
  SECTION("linear growth cover is regular for the one-point model") {
    UniformCover u = build_growth_cover(GrowthMode::linear(), 1500.0);
    auto rep = check_regular(u, Compactification::one_point(2), approach);
    INFO("sups " << rep.sup_distances[0] << " " << rep.sup_distances[1] << " "
                 << rep.sup_distances[2]);
    CHECK(rep.regular);
  }
  SECTION("linear growth cover is NOT regular for the sphere model") {
    UniformCover u = build_growth_cover(GrowthMode::linear(), 1500.0);
    auto rep = check_regular(u, Compactification::sphere_at_infinity(2), approach);
    CHECK_FALSE(rep.regular);
    // angular diameter bounded below: sup distances stay above ~2 sin(theta/2)
    for (double s : rep.sup_distances) CHECK(s > 0.3);
  }
  SECTION("sublinear cover is regular for the sphere model") {
    UniformCover u = build_growth_cover(GrowthMode::sublinear(0.5), 40.0);
    u.charts.clear();
    for (double r : {1e2, 1e3, 1e4, 1e5})
      append_chart_at(u, Vec{r, 0.0});
    std::vector<Vec> far{Vec{1e2, 0.0}, Vec{1e3, 0.0}, Vec{1e4, 0.0},
                         Vec{1e5, 0.0}};
    auto rep = check_regular(u, Compactification::sphere_at_infinity(2), far);
    INFO("final sup " << rep.sup_distances.back());
    CHECK(rep.regular);
  }
  SECTION("approach point outside every inner set raises") {
    UniformCover u = build_growth_cover(GrowthMode::linear(), 100.0);
    std::vector<Vec> bad{Vec{5000.0, 0.0}};
    CHECK_THROWS_AS(check_regular(u, Compactification::one_point(2), bad),
                    CoverageError);
  }
}

TEST_CASE("certificate round trip") {
  UniformCover u = build_growth_cover(GrowthMode::sublinear(0.5), 20.0);
  WeakUniformCover w = to_weak_cover(u, 1.5);
  std::ostringstream os;
  save_cover_certificate(os, u, &w);
  std::istringstream is(os.str());
  LoadedCertificate loaded = load_cover_certificate(is);
  REQUIRE(loaded.uniform.charts.size() == u.charts.size());
  REQUIRE(loaded.has_weak);
  CHECK(loaded.weak.tail_constant == 1.5);
  for (std::size_t i = 0; i < u.charts.size(); ++i) {
    CHECK(loaded.uniform.charts[i].center[0] == u.charts[i].center[0]);
    CHECK(loaded.uniform.charts[i].center[1] == u.charts[i].center[1]);
    CHECK(loaded.uniform.charts[i].cover_radius_m == u.charts[i].cover_radius_m);
  }
  // reloaded cover verifies identically
  SdeSystem sys = presets::sublinear(0.5);
  auto a = verify_uniform_cover(u, sys, 5);
  auto b = verify_uniform_cover(loaded.uniform, sys, 5);
  CHECK(a.worst_bound == b.worst_bound);

  std::istringstream junk("not a certificate\n");
  CHECK_THROWS_AS(load_cover_certificate(junk), std::invalid_argument);
}
