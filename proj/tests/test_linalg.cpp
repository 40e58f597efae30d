#include <catch2/catch_amalgamated.hpp>

#include "diffcover/linalg.hpp"
#include "diffcover/rng.hpp"

using namespace diffcover;

namespace {

Mat random_spd(int n, RandomStream& rs) {
  Mat m = Mat::zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = 2.0 * rs.next_uniform() - 1.0;
  Mat a = m.transpose().mul(m);
  for (int i = 0; i < n; ++i) a(i, i) += 0.05;
  return a;
}

}  // namespace

TEST_CASE("jacobi eigen solves a known symmetric matrix") {
  Mat a = Mat::zero(2, 2);
  a(0, 0) = 2.0; a(0, 1) = 1.0; a(1, 0) = 1.0; a(1, 1) = 2.0;
  auto e = jacobi_eigen(a);
  CHECK(e.values[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(e.values[1] == Catch::Approx(3.0).margin(1e-12));
}

TEST_CASE("spectral norm of a diagonal rectangle") {
  Mat m = Mat::zero(2, 3);
  m(0, 0) = -4.0;
  m(1, 1) = 3.0;
  CHECK(spectral_norm(m) == Catch::Approx(4.0).margin(1e-12));
}

TEST_CASE("psd sqrt multiplies back on random SPD samples") {
  RandomStream rs(RngStream{99, 0});
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + static_cast<int>(rs.next_u32() % 4);  // 2..5
    Mat a = random_spd(n, rs);
    Mat s = sym_psd_sqrt(a);
    Mat back = s.mul(s);
    double err = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) err = std::max(err, std::abs(back(i, j) - a(i, j)));
    CHECK(err <= 1e-9 * std::max(a.max_abs(), 1.0));
  }
}

TEST_CASE("psd sqrt rejects an indefinite matrix") {
  Mat a = Mat::zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = -0.5;
  CHECK_THROWS_AS(sym_psd_sqrt(a), NotPositiveSemidefiniteError);
}

TEST_CASE("psd sqrt rejects an asymmetric matrix") {
  Mat a = Mat::zero(2, 2);
  a(0, 0) = 1.0; a(0, 1) = 0.25; a(1, 0) = 0.0; a(1, 1) = 1.0;
  CHECK_THROWS_AS(sym_psd_sqrt(a), NotPositiveSemidefiniteError);
}
