#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "diffcover/rng.hpp"
#include "diffcover/sde.hpp"
#include "diffcover/stats.hpp"

using namespace diffcover;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference vectors from the Random123 test suite.
  auto out = philox4x32_block({0u, 0u, 0u, 0u}, {0u, 0u});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  out = philox4x32_block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                         {0xffffffffu, 0xffffffffu});
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);

  out = philox4x32_block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                         {0xa4093822u, 0x299f31d0u});
  CHECK(out[0] == 0xd16cfe09u);
  CHECK(out[1] == 0x94fdccebu);
  CHECK(out[2] == 0x5001e420u);
  CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("zero-length increment request gives an empty sequence") {
  auto seq = brownian_increments(RngStream{1, 0}, 2, 0.01, 0);
  CHECK(seq.empty());
}

TEST_CASE("identical (seed, stream) reproduce bitwise-identical increments") {
  auto a = brownian_increments(RngStream{7, 3}, 3, 0.01, 500);
  auto b = brownian_increments(RngStream{7, 3}, 3, 0.01, 500);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int j = 0; j < 3; ++j) CHECK(a[i][j] == b[i][j]);
}

TEST_CASE("distinct streams decorrelate") {
  auto a = brownian_increments(RngStream{7, 3}, 1, 1.0, 1000);
  auto b = brownian_increments(RngStream{7, 4}, 1, 1.0, 1000);
  double corr = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) corr += a[i][0] * b[i][0];
  corr /= 1000.0;
  CHECK(std::abs(corr) < 0.15);  // ~N(0, 1/sqrt(1000))
}

TEST_CASE("gaussian moments of pooled increments") {
  // 1e6 scalar increments at dt = 0.01: mean within 4 sigma/sqrt(n), variance
  // within 1% of dt.
  const int kSteps = 1000;
  const double dt = 0.01;
  RunningStat stat;
  for (int s = 0; s < 1000; ++s) {
    auto seq = brownian_increments(RngStream{2024, static_cast<uint64_t>(s)},
                                   1, dt, kSteps);
    for (const auto& v : seq) stat.add(v[0]);
  }
  REQUIRE(stat.count() == 1000000);
  CHECK(std::abs(stat.mean()) < 4.0 * 0.1 / 1000.0);
  CHECK(std::abs(stat.variance() - dt) < 0.01 * dt);
}

TEST_CASE("non-positive dt is rejected") {
  CHECK_THROWS_AS(brownian_increments(RngStream{1, 0}, 1, 0.0, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(brownian_increments(RngStream{1, 0}, 1, -1.0, 10),
                  std::invalid_argument);
}
