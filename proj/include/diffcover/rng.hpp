#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. SC 2011).
// Each Monte-Carlo path gets its own stream keyed by (seed, stream_index),
// so draws are reproducible no matter how paths are scheduled over workers.

#include <array>
#include <cmath>
#include <cstdint>

namespace diffcover {

struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_index = 0;

  RngStream with_stream(std::uint64_t idx) const { return {seed, idx}; }
};

namespace detail {

inline void philox_mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                           std::uint32_t& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace detail

// One 128-bit block per (key, counter); 10 rounds.
inline std::array<std::uint32_t, 4> philox4x32_block(
    std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    detail::philox_mulhilo(kM0, ctr[0], hi0, lo0);
    detail::philox_mulhilo(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

// Sequential view over a stream: 32-bit words come out of consecutive
// blocks with counter = (block_lo, block_hi) and (c2,c3) = stream index.
class RandomStream {
 public:
  explicit RandomStream(RngStream s)
      : key_{static_cast<std::uint32_t>(s.seed),
             static_cast<std::uint32_t>(s.seed >> 32)},
        stream_{static_cast<std::uint32_t>(s.stream_index),
                static_cast<std::uint32_t>(s.stream_index >> 32)} {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  // 53-bit uniform, strictly inside (0,1).
  double next_uniform() {
    std::uint64_t hi = next_u32();
    std::uint64_t w = (hi << 32) | next_u32();
    return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; second member of each pair is cached.
  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  void refill() {
    buf_ = philox4x32_block({static_cast<std::uint32_t>(block_),
                             static_cast<std::uint32_t>(block_ >> 32),
                             stream_[0], stream_[1]},
                            key_);
    ++block_;
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace diffcover
