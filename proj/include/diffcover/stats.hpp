#pragma once

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace diffcover {

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

struct BinomialCi {
  double lo = 0.0;
  double hi = 1.0;
};

// Clopper-Pearson (exact) two-sided interval.
inline BinomialCi clopper_pearson(std::size_t k, std::size_t n,
                                  double confidence = 0.95) {
  if (n == 0 || k > n) throw std::invalid_argument("clopper_pearson: bad counts");
  const double alpha = 1.0 - confidence;
  BinomialCi ci;
  ci.lo = (k == 0) ? 0.0
                   : boost::math::ibeta_inv(static_cast<double>(k),
                                            static_cast<double>(n - k + 1),
                                            alpha / 2.0);
  ci.hi = (k == n) ? 1.0
                   : boost::math::ibeta_inv(static_cast<double>(k + 1),
                                            static_cast<double>(n - k),
                                            1.0 - alpha / 2.0);
  return ci;
}

// Mean/variance via Welford updates, accumulated in a fixed order so
// reductions are reproducible.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const {
    if (n_ < 2) return 0.0;
    double v = m2_ / static_cast<double>(n_ - 1);
    return v > 0.0 ? v : 0.0;
  }
  double stddev() const { return std::sqrt(variance()); }
  // 95% normal-approximation half width for the mean.
  double ci_halfwidth() const {
    return n_ ? 1.959963984540054 * stddev() / std::sqrt(static_cast<double>(n_))
              : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace diffcover
