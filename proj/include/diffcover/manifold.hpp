#pragma once

// Rotationally symmetric model manifolds dr^2 + f(r)^2 dtheta^2. Only the
// radial part of Brownian motion is simulated: dr = dB + (n-1)/2 f'/f dt,
// which carries all of the explosion and radial exit-time content.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffcover/errors.hpp"
#include "diffcover/exit_times.hpp"
#include "diffcover/parallel.hpp"
#include "diffcover/sde.hpp"
#include "diffcover/stats.hpp"

namespace diffcover {

struct Warp {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
  std::string name;
  // Optional closed form for f''/f; keeps curvature finite where f itself
  // overflows (fast-growing warps at large r).
  std::function<double(double)> d2f_over_f;
};

inline Warp warp_flat() {
  return {[](double r) { return r; }, [](double) { return 1.0; },
          [](double) { return 0.0; }, "flat", [](double) { return 0.0; }};
}

inline Warp warp_hyperbolic() {
  return {[](double r) { return std::sinh(r); },
          [](double r) { return std::cosh(r); },
          [](double r) { return std::sinh(r); }, "hyperbolic",
          [](double) { return 1.0; }};
}

// f = r exp(r^beta / beta), beta = (q+2)/2, so that f''/f ~ r^q: the radial
// Ricci bound decays like -r^q.
inline Warp warp_power_ricci(double q) {
  if (!(q > 0.0)) throw std::invalid_argument("warp_power_ricci: need q > 0");
  double beta = 0.5 * (q + 2.0);
  auto g = [beta](double r) { return std::pow(r, beta) / beta; };
  return {[g](double r) { return r * std::exp(g(r)); },
          [g, beta](double r) {
            return std::exp(g(r)) * (1.0 + std::pow(r, beta));
          },
          [g, beta](double r) {
            return std::exp(g(r)) * std::pow(r, beta - 1.0) *
                   (1.0 + beta + std::pow(r, beta));
          },
          "power_ricci(" + std::to_string(q) + ")",
          [beta](double r) {
            return std::pow(r, beta - 2.0) * (1.0 + beta + std::pow(r, beta));
          }};
}

struct RotSymManifold {
  int dim = 2;  // n
  Warp warp;
};

inline RotSymManifold make_manifold(int n, Warp w, double check_range = 100.0) {
  if (n < 1 || n > 10)
    throw std::invalid_argument("make_manifold: dim must be in 1..10");
  if (std::abs(w.f(0.0)) > 1e-8 || std::abs(w.df(0.0) - 1.0) > 1e-8)
    throw std::invalid_argument("make_manifold: warp must have f(0)=0, f'(0)=1");
  for (double r = 0.25; r <= check_range; r *= 2.0)
    if (!(w.f(r) > 0.0))
      throw ManifoldDomainError("make_manifold: f(r) <= 0 at r = " +
                                std::to_string(r));
  return RotSymManifold{n, std::move(w)};
}

// Radial SDE with a reflecting clamp at r_min guarding the drift singularity.
inline SdeSystem radial_system(const RotSymManifold& man, double r_min = 1e-6) {
  SdeSystem sys;
  sys.dim_state = 1;
  sys.dim_noise = 1;
  sys.convention = Convention::kIto;
  const double coeff = 0.5 * (man.dim - 1);
  Warp w = man.warp;
  sys.drift = [w, coeff, r_min](const Vec& x) {
    if (coeff == 0.0) return Vec{0.0};
    double r = std::max(x[0], r_min);
    double fr = w.f(r);
    if (!(fr > 0.0))
      throw ManifoldDomainError("radial drift: f(r) <= 0 at r = " +
                                std::to_string(r));
    return Vec{coeff * w.df(r) / fr};
  };
  sys.diffusion = [](const Vec&) {
    Mat m = Mat::zero(1, 1);
    m(0, 0) = 1.0;
    return m;
  };
  sys.project = [r_min](const Vec& x) {
    return x[0] < r_min ? Vec{r_min + (r_min - x[0])} : x;
  };
  return sys;
}

// ---------------------------------------------------------------------------

struct CurvatureProfile {
  std::function<double(double)> K;  // >= 0, non-decreasing
};

// K(r) = sup_{r' <= r} max((n-1) f''(r')/f(r'), 0), realized on a grid and
// monotone by construction. Exact for warps with monotone f''/f.
inline CurvatureProfile curvature_profile(const RotSymManifold& man,
                                          double r_max = 4e4,
                                          double step = 0.05) {
  auto raw = [man](double r) {
    double ratio = man.warp.d2f_over_f ? man.warp.d2f_over_f(r)
                                       : man.warp.d2f(r) / man.warp.f(r);
    return std::max((man.dim - 1) * ratio, 0.0);
  };
  auto cache = std::make_shared<std::vector<double>>();
  double running = 0.0;
  std::size_t count = static_cast<std::size_t>(std::ceil(r_max / step)) + 1;
  cache->reserve(count);
  for (std::size_t i = 1; i <= count; ++i) {
    running = std::max(running, raw(static_cast<double>(i) * step));
    cache->push_back(running);
  }
  auto raw_fn = raw;
  return CurvatureProfile{[cache, raw_fn, step](double r) {
    if (!(r > 0.0)) return 0.0;
    double grid_sup = 0.0;
    std::size_t idx = static_cast<std::size_t>(r / step);
    if (idx >= 1) grid_sup = (*cache)[std::min(idx, cache->size()) - 1];
    return std::max(grid_sup, raw_fn(r));
  }};
}

// ---------------------------------------------------------------------------

struct AssumptionAReport {
  SeriesVerdict verdict = SeriesVerdict::kInconclusive;
  double partial_quarter = 0.0;  // integral to r_max/4
  double partial_half = 0.0;
  double partial_full = 0.0;
  double r_max = 0.0;
};

// Trapezoid quadrature of int_1^R K(r)^{-1/2} dr, integrand capped at 1e6
// where K vanishes, with the finite-prefix doubling verdict.
inline AssumptionAReport assumption_a(const CurvatureProfile& profile,
                                      double r_max, double step = 0.05) {
  if (!(r_max >= 100.0))
    throw std::invalid_argument("assumption_a: r_max >= 100 required");
  if (!(step > 0.0) || (r_max - 1.0) / step < 8.0)
    throw std::invalid_argument("assumption_a: step too large for the range");
  auto integrand = [&](double r) {
    double k = profile.K(r);
    if (k < 1e-12) return 1e6;
    return std::min(1.0 / std::sqrt(k), 1e6);
  };
  std::vector<double> partials;
  double acc = 0.0, prev = integrand(1.0);
  std::size_t n_steps = static_cast<std::size_t>(std::ceil((r_max - 1.0) / step));
  partials.reserve(n_steps);
  for (std::size_t i = 1; i <= n_steps; ++i) {
    double r = 1.0 + static_cast<double>(i) * step;
    double cur = integrand(std::min(r, r_max));
    acc += 0.5 * (prev + cur) * step;
    prev = cur;
    partials.push_back(acc);
  }
  AssumptionAReport rep;
  rep.r_max = r_max;
  rep.verdict = doubling_verdict(partials);
  rep.partial_full = partials.back();
  rep.partial_half = partials[partials.size() / 2 - 1];
  rep.partial_quarter = partials[partials.size() / 4 - 1];
  return rep;
}

// ---------------------------------------------------------------------------

struct VolumeProfileReport {
  std::vector<double> r_grid;
  std::vector<double> volumes;  // Vol(B_R) = omega_{n-1} int_0^R f^{n-1}
  SeriesVerdict grigoryan_verdict = SeriesVerdict::kInconclusive;
  bool comparison_pass = true;  // sinh comparison wherever K(R) > 0
  std::size_t skipped_points = 0;  // fine-grid points with Vol <= 1
};

inline double unit_sphere_area(int n) {
  if (n < 2 || n > 10)
    throw std::invalid_argument("unit_sphere_area: dim must be in 2..10");
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

inline VolumeProfileReport volume_profile(const RotSymManifold& man,
                                          const std::vector<double>& r_grid,
                                          double step = 0.01) {
  if (r_grid.empty() || !(r_grid.front() >= 1.0))
    throw std::invalid_argument("volume_profile: grid must start at >= 1");
  for (std::size_t i = 1; i < r_grid.size(); ++i)
    if (!(r_grid[i] > r_grid[i - 1]))
      throw std::invalid_argument("volume_profile: grid must increase");
  const int n = man.dim;
  const double omega = unit_sphere_area(n);
  const double r_max = r_grid.back();

  VolumeProfileReport rep;
  rep.r_grid = r_grid;
  CurvatureProfile prof = curvature_profile(man, r_max + 1.0);

  // One sweep accumulates the volume integral and the Grigor'yan integral.
  std::size_t n_steps = static_cast<std::size_t>(std::ceil(r_max / step));
  std::vector<double> cumulative(n_steps + 1, 0.0);
  std::vector<double> grig_partials;
  double vol_acc = 0.0, grig_acc = 0.0;
  double prev_f = 0.0;  // f(0)^{n-1}; zero for n >= 2 and equals 1 at n = 1
  for (std::size_t i = 1; i <= n_steps; ++i) {
    double r = static_cast<double>(i) * step;
    double cur_f = std::pow(man.warp.f(r), n - 1);
    vol_acc += 0.5 * (prev_f + cur_f) * step;
    prev_f = cur_f;
    cumulative[i] = vol_acc;
    double vol = omega * vol_acc;
    if (vol > 1.0) {
      grig_acc += r / std::log(vol) * step;
    } else {
      ++rep.skipped_points;
    }
    grig_partials.push_back(grig_acc);
  }
  rep.grigoryan_verdict = doubling_verdict(grig_partials);

  auto vol_at = [&](double R) {
    double pos = R / step;
    std::size_t i = static_cast<std::size_t>(pos);
    i = std::min(i, n_steps - 1);
    double frac = pos - static_cast<double>(i);
    return omega * (cumulative[i] + frac * (cumulative[i + 1] - cumulative[i]));
  };

  for (double R : r_grid) {
    double vol = vol_at(R);
    rep.volumes.push_back(vol);
    double K = prof.K(R);
    if (K > 0.0) {
      // Vol(B_R) <= omega int_0^R { sqrt((n-1)/K) sinh(sqrt(K/(n-1)) r) }^{n-1} dr
      double lam = std::sqrt(K / std::max(n - 1, 1));
      double bound;
      if (lam * R > 300.0) {
        bound = std::numeric_limits<double>::infinity();
      } else {
        double acc = 0.0, prev = 0.0;
        std::size_t m = static_cast<std::size_t>(std::ceil(R / step));
        for (std::size_t i = 1; i <= m; ++i) {
          double r = std::min(static_cast<double>(i) * step, R);
          double cur = std::pow(std::sinh(lam * r) / lam, n - 1);
          acc += 0.5 * (prev + cur) * step;
          prev = cur;
        }
        bound = omega * acc;
      }
      if (vol > bound * 1.01) rep.comparison_pass = false;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct ExplosionReport {
  double exploded_fraction = 0.0;
  BinomialCi ci;
  std::size_t n_paths = 0;
};

inline ExplosionReport explosion_experiment(const RotSymManifold& man,
                                            double r0, double t_end,
                                            std::size_t n_paths, double dt,
                                            double explosion_radius,
                                            std::uint64_t seed,
                                            int workers = 1) {
  if (!(r0 < explosion_radius))
    throw std::invalid_argument("explosion_experiment: r0 >= explosion radius");
  SdeSystem sys = radial_system(man);
  std::vector<std::uint8_t> exploded(n_paths, 0);
  parallel_paths(n_paths, workers, [&](std::size_t i) {
    PathSummary s = simulate_summary(sys, Vec{r0}, t_end, dt,
                                     RngStream{seed, i}, explosion_radius);
    if (s.status == PathStatus::kExploded) exploded[i] = 1;
  });
  std::size_t k = 0;
  for (auto e : exploded) k += e;
  ExplosionReport rep;
  rep.n_paths = n_paths;
  rep.exploded_fraction = static_cast<double>(k) / static_cast<double>(n_paths);
  rep.ci = clopper_pearson(k, n_paths);
  return rep;
}

}  // namespace diffcover
