#pragma once

// Uniform covers, weak uniform covers, and their numeric verification.
//
// The growth covers reproduce the two standard families on R^n:
//   linear_growth    phi_n(z) = (z - p_n)/|p_n|, inner balls of radius |p_n|/3,
//                    outer balls of radius |p_n|/2;
//   sublinear(alpha) phi_n(z) = 6 (z - p_n)/|p_n|^alpha, inner radius
//                    |p_n|^alpha/6, outer radius |p_n|^alpha/2;
// both with the central chart U_0 = {|z - p_0| < 6}, |p_0| = 1. Centers are
// packed greedily on concentric shells so the inner balls cover the region.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffcover/errors.hpp"
#include "diffcover/linalg.hpp"
#include "diffcover/parallel.hpp"
#include "diffcover/region.hpp"
#include "diffcover/rng.hpp"
#include "diffcover/compactify.hpp"
#include "diffcover/sde.hpp"

namespace diffcover {

struct Chart {
  int dim = 0;
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> inverse;
  std::function<Mat(const Vec&)> jacobian;
  std::function<std::vector<Mat>(const Vec&)> hessian;  // optional
  double inner_radius = 0.0;  // r, in chart coordinates
  double bound_k = 0.0;       // k
  // Bounding data in M coordinates.
  Vec center;                   // p_i
  double cover_radius_m = 0.0;  // radius of phi^{-1}(B_r)
  double outer_radius_m = 0.0;  // radius of U_i
};

inline Chart affine_chart(const Vec& center, double scale, double inner_radius,
                          double bound_k, double cover_radius_m,
                          double outer_radius_m) {
  Chart c;
  c.dim = center.size();
  c.center = center;
  c.inner_radius = inner_radius;
  c.bound_k = bound_k;
  c.cover_radius_m = cover_radius_m;
  c.outer_radius_m = outer_radius_m;
  const int n = c.dim;
  c.forward = [center, scale](const Vec& z) { return (z - center) * scale; };
  c.inverse = [center, scale](const Vec& v) {
    return center + v * (1.0 / scale);
  };
  c.jacobian = [n, scale](const Vec&) { return Mat::scaled_identity(n, scale); };
  c.hessian = [n](const Vec&) {
    return std::vector<Mat>(static_cast<std::size_t>(n), Mat::zero(n, n));
  };
  return c;
}

inline ChartFn as_chart_fn(const Chart& c) {
  ChartFn f;
  f.dim_in = c.dim;
  f.dim_out = c.dim;
  f.value = c.forward;
  f.jacobian = c.jacobian;
  f.hessian = c.hessian;
  return f;
}

// ---------------------------------------------------------------------------

struct GrowthMode {
  enum Kind { kLinearGrowth, kSublinear };
  Kind kind = kLinearGrowth;
  double alpha = 0.0;
  static GrowthMode linear() { return {kLinearGrowth, 0.0}; }
  static GrowthMode sublinear(double a) { return {kSublinear, a}; }
};

struct UniformCover {
  int dim = 0;
  GrowthMode mode;
  double bound_k = 0.0;
  double region_radius = 0.0;
  std::vector<Chart> charts;
};

namespace detail {

inline double growth_cover_radius(const GrowthMode& mode, double p_norm) {
  return mode.kind == GrowthMode::kLinearGrowth
             ? p_norm / 3.0
             : std::pow(p_norm, mode.alpha) / 6.0;
}

inline double growth_outer_radius(const GrowthMode& mode, double p_norm) {
  return mode.kind == GrowthMode::kLinearGrowth
             ? p_norm / 2.0
             : std::pow(p_norm, mode.alpha) / 2.0;
}

inline Chart growth_chart(const GrowthMode& mode, const Vec& p, double bound_k) {
  double pn = p.norm();
  double scale = mode.kind == GrowthMode::kLinearGrowth
                     ? 1.0 / pn
                     : 6.0 / std::pow(pn, mode.alpha);
  double r = mode.kind == GrowthMode::kLinearGrowth ? 1.0 / 3.0 : 1.0;
  return affine_chart(p, scale, r, bound_k, growth_cover_radius(mode, pn),
                      growth_outer_radius(mode, pn));
}

// Directions for one shell; enough that arcs between neighbours stay below
// `spacing` on the sphere of radius R.
inline std::vector<Vec> shell_directions(int dim, double radius, double spacing) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back(Vec{1.0});
    dirs.push_back(Vec{-1.0});
  } else if (dim == 2) {
    int m = std::max(6, static_cast<int>(
                            std::ceil(2.0 * M_PI * radius / spacing)));
    dirs.reserve(m);
    for (int i = 0; i < m; ++i) {
      double th = 2.0 * M_PI * static_cast<double>(i) / m;
      dirs.push_back(Vec{std::cos(th), std::sin(th)});
    }
  } else if (dim == 3) {
    double q = radius / spacing;
    int m = std::max(16, static_cast<int>(std::ceil(18.0 * q * q)));
    dirs.reserve(m);
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
      double z = 1.0 - 2.0 * (i + 0.5) / m;
      double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
      double th = golden * i;
      dirs.push_back(Vec{rxy * std::cos(th), rxy * std::sin(th), z});
    }
  } else {
    throw std::invalid_argument("growth covers support dim 1..3");
  }
  return dirs;
}

}  // namespace detail

// The canonical chart of the family centered at p (|p| >= 1); lets tests
// probe the cover geometry at radii far beyond a fully built region.
inline void append_chart_at(UniformCover& cover, const Vec& p) {
  if (p.norm() < 1.0)
    throw std::invalid_argument("append_chart_at: need |p| >= 1");
  cover.charts.push_back(detail::growth_chart(cover.mode, p, cover.bound_k));
}

inline UniformCover build_growth_cover(GrowthMode mode, double region_radius,
                                       int dim = 2, double bound_k = 18.0,
                                       std::size_t max_charts = 2000000) {
  if (mode.kind == GrowthMode::kSublinear &&
      !(mode.alpha >= 0.0 && mode.alpha < 1.0))
    throw std::invalid_argument("build_growth_cover: need 0 <= alpha < 1");
  if (!(region_radius >= 10.0))
    throw std::invalid_argument("build_growth_cover: region_radius >= 10 required");

  UniformCover cover;
  cover.dim = dim;
  cover.mode = mode;
  cover.bound_k = bound_k;
  cover.region_radius = region_radius;

  // Central chart: U_0 = {|z - p_0| < 6}, inner ball radius 2, |p_0| = 1.
  Vec p0 = Vec::unit(dim, 0);
  cover.charts.push_back(
      affine_chart(p0, 1.0 / 6.0, 1.0 / 3.0, bound_k, 2.0, 6.0));

  double shell_r = 1.0;
  for (;;) {
    double rho = detail::growth_cover_radius(mode, shell_r);
    for (const Vec& d : detail::shell_directions(dim, shell_r, 0.6 * rho)) {
      cover.charts.push_back(
          detail::growth_chart(mode, d * shell_r, bound_k));
      if (cover.charts.size() > max_charts)
        throw ConstructionError(
            "build_growth_cover: chart budget exhausted at shell radius " +
            std::to_string(shell_r));
    }
    if (shell_r - 0.8 * rho >= region_radius) break;
    shell_r += 0.6 * rho;
  }
  return cover;
}

// ---------------------------------------------------------------------------
// Locating the first (lowest-index) inner set containing a point. Shell-wise
// radial windowing keeps coverage sweeps over tens of thousands of charts fast.

class CoverLocator {
 public:
  explicit CoverLocator(const UniformCover& cover) : cover_(&cover) {
    std::vector<int> order(cover.charts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return cover.charts[a].center.norm() < cover.charts[b].center.norm();
    });
    for (int idx : order) {
      double r = cover.charts[idx].center.norm();
      double cr = cover.charts[idx].cover_radius_m;
      if (shells_.empty() ||
          std::abs(shells_.back().r - r) > 1e-9 * std::max(1.0, r)) {
        shells_.push_back({r, cr, {idx}});
      } else {
        shells_.back().max_cover = std::max(shells_.back().max_cover, cr);
        shells_.back().idx.push_back(idx);
      }
    }
    // Monotone envelopes make the radial-window walks sound for covers whose
    // radii are not monotone in the shell radius.
    suffix_min_reach_.assign(shells_.size(), 0.0);
    prefix_max_reach_.assign(shells_.size(), 0.0);
    for (std::size_t k = shells_.size(); k-- > 0;) {
      double reach = shells_[k].r - shells_[k].max_cover;
      suffix_min_reach_[k] =
          (k + 1 < shells_.size()) ? std::min(reach, suffix_min_reach_[k + 1])
                                   : reach;
    }
    for (std::size_t k = 0; k < shells_.size(); ++k) {
      double reach = shells_[k].r + shells_[k].max_cover;
      prefix_max_reach_[k] =
          k > 0 ? std::max(reach, prefix_max_reach_[k - 1]) : reach;
    }
  }

  // First-index rule: the smallest chart index whose inner ball contains z.
  int locate_inner(const Vec& z) const {
    double zn = z.norm();
    int best = -1;
    auto consider = [&](const Shell& s) {
      for (int idx : s.idx) {
        const Chart& c = cover_->charts[idx];
        if ((z - c.center).norm() < c.cover_radius_m)
          if (best < 0 || idx < best) best = idx;
      }
    };
    // first shell with r >= zn
    std::size_t split = std::lower_bound(shells_.begin(), shells_.end(), zn,
                                         [](const Shell& s, double v) {
                                           return s.r < v;
                                         }) -
                        shells_.begin();
    for (std::size_t k = split; k < shells_.size(); ++k) {
      if (suffix_min_reach_[k] > zn) break;
      consider(shells_[k]);
    }
    for (std::size_t k = split; k-- > 0;) {
      if (prefix_max_reach_[k] < zn) break;
      consider(shells_[k]);
    }
    return best;
  }

 private:
  struct Shell {
    double r;
    double max_cover;
    std::vector<int> idx;
  };
  const UniformCover* cover_;
  std::vector<Shell> shells_;
  std::vector<double> suffix_min_reach_;
  std::vector<double> prefix_max_reach_;
};

struct CoverageReport {
  bool covered = false;
  Vec first_gap;       // a point in no inner set, if any
  std::size_t checked = 0;
};

inline CoverageReport check_coverage(const UniformCover& cover,
                                     double region_radius, int grid_per_axis) {
  CoverLocator loc(cover);
  CoverageReport rep;
  rep.covered = true;
  const int n = cover.dim;
  const int g = grid_per_axis;
  std::vector<int> ix(n, 0);
  for (;;) {
    Vec z = Vec::zero(n);
    for (int d = 0; d < n; ++d)
      z[d] = -region_radius + 2.0 * region_radius * ix[d] / (g - 1);
    if (z.norm() <= region_radius) {
      ++rep.checked;
      if (loc.locate_inner(z) < 0) {
        rep.covered = false;
        rep.first_gap = z;
        return rep;
      }
    }
    int d = 0;
    while (d < n && ++ix[d] == g) ix[d++] = 0;
    if (d == n) break;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Verification of Definition-style chart bounds: sup over B_{2r} of the
// pushforward |Dphi . X| (operator norm) and of |A(phi)|, compared with k.

struct CoverVerifyReport {
  bool pass = false;
  double worst_bound = 0.0;
  int worst_chart = -1;
  double worst_pushforward = 0.0;
  double worst_generator = 0.0;
  std::size_t charts_checked = 0;
};

namespace detail {

inline std::vector<Vec> ball_grid(int dim, double radius, int per_axis,
                                  std::uint64_t qr_seed = 12345) {
  std::vector<Vec> pts;
  if (dim <= 3) {
    std::vector<int> ix(dim, 0);
    for (;;) {
      Vec v = Vec::zero(dim);
      for (int d = 0; d < dim; ++d)
        v[d] = -radius + 2.0 * radius * ix[d] / (per_axis - 1);
      if (v.norm() <= radius) pts.push_back(v);
      int d = 0;
      while (d < dim && ++ix[d] == per_axis) ix[d++] = 0;
      if (d == dim) break;
    }
  } else {
    RandomStream rs(RngStream{qr_seed, 0});
    while (pts.size() < 10000) {
      Vec v = Vec::zero(dim);
      for (int d = 0; d < dim; ++d)
        v[d] = radius * (2.0 * rs.next_uniform() - 1.0);
      if (v.norm() <= radius) pts.push_back(v);
    }
  }
  return pts;
}

inline void check_chart_identity(const Chart& c, int index) {
  // Samples on the spheres of radius r, 2r, 3r; the 3r sphere doubles as the
  // B_{3r}-in-image check.
  for (double f : {1.0, 2.0, 3.0}) {
    for (int d = 0; d < c.dim; ++d) {
      for (double sgn : {-1.0, 1.0}) {
        Vec v = Vec::unit(c.dim, d) * (sgn * f * c.inner_radius);
        Vec z = c.inverse(v);
        if (!z.all_finite())
          throw ChartDomainError("chart " + std::to_string(index) +
                                 ": inverse not finite at sample");
        Vec back = c.forward(z);
        if ((back - v).norm() > 1e-9 * std::max(1.0, v.norm()))
          throw ChartDomainError("chart " + std::to_string(index) +
                                 ": inverse/forward mismatch");
      }
    }
  }
}

}  // namespace detail

inline CoverVerifyReport verify_uniform_cover(const UniformCover& cover,
                                              const SdeSystem& system,
                                              int grid_per_axis = 9,
                                              int workers = 1) {
  const std::size_t n = cover.charts.size();
  std::vector<double> push_worst(n, 0.0), gen_worst(n, 0.0);
  parallel_paths(n, workers, [&](std::size_t i) {
    const Chart& c = cover.charts[i];
    detail::check_chart_identity(c, static_cast<int>(i));
    ChartFn fn = as_chart_fn(c);
    auto grid = detail::ball_grid(c.dim, 2.0 * c.inner_radius, grid_per_axis);
    double pw = 0.0, gw = 0.0;
    for (const Vec& v : grid) {
      Vec z = c.inverse(v);
      if (!z.all_finite())
        throw ChartDomainError("chart " + std::to_string(i) +
                               ": inverse not finite at grid point");
      Mat push = c.jacobian(z).mul(system.diffusion(z));
      pw = std::max(pw, spectral_norm(push));
      gw = std::max(gw, generator_apply(system, fn, z).norm());
    }
    push_worst[i] = pw;
    gen_worst[i] = gw;
  });

  CoverVerifyReport rep;
  rep.pass = true;
  rep.charts_checked = n;
  for (std::size_t i = 0; i < n; ++i) {
    double w = std::max(push_worst[i], gen_worst[i]);
    if (w > rep.worst_bound) {
      rep.worst_bound = w;
      rep.worst_chart = static_cast<int>(i);
    }
    rep.worst_pushforward = std::max(rep.worst_pushforward, push_worst[i]);
    rep.worst_generator = std::max(rep.worst_generator, gen_worst[i]);
    if (w > cover.charts[i].bound_k) rep.pass = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Delta-sequence renormalization: keep s_1 = t_1; group the remaining terms
// into minimal prefixes with sum >= 1 (each term first capped at 1, so group
// sums land in [1,2]); divide group j's members by j. The result keeps
// 0 < s <= t, is non-increasing, diverges, and has sum s^2 <= 1 + 2 sum 1/j^2.

inline std::vector<double> renormalize_deltas(const std::vector<double>& t,
                                              std::size_t n_emit) {
  if (t.empty()) throw std::invalid_argument("renormalize_deltas: empty input");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0))
      throw std::invalid_argument("renormalize_deltas: non-positive term");
    if (i > 0 && t[i] > t[i - 1])
      throw std::invalid_argument("renormalize_deltas: increasing input");
  }
  std::vector<double> capped(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) capped[i] = std::min(t[i], 1.0);

  std::vector<double> s;
  s.reserve(std::min(n_emit, capped.size()));
  if (n_emit == 0) return s;
  s.push_back(capped[0]);
  std::size_t i = 1;
  int group = 2;
  while (s.size() < n_emit && i < capped.size()) {
    double sum = 0.0;
    std::size_t start = i;
    while (i < capped.size() && sum < 1.0) sum += capped[i++];
    for (std::size_t j = start; j < i && s.size() < n_emit; ++j)
      s.push_back(capped[j] / group);
    ++group;
  }
  return s;
}

// ---------------------------------------------------------------------------

struct SetPair {
  Ball inner;
  Ball outer;
};

struct WeakUniformCover {
  int dim = 0;
  std::vector<SetPair> pairs;
  std::vector<double> exhaustion_radii;  // K_m = B(0, R_m), increasing
  std::vector<double> deltas;            // delta_m, one per exhaustion set
  double tail_constant = 1.0;            // C
};

// First-index rule: smallest n with x in U_n^0; -1 if uncovered.
inline int first_inner_index(const WeakUniformCover& cover, const Vec& x) {
  for (std::size_t n = 0; n < cover.pairs.size(); ++n)
    if (cover.pairs[n].inner.contains(x)) return static_cast<int>(n);
  return -1;
}

// Smallest m with U_n contained in K_m.
inline int exhaustion_index(const WeakUniformCover& cover, int set_idx) {
  const SetPair& p = cover.pairs[set_idx];
  double hi = p.outer.center.norm() + p.outer.radius;
  for (std::size_t m = 0; m < cover.exhaustion_radii.size(); ++m)
    if (hi <= cover.exhaustion_radii[m]) return static_cast<int>(m);
  throw std::invalid_argument("exhaustion does not contain set " +
                              std::to_string(set_idx));
}

inline double delta_for_set(const WeakUniformCover& cover, int set_idx) {
  return cover.deltas[exhaustion_index(cover, set_idx)];
}

inline void validate_weak_cover(const WeakUniformCover& cover) {
  if (cover.deltas.size() != cover.exhaustion_radii.size())
    throw std::invalid_argument("weak cover: deltas/exhaustion size mismatch");
  for (std::size_t m = 0; m < cover.deltas.size(); ++m) {
    if (!(cover.deltas[m] > 0.0))
      throw std::invalid_argument("weak cover: non-positive delta");
    if (m > 0 && cover.deltas[m] > cover.deltas[m - 1])
      throw std::invalid_argument("weak cover: deltas must be non-increasing");
    if (m > 0 && cover.exhaustion_radii[m] <= cover.exhaustion_radii[m - 1])
      throw std::invalid_argument("weak cover: exhaustion must increase");
  }
  for (std::size_t n = 0; n < cover.pairs.size(); ++n) {
    const SetPair& p = cover.pairs[n];
    double off = (p.inner.center - p.outer.center).norm();
    if (off + p.inner.radius > p.outer.radius + 1e-12)
      throw std::invalid_argument("weak cover: inner set " + std::to_string(n) +
                                  " not inside its outer set");
    double c = p.outer.center.norm();
    double lo = std::max(0.0, c - p.outer.radius), hi = c + p.outer.radius;
    int crossings = 0;
    for (double r : cover.exhaustion_radii)
      if (r > lo && r < hi) ++crossings;
    if (crossings > 1)
      throw std::invalid_argument("weak cover: set " + std::to_string(n) +
                                  " crosses more than one exhaustion boundary");
    exhaustion_index(cover, static_cast<int>(n));  // containment
  }
}

// Lemma-2.1 style passage: a uniform cover yields a weak uniform cover with
// all deltas equal to one.
inline WeakUniformCover to_weak_cover(const UniformCover& u,
                                      double tail_constant = 1.0) {
  WeakUniformCover w;
  w.dim = u.dim;
  w.tail_constant = tail_constant;
  double max_hi = 0.0;
  for (const Chart& c : u.charts) {
    w.pairs.push_back({Ball{c.center, c.cover_radius_m},
                       Ball{c.center, c.outer_radius_m}});
    max_hi = std::max(max_hi, c.center.norm() + c.outer_radius_m);
  }
  double r = 8.0;
  for (;;) {
    w.exhaustion_radii.push_back(r);
    if (r >= max_hi) break;
    r *= 4.0;
  }
  w.deltas.assign(w.exhaustion_radii.size(), 1.0);
  return w;
}

// W_x^p: seed with every set whose inner ball contains the start set's
// center, then close p times over inner-ball intersections.
inline std::vector<int> wp_neighborhoods(const WeakUniformCover& cover,
                                         int start, int p) {
  const Vec& x = cover.pairs[start].inner.center;
  std::set<int> acc;
  for (std::size_t n = 0; n < cover.pairs.size(); ++n)
    if (cover.pairs[n].inner.contains(x)) acc.insert(static_cast<int>(n));
  acc.insert(start);
  for (int layer = 0; layer < p; ++layer) {
    std::set<int> next = acc;
    for (int m : acc) {
      const Ball& bm = cover.pairs[m].inner;
      for (std::size_t n = 0; n < cover.pairs.size(); ++n) {
        const Ball& bn = cover.pairs[n].inner;
        if ((bm.center - bn.center).norm() < bm.radius + bn.radius)
          next.insert(static_cast<int>(n));
      }
    }
    if (next.size() == acc.size()) break;
    acc.swap(next);
  }
  return std::vector<int>(acc.begin(), acc.end());
}

// ---------------------------------------------------------------------------
// Regularity along an approach sequence: for each x_j, the sup over samples
// of its outer set of the compactified distance to the limit boundary point.

struct RegularityReport {
  bool regular = false;
  std::vector<double> sup_distances;
  std::vector<int> located_sets;
  double tolerance = 0.0;
};

namespace detail {

inline std::vector<Vec> sample_ball(const Ball& b, int samples) {
  const int n = b.center.size();
  std::vector<Vec> dirs;
  int d_count = std::max(6, samples / 4);
  if (n == 1) {
    dirs = {Vec{1.0}, Vec{-1.0}};
  } else if (n == 2) {
    for (int i = 0; i < d_count; ++i) {
      double th = 2.0 * M_PI * i / d_count;
      dirs.push_back(Vec{std::cos(th), std::sin(th)});
    }
  } else {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < d_count; ++i) {
      double z = 1.0 - 2.0 * (i + 0.5) / d_count;
      double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vec v = Vec::zero(n);
      v[0] = rxy * std::cos(golden * i);
      v[1] = rxy * std::sin(golden * i);
      v[2] = z;
      dirs.push_back(v);
    }
  }
  std::vector<Vec> pts{b.center};
  for (double f : {0.999, 0.75, 0.4})
    for (const Vec& d : dirs) pts.push_back(b.center + d * (f * b.radius));
  return pts;
}

inline RegularityReport regularity_over(
    const std::vector<Vec>& approach, const Compactification& model,
    const std::function<std::pair<int, Ball>(const Vec&)>& locate_outer,
    int samples_per_set, double tol) {
  RegularityReport rep;
  rep.tolerance = tol;
  if (approach.empty())
    throw std::invalid_argument("check_regular: empty approach sequence");
  Vec limit = model.boundary_limit(approach.back());
  for (const Vec& x : approach) {
    auto [idx, outer] = locate_outer(x);
    double sup = 0.0;
    for (const Vec& y : sample_ball(outer, samples_per_set))
      sup = std::max(sup, model.metric(model.embed(y), limit));
    rep.located_sets.push_back(idx);
    rep.sup_distances.push_back(sup);
  }
  rep.regular = rep.sup_distances.back() < tol;
  for (std::size_t j = 1; j < rep.sup_distances.size(); ++j)
    if (rep.sup_distances[j] > rep.sup_distances[j - 1] * 1.05 + 1e-12)
      rep.regular = false;
  return rep;
}

}  // namespace detail

inline RegularityReport check_regular(const UniformCover& cover,
                                      const Compactification& model,
                                      const std::vector<Vec>& approach,
                                      int samples_per_set = 64,
                                      double tol = 1e-2) {
  CoverLocator loc(cover);
  return detail::regularity_over(
      approach, model,
      [&](const Vec& x) -> std::pair<int, Ball> {
        int idx = loc.locate_inner(x);
        if (idx < 0)
          throw CoverageError("check_regular: approach point in no inner set");
        const Chart& c = cover.charts[idx];
        return {idx, Ball{c.center, c.outer_radius_m}};
      },
      samples_per_set, tol);
}

inline RegularityReport check_regular(const WeakUniformCover& cover,
                                      const Compactification& model,
                                      const std::vector<Vec>& approach,
                                      int samples_per_set = 64,
                                      double tol = 1e-2) {
  return detail::regularity_over(
      approach, model,
      [&](const Vec& x) -> std::pair<int, Ball> {
        int idx = first_inner_index(cover, x);
        if (idx < 0)
          throw CoverageError("check_regular: approach point in no inner set");
        return {idx, cover.pairs[idx].outer};
      },
      samples_per_set, tol);
}

// ---------------------------------------------------------------------------
// Certificate serialization (versioned line format, exact double round trip).

inline void save_cover_certificate(std::ostream& os, const UniformCover& u,
                                   const WeakUniformCover* weak = nullptr) {
  char buf[64];
  auto g = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "diffcover-cover v1\n";
  os << "mode "
     << (u.mode.kind == GrowthMode::kLinearGrowth ? "linear_growth"
                                                  : "sublinear")
     << "\n";
  os << "alpha " << g(u.mode.alpha) << "\n";
  os << "dim " << u.dim << "\n";
  os << "bound_k " << g(u.bound_k) << "\n";
  os << "region_radius " << g(u.region_radius) << "\n";
  os << "charts " << u.charts.size() << "\n";
  for (const Chart& c : u.charts) {
    for (int d = 0; d < u.dim; ++d) os << g(c.center[d]) << " ";
    os << g(c.cover_radius_m) << " " << g(c.outer_radius_m) << "\n";
  }
  os << "weak " << (weak ? 1 : 0) << "\n";
  if (weak) {
    os << "C " << g(weak->tail_constant) << "\n";
    os << "exhaustion " << weak->exhaustion_radii.size();
    for (double r : weak->exhaustion_radii) os << " " << g(r);
    os << "\n";
    os << "deltas " << weak->deltas.size();
    for (double d : weak->deltas) os << " " << g(d);
    os << "\n";
  }
  os << "end\n";
}

struct LoadedCertificate {
  UniformCover uniform;
  WeakUniformCover weak;
  bool has_weak = false;
};

inline LoadedCertificate load_cover_certificate(std::istream& is) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("cover certificate: " + what);
  };
  std::string line, word;
  if (!std::getline(is, line) || line != "diffcover-cover v1")
    fail("bad header");
  LoadedCertificate out;
  UniformCover& u = out.uniform;
  auto expect_kv = [&](const std::string& key) -> std::string {
    if (!std::getline(is, line)) fail("truncated at " + key);
    std::istringstream ss(line);
    std::string k;
    ss >> k;
    if (k != key) fail("expected key '" + key + "', got '" + k + "'");
    std::string rest;
    ss >> rest;
    return rest;
  };
  std::string mode = expect_kv("mode");
  if (mode == "linear_growth") u.mode = GrowthMode::linear();
  else if (mode == "sublinear") u.mode.kind = GrowthMode::kSublinear;
  else fail("unknown mode " + mode);
  u.mode.alpha = std::stod(expect_kv("alpha"));
  u.dim = std::stoi(expect_kv("dim"));
  if (u.dim < 1 || u.dim > kMaxDim) fail("bad dim");
  u.bound_k = std::stod(expect_kv("bound_k"));
  u.region_radius = std::stod(expect_kv("region_radius"));
  std::size_t n_charts = std::stoul(expect_kv("charts"));
  for (std::size_t i = 0; i < n_charts; ++i) {
    if (!std::getline(is, line)) fail("truncated chart list");
    std::istringstream ss(line);
    Vec p = Vec::zero(u.dim);
    for (int d = 0; d < u.dim; ++d)
      if (!(ss >> p[d])) fail("bad chart line");
    double cover_m, outer_m;
    if (!(ss >> cover_m >> outer_m)) fail("bad chart radii");
    if (i == 0) {
      u.charts.push_back(
          affine_chart(p, 1.0 / 6.0, 1.0 / 3.0, u.bound_k, cover_m, outer_m));
    } else {
      u.charts.push_back(detail::growth_chart(u.mode, p, u.bound_k));
      if (std::abs(u.charts.back().cover_radius_m - cover_m) >
              1e-9 * std::max(1.0, cover_m) ||
          std::abs(u.charts.back().outer_radius_m - outer_m) >
              1e-9 * std::max(1.0, outer_m))
        fail("chart radii inconsistent with mode formulas");
    }
  }
  int has_weak = std::stoi(expect_kv("weak"));
  if (has_weak) {
    out.has_weak = true;
    out.weak = to_weak_cover(u);
    out.weak.tail_constant = std::stod(expect_kv("C"));
    if (!std::getline(is, line)) fail("truncated exhaustion");
    {
      std::istringstream ss(line);
      std::string k; std::size_t m;
      ss >> k >> m;
      if (k != "exhaustion") fail("expected exhaustion");
      out.weak.exhaustion_radii.assign(m, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        if (!(ss >> out.weak.exhaustion_radii[i])) fail("bad exhaustion");
    }
    if (!std::getline(is, line)) fail("truncated deltas");
    {
      std::istringstream ss(line);
      std::string k; std::size_t m;
      ss >> k >> m;
      if (k != "deltas") fail("expected deltas");
      out.weak.deltas.assign(m, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        if (!(ss >> out.weak.deltas[i])) fail("bad deltas");
    }
  }
  if (!std::getline(is, line) || line != "end") fail("missing end marker");
  if (out.has_weak) validate_weak_cover(out.weak);
  return out;
}

}  // namespace diffcover
