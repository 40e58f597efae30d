#pragma once

// Boundary behaviour of diffusion semigroups under a compactification:
// Monte-Carlo estimates of P_t f, the C* and C_0 checks, the ball convergence
// criterion, uniform covers at a boundary point, and the complex-plane
// counterexample whose angle law is radius-independent.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffcover/compactify.hpp"
#include "diffcover/cover.hpp"
#include "diffcover/errors.hpp"
#include "diffcover/exit_times.hpp"
#include "diffcover/parallel.hpp"
#include "diffcover/sde.hpp"
#include "diffcover/stats.hpp"

namespace diffcover {

struct McConfig {
  std::size_t n_paths = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  double explosion_radius = 1e6;
  int workers = 1;
};

struct BoundedFn {
  std::function<double(const Vec&)> f;  // on extended coordinates
  double bound = 1.0;
  std::string name;
};

enum class ExplosionConvention { kKillAtExplosion, kSendToDelta };

inline ExplosionConvention default_convention(const Compactification& model) {
  return model.kind == CompactKind::kOnePoint
             ? ExplosionConvention::kSendToDelta
             : ExplosionConvention::kKillAtExplosion;
}

// Interior inverse of the embedding (boundary points have no preimage).
inline Vec decompactify(const Vec& ext, const Compactification& model) {
  if (model.is_boundary(ext))
    throw std::invalid_argument("decompactify: boundary point");
  switch (model.kind) {
    case CompactKind::kOnePoint: {
      double rho = ext[0];
      Vec x = Vec::zero(model.dim);
      if (rho <= 0.0) return x;
      double r = std::tan(0.5 * M_PI * rho);
      double w = rho * (1.0 - rho);
      for (int i = 0; i < model.dim; ++i) x[i] = ext[i + 1] / w * r;
      return x;
    }
    case CompactKind::kSphereAtInfinity:
      return ext * (1.0 / (1.0 - ext.norm()));
    case CompactKind::kCylinderEnds: {
      double rho = ext[0];
      return Vec{rho / (1.0 - std::abs(rho)), std::atan2(ext[2], ext[1])};
    }
  }
  return Vec{};
}

// ---------------------------------------------------------------------------

struct SemigroupEstimate {
  double value = 0.0;
  double ci_halfwidth = 0.0;
  std::size_t n_paths = 0;
  double exploded_fraction = 0.0;
  ExplosionConvention convention = ExplosionConvention::kKillAtExplosion;
};

namespace detail {

// Terminal embedded states for n paths run to time t (exploded flagged).
struct EndpointSample {
  std::vector<Vec> embedded;
  std::vector<std::uint8_t> exploded;
};

inline EndpointSample sample_endpoints(const SdeSystem& system,
                                       const Compactification& model,
                                       const Vec& x, double t,
                                       const McConfig& mc) {
  EndpointSample out;
  out.embedded.assign(mc.n_paths, Vec{});
  out.exploded.assign(mc.n_paths, 0);
  parallel_paths(mc.n_paths, mc.workers, [&](std::size_t i) {
    PathSummary s = simulate_summary(system, x, t, mc.dt,
                                     RngStream{mc.seed, i},
                                     mc.explosion_radius);
    if (s.status == PathStatus::kExploded) {
      out.exploded[i] = 1;
    } else {
      out.embedded[i] = model.embed(s.final_state);
    }
  });
  return out;
}

inline SemigroupEstimate reduce_semigroup(const EndpointSample& ends,
                                          const Compactification& model,
                                          const BoundedFn& f,
                                          ExplosionConvention conv) {
  RunningStat stat;
  std::size_t exploded = 0;
  for (std::size_t i = 0; i < ends.embedded.size(); ++i) {
    double v;
    if (ends.exploded[i]) {
      ++exploded;
      if (conv == ExplosionConvention::kSendToDelta)
        v = f.f(model.delta());
      else
        v = 0.0;
    } else {
      v = f.f(ends.embedded[i]);
      if (std::abs(v) > f.bound * (1.0 + 1e-12))
        throw ContractViolation("estimate_semigroup: |" + f.name +
                                "| exceeded its declared bound");
    }
    stat.add(v);
  }
  SemigroupEstimate est;
  est.value = stat.mean();
  est.ci_halfwidth = stat.ci_halfwidth();
  est.n_paths = ends.embedded.size();
  est.exploded_fraction = static_cast<double>(exploded) /
                          static_cast<double>(ends.embedded.size());
  est.convention = conv;
  return est;
}

}  // namespace detail

inline SemigroupEstimate estimate_semigroup(
    const SdeSystem& system, const Compactification& model, const BoundedFn& f,
    const Vec& x, double t, const McConfig& mc,
    ExplosionConvention conv = ExplosionConvention::kKillAtExplosion) {
  if (t < 0.0) throw std::invalid_argument("estimate_semigroup: t < 0");
  if (t == 0.0) {
    SemigroupEstimate est;
    est.value = f.f(model.embed(x));
    est.ci_halfwidth = 0.0;
    est.n_paths = mc.n_paths;
    est.convention = conv;
    return est;
  }
  return detail::reduce_semigroup(
      detail::sample_endpoints(system, model, x, t, mc), model, f, conv);
}

// Lemma-5.1 style pullback through beta: interior points evaluate as under
// the one-point model, every boundary point evaluates to f(Delta).
inline BoundedFn beta_pullback(const BoundedFn& f_one_point,
                               const Compactification& one_point_model,
                               const Compactification& other_model) {
  if (one_point_model.kind != CompactKind::kOnePoint)
    throw std::invalid_argument("beta_pullback: first model must be one_point");
  double at_delta = f_one_point.f(one_point_model.delta());
  auto f = f_one_point.f;
  Compactification op = one_point_model, om = other_model;
  return BoundedFn{
      [f, at_delta, op, om](const Vec& ext) {
        if (om.is_boundary(ext)) return at_delta;
        return f(op.embed(decompactify(ext, om)));
      },
      f_one_point.bound, f_one_point.name + "∘beta"};
}

// ---------------------------------------------------------------------------

struct BallConvergenceReport {
  bool holds = false;
  std::vector<double> diameters;  // sup distance of the embedded ball to the limit
  double tolerance = 0.0;
};

// Geodesic balls of radius r around an escaping sequence must shrink, in the
// extended metric, onto the limit boundary point. Euclidean balls on the flat
// models; the axial-angle product ball on the cylinder.
inline BallConvergenceReport check_ball_convergence(
    const Compactification& model, const std::vector<Vec>& x_seq, double r,
    int samples = 64, double tol = 1e-2) {
  if (x_seq.empty())
    throw std::invalid_argument("check_ball_convergence: empty sequence");
  BallConvergenceReport rep;
  rep.tolerance = tol;
  Vec limit = model.boundary_limit(x_seq.back());
  for (const Vec& c : x_seq) {
    std::vector<Vec> pts;
    if (model.kind == CompactKind::kCylinderEnds) {
      int g = std::max(3, static_cast<int>(std::sqrt(samples)));
      for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
          double da = -r + 2.0 * r * i / (g - 1);
          double dth = -r + 2.0 * r * j / (g - 1);
          pts.push_back(Vec{c[0] + da, c[1] + dth});
        }
    } else {
      pts = detail::sample_ball(Ball{c, r}, samples);
    }
    double sup = 0.0;
    for (const Vec& y : pts)
      sup = std::max(sup, model.metric(model.embed(y), limit));
    rep.diameters.push_back(sup);
  }
  rep.holds = rep.diameters.back() < tol;
  for (std::size_t j = 1; j < rep.diameters.size(); ++j)
    if (rep.diameters[j] > rep.diameters[j - 1] * 1.05 + 1e-12)
      rep.holds = false;
  return rep;
}

// ---------------------------------------------------------------------------

enum class LimitVerdict { kConverges, kFails, kInconclusive };

inline const char* to_string(LimitVerdict v) {
  switch (v) {
    case LimitVerdict::kConverges: return "converges";
    case LimitVerdict::kFails: return "fails";
    case LimitVerdict::kInconclusive: return "inconclusive";
  }
  return "?";
}

struct CstarFnReport {
  std::string name;
  double f_at_limit = 0.0;
  std::vector<double> gaps;  // |P_t f(x_j) - f(xbar)|
  std::vector<double> ci;    // CI half widths of P_t f(x_j)
  LimitVerdict verdict = LimitVerdict::kInconclusive;
};

struct CstarReport {
  std::vector<CstarFnReport> per_fn;
  std::vector<double> approach_distance;  // metric(embed(x_j), xbar)
  double tolerance_floor = 0.05;
};

// Default probe suite: the constant, a bump at the target boundary point, and
// (one-point model) a cutoff vanishing at Delta.
inline std::vector<BoundedFn> default_f_suite(const Compactification& model,
                                              const Vec& xbar) {
  std::vector<BoundedFn> suite;
  suite.push_back(BoundedFn{[](const Vec&) { return 1.0; }, 1.0, "one"});
  suite.push_back(BoundedFn{
      [xbar](const Vec& y) { return std::exp(-4.0 * (y - xbar).norm2()); }, 1.0,
      "bump"});
  if (model.kind == CompactKind::kOnePoint) {
    Vec delta = model.delta();
    suite.push_back(BoundedFn{
        [delta](const Vec& y) {
          return 1.0 - std::exp(-2.0 * (y - delta).norm2());
        },
        1.0, "cutoff"});
  }
  return suite;
}

inline CstarReport check_cstar(const SdeSystem& system,
                               const Compactification& model, const Vec& xbar,
                               const std::vector<Vec>& approach,
                               const std::vector<BoundedFn>& f_suite, double t,
                               const McConfig& mc,
                               ExplosionConvention conv =
                                   ExplosionConvention::kKillAtExplosion,
                               double floor = 0.05) {
  if (approach.size() < 2)
    throw std::invalid_argument("check_cstar: need at least two approach points");
  CstarReport rep;
  rep.tolerance_floor = floor;
  for (const BoundedFn& f : f_suite) {
    double fl = f.f(xbar);
    if (!std::isfinite(fl))
      throw std::invalid_argument("check_cstar: f(xbar) undefined for " + f.name);
    rep.per_fn.push_back(CstarFnReport{f.name, fl, {}, {}, {}});
  }
  for (std::size_t j = 0; j < approach.size(); ++j) {
    rep.approach_distance.push_back(model.metric(model.embed(approach[j]), xbar));
    McConfig mcj = mc;
    mcj.seed = mc.seed + j;  // fresh streams per approach point
    detail::EndpointSample ends =
        detail::sample_endpoints(system, model, approach[j], t, mcj);
    for (std::size_t fi = 0; fi < f_suite.size(); ++fi) {
      SemigroupEstimate est =
          detail::reduce_semigroup(ends, model, f_suite[fi], conv);
      rep.per_fn[fi].gaps.push_back(std::abs(est.value - rep.per_fn[fi].f_at_limit));
      rep.per_fn[fi].ci.push_back(est.ci_halfwidth);
    }
  }
  for (CstarFnReport& fr : rep.per_fn) {
    std::size_t last = fr.gaps.size() - 1;
    bool below = fr.gaps[last] <= 3.0 * fr.ci[last] + 1e-2;
    bool decreasing = true;
    for (std::size_t j = 1; j < fr.gaps.size(); ++j)
      if (fr.gaps[j] > fr.gaps[j - 1] + 3.0 * (fr.ci[j] + fr.ci[j - 1]) + 1e-3)
        decreasing = false;
    bool fails_floor = fr.gaps[last] - 3.0 * fr.ci[last] > floor &&
                       fr.gaps[last - 1] - 3.0 * fr.ci[last - 1] > floor;
    if (below && decreasing)
      fr.verdict = LimitVerdict::kConverges;
    else if (fails_floor)
      fr.verdict = LimitVerdict::kFails;
    else
      fr.verdict = LimitVerdict::kInconclusive;
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct C0Report {
  std::vector<double> radii;
  std::vector<double> entrance_probs;  // P{T_K(x) < t}
  std::vector<double> ci_lo, ci_hi;
  bool c0_consistent = false;
  double threshold = 0.05;
};

// Entrance probabilities into the compact K from starts at increasing radii;
// consistency with the C_0 property means non-increasing (within CI) with the
// final value under the threshold.
inline C0Report check_c0(const SdeSystem& system, const Region& compact_k,
                         double t, const std::vector<double>& start_radii,
                         const McConfig& mc, const Vec& direction = Vec{},
                         double threshold = 0.05) {
  if (start_radii.empty())
    throw std::invalid_argument("check_c0: no start radii");
  C0Report rep;
  rep.threshold = threshold;
  Vec dir = direction.size() == 0 ? Vec::unit(system.dim_state, 0)
                                  : direction.normalized();
  StopSet into_k{compact_k.contains, compact_k.id};
  for (std::size_t j = 0; j < start_radii.size(); ++j) {
    Vec x0 = dir * start_radii[j];
    if (compact_k.contains(x0))
      throw std::invalid_argument("check_c0: start point inside K");
    std::vector<std::uint8_t> entered(mc.n_paths, 0);
    McConfig mcj = mc;
    mcj.seed = mc.seed + j;
    parallel_paths(mc.n_paths, mc.workers, [&](std::size_t i) {
      PathSummary s = simulate_summary(system, x0, t, mcj.dt,
                                       RngStream{mcj.seed, i},
                                       mcj.explosion_radius, &into_k);
      if (s.status == PathStatus::kExitedDomain) entered[i] = 1;
    });
    std::size_t k = 0;
    for (auto e : entered) k += e;
    BinomialCi ci = clopper_pearson(k, mc.n_paths);
    rep.radii.push_back(start_radii[j]);
    rep.entrance_probs.push_back(static_cast<double>(k) /
                                 static_cast<double>(mc.n_paths));
    rep.ci_lo.push_back(ci.lo);
    rep.ci_hi.push_back(ci.hi);
  }
  rep.c0_consistent = rep.entrance_probs.back() < threshold;
  for (std::size_t j = 1; j < rep.entrance_probs.size(); ++j)
    if (rep.ci_lo[j] > rep.ci_hi[j - 1]) rep.c0_consistent = false;
  return rep;
}

// ---------------------------------------------------------------------------

struct AngleLawReport {
  std::vector<double> angles;  // arg x0 + B_t
  double modulus = 0.0;        // |x0| e^{t/2}, deterministic
  double angle_mean = 0.0;
  double angle_variance = 0.0;
  double crosscheck_rel_err = 0.0;  // integrator vs closed form, shared noise
};

// Exact sampling of the Example-4 law: modulus |x0| e^{t/2}, angle
// arg x0 + N(0,t), cross-checked against the integrator on a few paths.
inline AngleLawReport counterexample_angle_law(const Vec& x0, double t,
                                               std::size_t n_samples,
                                               std::uint64_t seed,
                                               double crosscheck_dt = 1e-3,
                                               int crosscheck_paths = 3) {
  if (x0.norm() == 0.0)
    throw std::invalid_argument("counterexample_angle_law: x0 must be nonzero");
  if (t < 0.0) throw std::invalid_argument("counterexample_angle_law: t < 0");
  AngleLawReport rep;
  rep.modulus = x0.norm() * std::exp(0.5 * t);
  double arg0 = std::atan2(x0[1], x0[0]);
  rep.angles.reserve(n_samples);
  RunningStat stat;
  double rt = std::sqrt(t);
  for (std::size_t i = 0; i < n_samples; ++i) {
    RandomStream rs(RngStream{seed, i});
    double a = arg0 + rt * rs.next_normal();
    rep.angles.push_back(a);
    stat.add(a);
  }
  rep.angle_mean = stat.mean();
  rep.angle_variance = stat.variance();

  if (t > 0.0) {
    SdeSystem sys;
    sys.dim_state = 2;
    sys.dim_noise = 1;
    sys.convention = Convention::kStratonovich;
    sys.drift = [](const Vec& x) { return Vec{0.5 * x[0], 0.5 * x[1]}; };
    sys.diffusion = [](const Vec& x) {
      Mat m = Mat::zero(2, 1);
      m(0, 0) = -x[1];
      m(1, 0) = x[0];
      return m;
    };
    int steps = static_cast<int>(std::round(t / crosscheck_dt));
    for (int p = 0; p < crosscheck_paths; ++p) {
      RngStream rng{seed, 1000000 + static_cast<std::uint64_t>(p)};
      auto incs = brownian_increments(rng, 1, crosscheck_dt, steps);
      Vec x = x0;
      double bt = 0.0;
      for (const Vec& dB : incs) {
        x = step(sys, x, dB, crosscheck_dt);
        bt += dB[0];
      }
      double grow = x0.norm() * std::exp(0.5 * t);
      Vec exact{grow * std::cos(arg0 + bt), grow * std::sin(arg0 + bt)};
      rep.crosscheck_rel_err = std::max(
          rep.crosscheck_rel_err, (x - exact).norm() / exact.norm());
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Uniform cover at a boundary point: strictly nested cone neighbourhoods.

struct ConeNeighborhood {
  Vec axis;           // unit vector toward the boundary direction
  double half_angle;  // radians
  double min_radius;
  bool contains(const Vec& x) const {
    double r = x.norm();
    if (r <= min_radius) return false;
    return x.dot(axis) / r > std::cos(half_angle);
  }
};

struct PointCoverReport {
  bool pass = false;
  double worst_ratio = 0.0;  // max ci_upper / (c t^2)
  std::vector<int> failing_shells;
  std::vector<double> shell_worst_ratio;
  SeriesVerdict delta_sum_verdict = SeriesVerdict::kInconclusive;
  SeriesVerdict delta_sq_verdict = SeriesVerdict::kInconclusive;
};

inline PointCoverReport verify_point_cover(
    const SdeSystem& system, const std::vector<ConeNeighborhood>& annuli,
    const DeltaSequence& deltas, double c, int samples_per_shell,
    const McConfig& mc, const std::vector<double>& t_fractions = {0.6, 0.9}) {
  if (annuli.size() < 3)
    throw std::invalid_argument("verify_point_cover: need at least 3 sets");
  for (std::size_t n = 1; n < annuli.size(); ++n) {
    if (!(annuli[n].half_angle < annuli[n - 1].half_angle) ||
        !(annuli[n].min_radius > annuli[n - 1].min_radius))
      throw std::invalid_argument(
          "verify_point_cover: sets must be strictly nested (A_" +
          std::to_string(n) + ")");
  }
  if (deltas.values.size() < annuli.size())
    throw std::invalid_argument("verify_point_cover: not enough deltas");

  PointCoverReport rep;
  rep.pass = true;
  rep.delta_sum_verdict = deltas.verdict;
  std::vector<double> sq;
  double acc = 0.0;
  for (double d : deltas.values) {
    acc += d * d;
    sq.push_back(acc);
  }
  rep.delta_sq_verdict = doubling_verdict(sq);

  const int dim = system.dim_state;
  for (std::size_t n = 1; n + 1 < annuli.size(); ++n) {
    const ConeNeighborhood& outer_exit = annuli[n - 1];
    const ConeNeighborhood& an = annuli[n];
    const ConeNeighborhood& an1 = annuli[n + 1];
    // Deterministic samples of A_n - A_{n+1}: radially before A_{n+1} starts,
    // and angularly between the two cone openings.
    std::vector<Vec> starts;
    double r_mid = 0.5 * (an.min_radius + an1.min_radius);
    double th_mid = 0.5 * (an.half_angle + an1.half_angle);
    Vec axis = an.axis;
    Vec ortho = Vec::zero(dim);
    ortho[1 % dim] = 1.0;
    ortho = (ortho - axis * axis.dot(ortho)).normalized();
    auto at = [&](double r, double th) {
      return axis * (r * std::cos(th)) + ortho * (r * std::sin(th));
    };
    int ns = std::max(2, samples_per_shell);
    for (int s = 0; s < ns; ++s) {
      double th = -0.9 * an.half_angle +
                  1.8 * an.half_angle * s / std::max(1, ns - 1);
      starts.push_back(at(r_mid, th * 0.5));
    }
    starts.push_back(at(1.5 * an1.min_radius, th_mid));
    double delta_n = deltas.values[n];
    std::vector<double> grid;
    for (double f : t_fractions) grid.push_back(f * delta_n);
    double shell_worst = 0.0;
    for (std::size_t si = 0; si < starts.size(); ++si) {
      const Vec& x = starts[si];
      if (!an.contains(x) || an1.contains(x) || !outer_exit.contains(x))
        continue;  // sample fell outside the shell (degenerate geometry)
      Region exit_region{
          [&outer_exit](const Vec& y) { return outer_exit.contains(y); },
          Ball{Vec::zero(dim), 1e9}, static_cast<int>(n - 1)};
      auto cdf = estimate_exit_cdf(
          system, x, exit_region, grid, mc.n_paths, mc.dt,
          mc.seed + 7919 * n + si, mc.explosion_radius, mc.workers);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        double ratio = cdf.ci_upper[g] / (c * grid[g] * grid[g]);
        shell_worst = std::max(shell_worst, ratio);
      }
    }
    rep.shell_worst_ratio.push_back(shell_worst);
    rep.worst_ratio = std::max(rep.worst_ratio, shell_worst);
    if (shell_worst > 1.0) {
      rep.pass = false;
      rep.failing_shells.push_back(static_cast<int>(n));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct MetricAxiomReport {
  double max_symmetry_err = 0.0;
  double max_triangle_violation = 0.0;
  double max_self_distance = 0.0;
};

inline MetricAxiomReport check_metric_axioms(const Compactification& model,
                                             std::size_t n_triples,
                                             std::uint64_t seed,
                                             double sample_radius = 50.0) {
  MetricAxiomReport rep;
  RandomStream rs(RngStream{seed, 0});
  auto rand_point = [&] {
    Vec x = Vec::zero(model.dim);
    for (int d = 0; d < model.dim; ++d)
      x[d] = sample_radius * (2.0 * rs.next_uniform() - 1.0);
    return x;
  };
  for (std::size_t i = 0; i < n_triples; ++i) {
    Vec a = model.embed(rand_point());
    Vec b = model.embed(rand_point());
    Vec c = model.embed(rand_point());
    rep.max_symmetry_err = std::max(
        rep.max_symmetry_err, std::abs(model.metric(a, b) - model.metric(b, a)));
    rep.max_triangle_violation =
        std::max(rep.max_triangle_violation,
                 model.metric(a, c) - model.metric(a, b) - model.metric(b, c));
    rep.max_self_distance = std::max(rep.max_self_distance, model.metric(a, a));
  }
  return rep;
}

}  // namespace diffcover
