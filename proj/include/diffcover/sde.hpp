#pragma once

// Numerical integration of  dx_t = X(x_t) dB_t + A(x_t) dt  in local
// coordinates, with explosion detection and reproducible per-path randomness.
// Ito systems step with Euler-Maruyama, Stratonovich systems with Heun.

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffcover/linalg.hpp"
#include "diffcover/rng.hpp"

namespace diffcover {

enum class Convention { kIto, kStratonovich };

struct SdeSystem {
  int dim_state = 0;
  int dim_noise = 0;
  std::function<Vec(const Vec&)> drift;      // A(x), R^n
  std::function<Mat(const Vec&)> diffusion;  // X(x), n x m; column j drives dB^j
  Convention convention = Convention::kIto;
  // Optional state projection applied after each step (domain guards such as
  // the reflecting clamp of radial systems). Null means identity.
  std::function<Vec(const Vec&)> project;
};

enum class PathStatus { kCompleted, kExploded, kExitedDomain };

inline const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::kCompleted: return "completed";
    case PathStatus::kExploded: return "exploded";
    case PathStatus::kExitedDomain: return "exited";
  }
  return "?";
}

// A region paths can be stopped on (first entry). Callers that measure exit
// times from an open set U pass the complement of U here.
struct StopSet {
  std::function<bool(const Vec&)> contains;
  int id = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  PathStatus status = PathStatus::kCompleted;
  double event_time = 0.0;  // t_exp for kExploded, crossing time for kExitedDomain
  int exit_set_id = 0;
};

struct PathSummary {
  PathStatus status = PathStatus::kCompleted;
  double event_time = 0.0;
  int exit_set_id = 0;
  Vec final_state;
};

inline std::vector<Vec> brownian_increments(const RngStream& rng, int m,
                                            double dt, int steps) {
  if (!(dt > 0.0)) throw std::invalid_argument("brownian_increments: dt must be > 0");
  if (steps < 0) throw std::invalid_argument("brownian_increments: steps < 0");
  RandomStream rs(rng);
  const double s = std::sqrt(dt);
  std::vector<Vec> out;
  out.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    Vec v = Vec::zero(m);
    for (int j = 0; j < m; ++j) v[j] = s * rs.next_normal();
    out.push_back(v);
  }
  return out;
}

// One integrator step. dB must carry variance dt. A non-finite result is the
// caller's explosion signal, not an error.
inline Vec step(const SdeSystem& sys, const Vec& x, const Vec& dB, double dt) {
  Vec ax = sys.drift(x);
  Mat xx = sys.diffusion(x);
  Vec pred = x + xx.apply(dB) + ax * dt;
  if (sys.convention == Convention::kIto) return pred;
  // Heun predictor-corrector for the Stratonovich reading.
  if (!pred.all_finite()) return pred;
  Vec a2 = sys.drift(pred);
  Mat x2 = sys.diffusion(pred);
  return x + (xx.apply(dB) + x2.apply(dB)) * 0.5 + (ax + a2) * (0.5 * dt);
}

namespace detail {

// Engine shared by the recording and summary-only front ends.
template <class Recorder>
PathSummary run_sde(const SdeSystem& sys, const Vec& x0, double t_end,
                    double dt, const RngStream& rng, double explosion_radius,
                    const StopSet* stop, Recorder&& record) {
  if (!(t_end > 0.0)) throw std::invalid_argument("simulate: t_end must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("simulate: dt must be > 0");
  if (dt > t_end) throw std::invalid_argument("simulate: dt exceeds t_end");
  if (!(explosion_radius > x0.norm()))
    throw std::invalid_argument("simulate: explosion radius must exceed |x0|");
  {
    Mat d0 = sys.diffusion(x0);
    if (d0.rows() != sys.dim_state || d0.cols() != sys.dim_noise)
      throw std::invalid_argument(
          "simulate: diffusion must be dim_state x dim_noise");
    if (sys.drift(x0).size() != sys.dim_state)
      throw std::invalid_argument("simulate: drift must return dim_state values");
  }

  RandomStream rs(rng);
  const int m = sys.dim_noise;
  Vec x = x0;
  record(0.0, x);

  const long n_full = static_cast<long>(std::floor(t_end / dt + 1e-9));
  double rem = t_end - static_cast<double>(n_full) * dt;
  if (rem < dt * 1e-9) rem = 0.0;
  const long n_steps = n_full + (rem > 0.0 ? 1 : 0);

  PathSummary out;
  for (long k = 0; k < n_steps; ++k) {
    const double h = (k < n_full) ? dt : rem;
    const double t_prev = static_cast<double>(k) * dt;
    const double t_new = (k + 1 <= n_full) ? static_cast<double>(k + 1) * dt : t_end;
    Vec dB = Vec::zero(m);
    const double sh = std::sqrt(h);
    for (int j = 0; j < m; ++j) dB[j] = sh * rs.next_normal();

    Vec x_new = step(sys, x, dB, h);
    if (sys.project && x_new.all_finite()) x_new = sys.project(x_new);

    if (stop && stop->contains(x_new)) {
      // Resolve the crossing on the straight segment between grid states.
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        Vec xm = x + (x_new - x) * mid;
        if (stop->contains(xm)) hi = mid; else lo = mid;
      }
      Vec xc = x + (x_new - x) * hi;
      double tc = t_prev + hi * h;
      record(tc, xc);
      out.status = PathStatus::kExitedDomain;
      out.event_time = tc;
      out.exit_set_id = stop->id;
      out.final_state = xc;
      return out;
    }
    if (!x_new.all_finite() || x_new.norm() >= explosion_radius) {
      if (!x_new.all_finite())
        x_new = x.normalized() * explosion_radius;  // keep the record finite
      record(t_new, x_new);
      out.status = PathStatus::kExploded;
      out.event_time = t_new;
      out.final_state = x_new;
      return out;
    }
    x = x_new;
    record(t_new, x);
  }
  out.status = PathStatus::kCompleted;
  out.event_time = t_end;
  out.final_state = x;
  return out;
}

}  // namespace detail

inline Trajectory simulate(const SdeSystem& sys, const Vec& x0, double t_end,
                           double dt, const RngStream& rng,
                           double explosion_radius,
                           const StopSet* stop = nullptr) {
  Trajectory traj;
  PathSummary s = detail::run_sde(sys, x0, t_end, dt, rng, explosion_radius,
                                  stop, [&](double t, const Vec& x) {
                                    traj.times.push_back(t);
                                    traj.states.push_back(x);
                                  });
  traj.status = s.status;
  traj.event_time = s.event_time;
  traj.exit_set_id = s.exit_set_id;
  return traj;
}

// Same integration without storing the path; the workhorse for Monte Carlo.
inline PathSummary simulate_summary(const SdeSystem& sys, const Vec& x0,
                                    double t_end, double dt,
                                    const RngStream& rng,
                                    double explosion_radius,
                                    const StopSet* stop = nullptr) {
  return detail::run_sde(sys, x0, t_end, dt, rng, explosion_radius, stop,
                         [](double, const Vec&) {});
}

inline void write_trajectory_csv(std::FILE* f, const Trajectory& traj) {
  const int n = traj.states.empty() ? 0 : traj.states.front().size();
  std::fprintf(f, "t");
  for (int j = 0; j < n; ++j) std::fprintf(f, ",x%d", j + 1);
  std::fprintf(f, ",status\n");
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::fprintf(f, "%.12g", traj.times[i]);
    for (int j = 0; j < n; ++j) std::fprintf(f, ",%.12g", traj.states[i][j]);
    bool last = (i + 1 == traj.times.size());
    std::fprintf(f, ",%s\n", last ? to_string(traj.status) : "running");
  }
}

// ---------------------------------------------------------------------------
// Elliptic operator  L = sum a_ij d2/dx_i dx_j + sum b_i d/dx_i  ->  SDE.
// The produced system has generator (1/2) sum (ss^T)_ij d2_ij + b.grad with
// s the symmetric PSD square root of a; matching L exactly needs sqrt(2) s.

struct EllipticOperator {
  int dim = 0;
  std::function<Mat(const Vec&)> a;  // symmetric PSD
  std::function<Vec(const Vec&)> b;
};

inline SdeSystem elliptic_to_sde(const EllipticOperator& op) {
  SdeSystem sys;
  sys.dim_state = op.dim;
  sys.dim_noise = op.dim;
  sys.convention = Convention::kIto;
  sys.drift = op.b;
  auto a = op.a;
  sys.diffusion = [a](const Vec& x) { return sym_psd_sqrt(a(x)); };
  return sys;
}

// ---------------------------------------------------------------------------
// Generator applied to a chart-valued function phi.

struct ChartFn {
  int dim_in = 0;
  int dim_out = 0;
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;  // dim_out x dim_in
  // Component Hessians (dim_out matrices, each dim_in x dim_in); optional.
  std::function<std::vector<Mat>(const Vec&)> hessian;
};

// A(phi)(x) under the system's convention.
//   Ito:          (1/2) sum_k D2phi(X^k,X^k) + Dphi(A)
//   Stratonovich: (1/2) sum_k X^k X^k (phi)  + Dphi(A)
// The Stratonovich first-order correction (and, when no Hessian evaluator is
// supplied, the whole X^k X^k term) uses central differences with step
// 1e-5 (1+|x|).
inline Vec generator_apply(const SdeSystem& sys, const ChartFn& phi,
                           const Vec& x) {
  const int m = sys.dim_noise;
  Mat jac = phi.jacobian(x);
  Vec out = jac.apply(sys.drift(x));
  Mat diff = sys.diffusion(x);
  const double eps = 1e-5 * (1.0 + x.norm());

  if (sys.convention == Convention::kIto) {
    if (!phi.hessian)
      throw std::invalid_argument(
          "generator_apply: Ito convention requires a Hessian evaluator");
    std::vector<Mat> hess = phi.hessian(x);
    for (int k = 0; k < m; ++k) {
      Vec xk = diff.col(k);
      for (int c = 0; c < phi.dim_out; ++c)
        out[c] += 0.5 * hess[c].apply(xk).dot(xk);
    }
    return out;
  }

  if (phi.hessian) {
    // Analytic D2phi plus the finite-difference X-derivative correction.
    std::vector<Mat> hess = phi.hessian(x);
    for (int k = 0; k < m; ++k) {
      Vec xk = diff.col(k);
      double r = xk.norm();
      for (int c = 0; c < phi.dim_out; ++c)
        out[c] += 0.5 * hess[c].apply(xk).dot(xk);
      if (r == 0.0) continue;
      Vec u = xk * (1.0 / r);
      Vec xp = sys.diffusion(x + u * eps).col(k);
      Vec xm = sys.diffusion(x - u * eps).col(k);
      Vec dxk_xk = (xp - xm) * (r / (2.0 * eps));
      out += 0.5 * jac.apply(dxk_xk);
    }
    return out;
  }

  // No Hessian: difference g_k(y) = Dphi(y) X^k(y) along X^k directly.
  for (int k = 0; k < m; ++k) {
    Vec xk = diff.col(k);
    double r = xk.norm();
    if (r == 0.0) continue;
    Vec u = xk * (1.0 / r);
    Vec yp = x + u * eps, ym = x - u * eps;
    Vec gp = phi.jacobian(yp).apply(sys.diffusion(yp).col(k));
    Vec gm = phi.jacobian(ym).apply(sys.diffusion(ym).col(k));
    out += (gp - gm) * (0.5 * r / (2.0 * eps));
  }
  return out;
}

// Checks the declared derivative evaluators against central differences.
// Returns the worst relative mismatch over the sample points.
inline double validate_chart_fn(const ChartFn& phi, const std::vector<Vec>& pts,
                                double tol = 1e-6) {
  double worst = 0.0;
  for (const Vec& x : pts) {
    const double eps = 1e-6 * (1.0 + x.norm());
    Mat jac = phi.jacobian(x);
    double scale = std::max(jac.max_abs(), 1.0);
    for (int j = 0; j < phi.dim_in; ++j) {
      Vec e = Vec::unit(phi.dim_in, j);
      Vec d = (phi.value(x + e * eps) - phi.value(x - e * eps)) * (1.0 / (2 * eps));
      for (int c = 0; c < phi.dim_out; ++c)
        worst = std::max(worst, std::abs(d[c] - jac(c, j)) / scale);
    }
    if (phi.hessian) {
      std::vector<Mat> hess = phi.hessian(x);
      for (int j = 0; j < phi.dim_in; ++j) {
        Vec e = Vec::unit(phi.dim_in, j);
        Mat jp = phi.jacobian(x + e * eps), jm = phi.jacobian(x - e * eps);
        for (int c = 0; c < phi.dim_out; ++c) {
          double hs = std::max(hess[c].max_abs(), 1.0);
          for (int i = 0; i < phi.dim_in; ++i) {
            double d = (jp(c, i) - jm(c, i)) / (2 * eps);
            worst = std::max(worst, std::abs(d - hess[c](i, j)) / hs);
          }
        }
      }
    }
  }
  if (worst > tol)
    throw std::invalid_argument(
        "chart function derivatives disagree with finite differences (worst " +
        std::to_string(worst) + ")");
  return worst;
}

}  // namespace diffcover
