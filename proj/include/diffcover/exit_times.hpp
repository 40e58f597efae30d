#pragma once

// First-exit-time estimation and the certificate arithmetic built on it:
// quadratic tail checks, delta sequences from curvature bounds, the chained
// stopping times T_k, and the non-explosion bound they imply.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "diffcover/cover.hpp"
#include "diffcover/errors.hpp"
#include "diffcover/parallel.hpp"
#include "diffcover/region.hpp"
#include "diffcover/sde.hpp"
#include "diffcover/stats.hpp"

namespace diffcover {

enum class SeriesVerdict { kDivergent, kConvergent, kInconclusive };

inline const char* to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::kDivergent: return "divergent";
    case SeriesVerdict::kConvergent: return "convergent";
    case SeriesVerdict::kInconclusive: return "inconclusive";
  }
  return "?";
}

// Finite-prefix doubling heuristic (labelled as such everywhere it is
// reported). With S the running sum and D(M) = S(M) - S(M/2):
//   convergent  if D(N) < 1% of S(N), or the dyadic increments decay
//               geometrically (D(N) <= 0.55 D(N/2));
//   divergent   if the increments hold up at two scales
//               (D(N) >= 0.7 D(N/2) and D(N/2) >= 0.7 D(N/4));
//   inconclusive otherwise.
// Increment ratios are immune to a large head mass (e.g. the near-singular
// start of the volume-growth integrand).
inline SeriesVerdict doubling_verdict(const std::vector<double>& partial_sums) {
  std::size_t n = partial_sums.size();
  if (n < 8) return SeriesVerdict::kInconclusive;
  auto s = [&](std::size_t i) { return partial_sums[i - 1]; };
  double sn = s(n), sh = s(n / 2), sq = s(n / 4), se = s(n / 8);
  double d1 = sn - sh, d2 = sh - sq, d3 = sq - se;
  if (sn > 0.0 && (d1 < 0.01 * sn || d1 <= 0.55 * d2))
    return SeriesVerdict::kConvergent;
  if (d1 >= 0.7 * d2 && d2 >= 0.7 * d3) return SeriesVerdict::kDivergent;
  return SeriesVerdict::kInconclusive;
}

// ---------------------------------------------------------------------------

struct ExitTimeCdf {
  std::vector<double> t_grid;
  std::vector<double> p_hat;
  std::vector<double> ci_lower;
  std::vector<double> ci_upper;
  std::vector<double> dirichlet_survival;  // 1 - p_hat, by construction
  std::size_t n_paths = 0;
  double censored_fraction = 0.0;
  std::size_t exploded_count = 0;
};

inline ExitTimeCdf estimate_exit_cdf(const SdeSystem& system, const Vec& x0,
                                     const Region& region,
                                     const std::vector<double>& t_grid,
                                     std::size_t n_paths, double dt,
                                     std::uint64_t seed,
                                     double explosion_radius = 1e6,
                                     int workers = 1) {
  if (!region.contains(x0))
    throw std::invalid_argument("estimate_exit_cdf: x0 must lie in the region");
  if (t_grid.empty())
    throw std::invalid_argument("estimate_exit_cdf: empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || (i > 0 && t_grid[i] <= t_grid[i - 1]))
      throw std::invalid_argument("estimate_exit_cdf: grid must increase");
  }
  const double horizon = t_grid.back();
  const double inf = std::numeric_limits<double>::infinity();

  StopSet stop{[&region](const Vec& x) { return !region.contains(x); },
               region.id};
  std::vector<double> exit_time(n_paths, inf);
  std::vector<std::uint8_t> exploded(n_paths, 0);
  parallel_paths(n_paths, workers, [&](std::size_t i) {
    PathSummary s = simulate_summary(system, x0, horizon, dt,
                                     RngStream{seed, i}, explosion_radius,
                                     &stop);
    if (s.status == PathStatus::kExitedDomain) exit_time[i] = s.event_time;
    if (s.status == PathStatus::kExploded) exploded[i] = 1;
  });

  ExitTimeCdf cdf;
  cdf.t_grid = t_grid;
  cdf.n_paths = n_paths;
  std::size_t censored = 0;
  for (std::size_t i = 0; i < n_paths; ++i) {
    if (exit_time[i] == inf) ++censored;
    if (exploded[i]) ++cdf.exploded_count;
  }
  cdf.censored_fraction =
      static_cast<double>(censored) / static_cast<double>(n_paths);
  for (double t : t_grid) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n_paths; ++i)
      if (exit_time[i] <= t) ++k;
    BinomialCi ci = clopper_pearson(k, n_paths);
    double p = static_cast<double>(k) / static_cast<double>(n_paths);
    cdf.p_hat.push_back(p);
    cdf.ci_lower.push_back(ci.lo);
    cdf.ci_upper.push_back(ci.hi);
    cdf.dirichlet_survival.push_back(
        static_cast<double>(n_paths - k) / static_cast<double>(n_paths));
  }
  return cdf;
}

// ---------------------------------------------------------------------------

struct TailCheckReport {
  bool pass = false;
  double max_ratio = 0.0;
  double violating_t = 0.0;  // first grid point failing, when !pass
  std::size_t points_checked = 0;
};

// Conservative one-sided check of P{tau < t} <= C t^2 on grid points t < delta,
// using the Clopper-Pearson upper bound.
inline TailCheckReport check_quadratic_tail(const ExitTimeCdf& cdf, double delta,
                                            double C) {
  TailCheckReport rep;
  rep.pass = true;
  for (std::size_t i = 0; i < cdf.t_grid.size(); ++i) {
    double t = cdf.t_grid[i];
    if (!(t < delta)) continue;
    ++rep.points_checked;
    double ratio = cdf.ci_upper[i] / (t * t);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (cdf.ci_upper[i] > C * t * t && rep.pass) {
      rep.pass = false;
      rep.violating_t = t;
    }
  }
  if (rep.points_checked == 0)
    throw std::invalid_argument("check_quadratic_tail: no grid points below delta");
  return rep;
}

// ---------------------------------------------------------------------------

// Largest delta0 with e^{-a/t} <= t^2 for all t < delta0, i.e. the smallest
// positive root of e^{-a/t} = t^2 (bisection to 1e-12); cap when the
// inequality holds on all of (0,1].
inline double hsu_delta0(double a, double cap = 1.0) {
  if (!(a > 0.0)) throw std::invalid_argument("hsu_delta0: need a > 0");
  if (!(cap > 0.0)) throw std::invalid_argument("hsu_delta0: need cap > 0");
  auto psi = [a](double t) { return -a / t - 2.0 * std::log(t); };  // ln(e^{-a/t}/t^2)
  double t_peak = std::min(a / 2.0, 1.0);
  if (psi(t_peak) < 0.0) return cap;  // never reaches t^2 on (0,1]
  double lo = std::numeric_limits<double>::min() * 1e10, hi = t_peak;
  // psi(lo) -> -inf; first sign change below the peak is the smallest root.
  for (int it = 0; it < 200 && (hi - lo) > 1e-12; ++it) {
    double mid = 0.5 * (lo + hi);
    if (psi(mid) < 0.0) lo = mid; else hi = mid;
  }
  return std::min(0.5 * (lo + hi), cap);
}

// ---------------------------------------------------------------------------

struct DeltaSequence {
  std::vector<double> values;
  std::vector<double> partial_sums;
  SeriesVerdict verdict = SeriesVerdict::kInconclusive;
  std::string source;
};

inline DeltaSequence user_delta_sequence(std::vector<double> values,
                                         std::string source = "user") {
  if (values.empty())
    throw std::invalid_argument("delta sequence: empty values");
  DeltaSequence d;
  d.values = std::move(values);
  d.source = std::move(source);
  double sum = 0.0;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (!(d.values[i] > 0.0))
      throw std::invalid_argument("delta sequence: non-positive value");
    if (i > 0 && d.values[i] > d.values[i - 1])
      throw std::invalid_argument("delta sequence: must be non-increasing");
    sum += d.values[i];
    d.partial_sums.push_back(sum);
  }
  d.verdict = doubling_verdict(d.partial_sums);
  return d;
}

// delta_n = min(c1 / sqrt(K(3n+1)), delta0), n = 1..N. K below 1e-12 counts
// as flat (delta_n = delta0). A running min keeps the sequence non-increasing
// even for a raw, non-monotone K; smaller deltas are always admissible.
inline DeltaSequence ricci_delta_sequence(
    const std::function<double(double)>& K, double c1, double delta0,
    std::size_t N) {
  if (!(c1 > 0.0) || !(delta0 > 0.0))
    throw std::invalid_argument("ricci_delta_sequence: c1, delta0 must be > 0");
  if (N == 0) throw std::invalid_argument("ricci_delta_sequence: N = 0");
  std::vector<double> vals;
  vals.reserve(N);
  double prev = delta0;
  for (std::size_t n = 1; n <= N; ++n) {
    double k = K(3.0 * static_cast<double>(n) + 1.0);
    if (k < 0.0)
      throw std::invalid_argument("ricci_delta_sequence: negative K value");
    double d = (k < 1e-12) ? delta0 : std::min(c1 / std::sqrt(k), delta0);
    d = std::min(d, prev);
    prev = d;
    vals.push_back(d);
  }
  DeltaSequence out = user_delta_sequence(std::move(vals), "ricci");
  return out;
}

// ---------------------------------------------------------------------------
// Chained stopping times over a weak uniform cover: exits are run from the
// outer set located by the first-index rule, landing sets define the Omega
// partition.

struct ChainPathRecord {
  std::vector<double> increments;   // T_k - T_{k-1} for completed links
  std::vector<int> landing_sets;    // Omega index after each completed link
  double total = 0.0;               // T_p for the last completed link
  bool coverage_violation = false;
  bool exploded = false;
};

struct ChainStats {
  std::vector<double> t_grid;
  // counts[k][g] = #paths with (T_{k+1}-T_k) < t_grid[g] and T_k finite
  std::vector<std::vector<std::size_t>> increment_counts;
  std::vector<std::vector<double>> increment_p;
  std::vector<std::vector<double>> increment_ci_hi;
  std::vector<std::size_t> reached;  // #paths with T_{k+1} < infinity
  std::map<std::pair<int, int>, std::size_t> omega_counts;  // (link j, set) -> n
  std::size_t n_paths = 0;
  double horizon = 0.0;
  std::size_t coverage_violations = 0;
  std::size_t exploded = 0;
  std::vector<ChainPathRecord> paths;  // per-path records (index order)
};

inline ChainStats simulate_chain(const SdeSystem& system,
                                 const WeakUniformCover& cover, const Vec& x0,
                                 double horizon, std::size_t n_paths, double dt,
                                 std::uint64_t seed,
                                 std::vector<double> t_grid = {},
                                 double explosion_radius = 1e6, int workers = 1,
                                 int max_links = 16) {
  if (first_inner_index(cover, x0) < 0)
    throw std::invalid_argument("simulate_chain: x0 lies in no inner set");
  if (t_grid.empty()) {
    double d = cover.deltas.empty() ? 1.0 : cover.deltas.back();
    t_grid = {0.3 * d, 0.6 * d, 0.9 * d};
  }
  const std::uint64_t kStreamsPerPath = 1024;

  std::vector<ChainPathRecord> recs(n_paths);
  parallel_paths(n_paths, workers, [&](std::size_t i) {
    ChainPathRecord& rec = recs[i];
    Vec x = x0;
    int idx = first_inner_index(cover, x);
    double elapsed = 0.0;
    for (int link = 0; link < max_links; ++link) {
      double budget = horizon - elapsed;
      if (!(budget > dt)) break;
      const Ball outer = cover.pairs[idx].outer;
      StopSet stop{[&outer](const Vec& y) { return !outer.contains(y); }, idx};
      PathSummary s = simulate_summary(
          system, x, budget, dt,
          RngStream{seed, i * kStreamsPerPath + static_cast<std::uint64_t>(link)},
          explosion_radius, &stop);
      if (s.status == PathStatus::kExploded) {
        rec.exploded = true;
        break;
      }
      if (s.status != PathStatus::kExitedDomain) break;  // censored at horizon
      elapsed += s.event_time;
      rec.increments.push_back(s.event_time);
      rec.total = elapsed;
      x = s.final_state;
      idx = first_inner_index(cover, x);
      if (idx < 0) {
        rec.coverage_violation = true;
        break;
      }
      rec.landing_sets.push_back(idx);
    }
  });

  ChainStats st;
  st.t_grid = t_grid;
  st.n_paths = n_paths;
  st.horizon = horizon;
  st.increment_counts.assign(max_links, std::vector<std::size_t>(t_grid.size(), 0));
  st.reached.assign(max_links, 0);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const ChainPathRecord& rec = recs[i];
    if (rec.coverage_violation) ++st.coverage_violations;
    if (rec.exploded) ++st.exploded;
    for (std::size_t k = 0; k < rec.increments.size(); ++k) {
      ++st.reached[k];
      for (std::size_t g = 0; g < t_grid.size(); ++g)
        if (rec.increments[k] < t_grid[g]) ++st.increment_counts[k][g];
    }
    for (std::size_t k = 0; k < rec.landing_sets.size(); ++k)
      ++st.omega_counts[{static_cast<int>(k) + 1, rec.landing_sets[k]}];
  }
  for (int k = 0; k < max_links; ++k) {
    std::vector<double> p(t_grid.size(), 0.0), hi(t_grid.size(), 0.0);
    for (std::size_t g = 0; g < t_grid.size(); ++g) {
      p[g] = static_cast<double>(st.increment_counts[k][g]) /
             static_cast<double>(n_paths);
      hi[g] = clopper_pearson(st.increment_counts[k][g], n_paths).hi;
    }
    st.increment_p.push_back(std::move(p));
    st.increment_ci_hi.push_back(std::move(hi));
  }
  st.paths = std::move(recs);
  return st;
}

// ---------------------------------------------------------------------------

struct NonexplosionCertificate {
  double bound = 0.0;      // C eps^2 sum_{k<=n+p} delta_k^2
  std::size_t p = 0;       // minimal p with eps sum_{i=n+1}^{n+p} delta_i > t
  double sum_sq_prefix = 0.0;
  double eps = 0.0;
  double t = 0.0;
  std::size_t start_index = 0;
};

// Certified upper bound on P{xi(x) < t} for x in K_n, from the proof chain
// P <= C eps^2 sum delta_k^2 once eps sum_{i>n}^{n+p} delta_i exceeds t.
inline NonexplosionCertificate nonexplosion_certificate(
    const DeltaSequence& deltas, double C, std::size_t n, double t, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("nonexplosion_certificate: need 0 < eps < 1");
  if (!(t > 0.0))
    throw std::invalid_argument("nonexplosion_certificate: need t > 0");
  const std::vector<double>& d = deltas.values;
  if (n >= d.size())
    throw InsufficientSequenceError(
        "nonexplosion_certificate: start index beyond sequence");
  double acc = 0.0;
  std::size_t p = 0;
  for (std::size_t i = n; i < d.size(); ++i) {  // values[i] is delta_{i+1}
    acc += eps * d[i];
    ++p;
    if (acc > t) {
      NonexplosionCertificate cert;
      cert.p = p;
      cert.eps = eps;
      cert.t = t;
      cert.start_index = n;
      double sq = 0.0;
      for (std::size_t k = 0; k < n + p; ++k) sq += d[k] * d[k];
      cert.sum_sq_prefix = sq;
      cert.bound = C * eps * eps * sq;
      return cert;
    }
  }
  throw InsufficientSequenceError(
      "nonexplosion_certificate: delta prefix exhausted before eps-sum "
      "exceeded t");
}

}  // namespace diffcover
