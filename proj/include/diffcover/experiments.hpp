#pragma once

// Config-driven experiment harness. Every subcommand is a thin adapter: it
// assembles inputs from the config, calls one module operation, and writes
// CSV artifacts plus summary.txt. No numerical logic lives here.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffcover/boundary.hpp"
#include "diffcover/config.hpp"
#include "diffcover/cover.hpp"
#include "diffcover/csv.hpp"
#include "diffcover/exit_times.hpp"
#include "diffcover/manifold.hpp"
#include "diffcover/presets.hpp"
#include "diffcover/sde.hpp"

namespace diffcover::cli {

struct SystemSpec {
  SdeSystem system;
  int dim = 0;
  std::string label;
};

inline Mat mat_from_list(const std::vector<double>& vals, int n) {
  if (static_cast<int>(vals.size()) != n * n)
    throw std::invalid_argument("config: 'a' needs dim*dim entries");
  Mat m = Mat::zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = vals[i * n + j];
  return m;
}

inline Warp warp_from_config(const ExperimentConfig& cfg) {
  std::string w = cfg.get_str("warp", "flat");
  if (w == "flat") return warp_flat();
  if (w == "hyperbolic") return warp_hyperbolic();
  if (w == "power_ricci") return warp_power_ricci(cfg.get_pos("q", 2.0));
  throw std::invalid_argument("config: unknown warp '" + w + "'");
}

inline SystemSpec system_from_config(const ExperimentConfig& cfg) {
  std::string preset = cfg.get_str("preset", "bm1d");
  int dim = static_cast<int>(cfg.get_num("dim", 2));
  double kappa = cfg.get_pos("kappa", 1.0);
  SystemSpec out;
  out.label = preset;
  if (preset == "bm1d" || preset == "bm2d" || preset == "bm3d") {
    out.dim = preset[2] - '0';
    out.system = presets::brownian(out.dim);
  } else if (preset == "bm") {
    out.dim = dim;
    out.system = presets::brownian(dim);
  } else if (preset == "linear_growth") {
    out.dim = dim;
    out.system = presets::linear_growth(dim, kappa);
  } else if (preset == "sublinear") {
    out.dim = dim;
    out.system = presets::sublinear(cfg.get_num("alpha", 0.5), dim, kappa);
  } else if (preset == "example4") {
    out.dim = 2;
    out.system = presets::example4();
  } else if (preset == "elliptic") {
    EllipticOperator op;
    op.dim = dim;
    Mat a = mat_from_list(cfg.get_list("a"), dim);
    std::vector<double> bl = cfg.get_list("b", std::vector<double>(dim, 0.0));
    if (static_cast<int>(bl.size()) != dim)
      throw std::invalid_argument("config: 'b' needs dim entries");
    Vec b = Vec::zero(dim);
    for (int i = 0; i < dim; ++i) b[i] = bl[i];
    op.a = [a](const Vec&) { return a; };
    op.b = [b](const Vec&) { return b; };
    out.dim = dim;
    out.system = elliptic_to_sde(op);
  } else if (preset == "radial") {
    out.dim = 1;
    out.system = radial_system(
        make_manifold(static_cast<int>(cfg.get_num("dim", 2)),
                      warp_from_config(cfg)));
    out.label = "radial:" + cfg.get_str("warp", "flat");
  } else {
    throw std::invalid_argument("config: unknown preset '" + preset + "'");
  }
  return out;
}

inline Vec vec_from_config(const ExperimentConfig& cfg, const std::string& key,
                           int dim, const Vec& fallback) {
  if (!cfg.has(key)) return fallback;
  std::vector<double> v = cfg.get_list(key);
  if (static_cast<int>(v.size()) != dim)
    throw std::invalid_argument("config: '" + key + "' needs " +
                                std::to_string(dim) + " entries");
  Vec x = Vec::zero(dim);
  for (int i = 0; i < dim; ++i) x[i] = v[i];
  return x;
}

inline Region region_from_config(const ExperimentConfig& cfg, int dim) {
  std::string spec = cfg.get_str("region", "ball:1");
  if (spec.rfind("ball:", 0) != 0)
    throw std::invalid_argument("config: region must look like 'ball:<radius>'");
  double r = std::stod(spec.substr(5));
  if (!(r > 0.0)) throw std::invalid_argument("config: region radius must be > 0");
  return ball_region(Vec::zero(dim), r);
}

inline Compactification model_from_config(const ExperimentConfig& cfg, int dim) {
  std::string m = cfg.get_str("model", "sphere_at_infinity");
  if (m == "one_point") return Compactification::one_point(dim);
  if (m == "sphere_at_infinity" || m == "sphere")
    return Compactification::sphere_at_infinity(dim);
  if (m == "cylinder_ends" || m == "cylinder")
    return Compactification::cylinder_ends();
  throw std::invalid_argument("config: unknown compactification '" + m + "'");
}

inline McConfig mc_from_config(const ExperimentConfig& cfg) {
  McConfig mc;
  mc.n_paths = static_cast<std::size_t>(cfg.get_pos("n_paths", 10000));
  mc.dt = cfg.get_pos("dt", 1e-3);
  mc.seed = cfg.get_u64("seed", 0);
  mc.explosion_radius = cfg.get_pos("explosion_radius", 1e6);
  mc.workers = static_cast<int>(cfg.get_pos("workers", 1));
  return mc;
}

inline UniformCover cover_from_config(const ExperimentConfig& cfg) {
  if (cfg.has("cert")) {
    std::ifstream in(cfg.get_str("cert"));
    if (!in)
      throw std::invalid_argument("config: cannot open cert file " +
                                  cfg.get_str("cert"));
    return load_cover_certificate(in).uniform;
  }
  std::string mode = cfg.get_str("cover_mode", "linear");
  GrowthMode gm = mode == "linear"
                      ? GrowthMode::linear()
                      : GrowthMode::sublinear(cfg.get_num("alpha", 0.5));
  if (mode != "linear" && mode != "sublinear")
    throw std::invalid_argument("config: cover_mode must be linear|sublinear");
  return build_growth_cover(gm, cfg.get_pos("region_radius", 100.0),
                            static_cast<int>(cfg.get_num("dim", 2)),
                            cfg.get_pos("bound_k", 18.0));
}

inline DeltaSequence deltas_from_config(const ExperimentConfig& cfg,
                                        SummaryWriter& summary) {
  auto man = make_manifold(static_cast<int>(cfg.get_num("dim", 2)),
                           warp_from_config(cfg));
  std::size_t n_terms = static_cast<std::size_t>(cfg.get_pos("n_terms", 1000));
  double c1 = cfg.get_pos("c1", 1.0);
  double delta0 = cfg.get_pos("delta0", 1.0);
  if (cfg.has("c2")) {
    delta0 = hsu_delta0(c1 * cfg.get_pos("c2", 1.0), delta0);
    summary.add("hsu_delta0", delta0);
  }
  auto prof = curvature_profile(man, 3.0 * static_cast<double>(n_terms) + 2.0);
  DeltaSequence d = ricci_delta_sequence(prof.K, c1, delta0, n_terms);
  if (cfg.get_num("renormalize", 0) != 0) {
    d = user_delta_sequence(renormalize_deltas(d.values, d.values.size()),
                            "ricci+renormalized");
    summary.add("renormalized", std::string("yes"));
  }
  return d;
}

// ---------------------------------------------------------------------------

inline int run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const std::string experiment = cfg.get_str("experiment");
  if (experiment.empty())
    throw std::invalid_argument("config: missing 'experiment'");

  std::string out_dir = cfg.get_str("out_dir", "");
  if (out_dir.empty()) {
    const char* env = std::getenv("DIFFCOVER_OUT");
    out_dir = env && *env ? env : ".";
  }
  fs::create_directories(out_dir);
  auto path = [&](const std::string& f) { return out_dir + "/" + f; };

  auto started = std::chrono::steady_clock::now();
  SummaryWriter summary;
  summary.add("experiment", experiment);
  for (const auto& [k, v] : cfg.entries())
    if (k != "experiment") summary.add("config." + k, v);

  int exit_code = 0;

  if (experiment == "simulate") {
    SystemSpec spec = system_from_config(cfg);
    double t = cfg.get_pos("t", 1.0);
    double dt = cfg.get_pos("dt", 1e-3);
    if (t / dt > 2e6)
      throw std::invalid_argument("simulate: t/dt too large to record a path");
    Trajectory tr = simulate(spec.system,
                             vec_from_config(cfg, "x0", spec.dim,
                                             Vec::filled(spec.dim, 1.0)),
                             t, dt, RngStream{cfg.get_u64("seed", 0), 0},
                             cfg.get_pos("explosion_radius", 1e6));
    std::FILE* f = std::fopen(path("trajectory.csv").c_str(), "w");
    if (!f) throw std::runtime_error("cannot write trajectory.csv");
    write_trajectory_csv(f, tr);
    std::fclose(f);
    summary.add("status", to_string(tr.status));
    summary.add("event_time", tr.event_time);
    summary.add("steps", tr.times.size());
  } else if (experiment == "exit-cdf" || experiment == "tail-check") {
    SystemSpec spec = system_from_config(cfg);
    Region region = region_from_config(cfg, spec.dim);
    McConfig mc = mc_from_config(cfg);
    auto cdf = estimate_exit_cdf(
        spec.system, vec_from_config(cfg, "x0", spec.dim, Vec::zero(spec.dim)),
        region, cfg.get_list("t_grid", {0.02, 0.05, 0.1}), mc.n_paths, mc.dt,
        mc.seed, mc.explosion_radius, mc.workers);
    CsvWriter csv(path("exit_cdf.csv"), "t,p_hat,ci_lo,ci_hi");
    for (std::size_t i = 0; i < cdf.t_grid.size(); ++i)
      csv.row({cdf.t_grid[i], cdf.p_hat[i], cdf.ci_lower[i], cdf.ci_upper[i]});
    summary.add("n_paths", cdf.n_paths);
    summary.add("censored_fraction", cdf.censored_fraction);
    summary.add("exploded", cdf.exploded_count);
    if (experiment == "tail-check") {
      auto rep = check_quadratic_tail(cdf, cfg.get_pos("delta", 1.0),
                                      cfg.get_pos("c", 1.0));
      summary.add("tail_pass", std::string(rep.pass ? "yes" : "no"));
      summary.add("max_ratio", rep.max_ratio);
      summary.add("smallest_consistent_c", rep.max_ratio);
      if (!rep.pass) {
        summary.add("violating_t", rep.violating_t);
        exit_code = 1;
      }
    }
  } else if (experiment == "chain") {
    SystemSpec spec = system_from_config(cfg);
    WeakUniformCover cover =
        to_weak_cover(cover_from_config(cfg), cfg.get_pos("c", 1.0));
    McConfig mc = mc_from_config(cfg);
    ChainStats st = simulate_chain(
        spec.system, cover,
        vec_from_config(cfg, "x0", spec.dim, Vec::filled(spec.dim, 0.5)),
        cfg.get_pos("horizon", 2.0), mc.n_paths, mc.dt, mc.seed,
        cfg.get_list("t_grid", {}), mc.explosion_radius, mc.workers,
        static_cast<int>(cfg.get_pos("max_links", 8)));
    CsvWriter csv(path("chain.csv"), "k,t,p_hat,ci_hi");
    for (std::size_t k = 0; k < st.increment_p.size(); ++k)
      for (std::size_t g = 0; g < st.t_grid.size(); ++g)
        csv.row({static_cast<double>(k + 1), st.t_grid[g],
                 st.increment_p[k][g], st.increment_ci_hi[k][g]});
    summary.add("n_paths", st.n_paths);
    summary.add("coverage_violations", st.coverage_violations);
    summary.add("exploded", st.exploded);
    if (st.coverage_violations > 0) exit_code = 1;
  } else if (experiment == "cover-verify") {
    SystemSpec spec = system_from_config(cfg);
    UniformCover cover = cover_from_config(cfg);
    McConfig mc = mc_from_config(cfg);
    auto rep = verify_uniform_cover(cover, spec.system,
                                    static_cast<int>(cfg.get_num("grid", 9)),
                                    mc.workers);
    CsvWriter csv(path("cover_verify.csv"),
                  "charts,worst_bound,worst_pushforward,worst_generator,pass");
    csv.row({static_cast<double>(rep.charts_checked), rep.worst_bound,
             rep.worst_pushforward, rep.worst_generator,
             rep.pass ? 1.0 : 0.0});
    summary.add("charts", rep.charts_checked);
    summary.add("worst_bound", rep.worst_bound);
    summary.add("worst_chart", static_cast<std::size_t>(
                                   rep.worst_chart < 0 ? 0 : rep.worst_chart));
    summary.add("pass", std::string(rep.pass ? "yes" : "no"));
    if (cfg.has("grid")) {
      auto cov = check_coverage(cover, cover.region_radius,
                                static_cast<int>(cfg.get_num("grid", 9)) * 20);
      summary.add("coverage_ok", std::string(cov.covered ? "yes" : "no"));
      if (!cov.covered) exit_code = 1;
    }
    if (cfg.has("save_cert")) {
      std::ofstream os(cfg.get_str("save_cert"));
      WeakUniformCover weak = to_weak_cover(cover, cfg.get_pos("c", 1.0));
      save_cover_certificate(os, cover, &weak);
      summary.add("cert_saved", cfg.get_str("save_cert"));
    }
    if (!rep.pass) exit_code = 1;
  } else if (experiment == "deltas") {
    DeltaSequence d = deltas_from_config(cfg, summary);
    CsvWriter csv(path("deltas.csv"), "n,delta,partial_sum");
    for (std::size_t n = 0; n < d.values.size(); ++n)
      csv.row({static_cast<double>(n + 1), d.values[n], d.partial_sums[n]});
    summary.add("verdict", to_string(d.verdict));
    summary.add("verdict_kind", std::string("finite-prefix heuristic"));
    summary.add("partial_sum", d.partial_sums.back());
  } else if (experiment == "nonexplosion") {
    DeltaSequence d = deltas_from_config(cfg, summary);
    double C = cfg.get_pos("c", 1.0);
    double t = cfg.get_pos("t", 1.0);
    std::size_t n0 = static_cast<std::size_t>(cfg.get_num("start_index", 0));
    CsvWriter csv(path("nonexplosion.csv"), "eps,p,bound");
    double inf_bound = 1e300;
    for (double eps : cfg.get_list("eps_list", {0.5, 0.25, 0.1, 0.05})) {
      auto cert = nonexplosion_certificate(d, C, n0, t, eps);
      csv.row({eps, static_cast<double>(cert.p), cert.bound});
      inf_bound = std::min(inf_bound, cert.bound);
    }
    summary.add("delta_verdict", to_string(d.verdict));
    summary.add("verdict_kind", std::string("finite-prefix heuristic"));
    summary.add("infimum_bound", inf_bound);
  } else if (experiment == "boundary-cstar") {
    SystemSpec spec = system_from_config(cfg);
    Compactification model = model_from_config(cfg, spec.dim);
    McConfig mc = mc_from_config(cfg);
    Vec dir = vec_from_config(cfg, "x0", spec.dim, Vec::unit(spec.dim, 0))
                  .normalized();
    std::vector<Vec> approach;
    for (double r : cfg.get_list("radii", {1e2, 1e3, 1e4}))
      approach.push_back(dir * r);
    Vec xbar = model.boundary_limit(approach.back());
    ExplosionConvention conv = default_convention(model);
    if (cfg.has("convention"))
      conv = cfg.get_str("convention") == "delta"
                 ? ExplosionConvention::kSendToDelta
                 : ExplosionConvention::kKillAtExplosion;
    auto rep = check_cstar(spec.system, model, xbar, approach,
                           default_f_suite(model, xbar), cfg.get_pos("t", 1.0),
                           mc, conv);
    bool any_fail = false;
    for (const auto& fr : rep.per_fn) {
      CsvWriter csv(path("cstar_" + fr.name + ".csv"), "radius_or_n,gap,ci");
      for (std::size_t j = 0; j < fr.gaps.size(); ++j)
        csv.row({approach[j].norm(), fr.gaps[j], fr.ci[j]});
      summary.add("verdict_" + fr.name, to_string(fr.verdict));
      summary.add("final_gap_" + fr.name, fr.gaps.back());
      if (fr.verdict == LimitVerdict::kFails) any_fail = true;
    }
    summary.add("note",
                std::string("limit tested at a fixed t, not uniformly in t"));
    if (any_fail) exit_code = 1;
  } else if (experiment == "boundary-c0") {
    SystemSpec spec = system_from_config(cfg);
    McConfig mc = mc_from_config(cfg);
    Region k_set = ball_region(Vec::zero(spec.dim), cfg.get_pos("k_radius", 1.0));
    auto rep = check_c0(spec.system, k_set, cfg.get_pos("t", 1.0),
                        cfg.get_list("radii", {4.0, 16.0, 64.0}), mc);
    CsvWriter csv(path("c0.csv"), "radius_or_n,gap,ci");
    for (std::size_t j = 0; j < rep.radii.size(); ++j)
      csv.row({rep.radii[j], rep.entrance_probs[j],
               0.5 * (rep.ci_hi[j] - rep.ci_lo[j])});
    summary.add("c0_consistent", std::string(rep.c0_consistent ? "yes" : "no"));
    summary.add("final_entrance_prob", rep.entrance_probs.back());
    if (!rep.c0_consistent) exit_code = 1;
  } else if (experiment == "ball-criterion") {
    int dim = static_cast<int>(cfg.get_num("dim", 2));
    Compactification model = model_from_config(cfg, dim);
    std::vector<Vec> seq;
    for (double r : cfg.get_list("radii", {16.0, 64.0, 256.0}))
      seq.push_back(model.kind == CompactKind::kCylinderEnds
                        ? Vec{r, 0.0}
                        : Vec::unit(dim, 0) * r);
    auto rep = check_ball_convergence(model, seq, cfg.get_pos("r", 1.0));
    CsvWriter csv(path("ball_criterion.csv"), "radius_or_n,gap,ci");
    for (std::size_t j = 0; j < rep.diameters.size(); ++j)
      csv.row({seq[j].norm(), rep.diameters[j], 0.0});
    summary.add("holds", std::string(rep.holds ? "yes" : "no"));
    if (!rep.holds) exit_code = 1;
  } else if (experiment == "counterexample") {
    double t = cfg.get_pos("t", 1.0);
    std::size_t n = static_cast<std::size_t>(cfg.get_pos("n_samples", 100000));
    CsvWriter csv(path("counterexample.csv"),
                  "modulus,modulus_factor,angle_mean,angle_variance,"
                  "crosscheck_rel_err");
    double worst = 0.0;
    std::uint64_t seed = cfg.get_u64("seed", 0);
    for (double r : cfg.get_list("radii", {1.0})) {
      auto rep = counterexample_angle_law(Vec{r, 0.0}, t, n, seed++);
      csv.row({r, rep.modulus / r, rep.angle_mean, rep.angle_variance,
               rep.crosscheck_rel_err});
      worst = std::max(worst, std::abs(rep.angle_variance - t) / t);
    }
    summary.add("worst_variance_rel_err", worst);
  } else if (experiment == "manifold") {
    auto man = make_manifold(static_cast<int>(cfg.get_num("dim", 2)),
                             warp_from_config(cfg));
    std::vector<double> r_grid = cfg.get_list("r_grid", {1.0, 2.0, 4.0, 8.0});
    auto vol = volume_profile(man, r_grid, cfg.get_pos("quad_step", 0.01));
    CsvWriter csv(path("manifold.csv"), "r,volume");
    for (std::size_t i = 0; i < vol.r_grid.size(); ++i)
      csv.row({vol.r_grid[i], vol.volumes[i]});
    auto prof = curvature_profile(man, 500.0);
    auto aa = assumption_a(prof, cfg.get_pos("r", 400.0));
    McConfig mc = mc_from_config(cfg);
    auto expl = explosion_experiment(man, cfg.get_pos("r0", 1.0),
                                     cfg.get_pos("t", 1.0), mc.n_paths, mc.dt,
                                     mc.explosion_radius, mc.seed, mc.workers);
    summary.add("warp", man.warp.name);
    summary.add("assumption_a", to_string(aa.verdict));
    summary.add("grigoryan", to_string(vol.grigoryan_verdict));
    summary.add("verdict_kind", std::string("finite-prefix heuristic"));
    summary.add("comparison_pass",
                std::string(vol.comparison_pass ? "yes" : "no"));
    summary.add("exploded_fraction", expl.exploded_fraction);
    summary.add("exploded_ci_hi", expl.ci.hi);
  } else {
    throw std::invalid_argument("unknown experiment '" + experiment + "'");
  }

  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - started)
                    .count();
  summary.add("exit_code", static_cast<std::size_t>(exit_code));
  summary.add("runtime_seconds", secs);
  summary.write(path("summary.txt"));
  return exit_code;
}

}  // namespace diffcover::cli
