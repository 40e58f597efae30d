// Experiment CLI: every check in the library is one subcommand. A config file
// (`key = value` lines) supplies defaults; flags win over the file. Artifacts
// are CSVs plus summary.txt in --out (or $DIFFCOVER_OUT). Exit status is 0
// when every verdict passes or is inconclusive-by-design, 1 when a check
// fails, 2 on validation errors.

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "diffcover/experiments.hpp"

namespace {

struct FlagSpec {
  std::string flag;
  std::string key;
  std::string help;
};

const std::vector<FlagSpec> kCommonFlags{
    {"--out", "out_dir", "output directory (default $DIFFCOVER_OUT or .)"},
    {"--workers", "workers", "worker threads; results are worker-count independent"},
    {"--seed", "seed", "base RNG seed"},
    {"--n-paths", "n_paths", "Monte-Carlo paths"},
    {"--dt", "dt", "integrator step"},
    {"--explosion-radius", "explosion_radius", "explosion proxy radius (default 1e6)"},
    {"--preset", "preset",
     "system preset: bm1d|bm2d|bm3d|bm|linear_growth|sublinear|example4|"
     "elliptic|radial"},
    {"--alpha", "alpha", "sublinear growth power"},
    {"--kappa", "kappa", "coefficient scale"},
    {"--dim", "dim", "state dimension (where the preset needs it)"},
    {"--x0", "x0", "start point, comma separated"},
};

struct SubSpec {
  std::string name;
  std::string help;
  std::vector<FlagSpec> flags;
};

const std::vector<SubSpec> kSubcommands{
    {"simulate",
     "Integrate one trajectory. Writes trajectory.csv (t,x1..xn,status).",
     {{"--t", "t", "end time"}}},
    {"exit-cdf",
     "Estimate the first-exit CDF from a region. Writes exit_cdf.csv "
     "(t,p_hat,ci_lo,ci_hi).",
     {{"--region", "region", "region spec, e.g. ball:1"},
      {"--t-grid", "t_grid", "comma separated time grid"}}},
    {"tail-check",
     "Exit CDF plus the quadratic tail bound ci_hi <= C t^2 below delta. "
     "Writes exit_cdf.csv.",
     {{"--region", "region", "region spec, e.g. ball:1"},
      {"--t-grid", "t_grid", "comma separated time grid"},
      {"--delta", "delta", "check grid points below this time"},
      {"--c", "c", "tail constant C"}}},
    {"chain",
     "Chained stopping times over a growth cover. Writes chain.csv "
     "(k,t,p_hat,ci_hi).",
     {{"--cover-mode", "cover_mode", "linear|sublinear"},
      {"--region-radius", "region_radius", "cover region radius"},
      {"--bound-k", "bound_k", "declared chart bound k"},
      {"--cert", "cert", "load a cover certificate instead of building"},
      {"--horizon", "horizon", "chain horizon"},
      {"--t-grid", "t_grid", "increment tail grid"},
      {"--max-links", "max_links", "maximum chain links per path"},
      {"--c", "c", "tail constant C"}}},
    {"cover-verify",
     "Verify chart bounds of a growth cover (and optionally grid coverage). "
     "Writes cover_verify.csv.",
     {{"--cover-mode", "cover_mode", "linear|sublinear"},
      {"--region-radius", "region_radius", "cover region radius"},
      {"--bound-k", "bound_k", "declared chart bound k"},
      {"--grid", "grid", "grid points per axis for bound sup / coverage"},
      {"--cert", "cert", "load a cover certificate instead of building"},
      {"--save-cert", "save_cert", "write the certificate to this path"},
      {"--c", "c", "tail constant stored in the certificate"}}},
    {"deltas",
     "Curvature-driven delta sequence. Writes deltas.csv (n,delta,partial_sum).",
     {{"--warp", "warp", "flat|hyperbolic|power_ricci"},
      {"--q", "q", "Ricci decay exponent for power_ricci"},
      {"--c1", "c1", "Hsu constant c1"},
      {"--c2", "c2", "Hsu constant c2 (enables the delta0 root)"},
      {"--delta0", "delta0", "delta cap"},
      {"--n-terms", "n_terms", "sequence length"},
      {"--renormalize", "renormalize", "1 to apply the grouping renormalization"}}},
    {"nonexplosion",
     "Certified non-explosion bound with an eps sweep. Writes "
     "nonexplosion.csv (eps,p,bound).",
     {{"--warp", "warp", "flat|hyperbolic|power_ricci"},
      {"--q", "q", "Ricci decay exponent"},
      {"--c1", "c1", "Hsu constant c1"},
      {"--c2", "c2", "Hsu constant c2"},
      {"--delta0", "delta0", "delta cap"},
      {"--n-terms", "n_terms", "sequence length"},
      {"--renormalize", "renormalize", "1 to renormalize first"},
      {"--c", "c", "tail constant C"},
      {"--t", "t", "time horizon"},
      {"--start-index", "start_index", "exhaustion start index n"},
      {"--eps-list", "eps_list", "comma separated eps sweep"}}},
    {"boundary-cstar",
     "P_t f(x_n) -> f(xbar) along an approach sequence. Writes "
     "cstar_<fn>.csv (radius_or_n,gap,ci).",
     {{"--model", "model", "one_point|sphere_at_infinity|cylinder_ends"},
      {"--radii", "radii", "approach radii"},
      {"--t", "t", "semigroup time"},
      {"--convention", "convention", "kill|delta explosion convention"}}},
    {"boundary-c0",
     "Entrance probabilities into a compact ball. Writes c0.csv "
     "(radius_or_n,gap,ci).",
     {{"--k-radius", "k_radius", "radius of the compact set K"},
      {"--radii", "radii", "start radii"},
      {"--t", "t", "time horizon"}}},
    {"ball-criterion",
     "Ball convergence criterion for a compactification. Writes "
     "ball_criterion.csv (radius_or_n,gap,ci).",
     {{"--model", "model", "one_point|sphere_at_infinity|cylinder_ends"},
      {"--radii", "radii", "escape radii"},
      {"--r", "r", "geodesic ball radius"}}},
    {"counterexample",
     "Exact angle-law sampling of dx = i x dB. Writes counterexample.csv "
     "(modulus,modulus_factor,angle_mean,angle_variance,crosscheck_rel_err).",
     {{"--t", "t", "time"},
      {"--n", "n_samples", "number of samples"},
      {"--radii", "radii", "start moduli"}}},
    {"manifold",
     "Rotationally symmetric manifold pipeline: volume, curvature verdicts, "
     "explosion fraction. Writes manifold.csv (r,volume).",
     {{"--warp", "warp", "flat|hyperbolic|power_ricci"},
      {"--q", "q", "Ricci decay exponent"},
      {"--r-grid", "r_grid", "volume grid"},
      {"--quad-step", "quad_step", "quadrature step"},
      {"--r", "r", "assumption-A integration range"},
      {"--r0", "r0", "start radius for the explosion experiment"},
      {"--t", "t", "explosion horizon"}}},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "diffcover: exit-time certificates and boundary behaviour of "
      "diffusions under compactifications"};
  app.require_subcommand(1);

  // Per subcommand: --config plus string-valued flags keyed into the config.
  std::map<std::string, std::string> config_paths;
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, CLI::App*> subs;
  for (const SubSpec& spec : kSubcommands) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    subs[spec.name] = sub;
    sub->add_option("--config", config_paths[spec.name],
                    "key = value config file; flags win over the file");
    for (const FlagSpec& f : kCommonFlags)
      sub->add_option(f.flag, values[spec.name][f.key], f.help);
    for (const FlagSpec& f : spec.flags)
      sub->add_option(f.flag, values[spec.name][f.key], f.help);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (const SubSpec& spec : kSubcommands) {
      CLI::App* sub = subs[spec.name];
      if (!sub->parsed()) continue;
      diffcover::ExperimentConfig cfg;
      if (!config_paths[spec.name].empty())
        cfg = diffcover::ExperimentConfig::from_file(config_paths[spec.name]);
      cfg.set("experiment", spec.name);
      for (const auto& [key, value] : values[spec.name])
        if (!value.empty()) cfg.set(key, value);
      return diffcover::cli::run_experiment(cfg);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
