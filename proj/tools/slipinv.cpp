// Command-line driver for constrained fault-slip inversion: synthetic data
// simulation, MTN posterior sampling, correlation-length DIC scans, variance
// hyperparameter optimization, and summary/plot emission.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slipinv/config.hpp"
#include "slipinv/greens.hpp"
#include "slipinv/hyperopt.hpp"
#include "slipinv/io.hpp"
#include "slipinv/mesh.hpp"
#include "slipinv/model_selection.hpp"
#include "slipinv/pipeline.hpp"
#include "slipinv/postproc.hpp"
#include "slipinv/reports.hpp"
#include "slipinv/svg.hpp"
#include "slipinv/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned threads = 1;
};

slipinv::RunConfig resolve_config(const GlobalArgs& g) {
  slipinv::KeyValueConfig kv;
  if (!g.config_path.empty()) kv = slipinv::KeyValueConfig::from_file(g.config_path);
  if (g.seed_given) kv.set("sampler.seed", std::to_string(g.seed));
  auto rc = slipinv::RunConfig::from_config(kv);
  rc.out_dir = g.out_dir;
  rc.threads = g.threads;
  return rc;
}

std::string out_path(const slipinv::RunConfig& rc, const std::string& name) {
  fs::create_directories(rc.out_dir);
  return (fs::path(rc.out_dir) / name).string();
}

void write_manifest(const slipinv::RunConfig& rc, const std::string& command,
                    const std::vector<std::string>& outputs) {
  json config_echo = json::object();
  for (const auto& [k, v] : rc.kv.raw()) config_echo[k] = v;
  config_echo["sampler.seed"] = std::to_string(rc.sampler.seed);
  json manifest{{"command", command},
                {"version", slipinv::kVersion},
                {"seed", rc.sampler.seed},
                {"config", config_echo},
                {"outputs", outputs}};
  std::ofstream out(out_path(rc, "run_manifest.json"), std::ios::binary);
  out << manifest.dump(2) << '\n';
}

slipinv::FaultMesh need_mesh(const slipinv::RunConfig& rc) {
  if (rc.mesh_path.empty()) throw std::runtime_error("paths.mesh is required");
  return slipinv::load_fault_mesh(rc.mesh_path);
}

slipinv::StationSet need_stations(const slipinv::RunConfig& rc) {
  if (rc.stations_path.empty()) throw std::runtime_error("paths.stations is required");
  return slipinv::load_stations(rc.stations_path);
}

slipinv::GreensMatrix need_greens(const slipinv::RunConfig& rc, const slipinv::FaultMesh& mesh,
                                  const slipinv::StationSet& stations) {
  slipinv::GreensMatrix g;
  if (rc.use_synthetic_kernel) {
    g = slipinv::synthetic_kernel(mesh, stations, rc.kernel_decay_m);
  } else {
    if (rc.greens_path.empty())
      throw std::runtime_error("paths.greens is required (or set sim.use_synthetic_kernel)");
    g = slipinv::load_greens(rc.greens_path);
  }
  g.validate(stations.station_count(), mesh.subfault_count());
  return g;
}

slipinv::ObservationVector need_observations(const slipinv::RunConfig& rc,
                                             const slipinv::StationSet& stations) {
  if (rc.observations_path.empty()) throw std::runtime_error("paths.observations is required");
  slipinv::ObservationVector y;
  y.values = slipinv::load_observation_values(rc.observations_path, &stations.labels);
  y.axis_sigmas = rc.likelihood.axis_sigmas;
  y.validate(stations.station_count());
  return y;
}

Eigen::VectorXd subfault_magnitudes(const Eigen::VectorXd& d) {
  Eigen::VectorXd mag(d.size() / 2);
  for (Eigen::Index i = 0; i < mag.size(); ++i) mag[i] = std::hypot(d[2 * i], d[2 * i + 1]);
  return mag;
}

int cmd_simulate(const GlobalArgs& g) {
  auto rc = resolve_config(g);
  const auto mesh = need_mesh(rc);
  const auto stations = need_stations(rc);
  const auto greens = need_greens(rc, mesh, stations);
  const auto a0 = slipinv::build_prior_for(mesh, rc.matern, rc.prior);

  const auto ds = slipinv::simulate_dataset(mesh, greens, a0, rc.prior, rc.sim_noise_sigmas,
                                            rc.sampler, rc.pin_subfault,
                                            rc.pin_component == "dip", rc.pin_value_m,
                                            rc.rigidity_pa, rc.slip_floor_m);

  std::vector<std::string> outputs;
  slipinv::save_slip_csv(ds.true_slip, mesh, out_path(rc, "true_slip.csv"));
  outputs.push_back("true_slip.csv");
  slipinv::save_observation_values(ds.noisy_values, stations.labels,
                                   out_path(rc, "observations.csv"));
  outputs.push_back("observations.csv");
  if (rc.use_synthetic_kernel) {
    slipinv::save_matrix_f64(greens.entries, out_path(rc, "greens.f64"));
    outputs.push_back("greens.f64");
  }

  json meta{{"pin_subfault", rc.pin_subfault},
            {"pin_component", rc.pin_component},
            {"pin_value_m", rc.pin_value_m},
            {"noise_sigma_x_m", rc.sim_noise_sigmas[0]},
            {"noise_sigma_y_m", rc.sim_noise_sigmas[1]},
            {"noise_sigma_z_m", rc.sim_noise_sigmas[2]},
            {"seed", rc.sampler.seed}};
  if (ds.true_mw_defined) meta["true_mw"] = ds.true_mw;
  std::ofstream(out_path(rc, "simulate_meta.json"), std::ios::binary) << meta.dump(2) << '\n';
  outputs.push_back("simulate_meta.json");

  write_manifest(rc, "simulate", outputs);
  return 0;
}

int cmd_invert(const GlobalArgs& g) {
  auto rc = resolve_config(g);
  const auto mesh = need_mesh(rc);
  const auto stations = need_stations(rc);
  const auto greens = need_greens(rc, mesh, stations);
  const auto y = need_observations(rc, stations);

  const auto inv = slipinv::run_inversion(mesh, y, greens, rc.prior, rc.matern, rc.likelihood,
                                          rc.sampler, rc.rigidity_pa, rc.slip_floor_m);

  std::vector<std::string> outputs;
  if (rc.draws_format == "f64") {
    slipinv::save_matrix_f64(inv.chain.draws, out_path(rc, "draws.f64"));
    outputs.push_back("draws.f64");
  } else {
    slipinv::save_matrix_csv(inv.chain.draws, out_path(rc, "draws.csv"));
    outputs.push_back("draws.csv");
  }
  slipinv::save_median_cv_csv(inv.median, inv.cv, mesh, out_path(rc, "median_cv.csv"));
  outputs.push_back("median_cv.csv");
  slipinv::save_map_mle_csv(inv.map, inv.mle, mesh, out_path(rc, "map_mle.csv"));
  outputs.push_back("map_mle.csv");
  slipinv::save_residual_quantiles_csv(inv.residuals, stations.labels,
                                       out_path(rc, "residual_quantiles.csv"));
  outputs.push_back("residual_quantiles.csv");

  if (inv.mw) {
    Eigen::Map<const Eigen::VectorXd> mw_draws(inv.mw->draws.data(),
                                               static_cast<Eigen::Index>(inv.mw->draws.size()));
    slipinv::save_matrix_csv(mw_draws, out_path(rc, "mw_draws.csv"));
    outputs.push_back("mw_draws.csv");
    std::ofstream(out_path(rc, "mw_summary.json"), std::ios::binary)
        << slipinv::mw_summary_json(*inv.mw, inv.mw_of_map_defined, inv.mw_of_map).dump(2) << '\n';
    outputs.push_back("mw_summary.json");
  }

  if (rc.emit_svg) {
    slipinv::emit_heatmap(subfault_magnitudes(inv.median), mesh, &stations,
                          "posterior median slip magnitude (m)",
                          out_path(rc, "median_slip.svg"));
    outputs.push_back("median_slip.svg");
    Eigen::VectorXd cv = inv.cv.cv_percent;
    for (Eigen::Index i = 0; i < cv.size(); ++i)
      if (!inv.cv.defined[static_cast<std::size_t>(i)]) cv[i] = 0.0;
    slipinv::emit_heatmap(cv, mesh, &stations, "coefficient of variation (%)",
                          out_path(rc, "cv.svg"));
    outputs.push_back("cv.svg");
  }

  write_manifest(rc, "invert", outputs);
  return 0;
}

int cmd_dic_scan(const GlobalArgs& g) {
  auto rc = resolve_config(g);
  if (rc.dic_grid_spec.empty()) throw std::runtime_error("dic.grid is required");
  const auto grid = slipinv::parse_grid_spec(rc.dic_grid_spec);
  const auto mesh = need_mesh(rc);
  const auto stations = need_stations(rc);
  const auto greens = need_greens(rc, mesh, stations);
  const auto y = need_observations(rc, stations);

  const auto scan =
      slipinv::dic_grid_search(grid, mesh, y, greens, rc.likelihood, rc.prior, rc.matern,
                               rc.sampler, rc.dic_per_cell_seeds, rc.threads);

  std::vector<std::string> outputs;
  slipinv::save_dic_table_csv(scan.table, out_path(rc, "dic_table.csv"));
  outputs.push_back("dic_table.csv");

  json argmin;
  if (scan.argmin >= 0) {
    const auto& best = scan.table[static_cast<std::size_t>(scan.argmin)];
    argmin = json{{"lambda_s_m", best.lambda_s}, {"lambda_d_m", best.lambda_d},
                  {"dic", best.dic},             {"p_d", best.p_d},
                  {"mean_deviance", best.mean_deviance}, {"seed", best.seed}};
  } else {
    argmin = json{{"error", "no valid grid cell"}};
  }
  std::ofstream(out_path(rc, "dic_argmin.json"), std::ios::binary) << argmin.dump(2) << '\n';
  outputs.push_back("dic_argmin.json");

  write_manifest(rc, "dic-scan", outputs);
  return 0;
}

int cmd_hyperopt(const GlobalArgs& g) {
  auto rc = resolve_config(g);
  const auto mesh = need_mesh(rc);
  const auto stations = need_stations(rc);
  const auto greens = need_greens(rc, mesh, stations);
  const auto y = need_observations(rc, stations);
  const auto a0 = slipinv::build_prior_for(mesh, rc.matern, rc.prior);
  const Eigen::VectorXd a_unit =
      rc.likelihood.noise_precision_diagonal(stations.station_count());

  slipinv::HyperOptResult result;
  if (rc.hyperopt_mode == "both")
    result = slipinv::optimize_both(y.values, greens.entries, a_unit, a0, rc.hyper_priors,
                                    rc.hyperopt_options);
  else
    result = slipinv::optimize_sigma_beta(rc.hyperopt_sigma_sq, y.values, greens.entries, a_unit,
                                          a0, rc.hyper_priors, rc.hyperopt_options);

  std::vector<std::string> outputs;
  {
    auto out = slipinv::detail::open_output(out_path(rc, "hyperopt_grid.csv"));
    out << "sigma_sq,sigma_beta_sq,objective\n";
    for (const auto& row : result.grid)
      out << slipinv::detail::fmt_g17(row[0]) << ',' << slipinv::detail::fmt_g17(row[1]) << ','
          << slipinv::detail::fmt_g17(row[2]) << '\n';
  }
  outputs.push_back("hyperopt_grid.csv");

  json optimum{{"mode", rc.hyperopt_mode},
               {"sigma_sq", result.sigma_sq},
               {"sigma_beta_sq", result.sigma_beta_sq},
               {"objective", result.value},
               {"at_boundary", result.at_boundary},
               {"bracket_lo", rc.hyperopt_options.bracket_lo},
               {"bracket_hi", rc.hyperopt_options.bracket_hi},
               {"grid_points", rc.hyperopt_options.grid_points}};
  std::ofstream(out_path(rc, "hyperopt_optimum.json"), std::ios::binary)
      << optimum.dump(2) << '\n';
  outputs.push_back("hyperopt_optimum.json");

  write_manifest(rc, "hyperopt", outputs);
  return 0;
}

slipinv::ChainResult load_draws(const slipinv::RunConfig& rc) {
  if (rc.draws_path.empty()) throw std::runtime_error("paths.draws is required");
  slipinv::ChainResult chain;
  chain.draws = slipinv::load_matrix_auto(rc.draws_path);
  return chain;
}

int cmd_mw(const GlobalArgs& g) {
  auto rc = resolve_config(g);
  const auto mesh = need_mesh(rc);
  auto chain = load_draws(rc);
  if (chain.draws.cols() != 2 * mesh.subfault_count())
    throw std::runtime_error("mw: draws have " + std::to_string(chain.draws.cols()) +
                             " columns, expected 2M = " +
                             std::to_string(2 * mesh.subfault_count()));

  const auto mw = slipinv::mw_posterior(chain, mesh, rc.rigidity_pa, rc.slip_floor_m);
  bool point_defined = false;
  double point_mw = 0.0;
  if (!rc.point_estimate_path.empty()) {
    const Eigen::VectorXd point = slipinv::load_slip_csv(rc.point_estimate_path);
    try {
      point_mw = slipinv::moment_magnitude(point, mesh, rc.rigidity_pa, rc.slip_floor_m);
      point_defined = true;
    } catch (const std::domain_error&) {
      point_defined = false;
    }
  }

  std::vector<std::string> outputs;
  Eigen::Map<const Eigen::VectorXd> mw_draws(mw.draws.data(),
                                             static_cast<Eigen::Index>(mw.draws.size()));
  slipinv::save_matrix_csv(mw_draws, out_path(rc, "mw_draws.csv"));
  outputs.push_back("mw_draws.csv");
  std::ofstream(out_path(rc, "mw_summary.json"), std::ios::binary)
      << slipinv::mw_summary_json(mw, point_defined, point_mw).dump(2) << '\n';
  outputs.push_back("mw_summary.json");

  write_manifest(rc, "mw", outputs);
  return 0;
}

int cmd_summarize(const GlobalArgs& g) {
  auto rc = resolve_config(g);
  const auto mesh = need_mesh(rc);
  auto chain = load_draws(rc);
  if (chain.draws.cols() != 2 * mesh.subfault_count())
    throw std::runtime_error("summarize: draws have " + std::to_string(chain.draws.cols()) +
                             " columns, expected 2M = " +
                             std::to_string(2 * mesh.subfault_count()));

  const Eigen::VectorXd median = slipinv::pointwise_median(chain);
  const auto cv = slipinv::pointwise_cv(chain);
  const Eigen::VectorXd ess = slipinv::per_coordinate_ess(chain.draws);

  std::vector<std::string> outputs;
  slipinv::save_median_cv_csv(median, cv, mesh, out_path(rc, "median_cv.csv"));
  outputs.push_back("median_cv.csv");

  json summary{{"draw_count", chain.draws.rows()},
               {"dimension", chain.draws.cols()},
               {"min_ess", ess.minCoeff()},
               {"mean_ess", ess.mean()}};
  std::ofstream(out_path(rc, "summary.json"), std::ios::binary) << summary.dump(2) << '\n';
  outputs.push_back("summary.json");

  if (!rc.observations_path.empty() && !rc.greens_path.empty() && !rc.stations_path.empty()) {
    const auto stations = need_stations(rc);
    const auto greens = need_greens(rc, mesh, stations);
    const auto y = need_observations(rc, stations);
    const auto rq = slipinv::predictive_residuals(chain, y, greens);
    slipinv::save_residual_quantiles_csv(rq, stations.labels,
                                         out_path(rc, "residual_quantiles.csv"));
    outputs.push_back("residual_quantiles.csv");
  }

  if (rc.emit_svg) {
    slipinv::emit_heatmap(subfault_magnitudes(median), mesh, nullptr,
                          "posterior median slip magnitude (m)",
                          out_path(rc, "median_slip.svg"));
    outputs.push_back("median_slip.svg");
  }

  write_manifest(rc, "summarize", outputs);
  return 0;
}

const char* kConfigKeyHelp = R"(Config file: flat `section.key = value` lines, '#' comments.
A run_manifest.json from a previous run is also accepted as --config.

  paths.mesh / paths.stations / paths.greens / paths.observations
  paths.draws / paths.point_estimate
  prior.beta_s (1.0)              prior.beta_d (0.2)
  prior.z_lim_m (50000)           prior.sigma_beta_sq (2e-4)
  prior.bound_s_lower_m (-0.1)    prior.bound_s_upper_m (0.1)
  prior.bound_d_lower_m (-0.0804) prior.bound_d_upper_m (0.4)
  matern.lambda_s_m (40000)       matern.lambda_d_m (45000)
  matern.gamma_sq (1.0)
  likelihood.sigma_x_m (0.0021)   likelihood.sigma_y_m (0.0025)
  likelihood.sigma_z_m (0.0051)
  sampler.sample_count (20000)    sampler.burn_in (-1 = 10% of samples)
  sampler.thin (1)                sampler.seed (0)
  sampler.mixing_probability (0.5)
  sampler.beta_shape_a (2.0)      sampler.beta_shape_b (9.0)
  hyper.a / hyper.b / hyper.a_beta / hyper.b_beta (1.0)
  hyperopt.mode (sigma_beta|both) hyperopt.sigma_sq (1.0)
  hyperopt.grid_points (50)       hyperopt.bracket_lo (1e-8)
  hyperopt.bracket_hi (1e2)
  dic.grid (lambda_s=lo:hi:step,lambda_d=lo:hi:step, meters)
  dic.per_cell_seeds (false)
  sim.use_synthetic_kernel (false) sim.kernel_decay_m (60000)
  sim.pin_subfault (0)             sim.pin_component (dip|strike)
  sim.pin_value_m (0.3)
  sim.noise_sigma_x_m / _y_m / _z_m (likelihood sigmas; 0 = noise free)
  mw.rigidity_pa (32e9)            mw.slip_floor_m (0.01)
  output.emit_svg (true)           output.draws_format (csv|f64)
)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian fault-slip inversion with a truncated-normal posterior"};
  app.footer(kConfigKeyHelp);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--config", g.config_path, "config file (key=value or run_manifest.json)");
  app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", g.seed, "sampler seed (overrides sampler.seed)");
  app.add_option("--threads", g.threads, "worker threads for grid scans")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset from the prior");
  auto* invert = app.add_subcommand("invert", "run the full inversion pipeline");
  auto* dic_scan = app.add_subcommand("dic-scan", "DIC grid search over correlation lengths");
  auto* hyperopt = app.add_subcommand("hyperopt", "optimize variance hyperparameters");
  auto* mw = app.add_subcommand("mw", "moment-magnitude posterior from saved draws");
  auto* summarize = app.add_subcommand("summarize", "median/CV summaries from saved draws");

  CLI11_PARSE(app, argc, argv);
  g.seed_given = seed_opt->count() > 0;

  try {
    if (simulate->parsed()) return cmd_simulate(g);
    if (invert->parsed()) return cmd_invert(g);
    if (dic_scan->parsed()) return cmd_dic_scan(g);
    if (hyperopt->parsed()) return cmd_hyperopt(g);
    if (mw->parsed()) return cmd_mw(g);
    if (summarize->parsed()) return cmd_summarize(g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
