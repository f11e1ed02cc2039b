#include "tgc/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "tgc/config.hpp"
#include "tgc/errors.hpp"
#include "tgc/kernels.hpp"
#include "tgc/rng.hpp"
#include "tgc/snapshot.hpp"
#include "tgc/verification.hpp"

namespace tgc {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolver = 2;
constexpr int kExitThreshold = 3;

// Fixed-format double for byte-stable CSV output.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void machine_error(int code, const std::string& message) {
  std::cerr << "TGC-ERROR code=" << code << " message=\"" << message << "\"\n";
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  std::vector<std::string> overrides;
  std::string kernels = "auto";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Path to the run configuration")->required();
  cmd->add_option("--out", args.out_dir, "Output directory (overrides output.directory)");
  cmd->add_option("--seed", args.seed, "Seed (overrides run.seed)");
  cmd->add_option("--override", args.overrides, "section.key=value, repeatable");
  cmd->add_option("--kernels", args.kernels, "Kernel backend: auto|scalar|simd")
      ->check(CLI::IsMember({"auto", "scalar", "simd"}));
}

RunConfig load_config(const CommonArgs& args) {
  std::vector<std::string> overrides = args.overrides;
  if (!args.out_dir.empty()) overrides.push_back("output.directory=" + args.out_dir);
  if (args.seed >= 0) overrides.push_back("run.seed=" + std::to_string(args.seed));
  kernels::select_backend(args.kernels);
  return parse_config_file(args.config_path, overrides);
}

fs::path prepare_output(const RunConfig& cfg) {
  fs::path dir(cfg.output_directory);
  fs::create_directories(dir);
  std::ofstream echo(dir / "config_echo.ini", std::ios::trunc);
  echo << cfg.echo();
  return dir;
}

void write_level_monitors(const fs::path& dir, const RunConfig& cfg, const Monitors& mon) {
  std::ofstream out(dir / "monitors.csv", std::ios::trunc);
  out << "level,time,min_phi,max_phi,mass_mu,mass_phi,mass_sigma,norm2_phi,norm2_sigma\n";
  const double tau = cfg.time_grid().tau();
  for (std::size_t n = 0; n < mon.min_phi.size(); ++n) {
    out << n << ',' << fmt(static_cast<double>(n) * tau) << ',' << fmt(mon.min_phi[n]) << ','
        << fmt(mon.max_phi[n]) << ',' << fmt(mon.mass_mu[n]) << ',' << fmt(mon.mass_phi[n]) << ','
        << fmt(mon.mass_sigma[n]) << ',' << fmt(mon.norm2_phi[n]) << ','
        << fmt(mon.norm2_sigma[n]) << '\n';
  }
}

void write_step_monitors(const fs::path& dir, const RunConfig& cfg, const Monitors& mon) {
  std::ofstream out(dir / "steps.csv", std::ios::trunc);
  out << "step,time,newton_iters,newton_residual,mass_residual_combined,mass_residual_sigma\n";
  const double tau = cfg.time_grid().tau();
  for (std::size_t s = 0; s < mon.newton_iters.size(); ++s) {
    out << (s + 1) << ',' << fmt(static_cast<double>(s + 1) * tau) << ',' << mon.newton_iters[s]
        << ',' << fmt(mon.newton_residual[s]) << ',' << fmt(mon.mass_residual_combined[s]) << ','
        << fmt(mon.mass_residual_sigma[s]) << '\n';
  }
}

void write_state_snapshots(const fs::path& dir, const RunConfig& cfg,
                           const StateTrajectory& traj) {
  const int N = traj.time_grid().steps;
  for (int n = 0; n <= N; ++n) {
    if (n != 0 && n != N && (n % cfg.snapshot_cadence) != 0) continue;
    char name[32];
    std::snprintf(name, sizeof(name), "snap_%06d.tgf", n);
    write_snapshot((dir / name).string(), {{"mu", traj.snapshot(n).mu},
                                           {"phi", traj.snapshot(n).phi},
                                           {"sigma", traj.snapshot(n).sigma}});
  }
}

ControlField zero_controls_in_box(const RunConfig& cfg, const Domain& domain) {
  ControlField zero = ControlField::constant(domain, cfg.steps, 0.0, 0.0);
  return project_box(zero, cfg.box);
}

int cmd_simulate(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path dir = prepare_output(cfg);
  const Domain domain = cfg.domain();
  const ControlField controls = zero_controls_in_box(cfg, domain);

  const StateTrajectory traj =
      solve_state(cfg.model, cfg.potential, ProliferationH{}, controls,
                  cfg.initial_snapshot(domain), cfg.time_grid(), cfg.solver);

  write_level_monitors(dir, cfg, traj.monitors());
  write_step_monitors(dir, cfg, traj.monitors());
  write_state_snapshots(dir, cfg, traj);

  const SeparationReport sep = separation_report(traj, cfg.potential);
  std::cout << "simulate: " << cfg.steps << " steps done, phi in [" << fmt(sep.min_phi) << ", "
            << fmt(sep.max_phi) << "]";
  if (sep.applicable)
    std::cout << ", separation margins (" << fmt(sep.margin_lo) << ", " << fmt(sep.margin_hi)
              << ")";
  std::cout << "\n";
  return kExitOk;
}

void write_controls(const fs::path& path, const ControlField& controls) {
  std::vector<std::pair<std::string, Field>> fields;
  for (std::size_t n = 0; n < controls.u.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "u_%04zu", n + 1);
    fields.emplace_back(name, controls.u[n]);
  }
  for (std::size_t n = 0; n < controls.w.size(); ++n) {
    char name[32];
    std::snprintf(name, sizeof(name), "w_%04zu", n + 1);
    fields.emplace_back(name, controls.w[n]);
  }
  write_snapshot(path.string(), fields);
}

int cmd_optimize(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path dir = prepare_output(cfg);
  const Problem problem = cfg.problem();
  const ControlField start = midpoint_controls(problem.domain(), cfg.steps, cfg.box);

  const OptimizationReport report = optimize(problem, cfg.optimizer, start);

  std::ofstream iter_csv(dir / "iterates.csv", std::ios::trunc);
  iter_csv << "iter,J,stationarity,step,armijo_rejections\n";
  for (const IterateRow& row : report.history)
    iter_csv << row.iter << ',' << fmt(row.cost) << ',' << fmt(row.stationarity) << ','
             << fmt(row.step) << ',' << row.armijo_rejections << '\n';

  write_controls(dir / "controls_final.tgf", report.controls);
  const StateTrajectory& traj = *report.trajectory;
  const int N = traj.time_grid().steps;
  write_snapshot((dir / "final_state.tgf").string(), {{"mu", traj.snapshot(N).mu},
                                                      {"phi", traj.snapshot(N).phi},
                                                      {"sigma", traj.snapshot(N).sigma}});
  write_level_monitors(dir, cfg, traj.monitors());
  write_step_monitors(dir, cfg, traj.monitors());

  const char* status = report.status == OptimizeStatus::converged      ? "converged"
                       : report.status == OptimizeStatus::max_iters    ? "max_iters"
                                                                       : "line_search_stall";
  std::cout << "optimize: status=" << status << " iters=" << (report.history.size() - 1)
            << " J=" << fmt(report.final_cost)
            << " stationarity=" << fmt(report.final_stationarity)
            << " box_radius_logged=" << fmt(report.box_radius_logged) << "\n";
  return kExitOk;
}

int cmd_gradcheck(const CommonArgs& args, int probes, double fd_step, double tol) {
  const RunConfig cfg = load_config(args);
  const fs::path dir = prepare_output(cfg);
  const Problem problem = cfg.problem();
  const Domain& domain = problem.domain();
  const ControlField base = midpoint_controls(domain, cfg.steps, cfg.box);

  // One forward + adjoint pass serves every probe direction.
  const StateTrajectory traj = solve_state(problem.params, problem.potential, problem.h, base,
                                           problem.initial, problem.grid, problem.solver);
  const AdjTrajectory adj = solve_adjoint(traj, problem.params, problem.cost);
  const ControlGradient grad = reduced_gradient(traj, adj, base, problem.cost);

  std::ofstream csv(dir / "gradcheck.csv", std::ios::trunc);
  csv << "probe,seed,fd_value,analytic_value,rel_err\n";

  double max_rel = 0.0;
  for (int probe = 0; probe < probes; ++probe) {
    const std::uint64_t probe_seed = cfg.seed + static_cast<std::uint64_t>(probe);
    Rng rng(probe_seed);
    const Direction d = random_direction(domain, cfg.steps, rng, 1.0);

    double analytic = 0.0;
    for (int n = 0; n < cfg.steps; ++n) {
      analytic += grad.gu[n].values().dot(d.k[n].values());
      analytic += grad.gw[n].values().dot(d.l[n].values());
    }
    const double fd = fd_gradient(problem, base, d, fd_step);
    const double denom = std::max(std::abs(fd), std::abs(analytic));
    const double rel = denom > 1e-300 ? std::abs(fd - analytic) / denom : 0.0;
    max_rel = std::max(max_rel, rel);
    csv << probe << ',' << probe_seed << ',' << fmt(fd) << ',' << fmt(analytic) << ',' << fmt(rel)
        << '\n';
  }

  const bool pass = max_rel <= tol;
  std::cout << "gradcheck: max_rel_err = " << fmt(max_rel) << (pass ? " <= " : " > ") << fmt(tol)
            << (pass ? " PASS" : " FAIL") << "\n";
  if (!pass) {
    machine_error(kExitThreshold, "gradcheck max_rel_err above tolerance");
    return kExitThreshold;
  }
  return kExitOk;
}

struct VerifyRow {
  std::string probe;
  std::string statistic;
  double value;
  double threshold;
  bool higher_is_better;
  bool pass;
};

int cmd_verify(const CommonArgs& args) {
  const RunConfig cfg = load_config(args);
  const fs::path dir = prepare_output(cfg);
  const Problem problem = cfg.problem();
  const Domain& domain = problem.domain();
  const ControlField base = midpoint_controls(domain, cfg.steps, cfg.box);

  std::vector<VerifyRow> rows;
  auto check_max = [&rows](const std::string& probe, const std::string& stat, double value,
                           double threshold) {
    rows.push_back({probe, stat, value, threshold, false, value <= threshold});
  };
  auto check_min = [&rows](const std::string& probe, const std::string& stat, double value,
                           double threshold) {
    rows.push_back({probe, stat, value, threshold, true, value >= threshold});
  };

  const StateTrajectory traj = solve_state(problem.params, problem.potential, problem.h, base,
                                           problem.initial, problem.grid, problem.solver);

  {  // adjoint transpose witness
    Rng rng(cfg.seed);
    const Direction d = random_direction(domain, cfg.steps, rng, 1.0);
    check_max("duality", "relative_gap", duality_gap(traj, problem.params, d, rng.raw()), 1e-10);
  }
  {  // remainder order of the tangent approximation
    Rng rng(cfg.seed + 1);
    const Direction d = random_direction(domain, cfg.steps, rng, 1.0);
    const FrechetReport fr =
        frechet_order_probe(problem, base, d, {1e-1, 3e-2, 1e-2, 3e-3});
    check_min("frechet", "loglog_slope", fr.slope, 1.9);
  }
  {  // continuous-dependence boundedness across a 4x perturbation range
    const LipschitzReport big = lipschitz_probe(problem, base, cfg.seed + 2, 3, 0.4);
    const LipschitzReport small = lipschitz_probe(problem, base, cfg.seed + 2, 3, 0.1);
    double worst = 1.0;
    for (std::size_t i = 0; i < big.ratios.size(); ++i) {
      const double q = big.ratios[i] / small.ratios[i];
      worst = std::max(worst, std::max(q, 1.0 / q));
    }
    check_max("lipschitz", "ratio_drift_factor", worst, 2.0);
  }
  {  // separation
    const SeparationReport sep = separation_report(traj, problem.potential);
    if (sep.applicable) {
      check_min("separation", "margin_lo", sep.margin_lo, 0.0);
      check_min("separation", "margin_hi", sep.margin_hi, 0.0);
      // strictly positive margins required
      rows[rows.size() - 2].pass = sep.margin_lo > 0.0;
      rows[rows.size() - 1].pass = sep.margin_hi > 0.0;
    } else {
      rows.push_back({"separation", "not_applicable", 0.0, 0.0, true, true});
    }
  }
  {  // mass identities
    const MassReport mass = mass_identity_residuals(traj, problem.params, base);
    check_max("mass", "max_combined_residual", mass.max_combined, 1e-10);
    check_max("mass", "max_sigma_residual", mass.max_sigma, 1e-10);
  }
  {  // continuous adjoint cross-check
    const CrosscheckReport cc = continuous_adjoint_crosscheck(problem, base, 3);
    double mean_order = 0.0;
    for (double o : cc.orders) mean_order += o;
    mean_order /= static_cast<double>(cc.orders.size());
    check_min("continuous_adjoint", "mean_tau_order", mean_order, 0.9);
  }

  std::ofstream csv(dir / "verify_report.csv", std::ios::trunc);
  csv << "probe,statistic,value,threshold,pass\n";
  bool all_pass = true;
  for (const VerifyRow& row : rows) {
    csv << row.probe << ',' << row.statistic << ',' << fmt(row.value) << ',' << fmt(row.threshold)
        << ',' << (row.pass ? 1 : 0) << '\n';
    std::cout << "verify: " << row.probe << "." << row.statistic << " = " << fmt(row.value)
              << (row.higher_is_better ? " (>= " : " (<= ") << fmt(row.threshold) << ") "
              << (row.pass ? "PASS" : "FAIL") << "\n";
    all_pass = all_pass && row.pass;
  }
  if (!all_pass) {
    machine_error(kExitThreshold, "verification threshold failure");
    return kExitThreshold;
  }
  return kExitOk;
}

// Cartesian product of --sweep key=v1,v2,... overrides.
std::vector<std::vector<std::string>> sweep_grid(const std::vector<std::string>& axes) {
  std::vector<std::vector<std::string>> grid{{}};
  for (const std::string& axis : axes) {
    const std::size_t eq = axis.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("sweep axis '" + axis + "' is not section.key=v1,v2,...");
    const std::string key = axis.substr(0, eq);
    std::vector<std::string> values;
    std::istringstream in(axis.substr(eq + 1));
    std::string item;
    while (std::getline(in, item, ',')) values.push_back(key + "=" + item);
    if (values.empty()) throw InvalidArgument("sweep axis '" + axis + "' has no values");
    std::vector<std::vector<std::string>> next;
    for (const auto& row : grid)
      for (const auto& v : values) {
        auto extended = row;
        extended.push_back(v);
        next.push_back(extended);
      }
    grid = std::move(next);
  }
  return grid;
}

int cmd_sweep(const CommonArgs& args, const std::vector<std::string>& axes, int jobs) {
  const RunConfig base_cfg = load_config(args);  // validates the base config
  const fs::path root(base_cfg.output_directory);
  fs::create_directories(root);

  const auto grid = sweep_grid(axes);
  struct RunResult {
    std::string dir;
    std::string overrides;
    bool ok = false;
    std::string detail;
    double min_phi = 0.0, max_phi = 0.0, mass_sigma = 0.0;
  };
  std::vector<RunResult> results(grid.size());

  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= grid.size()) return;
      RunResult& res = results[i];
      char name[32];
      std::snprintf(name, sizeof(name), "run_%04zu", i);
      res.dir = (root / name).string();
      std::ostringstream ovtext;
      for (const auto& ov : grid[i]) ovtext << (ovtext.tellp() > 0 ? " " : "") << ov;
      res.overrides = ovtext.str();
      try {
        std::vector<std::string> overrides = args.overrides;
        if (args.seed >= 0) overrides.push_back("run.seed=" + std::to_string(args.seed));
        for (const auto& ov : grid[i]) overrides.push_back(ov);
        overrides.push_back("output.directory=" + res.dir);
        RunConfig cfg = parse_config_file(args.config_path, overrides);
        const fs::path dir = prepare_output(cfg);
        const Domain domain = cfg.domain();
        const ControlField controls = zero_controls_in_box(cfg, domain);
        const StateTrajectory traj =
            solve_state(cfg.model, cfg.potential, ProliferationH{}, controls,
                        cfg.initial_snapshot(domain), cfg.time_grid(), cfg.solver);
        write_level_monitors(dir, cfg, traj.monitors());
        write_step_monitors(dir, cfg, traj.monitors());
        write_state_snapshots(dir, cfg, traj);
        const Monitors& mon = traj.monitors();
        res.min_phi = mon.min_phi.back();
        res.max_phi = mon.max_phi.back();
        res.mass_sigma = mon.mass_sigma.back();
        res.ok = true;
      } catch (const std::exception& e) {
        res.detail = e.what();
      }
    }
  };

  const int n_workers = std::max(1, std::min<int>(jobs, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::ofstream csv(root / "sweep_summary.csv", std::ios::trunc);
  csv << "run,dir,overrides,status,detail,final_min_phi,final_max_phi,final_mass_sigma\n";
  std::size_t ok_count = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RunResult& res = results[i];
    csv << i << ',' << res.dir << ',' << '"' << res.overrides << '"' << ','
        << (res.ok ? "ok" : "failed") << ',' << '"' << res.detail << '"' << ','
        << fmt(res.min_phi) << ',' << fmt(res.max_phi) << ',' << fmt(res.mass_sigma) << '\n';
    if (res.ok) ++ok_count;
  }
  std::cout << "sweep: " << ok_count << "/" << results.size() << " runs completed\n";
  if (ok_count == 0 && !results.empty()) {
    machine_error(kExitSolver, "all sweep runs failed");
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Phase-field tumor-growth state/adjoint solver and control optimizer"};
  app.require_subcommand(1);

  CommonArgs sim_args, opt_args, grad_args, ver_args, sweep_args;
  int grad_probes = 5;
  double grad_fd_step = 1e-5;
  double grad_tol = 1e-6;
  std::vector<std::string> sweep_axes;
  int sweep_jobs = 1;

  CLI::App* sim = app.add_subcommand("simulate", "Forward solve with monitors and snapshots");
  add_common(sim, sim_args);
  CLI::App* opt = app.add_subcommand("optimize", "Projected-gradient control optimization");
  add_common(opt, opt_args);
  CLI::App* grad = app.add_subcommand("gradcheck", "FD vs adjoint gradient report");
  add_common(grad, grad_args);
  grad->add_option("--probes", grad_probes, "Number of probe directions");
  grad->add_option("--fd-step", grad_fd_step, "Central-difference step");
  grad->add_option("--tol", grad_tol, "Pass threshold on max relative error");
  CLI::App* ver = app.add_subcommand("verify", "Full verification battery");
  add_common(ver, ver_args);
  CLI::App* sweep = app.add_subcommand("sweep", "Grid of override runs with a summary CSV");
  add_common(sweep, sweep_args);
  sweep->add_option("--sweep", sweep_axes, "section.key=v1,v2,... sweep axis, repeatable");
  sweep->add_option("--jobs", sweep_jobs, "Parallel runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc != 0) machine_error(kExitUsage, "usage error");
    return rc != 0 ? kExitUsage : kExitOk;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (opt->parsed()) return cmd_optimize(opt_args);
    if (grad->parsed()) return cmd_gradcheck(grad_args, grad_probes, grad_fd_step, grad_tol);
    if (ver->parsed()) return cmd_verify(ver_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args, sweep_axes, sweep_jobs);
  } catch (const ParseError& e) {
    machine_error(kExitUsage, e.what());
    return kExitUsage;
  } catch (const ValidationError& e) {
    machine_error(kExitUsage, e.what());
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    machine_error(kExitUsage, e.what());
    return kExitUsage;
  } catch (const IoError& e) {
    machine_error(kExitUsage, e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    machine_error(kExitSolver, e.what());
    return kExitSolver;
  }
  machine_error(kExitUsage, "no subcommand");
  return kExitUsage;
}

}  // namespace tgc
