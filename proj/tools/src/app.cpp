#include "foldsail/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "foldsail/scenario.hpp"

namespace foldsail::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr double kDeg = std::numbers::pi / 180.0;

struct Options {
  std::string config;
  std::string out;
  int jobs = 1;
  unsigned long long seed = 12345;
};

fs::path output_dir(const Options& opts) {
  fs::path dir;
  if (!opts.out.empty())
    dir = opts.out;
  else if (const char* env = std::getenv("FOLDSAIL_OUT_DIR"); env && *env)
    dir = env;
  else
    dir = ".";
  fs::create_directories(dir);
  return dir;
}

fs::path artifact(const fs::path& dir, const std::string& name) {
  const fs::path p(name);
  return p.is_absolute() ? p : dir / p;
}

int cmd_validate(const ScenarioConfig& cfg) {
  double area = 0.0;
  for (const auto& s : cfg.model.surfaces)
    if (s.is_front) area += s.area;
  std::cout << "configuration OK: " << cfg.model.body_count() << " bodies, "
            << cfg.model.joint_count() << " joints, " << cfg.model.surfaces.size()
            << " surfaces, " << area << " m^2 front area, "
            << cfg.environment.distance_au << " au\n";
  return 0;
}

int cmd_optimize(const ScenarioConfig& cfg, const fs::path& dir) {
  const fs::path file = artifact(dir, cfg.solution_file);
  EquilibriumSolution sol;
  try {
    sol = solve_equilibrium(cfg.model, cfg.environment, cfg.problem);
  } catch (const std::runtime_error& err) {  // unreachable target / bad chart
    sol.theta = VecX::Zero(cfg.model.joint_count());
    sol.message = err.what();
    write_solution_json(file, sol, cfg.problem);
    std::cerr << "optimize: infeasible: " << err.what() << "\n";
    return 2;
  }
  write_solution_json(file, sol, cfg.problem);
  if (!sol.converged) {
    std::cerr << "optimize: did not converge: " << sol.message << "\n";
    return 2;
  }
  std::cout << "optimize: converged in " << sol.iterations << " iterations ("
            << sol.roll_attempts << " roll seed(s)); force error " << sol.force_error
            << " N, torque error " << sol.torque_error << " N*m, natural frequency "
            << sol.natural_frequency << " rad/s -> " << file.string() << "\n";
  return 0;
}

int cmd_lqr(const ScenarioConfig& cfg, const fs::path& dir) {
  const EquilibriumSolution sol = read_solution_json(artifact(dir, cfg.solution_file));
  if (!sol.converged) {
    std::cerr << "lqr: staged solution is not converged (" << sol.message << ")\n";
    return 2;
  }
  const double omega_n = natural_frequency(sol.spectrum);
  const double pressure = radiation_pressure(cfg.environment);
  const LinearizedSystem sys = linearize(cfg.model, sol.phi, sol.theta, pressure);
  const LqrWeights weights =
      default_weights(omega_n, cfg.model.joint_count(), cfg.lqr_angle_scale);
  const LqrGain gain = solve_lqr(sys.a, sys.b, MatX(weights.state.asDiagonal()),
                                 MatX(weights.input.asDiagonal()));

  const Eigen::EigenSolver<MatX> es(sys.a - sys.b * gain.k);
  std::vector<std::complex<double>> closed(static_cast<size_t>(es.eigenvalues().size()));
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    closed[static_cast<size_t>(i)] = es.eigenvalues()[i];
  const double abscissa =
      es.eigenvalues().real().maxCoeff();

  const fs::path file = artifact(dir, cfg.gain_file);
  write_gain_json(file, gain, weights, omega_n, closed);
  std::cout << "lqr: gain " << gain.k.rows() << "x" << gain.k.cols()
            << ", Riccati residual " << gain.residual << ", closed-loop abscissa "
            << abscissa << " rad/s (" << abscissa / omega_n
            << " natural) -> " << file.string() << "\n";
  return 0;
}

int cmd_simulate(const ScenarioConfig& cfg, const fs::path& dir) {
  const EquilibriumSolution sol = read_solution_json(artifact(dir, cfg.solution_file));
  SimConfig sim = cfg.sim;
  if (cfg.sim_duration_periods > 0.0) {
    const double omega_n = natural_frequency(sol.spectrum);
    sim.duration = cfg.sim_duration_periods * 2.0 * std::numbers::pi / omega_n;
  }

  LqrGain gain;
  const LqrGain* gain_ptr = nullptr;
  if (sim.control == ControlMode::lqr) {
    gain = read_gain_json(artifact(dir, cfg.gain_file));
    gain_ptr = &gain;
  }

  const SimResult result =
      simulate(cfg.model, cfg.environment, sol.phi, sol.theta, gain_ptr, sim);
  const SimMetrics metrics =
      compute_metrics(result, sol.phi, sol.theta, cfg.problem.force_target_inertial);

  const fs::path traj = artifact(dir, cfg.trajectory_file);
  const fs::path metr = artifact(dir, cfg.metrics_file);
  write_trajectory_csv(traj, result, sol.theta);
  write_metrics_json(metr, metrics, result);
  std::cout << "simulate: " << sim.duration << " s, " << result.samples.size()
            << " samples, " << result.stats.accepted << " steps; final attitude error "
            << metrics.final_attitude_error / kDeg << " deg, final rate "
            << metrics.final_rate / kDeg << " deg/s -> " << traj.string() << ", "
            << metr.string() << "\n";
  return 0;
}

struct BlockStats {
  double max_rel = 0.0;
  double sum_rel = 0.0;
};

int cmd_jacobian_check(const ScenarioConfig& cfg, const fs::path& dir, int jobs,
                       unsigned long long seed) {
  const MultibodyModel& model = cfg.model;
  const int m = model.joint_count();
  const double pressure = radiation_pressure(cfg.environment);
  constexpr int kSamples = 100;
  constexpr double kStep = 1e-6;
  constexpr double kThreshold = 1e-5;

  // draw states up front so the report is independent of the thread count
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> att(-20.0 * kDeg, 20.0 * kDeg);
  std::uniform_real_distribution<double> fold(-30.0 * kDeg, 30.0 * kDeg);
  std::vector<std::pair<Vec3, VecX>> states;
  states.reserve(kSamples);
  while (static_cast<int>(states.size()) < kSamples) {
    Vec3 phi(att(rng), att(rng), att(rng));
    VecX theta(m);
    for (int k = 0; k < m; ++k) theta[k] = fold(rng);
    const Kinematics kin = forward_kinematics(model, theta);
    const Vec3 sun = sun_vector_body(phi);
    bool sunlit = true;
    for (size_t f = 0; f < model.surfaces.size(); ++f)
      if (model.surfaces[f].is_front && kin.surface_normal[f].dot(sun) < 0.05)
        sunlit = false;
    if (sunlit) states.emplace_back(phi, theta);
  }

  std::array<std::vector<double>, 4> rel;  // per block, per sample
  for (auto& v : rel) v.assign(kSamples, 0.0);

  auto worker = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const auto& [phi, theta] = states[static_cast<size_t>(i)];
      const Kinematics kin = forward_kinematics(model, theta);
      const WrenchJacobian analytic =
          wrench_jacobian(model, kin, phi, pressure, SurfaceSet::front_faces);
      const WrenchJacobian fd =
          finite_difference_wrench(model, theta, phi, pressure, kStep);
      const MatX pairs[4][2] = {{analytic.force_attitude, fd.force_attitude},
                                {analytic.torque_attitude, fd.torque_attitude},
                                {analytic.force_joint, fd.force_joint},
                                {analytic.torque_joint, fd.torque_joint}};
      for (int b = 0; b < 4; ++b) {
        const double scale = std::max(pairs[b][0].cwiseAbs().maxCoeff(), 1e-300);
        rel[static_cast<size_t>(b)][static_cast<size_t>(i)] =
            (pairs[b][0] - pairs[b][1]).cwiseAbs().maxCoeff() / scale;
      }
    }
  };

  const int threads = std::clamp(jobs, 1, kSamples);
  if (threads == 1) {
    worker(0, kSamples);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (kSamples + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(kSamples, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  static const char* kBlocks[4] = {"force_attitude", "torque_attitude", "force_joint",
                                   "torque_joint"};
  ordered_json doc;
  doc["configurations"] = kSamples;
  doc["seed"] = seed;
  doc["fd_step"] = kStep;
  doc["threshold"] = kThreshold;
  bool pass = true;
  ordered_json blocks;
  for (int b = 0; b < 4; ++b) {
    BlockStats st;
    for (double r : rel[static_cast<size_t>(b)]) {
      st.max_rel = std::max(st.max_rel, r);
      st.sum_rel += r;
    }
    ordered_json entry;
    entry["max_relative_error"] = st.max_rel;
    entry["mean_relative_error"] = st.sum_rel / kSamples;
    blocks[kBlocks[b]] = entry;
    pass = pass && st.max_rel < kThreshold;
  }
  doc["blocks"] = blocks;
  doc["pass"] = pass;

  const fs::path file = artifact(dir, "jacobian_report.json");
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + file.string() + "' for writing");
  out << doc.dump(2) << "\n";
  std::cout << "jacobian-check: " << kSamples << " states, "
            << (pass ? "pass" : "FAIL") << " -> " << file.string() << "\n";
  return pass ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"transformable solar sail: photon-pressure equilibria, joint-actuated "
               "momentum damping, and closed-loop verification"};
  app.require_subcommand(1);

  Options opts;
  const char* kNames[6] = {"validate", "optimize", "lqr", "simulate", "jacobian-check",
                           "pipeline"};
  const char* kHelp[6] = {
      "parse and validate a scenario configuration",
      "solve for the equilibrium attitude and joint angles",
      "synthesize the joint-actuation damping gain from a staged solution",
      "integrate the closed- or open-loop dynamics from a staged solution",
      "compare analytic wrench sensitivities against finite differences",
      "optimize, then lqr, then simulate, staging all artifacts"};
  for (int i = 0; i < 6; ++i) {
    CLI::App* sub = app.add_subcommand(kNames[i], kHelp[i]);
    sub->add_option("--config", opts.config, "scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out,
                    "output directory (default: FOLDSAIL_OUT_DIR or the working directory)");
    sub->add_option("--jobs", opts.jobs, "worker threads for internal parallelism")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", opts.seed, "random seed for sampled checks");
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 1;
  }

  try {
    const ScenarioConfig cfg = load_scenario(opts.config);
    const fs::path dir = output_dir(opts);
    if (app.got_subcommand("validate")) return cmd_validate(cfg);
    if (app.got_subcommand("optimize")) return cmd_optimize(cfg, dir);
    if (app.got_subcommand("lqr")) return cmd_lqr(cfg, dir);
    if (app.got_subcommand("simulate")) return cmd_simulate(cfg, dir);
    if (app.got_subcommand("jacobian-check"))
      return cmd_jacobian_check(cfg, dir, opts.jobs, opts.seed);
    // pipeline
    if (const int code = cmd_optimize(cfg, dir); code != 0) return code;
    if (const int code = cmd_lqr(cfg, dir); code != 0) return code;
    return cmd_simulate(cfg, dir);
  } catch (const ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}

}  // namespace foldsail::cli
