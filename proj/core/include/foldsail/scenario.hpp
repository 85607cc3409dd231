#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "foldsail/equilibrium.hpp"
#include "foldsail/control.hpp"
#include "foldsail/sim.hpp"

namespace foldsail {

/// Full run description loaded from a JSON file. Angles appear in degrees in
/// the file and in every artifact; they are radians here and everywhere else
/// in the library. Unknown keys anywhere in the file are rejected.
struct ScenarioConfig {
  MultibodyModel model;
  Environment environment;
  EquilibriumProblem problem;
  double lqr_angle_scale = 0.017453292519943295;  ///< rad, weight scale
  double u_max = 1e-5;
  SimConfig sim;
  /// When positive, the run duration is this many natural attitude periods
  /// (2 pi / omega_n of the staged solution) instead of sim.duration seconds.
  double sim_duration_periods = 0.0;

  std::string solution_file = "solution.json";
  std::string gain_file = "gain.json";
  std::string trajectory_file = "trajectory.csv";
  std::string metrics_file = "metrics.json";
};

/// Parses and validates a scenario file; throws ValidationError with the
/// offending key path on any problem.
ScenarioConfig load_scenario(const std::filesystem::path& file);

/// Artifact writers. JSON artifacts are key-ordered and deterministic for a
/// given configuration; the trajectory is CSV with a fixed header and
/// 9-significant-digit values.
void write_solution_json(const std::filesystem::path& file, const EquilibriumSolution& sol,
                         const EquilibriumProblem& problem);
void write_gain_json(const std::filesystem::path& file, const LqrGain& gain,
                     const LqrWeights& weights, double omega_n,
                     const std::vector<std::complex<double>>& closed_loop_eigenvalues);
/// Joint columns are deviations from `theta_eq` (dtheta1..m_deg).
void write_trajectory_csv(const std::filesystem::path& file, const SimResult& result,
                          const VecX& theta_eq);
void write_metrics_json(const std::filesystem::path& file, const SimMetrics& metrics,
                        const SimResult& result);

/// Reads a solution artifact back (used by the staged CLI subcommands).
EquilibriumSolution read_solution_json(const std::filesystem::path& file);
LqrGain read_gain_json(const std::filesystem::path& file, double* omega_n = nullptr);

}  // namespace foldsail
