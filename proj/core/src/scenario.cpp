#include "foldsail/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

namespace foldsail {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError("config key '" + path + "': " + what);
}

void reject_unknown(const json& node, const std::string& path,
                    const std::set<std::string>& allowed) {
  for (const auto& [key, value] : node.items())
    if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
}

double get_number(const json& node, const std::string& path, const std::string& key,
                  double fallback, bool required = false) {
  if (!node.contains(key)) {
    if (required) fail(path + "." + key, "missing required value");
    return fallback;
  }
  if (!node.at(key).is_number()) fail(path + "." + key, "expected a number");
  return node.at(key).get<double>();
}

bool get_bool(const json& node, const std::string& path, const std::string& key,
              bool fallback) {
  if (!node.contains(key)) return fallback;
  if (!node.at(key).is_boolean()) fail(path + "." + key, "expected a boolean");
  return node.at(key).get<bool>();
}

int get_int(const json& node, const std::string& path, const std::string& key, int fallback) {
  if (!node.contains(key)) return fallback;
  if (!node.at(key).is_number_integer()) fail(path + "." + key, "expected an integer");
  return node.at(key).get<int>();
}

std::string get_string(const json& node, const std::string& path, const std::string& key,
                       const std::string& fallback, bool required = false) {
  if (!node.contains(key)) {
    if (required) fail(path + "." + key, "missing required value");
    return fallback;
  }
  if (!node.at(key).is_string()) fail(path + "." + key, "expected a string");
  return node.at(key).get<std::string>();
}

VecX get_vector(const json& node, const std::string& path, const std::string& key,
                int expected_size) {
  const json& arr = node.at(key);
  if (!arr.is_array()) fail(path + "." + key, "expected an array of numbers");
  if (expected_size >= 0 && static_cast<int>(arr.size()) != expected_size)
    fail(path + "." + key, "expected " + std::to_string(expected_size) + " entries, got " +
                               std::to_string(arr.size()));
  VecX v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) fail(path + "." + key, "expected numeric entries");
    v[static_cast<int>(i)] = arr[i].get<double>();
  }
  return v;
}

Vec3 get_vec3(const json& node, const std::string& path, const std::string& key,
              const Vec3& fallback, bool required = false) {
  if (!node.contains(key)) {
    if (required) fail(path + "." + key, "missing required value");
    return fallback;
  }
  const VecX v = get_vector(node, path, key, 3);
  return Vec3(v[0], v[1], v[2]);
}

MultibodyModel parse_model(const json& node) {
  reject_unknown(node, "model",
                 {"preset", "panel_mass_kg", "joint_limit_deg", "materials"});
  const std::string preset = get_string(node, "model", "preset", "", true);
  if (preset != "canonical9") fail("model.preset", "unknown preset '" + preset + "'");

  MultibodyModel model = canonical_model();

  if (node.contains("panel_mass_kg")) {
    const double mass = get_number(node, "model", "panel_mass_kg", 10.0);
    const double ratio = mass / 10.0;
    for (BodySpec& b : model.bodies) {
      b.mass = mass;
      b.inertia *= ratio;
    }
  }
  if (node.contains("joint_limit_deg")) {
    const double limit = get_number(node, "model", "joint_limit_deg", 80.0) * kDeg;
    for (JointSpec& j : model.joints) {
      j.lower_limit = -limit;
      j.upper_limit = limit;
    }
  }
  if (node.contains("materials")) {
    const json& mats = node.at("materials");
    if (!mats.is_array() || mats.empty()) fail("model.materials", "expected a non-empty array");
    std::vector<OpticalCoefficients> catalog;
    for (size_t i = 0; i < mats.size(); ++i) {
      const std::string path = "model.materials[" + std::to_string(i) + "]";
      if (!mats[i].is_object()) fail(path, "expected an object");
      reject_unknown(mats[i], path, {"name", "specular", "diffuse", "absorption"});
      OpticalCoefficients oc;
      oc.specular = get_number(mats[i], path, "specular", 0.0, true);
      oc.diffuse = get_number(mats[i], path, "diffuse", 0.0, true);
      oc.absorptive = get_number(mats[i], path, "absorption", 0.0, true);
      catalog.push_back(oc);
    }
    for (SurfaceSpec& s : model.surfaces)
      s.optics = catalog[static_cast<size_t>(s.body) % catalog.size()];
  }
  model.finalize();
  return model;
}

void format_value(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
}

ordered_json vec_json(const Vec3& v) { return ordered_json{v.x(), v.y(), v.z()}; }

ordered_json vec_json(const VecX& v) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

VecX json_vec(const json& arr, const std::string& path) {
  if (!arr.is_array()) fail(path, "expected an array");
  VecX v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[static_cast<int>(i)] = arr[i].get<double>();
  return v;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + file.string() + "' for writing");
  out << text;
  if (!out) throw ValidationError("failed writing '" + file.string() + "'");
}

json parse_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + file.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ValidationError("'" + file.string() + "' is not valid JSON: " + err.what());
  }
  return doc;
}

}  // namespace

ScenarioConfig load_scenario(const std::filesystem::path& file) {
  const json doc = parse_file(file);
  if (!doc.is_object()) fail("(root)", "expected a JSON object");
  reject_unknown(doc, "",
                 {"model", "environment", "target", "equilibrium", "lqr", "simulation",
                  "artifacts"});

  ScenarioConfig cfg;
  if (!doc.contains("model")) fail("model", "missing required section");
  cfg.model = parse_model(doc.at("model"));
  const int m = cfg.model.joint_count();

  if (doc.contains("environment")) {
    const json& env = doc.at("environment");
    reject_unknown(env, "environment", {"solar_constant", "light_speed", "distance_au"});
    cfg.environment.solar_constant =
        get_number(env, "environment", "solar_constant", cfg.environment.solar_constant);
    cfg.environment.light_speed =
        get_number(env, "environment", "light_speed", cfg.environment.light_speed);
    cfg.environment.distance_au =
        get_number(env, "environment", "distance_au", cfg.environment.distance_au);
    if (!(cfg.environment.solar_constant >= 0.0))
      fail("environment.solar_constant", "must be non-negative");
    if (!(cfg.environment.light_speed > 0.0)) fail("environment.light_speed", "must be positive");
    if (!(cfg.environment.distance_au > 0.0)) fail("environment.distance_au", "must be positive");
  }

  if (doc.contains("target")) {
    const json& tgt = doc.at("target");
    reject_unknown(tgt, "target", {"force_inertial_N", "torque_body_Nm"});
    cfg.problem.force_target_inertial =
        get_vec3(tgt, "target", "force_inertial_N", Vec3::Zero());
    cfg.problem.torque_target = get_vec3(tgt, "target", "torque_body_Nm", Vec3::Zero());
  }

  if (doc.contains("equilibrium")) {
    const json& eq = doc.at("equilibrium");
    reject_unknown(eq, "equilibrium",
                   {"tol_force", "tol_torque", "tol_spectrum", "umbrella_deg", "roll_step_deg",
                    "fd_step", "max_outer_iterations", "max_inner_iterations",
                    "penalty_fallback"});
    cfg.problem.tol_force = get_number(eq, "equilibrium", "tol_force", cfg.problem.tol_force);
    cfg.problem.tol_torque = get_number(eq, "equilibrium", "tol_torque", cfg.problem.tol_torque);
    cfg.problem.tol_spectrum =
        get_number(eq, "equilibrium", "tol_spectrum", cfg.problem.tol_spectrum);
    cfg.problem.umbrella_angle =
        get_number(eq, "equilibrium", "umbrella_deg", cfg.problem.umbrella_angle / kDeg) * kDeg;
    cfg.problem.roll_step =
        get_number(eq, "equilibrium", "roll_step_deg", cfg.problem.roll_step / kDeg) * kDeg;
    cfg.problem.fd_step = get_number(eq, "equilibrium", "fd_step", cfg.problem.fd_step);
    cfg.problem.max_outer_iterations =
        get_int(eq, "equilibrium", "max_outer_iterations", cfg.problem.max_outer_iterations);
    cfg.problem.max_inner_iterations =
        get_int(eq, "equilibrium", "max_inner_iterations", cfg.problem.max_inner_iterations);
    cfg.problem.penalty_fallback =
        get_bool(eq, "equilibrium", "penalty_fallback", cfg.problem.penalty_fallback);
    const std::pair<const char*, double> positives[] = {
        {"tol_force", cfg.problem.tol_force},
        {"tol_torque", cfg.problem.tol_torque},
        {"tol_spectrum", cfg.problem.tol_spectrum},
        {"fd_step", cfg.problem.fd_step}};
    for (const auto& [name, value] : positives)
      if (!(value > 0.0)) fail(std::string("equilibrium.") + name, "must be positive");
    if (cfg.problem.max_outer_iterations < 1)
      fail("equilibrium.max_outer_iterations", "must be at least 1");
    if (cfg.problem.max_inner_iterations < 1)
      fail("equilibrium.max_inner_iterations", "must be at least 1");
    if (!(cfg.problem.roll_step > 0.0)) fail("equilibrium.roll_step_deg", "must be positive");
  }

  if (doc.contains("lqr")) {
    const json& lqr = doc.at("lqr");
    reject_unknown(lqr, "lqr", {"angle_scale_deg", "u_max_radps2"});
    cfg.lqr_angle_scale =
        get_number(lqr, "lqr", "angle_scale_deg", cfg.lqr_angle_scale / kDeg) * kDeg;
    cfg.u_max = get_number(lqr, "lqr", "u_max_radps2", cfg.u_max);
    if (!(cfg.lqr_angle_scale > 0.0)) fail("lqr.angle_scale_deg", "must be positive");
    if (!(cfg.u_max > 0.0)) fail("lqr.u_max_radps2", "must be positive");
  }

  if (doc.contains("simulation")) {
    const json& sim = doc.at("simulation");
    reject_unknown(sim, "simulation",
                   {"duration_s", "duration_periods", "abs_tol", "rel_tol", "max_step_s",
                    "sample_interval_s", "control", "faces", "initial_attitude_offset_deg",
                    "initial_rate_degps", "initial_joint_offset_deg",
                    "initial_joint_rate_degps"});
    const bool has_s = sim.contains("duration_s");
    const bool has_p = sim.contains("duration_periods");
    if (has_s == has_p)
      fail("simulation", "exactly one of duration_s and duration_periods is required");
    if (has_s) {
      cfg.sim.duration = get_number(sim, "simulation", "duration_s", 0.0, true);
      if (!(cfg.sim.duration > 0.0)) fail("simulation.duration_s", "must be positive");
    } else {
      cfg.sim_duration_periods = get_number(sim, "simulation", "duration_periods", 0.0, true);
      if (!(cfg.sim_duration_periods > 0.0))
        fail("simulation.duration_periods", "must be positive");
    }
    cfg.sim.abs_tol = get_number(sim, "simulation", "abs_tol", cfg.sim.abs_tol);
    cfg.sim.rel_tol = get_number(sim, "simulation", "rel_tol", cfg.sim.rel_tol);
    cfg.sim.max_step = get_number(sim, "simulation", "max_step_s", cfg.sim.max_step);
    cfg.sim.sample_interval =
        get_number(sim, "simulation", "sample_interval_s", cfg.sim.sample_interval);
    if (!(cfg.sim.abs_tol > 0.0)) fail("simulation.abs_tol", "must be positive");
    if (!(cfg.sim.rel_tol > 0.0)) fail("simulation.rel_tol", "must be positive");
    if (cfg.sim.max_step < 0.0) fail("simulation.max_step_s", "must be non-negative");
    if (cfg.sim.sample_interval < 0.0)
      fail("simulation.sample_interval_s", "must be non-negative");

    const std::string control = get_string(sim, "simulation", "control", "lqr");
    if (control == "lqr")
      cfg.sim.control = ControlMode::lqr;
    else if (control == "open_loop")
      cfg.sim.control = ControlMode::open_loop;
    else
      fail("simulation.control", "expected 'lqr' or 'open_loop'");

    const std::string faces = get_string(sim, "simulation", "faces", "full");
    if (faces == "full")
      cfg.sim.wrench_model = WrenchModel::full_faces;
    else if (faces == "front_only")
      cfg.sim.wrench_model = WrenchModel::front_only;
    else
      fail("simulation.faces", "expected 'full' or 'front_only'");

    cfg.sim.initial_attitude_offset =
        get_vec3(sim, "simulation", "initial_attitude_offset_deg", Vec3::Zero()) * kDeg;
    cfg.sim.initial_rate = get_vec3(sim, "simulation", "initial_rate_degps", Vec3::Zero()) * kDeg;
    if (sim.contains("initial_joint_offset_deg"))
      cfg.sim.initial_joint_offset =
          get_vector(sim, "simulation", "initial_joint_offset_deg", m) * kDeg;
    if (sim.contains("initial_joint_rate_degps"))
      cfg.sim.initial_joint_rate =
          get_vector(sim, "simulation", "initial_joint_rate_degps", m) * kDeg;
  }
  cfg.sim.u_max = cfg.u_max;

  if (doc.contains("artifacts")) {
    const json& art = doc.at("artifacts");
    reject_unknown(art, "artifacts", {"solution", "gain", "trajectory", "metrics"});
    cfg.solution_file = get_string(art, "artifacts", "solution", cfg.solution_file);
    cfg.gain_file = get_string(art, "artifacts", "gain", cfg.gain_file);
    cfg.trajectory_file = get_string(art, "artifacts", "trajectory", cfg.trajectory_file);
    cfg.metrics_file = get_string(art, "artifacts", "metrics", cfg.metrics_file);
  }
  return cfg;
}

void write_solution_json(const std::filesystem::path& file, const EquilibriumSolution& sol,
                         const EquilibriumProblem& problem) {
  ordered_json doc;
  doc["converged"] = sol.converged;
  doc["phi_rad"] = vec_json(sol.phi);
  doc["theta_rad"] = vec_json(sol.theta);
  doc["phi_deg"] = vec_json(Vec3(sol.phi / kDeg));
  doc["theta_deg"] = vec_json(VecX(sol.theta / kDeg));
  doc["force_inertial_N"] = vec_json(sol.force_inertial);
  doc["torque_body_Nm"] = vec_json(sol.torque_body);
  doc["force_error_N"] = sol.force_error;
  doc["torque_error_Nm"] = sol.torque_error;
  ordered_json spec;
  spec["eigenvalues_re"] = {sol.spectrum.eigenvalues[0].real(), sol.spectrum.eigenvalues[1].real(),
                            sol.spectrum.eigenvalues[2].real()};
  spec["eigenvalues_im"] = {sol.spectrum.eigenvalues[0].imag(), sol.spectrum.eigenvalues[1].imag(),
                            sol.spectrum.eigenvalues[2].imag()};
  spec["objective"] = sol.spectrum.objective;
  spec["constraint"] = sol.spectrum.constraint;
  doc["spectrum"] = spec;
  doc["natural_frequency_radps"] = sol.natural_frequency;
  doc["natural_period_s"] = sol.natural_frequency > 0.0
                                ? 2.0 * std::numbers::pi / sol.natural_frequency
                                : 0.0;
  doc["iterations"] = sol.iterations;
  doc["roll_attempts"] = sol.roll_attempts;
  doc["message"] = sol.message;
  ordered_json target;
  target["force_inertial_N"] = vec_json(problem.force_target_inertial);
  target["torque_body_Nm"] = vec_json(problem.torque_target);
  doc["target"] = target;
  write_text(file, doc.dump(2) + "\n");
}

EquilibriumSolution read_solution_json(const std::filesystem::path& file) {
  const json doc = parse_file(file);
  EquilibriumSolution sol;
  try {
    sol.converged = doc.at("converged").get<bool>();
    const VecX phi = json_vec(doc.at("phi_rad"), "phi_rad");
    if (phi.size() != 3) fail("phi_rad", "expected 3 entries");
    sol.phi = phi.head<3>();
    sol.theta = json_vec(doc.at("theta_rad"), "theta_rad");
    const VecX f = json_vec(doc.at("force_inertial_N"), "force_inertial_N");
    const VecX t = json_vec(doc.at("torque_body_Nm"), "torque_body_Nm");
    sol.force_inertial = f.head<3>();
    sol.torque_body = t.head<3>();
    sol.force_error = doc.at("force_error_N").get<double>();
    sol.torque_error = doc.at("torque_error_Nm").get<double>();
    const json& spec = doc.at("spectrum");
    for (int i = 0; i < 3; ++i)
      sol.spectrum.eigenvalues[static_cast<size_t>(i)] = {
          spec.at("eigenvalues_re").at(static_cast<size_t>(i)).get<double>(),
          spec.at("eigenvalues_im").at(static_cast<size_t>(i)).get<double>()};
    sol.spectrum.objective = spec.at("objective").get<double>();
    sol.spectrum.constraint = spec.at("constraint").get<double>();
    sol.natural_frequency = doc.at("natural_frequency_radps").get<double>();
    sol.iterations = doc.at("iterations").get<int>();
    sol.roll_attempts = doc.at("roll_attempts").get<int>();
    sol.message = doc.at("message").get<std::string>();
  } catch (const json::exception& err) {
    throw ValidationError("'" + file.string() + "' is not a solution artifact: " + err.what());
  }
  return sol;
}

void write_gain_json(const std::filesystem::path& file, const LqrGain& gain,
                     const LqrWeights& weights, double omega_n,
                     const std::vector<std::complex<double>>& closed_loop_eigenvalues) {
  ordered_json doc;
  doc["state_layout"] = "[dphi(3); dtheta(m); dphidot(3); dthetadot(m)]";
  doc["natural_frequency_radps"] = omega_n;
  double abscissa = -std::numeric_limits<double>::infinity();
  ordered_json eig_re = ordered_json::array(), eig_im = ordered_json::array();
  for (const auto& lam : closed_loop_eigenvalues) {
    abscissa = std::max(abscissa, lam.real());
    eig_re.push_back(lam.real());
    eig_im.push_back(lam.imag());
  }
  doc["closed_loop_abscissa_radps"] =
      closed_loop_eigenvalues.empty() ? 0.0 : abscissa;
  doc["closed_loop_eigenvalues_re"] = eig_re;
  doc["closed_loop_eigenvalues_im"] = eig_im;
  doc["riccati_residual"] = gain.residual;
  doc["state_weights"] = vec_json(weights.state);
  doc["input_weights"] = vec_json(weights.input);
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < gain.k.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < gain.k.cols(); ++j) row.push_back(gain.k(i, j));
    rows.push_back(row);
  }
  doc["k"] = rows;
  write_text(file, doc.dump(2) + "\n");
}

LqrGain read_gain_json(const std::filesystem::path& file, double* omega_n) {
  const json doc = parse_file(file);
  LqrGain gain;
  try {
    const json& rows = doc.at("k");
    if (!rows.is_array() || rows.empty()) fail("k", "expected a non-empty array of rows");
    const size_t cols = rows.at(0).size();
    gain.k.resize(static_cast<int>(rows.size()), static_cast<int>(cols));
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows.at(i).size() != cols) fail("k", "ragged rows");
      for (size_t j = 0; j < cols; ++j)
        gain.k(static_cast<int>(i), static_cast<int>(j)) = rows.at(i).at(j).get<double>();
    }
    gain.residual = doc.at("riccati_residual").get<double>();
    if (omega_n) *omega_n = doc.at("natural_frequency_radps").get<double>();
  } catch (const json::exception& err) {
    throw ValidationError("'" + file.string() + "' is not a gain artifact: " + err.what());
  }
  return gain;
}

void write_trajectory_csv(const std::filesystem::path& file, const SimResult& result,
                          const VecX& theta_eq) {
  const int m = static_cast<int>(theta_eq.size());
  std::string out;
  out.reserve(result.samples.size() * (16 + 2 * static_cast<size_t>(m)) * 18);
  out += "t_s,phi1_deg,phi2_deg,phi3_deg,wx_degps,wy_degps,wz_degps";
  for (int k = 1; k <= m; ++k) out += ",dtheta" + std::to_string(k) + "_deg";
  for (int k = 1; k <= m; ++k) out += ",u" + std::to_string(k) + "_radps2";
  out += ",Fx_N,Fy_N,Fz_N,Tx_Nm,Ty_Nm,Tz_Nm,hx_Nms,hy_Nms,hz_Nms\n";

  auto push = [&](double v) {
    out += ',';
    format_value(out, v);
  };
  for (const TrajectoryPoint& pt : result.samples) {
    format_value(out, pt.t);
    for (int i = 0; i < 3; ++i) push(pt.phi[i] / kDeg);
    for (int i = 0; i < 3; ++i) push(pt.omega[i] / kDeg);
    for (int k = 0; k < m; ++k) push((pt.theta[k] - theta_eq[k]) / kDeg);
    for (int k = 0; k < m; ++k) push(pt.u[k]);
    for (int i = 0; i < 3; ++i) push(pt.force_inertial[i]);
    for (int i = 0; i < 3; ++i) push(pt.torque_body[i]);
    for (int i = 0; i < 3; ++i) push(pt.momentum_inertial[i]);
    out += '\n';
  }
  write_text(file, out);
}

void write_metrics_json(const std::filesystem::path& file, const SimMetrics& metrics,
                        const SimResult& result) {
  ordered_json doc;
  doc["peak_attitude_error_deg"] = metrics.peak_attitude_error / kDeg;
  doc["final_attitude_error_deg"] = metrics.final_attitude_error / kDeg;
  doc["final_rate_degps"] = metrics.final_rate / kDeg;
  doc["final_joint_error_deg"] = metrics.final_joint_error / kDeg;
  doc["settling_time_s"] = metrics.settling_time;
  doc["dominant_frequency_radps"] = metrics.dominant_frequency;
  doc["max_joint_accel_radps2"] = metrics.max_joint_accel;
  doc["final_force_error_N"] = metrics.final_force_error;
  doc["final_momentum_Nms"] = metrics.final_momentum;
  doc["max_momentum_drift_Nms"] = metrics.max_momentum_drift;
  doc["samples"] = result.samples.size();
  doc["steps_accepted"] = result.stats.accepted;
  doc["steps_rejected"] = result.stats.rejected;
  doc["derivative_evaluations"] = result.stats.evaluations;
  doc["saturated_samples"] = result.saturated_samples;
  doc["clamped_joint_evals"] = result.clamped_joint_evals;
  doc["dark_front_evals"] = result.dark_front_evals;
  write_text(file, doc.dump(2) + "\n");
}

}  // namespace foldsail
