#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "foldsail/control.hpp"
#include "foldsail/dynamics.hpp"
#include "foldsail/model.hpp"
#include "foldsail/srp.hpp"
#include "foldsail/types.hpp"

namespace foldsail {

/// Adaptive Dormand-Prince 5(4) controls. Zero max_step/initial_step means
/// "choose automatically" (span/100 and a conservative heuristic).
struct Rk45Options {
  double abs_tol = 1e-5;
  double rel_tol = 1e-6;
  double max_step = 0.0;
  double initial_step = 0.0;
  long max_steps = 2000000;
};

struct Rk45Stats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
};

using OdeFn = std::function<VecX(double, const VecX&)>;
using SampleFn = std::function<void(double, const VecX&)>;

/// Integrates y' = f(t, y) from t0 to t1, invoking on_sample at each fixed
/// sample time (fourth-order dense output inside accepted steps). Returns
/// the state at t1. Throws SolveError if the step count budget is exhausted
/// or the step size underflows.
VecX integrate_rk45(const OdeFn& f, double t0, double t1, const VecX& y0,
                    const Rk45Options& options,
                    const std::vector<double>& sample_times = {},
                    const SampleFn& on_sample = nullptr, Rk45Stats* stats = nullptr);

enum class ControlMode { open_loop, lqr };

/// Closed- or open-loop run configuration. Initial deviations are relative
/// to the equilibrium the run is built around; angles in radians.
struct SimConfig {
  double duration = 0.0;
  double abs_tol = 1e-5;
  double rel_tol = 1e-6;
  double max_step = 0.0;          ///< 0: duration/100
  double sample_interval = 0.0;   ///< 0: duration/1000
  WrenchModel wrench_model = WrenchModel::full_faces;
  ControlMode control = ControlMode::open_loop;
  double u_max = 1e-5;            ///< rad/s^2 saturation per joint

  Vec3 initial_attitude_offset = Vec3::Zero();
  Vec3 initial_rate = Vec3::Zero();
  VecX initial_joint_offset;      ///< empty: zeros
  VecX initial_joint_rate;        ///< empty: zeros

  /// Optional joint-acceleration override u(t, y) used instead of the
  /// built-in modes (e.g. prescribed motion in tests). Not saturated.
  std::function<VecX(double, const VecX&)> custom_control;
};

/// Integrator state layout: y = [phi(3); omega(3); theta(m); thetadot(m)].
struct SimState {
  Vec3 phi = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  VecX theta;
  VecX theta_dot;

  static SimState unpack(const VecX& y, int joint_count);
  VecX pack() const;
};

/// Time derivative of the packed state: Euler kinematics, attitude dynamics
/// under the photon wrench, and the commanded joint accelerations.
/// Joint angles outside their limits are clamped for model evaluation and
/// counted through `clamped` when non-null.
VecX sim_derivative(const MultibodyModel& model, const VecX& y, const VecX& u,
                    double pressure, WrenchModel faces, int* clamped = nullptr,
                    int* dark_fronts = nullptr);

struct TrajectoryPoint {
  double t = 0.0;
  Vec3 phi = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
  VecX theta;
  VecX theta_dot;
  VecX u;
  Vec3 force_inertial = Vec3::Zero();
  Vec3 torque_body = Vec3::Zero();
  Vec3 momentum_inertial = Vec3::Zero();
};

struct SimResult {
  std::vector<TrajectoryPoint> samples;
  SimState final_state;
  Rk45Stats stats;
  int saturated_samples = 0;       ///< samples with any joint at the u limit
  int clamped_joint_evals = 0;     ///< derivative evals that hit a joint stop
  int dark_front_evals = 0;        ///< front-only model evals with a dark front
};

/// Runs the spacecraft from the perturbed equilibrium. `gain` is required
/// for ControlMode::lqr and ignored otherwise.
SimResult simulate(const MultibodyModel& model, const Environment& env,
                   const Vec3& phi_eq, const VecX& theta_eq, const LqrGain* gain,
                   const SimConfig& config);

struct SimMetrics {
  double peak_attitude_error = 0.0;      ///< rad, max ||phi - phi_eq||
  double final_attitude_error = 0.0;     ///< rad
  double final_rate = 0.0;               ///< rad/s
  double final_joint_error = 0.0;        ///< rad
  double settling_time = -1.0;           ///< s; -1 if thresholds never hold
  double dominant_frequency = 0.0;       ///< rad/s, attitude periodogram peak
  double max_joint_accel = 0.0;          ///< rad/s^2
  double final_force_error = 0.0;        ///< N vs target
  double final_momentum = 0.0;           ///< kg m^2/s, |h| inertial
  double max_momentum_drift = 0.0;       ///< kg m^2/s, max |h - h(0)| inertial
};

SimMetrics compute_metrics(const SimResult& result, const Vec3& phi_eq,
                           const VecX& theta_eq, const Vec3& force_target_inertial,
                           double settle_attitude = 8.726646259971648e-4,
                           double settle_rate = 1.7453292519943295e-7);

}  // namespace foldsail
