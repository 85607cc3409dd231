#include "foldsail/sim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace foldsail {
namespace {

// Dormand-Prince 5(4) tableau
constexpr double kC[7] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5.0},
    {3.0 / 40.0, 9.0 / 40.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0}};
// difference between the 5th and embedded 4th order weights
constexpr double kE[7] = {71.0 / 57600.0, 0.0,           -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0};
// dense-output weights of the fourth-order continuous extension
constexpr double kD[7] = {-12715105075.0 / 11282082432.0,
                          0.0,
                          87487479700.0 / 32700410799.0,
                          -10690763975.0 / 1880347072.0,
                          701980252875.0 / 199316789632.0,
                          -1453857185.0 / 822651844.0,
                          69997945.0 / 29380423.0};

double error_norm(const VecX& err, const VecX& y0, const VecX& y1, double atol, double rtol) {
  double acc = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double e = err[i] / scale;
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

double rms_scaled(const VecX& v, const VecX& scale) {
  double acc = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    const double e = v[i] / scale[i];
    acc += e * e;
  }
  return std::sqrt(acc / static_cast<double>(v.size()));
}

double pick_initial_step(const OdeFn& f, double t0, const VecX& y0, const VecX& f0,
                         double atol, double rtol, double max_step, Rk45Stats* stats) {
  VecX scale(y0.size());
  for (int i = 0; i < y0.size(); ++i) scale[i] = atol + rtol * std::abs(y0[i]);
  const double d0 = rms_scaled(y0, scale);
  const double d1 = rms_scaled(f0, scale);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, max_step);
  const VecX f1 = f(t0 + h0, y0 + h0 * f0);
  if (stats) ++stats->evaluations;
  const double d2 = rms_scaled(f1 - f0, scale) / h0;
  double h1;
  if (std::max(d1, d2) <= 1e-15)
    h1 = std::max(1e-6, h0 * 1e-3);
  else
    h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
  return std::min({100.0 * h0, h1, max_step});
}

}  // namespace

VecX integrate_rk45(const OdeFn& f, double t0, double t1, const VecX& y0,
                    const Rk45Options& options, const std::vector<double>& sample_times,
                    const SampleFn& on_sample, Rk45Stats* stats) {
  if (!(t1 > t0)) throw ValidationError("integration span must be positive");
  if (!(options.abs_tol > 0.0) || !(options.rel_tol > 0.0))
    throw ValidationError("integration tolerances must be positive");
  const double span = t1 - t0;
  const double max_step = options.max_step > 0.0 ? std::min(options.max_step, span)
                                                 : span / 100.0;

  Rk45Stats local;
  Rk45Stats* st = stats ? stats : &local;
  *st = Rk45Stats{};

  size_t sample_idx = 0;
  while (on_sample && sample_idx < sample_times.size() &&
         sample_times[sample_idx] <= t0 + 1e-12 * std::max(1.0, std::abs(t0))) {
    on_sample(sample_times[sample_idx], y0);
    ++sample_idx;
  }

  VecX y = y0;
  double t = t0;
  VecX k[7];
  k[0] = f(t, y);
  ++st->evaluations;
  double h = options.initial_step > 0.0
                 ? std::min(options.initial_step, max_step)
                 : pick_initial_step(f, t0, y, k[0], options.abs_tol, options.rel_tol,
                                     max_step, st);

  while (t < t1) {
    if (st->accepted + st->rejected >= options.max_steps)
      throw SolveError("integrator exceeded its step budget (" +
                       std::to_string(options.max_steps) + " steps)");
    h = std::min(h, t1 - t);
    if (h <= 1e-14 * std::max(1.0, std::abs(t)))
      throw SolveError("integrator step size underflow at t = " + std::to_string(t));

    for (int s = 1; s < 7; ++s) {
      VecX ys = y;
      for (int j = 0; j < s; ++j)
        if (kA[s][j] != 0.0) ys += (h * kA[s][j]) * k[j];
      k[s] = f(t + kC[s] * h, ys);
      ++st->evaluations;
    }
    VecX y1 = y;
    for (int j = 0; j < 6; ++j)
      if (kA[6][j] != 0.0) y1 += (h * kA[6][j]) * k[j];
    // stage 7 is evaluated at (t + h, y1): first-same-as-last
    VecX err = VecX::Zero(y.size());
    for (int j = 0; j < 7; ++j)
      if (kE[j] != 0.0) err += (h * kE[j]) * k[j];

    const double en = error_norm(err, y, y1, options.abs_tol, options.rel_tol);
    if (en <= 1.0) {
      // snap onto the endpoint so rounding cannot leave a sub-ulp remainder
      const double t_new = (t1 - (t + h) <= 1e-12 * span) ? t1 : t + h;
      if (on_sample && sample_idx < sample_times.size() &&
          sample_times[sample_idx] <= t_new + 1e-9) {
        const VecX ydiff = y1 - y;
        const VecX bspl = h * k[0] - ydiff;
        const VecX above = ydiff - h * k[6] - bspl;
        VecX curve = VecX::Zero(y.size());
        for (int j = 0; j < 7; ++j)
          if (kD[j] != 0.0) curve += (h * kD[j]) * k[j];
        while (sample_idx < sample_times.size() &&
               sample_times[sample_idx] <= t_new + 1e-9) {
          const double theta = std::clamp((sample_times[sample_idx] - t) / h, 0.0, 1.0);
          const double theta1 = 1.0 - theta;
          on_sample(sample_times[sample_idx],
                    y + theta * (ydiff + theta1 * (bspl + theta * (above + theta1 * curve))));
          ++sample_idx;
        }
      }
      y = y1;
      t = t_new;
      k[0] = k[6];
      ++st->accepted;
      const double factor = en == 0.0 ? 10.0 : std::min(10.0, 0.9 * std::pow(en, -0.2));
      h = std::min(h * std::max(factor, 0.2), max_step);
    } else {
      ++st->rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
    }
  }
  return y;
}

SimState SimState::unpack(const VecX& y, int joint_count) {
  SimState st;
  st.phi = y.head<3>();
  st.omega = y.segment<3>(3);
  st.theta = y.segment(6, joint_count);
  st.theta_dot = y.tail(joint_count);
  return st;
}

VecX SimState::pack() const {
  VecX y(6 + 2 * theta.size());
  y << phi, omega, theta, theta_dot;
  return y;
}

VecX sim_derivative(const MultibodyModel& model, const VecX& y, const VecX& u,
                    double pressure, WrenchModel faces, int* clamped, int* dark_fronts) {
  const int m = model.joint_count();
  const SimState st = SimState::unpack(y, m);

  VecX theta_eval = st.theta;
  bool hit_stop = false;
  for (int k = 0; k < m; ++k) {
    const double cl = std::clamp(theta_eval[k], model.joints[k].lower_limit,
                                 model.joints[k].upper_limit);
    if (cl != theta_eval[k]) hit_stop = true;
    theta_eval[k] = cl;
  }
  if (hit_stop && clamped) ++*clamped;

  const Kinematics kin = forward_kinematics(model, theta_eval);
  int dark = 0;
  const BodyWrench w = total_wrench(model, kin, st.phi, pressure, faces, &dark);
  if (faces == WrenchModel::front_only && dark > 0 && dark_fronts) ++*dark_fronts;

  VecX dy(y.size());
  dy.head<3>() = euler_rate_matrix(st.phi) * st.omega;
  dy.segment<3>(3) =
      forward_dynamics(model, theta_eval, st.omega, st.theta_dot, w.torque, u);
  dy.segment(6, m) = st.theta_dot;
  dy.tail(m) = u;
  return dy;
}

SimResult simulate(const MultibodyModel& model, const Environment& env, const Vec3& phi_eq,
                   const VecX& theta_eq, const LqrGain* gain, const SimConfig& config) {
  const int m = model.joint_count();
  if (!(config.duration > 0.0)) throw ValidationError("simulation duration must be positive");
  if (theta_eq.size() != m)
    throw ValidationError("equilibrium joint vector length does not match the model");
  if (config.initial_joint_offset.size() != 0 && config.initial_joint_offset.size() != m)
    throw ValidationError("initial joint offset length does not match the model");
  if (config.initial_joint_rate.size() != 0 && config.initial_joint_rate.size() != m)
    throw ValidationError("initial joint rate length does not match the model");
  if (config.control == ControlMode::lqr && !config.custom_control) {
    if (gain == nullptr) throw ValidationError("closed-loop run requires a gain");
    if (gain->k.rows() != m || gain->k.cols() != 6 + 2 * m)
      throw ValidationError("gain shape does not match the model");
  }

  const double pressure = radiation_pressure(env);
  const double interval =
      config.sample_interval > 0.0 ? config.sample_interval : config.duration / 1000.0;

  std::vector<double> times;
  for (double ts = 0.0; ts < config.duration - 1e-9 * config.duration; ts += interval)
    times.push_back(ts);
  times.push_back(config.duration);

  SimState init;
  init.phi = phi_eq + config.initial_attitude_offset;
  init.omega = config.initial_rate;
  init.theta = theta_eq;
  if (config.initial_joint_offset.size() == m) init.theta += config.initial_joint_offset;
  init.theta_dot = config.initial_joint_rate.size() == m ? config.initial_joint_rate
                                                         : VecX::Zero(m);

  SimResult result;
  auto control = [&](double t, const VecX& y) -> VecX {
    if (config.custom_control) return config.custom_control(t, y);
    if (config.control == ControlMode::lqr) {
      const SimState st = SimState::unpack(y, m);
      VecX x(6 + 2 * m);
      x.head<3>() = st.phi - phi_eq;
      x.segment(3, m) = st.theta - theta_eq;
      x.segment<3>(3 + m) = euler_rate_matrix(st.phi) * st.omega;
      x.tail(m) = st.theta_dot;
      VecX u = -(gain->k * x);
      for (int i = 0; i < m; ++i) u[i] = std::clamp(u[i], -config.u_max, config.u_max);
      return u;
    }
    return VecX::Zero(m);
  };

  const OdeFn f = [&](double t, const VecX& y) {
    return sim_derivative(model, y, control(t, y), pressure, config.wrench_model,
                          &result.clamped_joint_evals, &result.dark_front_evals);
  };

  result.samples.reserve(times.size());
  const SampleFn record = [&](double t, const VecX& y) {
    const SimState st = SimState::unpack(y, m);
    TrajectoryPoint pt;
    pt.t = t;
    pt.phi = st.phi;
    pt.omega = st.omega;
    pt.theta = st.theta;
    pt.theta_dot = st.theta_dot;
    pt.u = control(t, y);
    const Kinematics kin = forward_kinematics(model, st.theta);
    const BodyWrench w = total_wrench(model, kin, st.phi, pressure, config.wrench_model);
    pt.force_inertial = wrench_to_inertial(w, st.phi).force;
    pt.torque_body = w.torque;
    const MassMatrixBlocks blocks = assemble_mass_blocks(model, kin);
    pt.momentum_inertial = angular_momentum_inertial(
        st.phi, angular_momentum_body(blocks, st.omega, st.theta_dot));
    if (config.control == ControlMode::lqr && !config.custom_control &&
        pt.u.size() > 0 && pt.u.lpNorm<Eigen::Infinity>() >= config.u_max * (1.0 - 1e-12))
      ++result.saturated_samples;
    result.samples.push_back(std::move(pt));
  };

  Rk45Options opts;
  opts.abs_tol = config.abs_tol;
  opts.rel_tol = config.rel_tol;
  opts.max_step = config.max_step > 0.0 ? config.max_step : config.duration / 100.0;

  const VecX y_final =
      integrate_rk45(f, 0.0, config.duration, init.pack(), opts, times, record, &result.stats);
  result.final_state = SimState::unpack(y_final, m);
  return result;
}

SimMetrics compute_metrics(const SimResult& result, const Vec3& phi_eq, const VecX& theta_eq,
                           const Vec3& force_target_inertial, double settle_attitude,
                           double settle_rate) {
  SimMetrics metrics;
  if (result.samples.empty()) return metrics;

  const TrajectoryPoint& last = result.samples.back();
  metrics.final_attitude_error = (last.phi - phi_eq).norm();
  metrics.final_rate = last.omega.norm();
  metrics.final_joint_error = last.theta.size() == theta_eq.size() && theta_eq.size() > 0
                                  ? (last.theta - theta_eq).lpNorm<Eigen::Infinity>()
                                  : 0.0;
  metrics.final_force_error = (last.force_inertial - force_target_inertial).norm();
  metrics.final_momentum = last.momentum_inertial.norm();

  const Vec3 h0 = result.samples.front().momentum_inertial;
  for (const TrajectoryPoint& pt : result.samples) {
    metrics.peak_attitude_error =
        std::max(metrics.peak_attitude_error, (pt.phi - phi_eq).norm());
    metrics.max_momentum_drift =
        std::max(metrics.max_momentum_drift, (pt.momentum_inertial - h0).norm());
    if (pt.u.size() > 0)
      metrics.max_joint_accel =
          std::max(metrics.max_joint_accel, pt.u.lpNorm<Eigen::Infinity>());
  }

  // settling: first sample after which both thresholds hold to the end
  metrics.settling_time = result.samples.front().t;
  for (auto it = result.samples.rbegin(); it != result.samples.rend(); ++it) {
    if ((it->phi - phi_eq).norm() > settle_attitude || it->omega.norm() > settle_rate) {
      const auto next = std::prev(it.base());
      metrics.settling_time =
          (next + 1 == result.samples.end()) ? -1.0 : std::next(next)->t;
      break;
    }
  }

  // Hann-windowed periodogram of the attitude deviation, peak refined by
  // parabolic interpolation in log power
  const size_t n = result.samples.size();
  if (n >= 8) {
    const double dt = (result.samples.back().t - result.samples.front().t) /
                      static_cast<double>(n - 1);
    Eigen::Matrix3Xd dev(3, n);
    for (size_t i = 0; i < n; ++i) dev.col(i) = result.samples[i].phi - phi_eq;
    const Vec3 mean = dev.rowwise().mean();
    std::vector<double> power(n / 2 + 1, 0.0);
    for (size_t kbin = 1; kbin <= n / 2; ++kbin) {
      std::complex<double> acc[3] = {};
      for (size_t i = 0; i < n; ++i) {
        const double window =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(n - 1));
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(kbin) *
                             static_cast<double>(i) / static_cast<double>(n);
        const std::complex<double> tw(std::cos(angle), std::sin(angle));
        for (int c = 0; c < 3; ++c) acc[c] += window * (dev(c, i) - mean[c]) * tw;
      }
      for (int c = 0; c < 3; ++c) power[kbin] += std::norm(acc[c]);
    }
    size_t peak = 1;
    for (size_t kbin = 2; kbin <= n / 2; ++kbin)
      if (power[kbin] > power[peak]) peak = kbin;
    double kref = static_cast<double>(peak);
    if (peak > 1 && peak < n / 2 && power[peak] > 0.0 && power[peak - 1] > 0.0 &&
        power[peak + 1] > 0.0) {
      const double lm = std::log(power[peak - 1]);
      const double l0 = std::log(power[peak]);
      const double lp = std::log(power[peak + 1]);
      const double denom = lm - 2.0 * l0 + lp;
      if (denom < -1e-12) kref += 0.5 * (lm - lp) / denom;
    }
    if (power[peak] > 0.0)
      metrics.dominant_frequency =
          2.0 * std::numbers::pi * kref / (static_cast<double>(n) * dt);
  }
  return metrics;
}

}  // namespace foldsail
