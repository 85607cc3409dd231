#include "foldsail/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "foldsail/dynamics.hpp"

namespace foldsail {
namespace {

constexpr double kPhi2Box = 1.4835298641951802;  // 85 deg, stay clear of the chart guard
constexpr double kPhiBox = 2.0 * std::numbers::pi;

struct ProblemScales {
  double force = 1.0;
  double torque = 1.0;
  double area_sum = 0.0;
  double length = 1.0;
};

ProblemScales make_scales(const MultibodyModel& model, double pressure) {
  ProblemScales sc;
  for (const auto& f : model.surfaces)
    if (f.is_front) sc.area_sum += f.area;
  if (sc.area_sum <= 0.0) sc.area_sum = 1.0;
  const Kinematics kin = forward_kinematics(model, VecX::Zero(model.joint_count()));
  for (const Vec3& r : kin.body_com) sc.length = std::max(sc.length, r.norm());
  sc.force = pressure * sc.area_sum;
  sc.torque = pressure * sc.area_sum * sc.length;
  return sc;
}

/// Split optimizer vector into attitude / joint parts.
struct XView {
  Vec3 phi;
  VecX theta;
};

XView split(const VecX& x) {
  XView v;
  v.phi = x.head<3>();
  v.theta = x.tail(x.size() - 3);
  return v;
}

class EquilibriumObjective {
 public:
  EquilibriumObjective(const MultibodyModel& model, const EquilibriumProblem& prob,
                       double pressure, const ProblemScales& scales)
      : model_(model), prob_(prob), pressure_(pressure), scales_(scales) {}

  /// Scaled equality residuals: [force mismatch (inertial); torque mismatch].
  VecX equality(const VecX& x) const {
    const XView v = split(x);
    const Kinematics kin = forward_kinematics(model_, v.theta);
    const BodyWrench w = total_wrench(model_, kin, v.phi, pressure_);
    const Vec3 f_inertial = dcm_from_euler(v.phi).transpose() * w.force;
    VecX ce(6);
    ce.head<3>() = (prob_.force_target_inertial - f_inertial) / scales_.force;
    ce.tail<3>() = (prob_.torque_target - w.torque) / scales_.torque;
    return ce;
  }

  /// Analytic Jacobian of equality(), summed over the currently sunlit faces.
  MatX equality_jacobian(const VecX& x) const {
    const XView v = split(x);
    const int m = model_.joint_count();
    const Kinematics kin = forward_kinematics(model_, v.theta);
    const BodyWrench w = total_wrench(model_, kin, v.phi, pressure_);
    const WrenchJacobian jac =
        wrench_jacobian(model_, kin, v.phi, pressure_, SurfaceSet::sunlit_faces);
    const Mat3 ct = dcm_from_euler(v.phi).transpose();
    const Mat3 wmap = body_rate_matrix(v.phi);

    MatX J(6, 3 + m);
    for (int j = 0; j < 3; ++j) {
      // moving phi_j spins the body frame about wmap.col(j): the inertial
      // force picks up both the frame motion and the body-frame derivative
      J.col(j).head<3>() =
          -(ct * (skew(wmap.col(j)) * w.force + jac.force_attitude.col(j))) / scales_.force;
      J.col(j).tail<3>() = -jac.torque_attitude.col(j) / scales_.torque;
    }
    J.rightCols(m).topRows(3) = -(ct * jac.force_joint) / scales_.force;
    J.rightCols(m).bottomRows(3) = -jac.torque_joint / scales_.torque;
    return J;
  }

  SpectrumInfo spectrum(const VecX& x) const {
    const XView v = split(x);
    const Kinematics kin = forward_kinematics(model_, v.theta);
    return spectrum_objective(stability_matrix(model_, kin, v.phi, pressure_));
  }

  double objective(const VecX& x) const { return spectrum(x).objective; }
  double inequality(const VecX& x) const { return spectrum(x).constraint; }

 private:
  const MultibodyModel& model_;
  const EquilibriumProblem& prob_;
  double pressure_;
  const ProblemScales& scales_;
};

VecX clamp_to_box(VecX x, const VecX& lo, const VecX& hi) {
  for (int i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  return x;
}

/// Augmented-Lagrangian merit: objective + multiplier/penalty terms.
struct MeritParams {
  VecX lambda;       // equality multipliers (6)
  double eta = 0.0;  // inequality multiplier
  double mu = 10.0;  // penalty weight
  bool use_multipliers = true;
};

double merit(const EquilibriumObjective& obj, const VecX& x, const MeritParams& p) {
  const VecX ce = obj.equality(x);
  const SpectrumInfo sp = obj.spectrum(x);
  double val = sp.objective + 0.5 * p.mu * ce.squaredNorm();
  if (p.use_multipliers) val += p.lambda.dot(ce);
  const double shift = p.use_multipliers ? p.eta / p.mu : 0.0;
  const double shifted = std::max(0.0, shift + sp.constraint);
  val += 0.5 * p.mu * (shifted * shifted - shift * shift);
  return val;
}

VecX merit_gradient(const EquilibriumObjective& obj, const VecX& x, const MeritParams& p,
                    double fd_step) {
  const int n = static_cast<int>(x.size());
  // equality part analytically, objective and inequality by central differences
  const VecX ce = obj.equality(x);
  const MatX J = obj.equality_jacobian(x);
  VecX lam_eff = p.mu * ce;
  if (p.use_multipliers) lam_eff += p.lambda;
  VecX g = J.transpose() * lam_eff;

  const double c0 = obj.inequality(x);
  const double shifted = std::max(0.0, (p.use_multipliers ? p.eta / p.mu : 0.0) + c0);
  for (int i = 0; i < n; ++i) {
    VecX up = x, dn = x;
    up[i] += fd_step;
    dn[i] -= fd_step;
    const SpectrumInfo su = obj.spectrum(up);
    const SpectrumInfo sd = obj.spectrum(dn);
    g[i] += (su.objective - sd.objective) / (2.0 * fd_step);
    if (shifted > 0.0)
      g[i] += p.mu * shifted * (su.constraint - sd.constraint) / (2.0 * fd_step);
  }
  return g;
}

/// Projected BFGS with Armijo backtracking on the augmented Lagrangian.
VecX minimize_merit(const EquilibriumObjective& obj, VecX x, const MeritParams& p,
                    const VecX& lo, const VecX& hi, int max_iter, double fd_step,
                    int* iterations) {
  const int n = static_cast<int>(x.size());
  MatX h_inv = MatX::Identity(n, n);
  double fx = merit(obj, x, p);
  VecX g = merit_gradient(obj, x, p, fd_step);

  for (int it = 0; it < max_iter; ++it) {
    if (iterations) ++*iterations;
    const VecX proj_step = clamp_to_box(x - g, lo, hi) - x;
    if (proj_step.lpNorm<Eigen::Infinity>() < 1e-12) break;

    VecX d = -h_inv * g;
    if (d.dot(g) > -1e-12 * d.norm() * g.norm()) {
      h_inv = MatX::Identity(n, n);
      d = -g;
    }

    double t = 1.0;
    VecX xn;
    double fn = fx;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      xn = clamp_to_box(x + t * d, lo, hi);
      fn = merit(obj, xn, p);
      if (fn <= fx + 1e-4 * g.dot(xn - x)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted || (x - xn).lpNorm<Eigen::Infinity>() < 1e-14) break;

    const VecX gn = merit_gradient(obj, xn, p, fd_step);
    const VecX s = xn - x;
    const VecX y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      const VecX hy = h_inv * y;
      h_inv += ((sy + y.dot(hy)) / (sy * sy)) * (s * s.transpose()) -
               (hy * s.transpose() + s * hy.transpose()) / sy;
    }
    x = xn;
    fx = fn;
    g = gn;
  }
  return x;
}

/// Drives the scaled equality residuals to machine level with min-norm
/// Gauss-Newton steps, staying inside the box.
VecX polish_feasibility(const EquilibriumObjective& obj, VecX x, const VecX& lo,
                        const VecX& hi, int max_iter = 60) {
  double r = obj.equality(x).norm();
  for (int it = 0; it < max_iter && r > 1e-14; ++it) {
    const VecX ce = obj.equality(x);
    const MatX J = obj.equality_jacobian(x);
    const VecX dx = J.completeOrthogonalDecomposition().solve(-ce);
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 25; ++ls) {
      const VecX xn = clamp_to_box(x + t * dx, lo, hi);
      const double rn = obj.equality(xn).norm();
      if (rn < r) {
        x = xn;
        r = rn;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
  }
  return x;
}

}  // namespace

Mat3 stability_matrix(const MultibodyModel& model, const Kinematics& kin, const Vec3& phi,
                      double pressure) {
  const Mat3 dtorque = torque_attitude_jacobian(model, kin, phi, pressure);
  return euler_rate_matrix(phi) * kin.system_inertia.ldlt().solve(dtorque);
}

SpectrumInfo spectrum_objective(const Mat3& a_phi) {
  const Eigen::EigenSolver<Mat3> es(a_phi);
  SpectrumInfo info;
  double max_im = 0.0;
  double max_re = 0.0;
  for (int i = 0; i < 3; ++i) {
    const std::complex<double> lam = es.eigenvalues()[i];
    const std::complex<double> root = std::sqrt(lam);
    info.eigenvalues[i] = lam;
    max_im = std::max(max_im, std::abs(root.imag()));
    max_re = std::max(max_re, root.real());
  }
  info.objective = -max_im;
  info.constraint = max_re;
  return info;
}

std::pair<Vec3, VecX> initial_guess(const MultibodyModel& model,
                                    const Vec3& force_target_inertial, double umbrella_angle,
                                    double roll) {
  Vec3 phi0(0.0, 0.0, roll);
  if (force_target_inertial.norm() > 0.0) {
    const Vec3 u = -force_target_inertial.normalized();
    phi0[0] = std::atan2(u.x(), u.z());
    phi0[1] = -std::asin(std::clamp(u.y(), -1.0, 1.0));
  }
  if (std::abs(phi0[1]) >= kGimbalGuardRad)
    throw GimbalLockError("initial attitude alignment sits in the chart singularity (phi2 = " +
                          std::to_string(phi0[1] * 180.0 / std::numbers::pi) + " deg)");

  const int m = model.joint_count();
  const Vec3 s = sun_vector_body(phi0);
  const Kinematics kin = forward_kinematics(model, VecX::Zero(m));
  VecX theta0(m);
  for (int k = 0; k < m; ++k) {
    const Vec3 swing = kin.joint_axis[k].cross(kin.group_com[k] - kin.joint_pos[k]);
    const double along_sun = swing.dot(s);
    double fold = (along_sun > 0.0) ? -umbrella_angle : (along_sun < 0.0 ? umbrella_angle : 0.0);
    theta0[k] = std::clamp(fold, model.joints[k].lower_limit, model.joints[k].upper_limit);
  }
  return {phi0, theta0};
}

EquilibriumSolution solve_equilibrium(const MultibodyModel& model, const Environment& env,
                                      const EquilibriumProblem& problem) {
  const double pressure = radiation_pressure(env);
  const ProblemScales scales = make_scales(model, pressure);
  const double reachable = 2.0 * pressure * scales.area_sum;
  if (problem.force_target_inertial.norm() > reachable)
    throw SolveError("target force magnitude " + std::to_string(problem.force_target_inertial.norm()) +
                     " N exceeds the reachable bound " + std::to_string(reachable) + " N");

  const int m = model.joint_count();
  const EquilibriumObjective obj(model, problem, pressure, scales);

  VecX lo(3 + m), hi(3 + m);
  lo << -kPhiBox, -kPhi2Box, -kPhiBox, VecX::Zero(m);
  hi << kPhiBox, kPhi2Box, kPhiBox, VecX::Zero(m);
  for (int k = 0; k < m; ++k) {
    lo[3 + k] = model.joints[k].lower_limit;
    hi[3 + k] = model.joints[k].upper_limit;
  }

  // roll seeds: 0, +step, -step, +2 step, ... spanning the full turn
  std::vector<double> rolls{0.0};
  const int half_turns = std::max(1, static_cast<int>(std::floor(std::numbers::pi / problem.roll_step)));
  for (int i = 1; i <= half_turns; ++i) {
    rolls.push_back(i * problem.roll_step);
    rolls.push_back(-i * problem.roll_step);
  }

  EquilibriumSolution best;
  best.theta = VecX::Zero(m);
  double best_residual = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const VecX& x, int iterations, int attempt) {
    EquilibriumSolution sol;
    const XView v = split(x);
    sol.phi = v.phi;
    sol.theta = v.theta;
    const Kinematics kin = forward_kinematics(model, v.theta);
    const BodyWrench w = total_wrench(model, kin, v.phi, pressure);
    sol.force_inertial = dcm_from_euler(v.phi).transpose() * w.force;
    sol.torque_body = w.torque;
    sol.force_error = (sol.force_inertial - problem.force_target_inertial).norm();
    sol.torque_error = (w.torque - problem.torque_target).norm();
    sol.spectrum = spectrum_objective(stability_matrix(model, kin, v.phi, pressure));
    sol.natural_frequency = -sol.spectrum.objective;
    sol.iterations = iterations;
    sol.roll_attempts = attempt + 1;
    sol.converged = sol.force_error <= problem.tol_force &&
                    sol.torque_error <= problem.tol_torque &&
                    sol.spectrum.constraint <= problem.tol_spectrum;
    return sol;
  };

  for (size_t attempt = 0; attempt < rolls.size(); ++attempt) {
    for (const bool penalty_only : {problem.penalty_fallback, true}) {
      auto [phi0, theta0] = initial_guess(model, problem.force_target_inertial,
                                          problem.umbrella_angle, rolls[attempt]);
      VecX x(3 + m);
      x << phi0, theta0;
      x = clamp_to_box(x, lo, hi);

      MeritParams params;
      params.lambda = VecX::Zero(6);
      params.use_multipliers = !penalty_only;
      params.mu = 10.0;
      int iterations = 0;
      double prev_viol = std::numeric_limits<double>::infinity();

      for (int outer = 0; outer < problem.max_outer_iterations; ++outer) {
        x = minimize_merit(obj, x, params, lo, hi, problem.max_inner_iterations,
                           problem.fd_step, &iterations);
        const VecX ce = obj.equality(x);
        const double cineq = obj.inequality(x);
        const double viol = std::max(ce.lpNorm<Eigen::Infinity>(), std::max(0.0, cineq));
        if (viol < 1e-10) break;
        if (params.use_multipliers) {
          params.lambda += params.mu * ce;
          params.eta = std::max(0.0, params.eta + params.mu * cineq);
        }
        if (viol > 0.25 * prev_viol) params.mu = std::min(params.mu * 5.0, 1e9);
        prev_viol = viol;
      }

      x = polish_feasibility(obj, x, lo, hi);
      EquilibriumSolution sol = evaluate(x, iterations, static_cast<int>(attempt));
      const double residual = std::max(sol.force_error / scales.force,
                                       sol.torque_error / scales.torque) +
                              std::max(0.0, sol.spectrum.constraint);
      if (residual < best_residual) {
        best_residual = residual;
        best = sol;
      }
      if (sol.converged) {
        best.message = penalty_only ? "converged (penalty continuation)" : "converged";
        return best;
      }
      if (problem.penalty_fallback) break;  // only one mode requested
    }
  }
  best.message = "no roll seed reached the requested tolerances";
  return best;
}

}  // namespace foldsail
