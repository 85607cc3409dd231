#pragma once

#include <array>
#include <complex>
#include <string>
#include <utility>

#include "foldsail/jacobians.hpp"
#include "foldsail/model.hpp"
#include "foldsail/srp.hpp"
#include "foldsail/types.hpp"

namespace foldsail {

/// Attitude restoring matrix: maps a small Euler-angle deviation to the
/// Euler-angle acceleration it produces through the front-face photon
/// torque, A_phi = C_phi * I_c^{-1} * dT/dphi.
Mat3 stability_matrix(const MultibodyModel& model, const Kinematics& kin,
                      const Vec3& phi, double pressure);

/// Spectral summary of the restoring matrix. `objective` is the negated
/// largest |Im sqrt(eig)| (more negative = faster restoring oscillation);
/// `constraint` is the largest Re sqrt(eig) and must be <= 0 for a
/// non-divergent equilibrium (all eigenvalues real and non-positive).
struct SpectrumInfo {
  std::array<std::complex<double>, 3> eigenvalues{};
  double objective = 0.0;
  double constraint = 0.0;
};

SpectrumInfo spectrum_objective(const Mat3& a_phi);

/// Target wrench and solver knobs for the equilibrium search.
struct EquilibriumProblem {
  Vec3 force_target_inertial = Vec3::Zero();  ///< N
  Vec3 torque_target = Vec3::Zero();          ///< N*m, root body frame

  double tol_force = 1e-9;       ///< N, equality tolerance
  double tol_torque = 1e-10;     ///< N*m
  double tol_spectrum = 1e-8;    ///< 1/s, bound on the constraint value

  double umbrella_angle = 0.5235987755982988;  ///< rad, initial fold (30 deg)
  double roll_step = 0.2617993877991494;       ///< rad, retry roll spacing (15 deg)
  double fd_step = 1e-7;                       ///< objective/constraint gradient step

  int max_outer_iterations = 40;   ///< multiplier / penalty updates
  int max_inner_iterations = 200;  ///< quasi-Newton steps per outer round
  bool penalty_fallback = false;   ///< skip multipliers, pure penalty continuation
};

/// Attitude alignment plus umbrella fold. The attitude points the root
/// front normal along -force_target (inertial) with the requested roll; each
/// joint folds by +-umbrella_angle, signed so its outer-group CoM moves away
/// from the sun line. Throws GimbalLockError if the alignment itself sits in
/// the chart singularity.
std::pair<Vec3, VecX> initial_guess(const MultibodyModel& model,
                                    const Vec3& force_target_inertial,
                                    double umbrella_angle, double roll = 0.0);

struct EquilibriumSolution {
  bool converged = false;
  Vec3 phi = Vec3::Zero();
  VecX theta;
  Vec3 force_inertial = Vec3::Zero();   ///< achieved, full-face model
  Vec3 torque_body = Vec3::Zero();      ///< achieved, about system CoM
  double force_error = 0.0;             ///< N
  double torque_error = 0.0;            ///< N*m
  SpectrumInfo spectrum;
  double natural_frequency = 0.0;       ///< rad/s, |objective|
  int iterations = 0;
  int roll_attempts = 0;
  std::string message;
};

/// Finds (phi, theta) realizing the target wrench with a non-divergent
/// attitude spectrum, maximizing the restoring oscillation rate. Augmented
/// Lagrangian with a projected quasi-Newton inner loop and a Gauss-Newton
/// feasibility polish; retries over roll seeds. Throws SolveError if the
/// target is beyond the reachable force magnitude; returns converged=false
/// when all seeds stall.
EquilibriumSolution solve_equilibrium(const MultibodyModel& model, const Environment& env,
                                      const EquilibriumProblem& problem);

}  // namespace foldsail
