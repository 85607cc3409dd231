#pragma once

#include "foldsail/model.hpp"
#include "foldsail/types.hpp"

namespace foldsail {

/// Generalized mass matrix blocks for the (attitude, joint) speeds, with the
/// translational row already eliminated (it decouples when velocities are
/// referred to the system CoM). `rotational` is 3x3, `rot_joint` 3xm,
/// `joint` mxm; the assembled [rotational, rot_joint; rot_joint^T, joint]
/// matrix is symmetric positive definite.
struct MassMatrixBlocks {
  Mat3 rotational = Mat3::Zero();
  MatX rot_joint;
  MatX joint;
};

/// Closed-form assembly from per-joint outer-group aggregates.
MassMatrixBlocks assemble_mass_blocks(const MultibodyModel& model, const Kinematics& kin);

/// Velocity-dependent torque on the attitude row: the terms of
/// d/dt(M_ww*w + M_wt*thdot) + w x (M_ww*w + M_wt*thdot) that do not involve
/// accelerations. Configuration derivatives of the blocks are taken by
/// central differences with the given step.
Vec3 bias_torque(const MultibodyModel& model, const VecX& theta, const Vec3& omega,
                 const VecX& theta_dot, double fd_step = 1e-6);

/// Attitude acceleration given the body-frame external torque about the
/// system CoM and the commanded joint accelerations.
Vec3 forward_dynamics(const MultibodyModel& model, const VecX& theta, const Vec3& omega,
                      const VecX& theta_dot, const Vec3& torque, const VecX& theta_ddot,
                      double fd_step = 1e-6);

/// Angular momentum about the system CoM, root body frame.
Vec3 angular_momentum_body(const MassMatrixBlocks& blocks, const Vec3& omega,
                           const VecX& theta_dot);

/// Same vector expressed in the inertial frame (conserved under zero
/// external torque).
Vec3 angular_momentum_inertial(const Vec3& phi, const Vec3& h_body);

}  // namespace foldsail
