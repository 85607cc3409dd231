#include "foldsail/dynamics.hpp"

namespace foldsail {

MassMatrixBlocks assemble_mass_blocks(const MultibodyModel& model, const Kinematics& kin) {
  const int m = model.joint_count();
  MassMatrixBlocks blocks;
  blocks.rotational = kin.system_inertia;
  blocks.rot_joint = MatX::Zero(3, m);
  blocks.joint = MatX::Zero(m, m);

  for (int k = 0; k < m; ++k) {
    const Vec3 r_gc = kin.group_com[k] - kin.system_com;
    const Vec3 r_gh = kin.group_com[k] - kin.joint_pos[k];
    blocks.rot_joint.col(k) =
        (kin.group_inertia[k] - kin.group_mass[k] * skew(r_gc) * skew(r_gh)) * kin.joint_axis[k];
  }

  for (int i = 0; i < m; ++i) {
    const Vec3 swing_i = kin.joint_axis[i].cross(kin.group_com[i] - kin.joint_pos[i]);
    for (int j = i; j < m; ++j) {
      const Vec3 swing_j = kin.joint_axis[j].cross(kin.group_com[j] - kin.joint_pos[j]);
      // both groups drag the system CoM; the common recoil couples them
      double v = -(kin.group_mass[i] * kin.group_mass[j] / kin.total_mass) *
                 swing_i.dot(swing_j);
      if (model.in_outer_group(i, model.joints[j].child)) {
        // joint j swings inside joint i's group (includes i == j)
        const Mat3 b = kin.group_inertia[j] -
                       kin.group_mass[j] * skew(kin.group_com[j] - kin.joint_pos[i]) *
                           skew(kin.group_com[j] - kin.joint_pos[j]);
        v += kin.joint_axis[i].dot(b * kin.joint_axis[j]);
      }
      blocks.joint(i, j) = v;
      blocks.joint(j, i) = v;
    }
  }
  return blocks;
}

Vec3 bias_torque(const MultibodyModel& model, const VecX& theta, const Vec3& omega,
                 const VecX& theta_dot, double fd_step) {
  const int m = model.joint_count();
  const MassMatrixBlocks blocks = assemble_mass_blocks(model, forward_kinematics(model, theta));

  // configuration rate of the attitude-row blocks, d(M)/dtheta . theta_dot
  Mat3 mww_rate = Mat3::Zero();
  MatX mwt_rate = MatX::Zero(3, m);
  for (int k = 0; k < m; ++k) {
    if (theta_dot[k] == 0.0) continue;
    VecX up = theta, dn = theta;
    up[k] += fd_step;
    dn[k] -= fd_step;
    const MassMatrixBlocks bu = assemble_mass_blocks(model, forward_kinematics(model, up));
    const MassMatrixBlocks bd = assemble_mass_blocks(model, forward_kinematics(model, dn));
    const double scale = theta_dot[k] / (2.0 * fd_step);
    mww_rate += scale * (bu.rotational - bd.rotational);
    mwt_rate += scale * (bu.rot_joint - bd.rot_joint);
  }

  return omega.cross(blocks.rotational * omega) + mww_rate * omega +
         omega.cross(Vec3(blocks.rot_joint * theta_dot)) + mwt_rate * theta_dot;
}

Vec3 forward_dynamics(const MultibodyModel& model, const VecX& theta, const Vec3& omega,
                      const VecX& theta_dot, const Vec3& torque, const VecX& theta_ddot,
                      double fd_step) {
  const MassMatrixBlocks blocks = assemble_mass_blocks(model, forward_kinematics(model, theta));
  const Vec3 rhs =
      torque - Vec3(blocks.rot_joint * theta_ddot) - bias_torque(model, theta, omega, theta_dot, fd_step);
  return blocks.rotational.ldlt().solve(rhs);
}

Vec3 angular_momentum_body(const MassMatrixBlocks& blocks, const Vec3& omega,
                           const VecX& theta_dot) {
  return blocks.rotational * omega + Vec3(blocks.rot_joint * theta_dot);
}

Vec3 angular_momentum_inertial(const Vec3& phi, const Vec3& h_body) {
  return dcm_from_euler(phi).transpose() * h_body;
}

}  // namespace foldsail
