#include "foldsail/jacobians.hpp"

#include <cmath>

namespace foldsail {

Mat3 sun_vector_partials(const Vec3& phi) {
  const double c1 = std::cos(phi[0]), s1 = std::sin(phi[0]);
  const double c2 = std::cos(phi[1]), s2 = std::sin(phi[1]);
  const double c3 = std::cos(phi[2]), s3 = std::sin(phi[2]);
  Mat3 d;
  d.col(0) << -s1 * s2 * s3 - c1 * c3, -s1 * s2 * c3 + c1 * s3, -s1 * c2;
  d.col(1) << c1 * c2 * s3, c1 * c2 * c3, -c1 * s2;
  d.col(2) << c1 * s2 * c3 + s1 * s3, -c1 * s2 * s3 + s1 * c3, 0.0;
  return d;
}

Mat3 force_normal_partial(double pressure, double area, const OpticalCoefficients& optics,
                          const Vec3& n, const Vec3& s) {
  const double cosi = n.dot(s);
  return -pressure * area *
         ((optics.absorptive + optics.diffuse) * s * s.transpose() +
          (2.0 / 3.0 * optics.diffuse + 4.0 * cosi * optics.specular) * n * s.transpose() +
          cosi * (2.0 / 3.0 * optics.diffuse + 2.0 * cosi * optics.specular) * Mat3::Identity());
}

WrenchJacobian wrench_jacobian(const MultibodyModel& model, const Kinematics& kin,
                               const Vec3& phi, double pressure, SurfaceSet set) {
  const int m = model.joint_count();
  const Vec3 s = sun_vector_body(phi);
  const Mat3 ds = sun_vector_partials(phi);

  WrenchJacobian jac;
  jac.force_joint = MatX::Zero(3, m);
  jac.torque_joint = MatX::Zero(3, m);

  // CoM shift per joint: the whole system CoM moves when a group swings
  std::vector<Vec3> dcom(m);
  for (int k = 0; k < m; ++k)
    dcom[k] = (kin.group_mass[k] / kin.total_mass) *
              kin.joint_axis[k].cross(kin.group_com[k] - kin.joint_pos[k]);

  for (size_t i = 0; i < model.surfaces.size(); ++i) {
    const SurfaceSpec& f = model.surfaces[i];
    const Vec3& n = kin.surface_normal[i];
    const double cosi = n.dot(s);
    if (set == SurfaceSet::front_faces) {
      if (!f.is_front) continue;
    } else if (cosi <= 0.0) {
      continue;  // dark faces contribute nothing to the full cutoff model
    }

    const Vec3 arm = kin.surface_center[i] - kin.system_com;
    const double p_n1 = 2.0 * pressure * f.optics.specular;
    const double p_n2 = 2.0 / 3.0 * pressure * f.optics.diffuse;
    const double p_s = pressure * (f.optics.absorptive + f.optics.diffuse);

    for (int j = 0; j < 3; ++j) {
      const double nds = n.dot(ds.col(j));
      const Vec3 dforce = -f.area * (p_n1 * (2.0 * cosi * nds) * n + p_n2 * nds * n +
                                     p_s * (nds * s + cosi * ds.col(j)));
      jac.force_attitude.col(j) += dforce;
      jac.torque_attitude.col(j) += arm.cross(dforce);
    }

    const Vec3 force = surface_force(pressure, f.area, f.optics, n, s, false);
    const Mat3 dfdn = force_normal_partial(pressure, f.area, f.optics, n, s);
    for (int k = 0; k < m; ++k) {
      Vec3 dforce = Vec3::Zero();
      Vec3 dcenter = Vec3::Zero();
      if (model.in_outer_group(k, f.body)) {
        dcenter = kin.joint_axis[k].cross(kin.surface_center[i] - kin.joint_pos[k]);
        dforce = dfdn * kin.joint_axis[k].cross(n);
      }
      jac.force_joint.col(k) += dforce;
      jac.torque_joint.col(k) += (dcenter - dcom[k]).cross(force) + arm.cross(dforce);
    }
  }
  return jac;
}

Mat3 force_attitude_jacobian(const MultibodyModel& model, const Kinematics& kin,
                             const Vec3& phi, double pressure) {
  return wrench_jacobian(model, kin, phi, pressure).force_attitude;
}

Mat3 torque_attitude_jacobian(const MultibodyModel& model, const Kinematics& kin,
                              const Vec3& phi, double pressure) {
  return wrench_jacobian(model, kin, phi, pressure).torque_attitude;
}

MatX force_joint_jacobian(const MultibodyModel& model, const Kinematics& kin,
                          const Vec3& phi, double pressure) {
  return wrench_jacobian(model, kin, phi, pressure).force_joint;
}

MatX torque_joint_jacobian(const MultibodyModel& model, const Kinematics& kin,
                           const Vec3& phi, double pressure) {
  return wrench_jacobian(model, kin, phi, pressure).torque_joint;
}

WrenchJacobian finite_difference_wrench(const MultibodyModel& model, const VecX& theta,
                                        const Vec3& phi, double pressure, double step,
                                        WrenchModel faces) {
  const int m = model.joint_count();
  WrenchJacobian jac;
  jac.force_joint = MatX::Zero(3, m);
  jac.torque_joint = MatX::Zero(3, m);

  const Kinematics kin0 = forward_kinematics(model, theta);
  for (int j = 0; j < 3; ++j) {
    Vec3 up = phi, dn = phi;
    up[j] += step;
    dn[j] -= step;
    const BodyWrench wp = total_wrench(model, kin0, up, pressure, faces);
    const BodyWrench wm = total_wrench(model, kin0, dn, pressure, faces);
    jac.force_attitude.col(j) = (wp.force - wm.force) / (2.0 * step);
    jac.torque_attitude.col(j) = (wp.torque - wm.torque) / (2.0 * step);
  }
  for (int k = 0; k < m; ++k) {
    VecX up = theta, dn = theta;
    up[k] += step;
    dn[k] -= step;
    const BodyWrench wp = total_wrench(model, forward_kinematics(model, up), phi, pressure, faces);
    const BodyWrench wm = total_wrench(model, forward_kinematics(model, dn), phi, pressure, faces);
    jac.force_joint.col(k) = (wp.force - wm.force) / (2.0 * step);
    jac.torque_joint.col(k) = (wp.torque - wm.torque) / (2.0 * step);
  }
  return jac;
}

}  // namespace foldsail
