#pragma once

#include "foldsail/model.hpp"
#include "foldsail/srp.hpp"
#include "foldsail/types.hpp"

namespace foldsail {

/// First-order sensitivities of the photon wrench, root body frame.
/// Attitude blocks are 3x3 (columns = Euler angles), joint blocks 3xm.
struct WrenchJacobian {
  Mat3 force_attitude = Mat3::Zero();
  Mat3 torque_attitude = Mat3::Zero();
  MatX force_joint;
  MatX torque_joint;
};

/// Which surface set the analytic Jacobian differentiates:
///  - front_faces: the smooth front-only control model (no cutoff);
///  - sunlit_faces: every currently sunlit face of the full model (exact
///    except across a terminator crossing).
enum class SurfaceSet { front_faces, sunlit_faces };

/// Columns are d(sun vector in body frame)/d(phi_j); closed form.
Mat3 sun_vector_partials(const Vec3& phi);

/// d(surface force)/d(surface normal) for one face, holding the sun fixed.
Mat3 force_normal_partial(double pressure, double area,
                          const OpticalCoefficients& optics,
                          const Vec3& normal, const Vec3& sun);

/// All four sensitivity blocks in one pass over the surfaces.
WrenchJacobian wrench_jacobian(const MultibodyModel& model, const Kinematics& kin,
                               const Vec3& phi, double pressure,
                               SurfaceSet set = SurfaceSet::front_faces);

/// Individual blocks (thin wrappers over wrench_jacobian).
Mat3 force_attitude_jacobian(const MultibodyModel& model, const Kinematics& kin,
                             const Vec3& phi, double pressure);
Mat3 torque_attitude_jacobian(const MultibodyModel& model, const Kinematics& kin,
                              const Vec3& phi, double pressure);
MatX force_joint_jacobian(const MultibodyModel& model, const Kinematics& kin,
                          const Vec3& phi, double pressure);
MatX torque_joint_jacobian(const MultibodyModel& model, const Kinematics& kin,
                           const Vec3& phi, double pressure);

/// Central-difference reference for the same blocks, differentiating the
/// requested wrench model (front_only = the smooth front-face model).
WrenchJacobian finite_difference_wrench(const MultibodyModel& model, const VecX& theta,
                                        const Vec3& phi, double pressure, double step,
                                        WrenchModel faces = WrenchModel::front_only);

}  // namespace foldsail
