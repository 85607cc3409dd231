#pragma once

#include "foldsail/model.hpp"
#include "foldsail/types.hpp"

namespace foldsail {

/// Radiation environment. Pressure falls with the inverse square of the
/// sun distance.
struct Environment {
  double solar_constant = 1366.0;      ///< W/m^2 at 1 au
  double light_speed = 299792458.0;    ///< m/s
  double distance_au = 1.0;
};

/// Radiation pressure at the configured distance, N/m^2.
double radiation_pressure(const Environment& env);

/// Which faces contribute to the photon wrench.
///  - full_faces: every face, shadowing-free, dark faces (n.s < 0) excluded;
///  - front_only: the designated front faces only, with no dark-side cutoff
///    (the smooth model the analytic Jacobians differentiate).
enum class WrenchModel { full_faces, front_only };

/// Photon force on one flat surface. `normal` and `sun` are unit vectors in
/// a common frame; the force is returned in that frame. With `cutoff` the
/// force is zero whenever the face looks away from the sun.
Vec3 surface_force(double pressure, double area, const OpticalCoefficients& optics,
                   const Vec3& normal, const Vec3& sun, bool cutoff = true);

/// Force and torque in the root body frame; torque about the system CoM.
struct BodyWrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

/// Sums surface forces and their moments about the system CoM.
/// `dark_front_faces`, when non-null, receives the number of front faces
/// that violate the front-only model's sunlit assumption at this state.
BodyWrench total_wrench(const MultibodyModel& model, const Kinematics& kin,
                        const Vec3& phi, double pressure,
                        WrenchModel faces = WrenchModel::full_faces,
                        int* dark_front_faces = nullptr);

/// Rotates a body-frame wrench into the inertial frame.
BodyWrench wrench_to_inertial(const BodyWrench& w, const Vec3& phi);

}  // namespace foldsail
