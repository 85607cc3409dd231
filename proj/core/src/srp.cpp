#include "foldsail/srp.hpp"

namespace foldsail {

double radiation_pressure(const Environment& env) {
  if (!(env.distance_au > 0.0))
    throw ValidationError("radiation_pressure: distance must be positive");
  if (env.solar_constant < 0.0)
    throw ValidationError("radiation_pressure: solar constant must be non-negative");
  if (!(env.light_speed > 0.0))
    throw ValidationError("radiation_pressure: light speed must be positive");
  return env.solar_constant / env.light_speed / (env.distance_au * env.distance_au);
}

Vec3 surface_force(double pressure, double area, const OpticalCoefficients& optics,
                   const Vec3& normal, const Vec3& sun, bool cutoff) {
  const double cosi = normal.dot(sun);
  if (cutoff && cosi < 0.0) return Vec3::Zero();
  const double sun_coef = optics.absorptive + optics.diffuse;
  const double normal_coef = 2.0 / 3.0 * optics.diffuse + 2.0 * cosi * optics.specular;
  return -pressure * area * cosi * (sun_coef * sun + normal_coef * normal);
}

BodyWrench total_wrench(const MultibodyModel& model, const Kinematics& kin,
                        const Vec3& phi, double pressure, WrenchModel faces,
                        int* dark_front_faces) {
  const Vec3 s = sun_vector_body(phi);
  const bool front_only = (faces == WrenchModel::front_only);
  if (dark_front_faces) *dark_front_faces = 0;
  BodyWrench w;
  for (size_t i = 0; i < model.surfaces.size(); ++i) {
    const SurfaceSpec& f = model.surfaces[i];
    if (front_only && !f.is_front) continue;
    const Vec3& n = kin.surface_normal[i];
    if (dark_front_faces && f.is_front && n.dot(s) <= 0.0) ++*dark_front_faces;
    const Vec3 force = surface_force(pressure, f.area, f.optics, n, s, !front_only);
    w.force += force;
    w.torque += (kin.surface_center[i] - kin.system_com).cross(force);
  }
  return w;
}

BodyWrench wrench_to_inertial(const BodyWrench& w, const Vec3& phi) {
  const Mat3 ct = dcm_from_euler(phi).transpose();
  return {ct * w.force, ct * w.torque};
}

}  // namespace foldsail
