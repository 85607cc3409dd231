#include "foldsail/model.hpp"

#include <cmath>
#include <numbers>

namespace foldsail {
namespace {

Mat3 axis_angle(const Vec3& axis, double angle) {
  const Mat3 k = skew(axis);
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
}

Mat3 rot1(double a) {
  Mat3 r;
  r << 1, 0, 0,
       0, std::cos(a), std::sin(a),
       0, -std::sin(a), std::cos(a);
  return r;
}

Mat3 rot2(double a) {
  Mat3 r;
  r << std::cos(a), 0, -std::sin(a),
       0, 1, 0,
       std::sin(a), 0, std::cos(a);
  return r;
}

Mat3 rot3(double a) {
  Mat3 r;
  r << std::cos(a), std::sin(a), 0,
       -std::sin(a), std::cos(a), 0,
       0, 0, 1;
  return r;
}

/// Parallel-axis contribution of a point mass at offset d.
Mat3 parallel_axis(double mass, const Vec3& d) {
  return mass * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
}

}  // namespace

void MultibodyModel::finalize() {
  const int n = body_count();
  const int m = joint_count();
  if (n == 0) throw ValidationError("model has no bodies");
  if (m != n - 1)
    throw ValidationError("model must have exactly one joint per non-root body (got " +
                          std::to_string(m) + " joints for " + std::to_string(n) + " bodies)");
  for (int i = 0; i < n; ++i) {
    const auto& b = bodies[i];
    if (!(b.mass > 0.0)) throw ValidationError("body " + std::to_string(i) + ": mass must be positive");
    if (!b.inertia.isApprox(b.inertia.transpose(), 1e-12))
      throw ValidationError("body " + std::to_string(i) + ": inertia must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> es(b.inertia);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw ValidationError("body " + std::to_string(i) + ": inertia must be positive definite");
  }
  for (int k = 0; k < m; ++k) {
    const auto& j = joints[k];
    if (j.child != k + 1)
      throw ValidationError("joint " + std::to_string(k) + ": child must be body " +
                            std::to_string(k + 1) + " (indices grow outward)");
    if (j.parent < 0 || j.parent >= j.child)
      throw ValidationError("joint " + std::to_string(k) + ": parent must be an inboard body index");
    if (std::abs(j.axis.norm() - 1.0) > 1e-9)
      throw ValidationError("joint " + std::to_string(k) + ": axis must be a unit vector");
    if (!(j.lower_limit < j.upper_limit))
      throw ValidationError("joint " + std::to_string(k) + ": limits must satisfy lower < upper");
  }
  int fronts_total = 0;
  std::vector<int> fronts_per_body(n, 0);
  for (size_t s = 0; s < surfaces.size(); ++s) {
    const auto& f = surfaces[s];
    const std::string label = f.name.empty() ? ("surface " + std::to_string(s)) : ("surface '" + f.name + "'");
    if (f.body < 0 || f.body >= n) throw ValidationError(label + ": body index out of range");
    if (!(f.area > 0.0)) throw ValidationError(label + ": area must be positive");
    if (std::abs(f.normal.norm() - 1.0) > 1e-9) throw ValidationError(label + ": normal must be a unit vector");
    const auto& o = f.optics;
    if (o.specular < 0.0 || o.diffuse < 0.0 || o.absorptive < 0.0 ||
        std::abs(o.specular + o.diffuse + o.absorptive - 1.0) > 1e-9)
      throw ValidationError(label + ": optical coefficients must be non-negative and sum to 1");
    if (f.is_front) {
      ++fronts_total;
      ++fronts_per_body[f.body];
    }
  }
  for (int i = 0; i < n; ++i)
    if (!surfaces.empty() && fronts_per_body[i] != 1)
      throw ValidationError("body " + std::to_string(i) + ": needs exactly one front face (got " +
                            std::to_string(fronts_per_body[i]) + ")");

  outer_groups_.assign(m, {});
  outer_mask_.assign(m, std::vector<char>(n, 0));
  for (int k = 0; k < m; ++k) {
    // child of joint k plus everything that chains off it
    std::vector<char>& mask = outer_mask_[k];
    mask[joints[k].child] = 1;
    for (int b = joints[k].child + 1; b < n; ++b)
      if (mask[joints[b - 1].parent]) mask[b] = 1;
    for (int b = 0; b < n; ++b)
      if (mask[b]) outer_groups_[k].push_back(b);
  }
}

Mat3 box_inertia(double mass, const Vec3& d) {
  if (!(mass > 0.0) || !(d.minCoeff() > 0.0))
    throw ValidationError("box_inertia: mass and dimensions must be positive");
  const double c = mass / 12.0;
  return Vec3(c * (d.y() * d.y() + d.z() * d.z()),
              c * (d.x() * d.x() + d.z() * d.z()),
              c * (d.x() * d.x() + d.y() * d.y()))
      .asDiagonal();
}

OpticalCoefficients material_optics(const std::string& name) {
  if (name == "MLI") return {0.375, 0.255, 0.370};
  if (name == "SAP") return {0.086, 0.060, 0.854};
  if (name == "Mirror") return {1.0, 0.0, 0.0};
  throw ValidationError("unknown material '" + name + "' (expected MLI, SAP, or Mirror)");
}

MultibodyModel canonical_model() {
  constexpr double kPitch = 1.1;
  constexpr double kHalf = kPitch / 2.0;
  const Vec3 ex = Vec3::UnitX(), ey = Vec3::UnitY(), ez = Vec3::UnitZ();
  static const char* kMaterials[] = {"MLI", "SAP", "Mirror"};

  MultibodyModel m;
  m.bodies.assign(9, BodySpec{10.0, box_inertia(10.0, {1.0, 1.0, 0.1})});

  auto joint = [&](int parent, int child, const Vec3& hp, const Vec3& hc, const Vec3& axis) {
    JointSpec j;
    j.parent = parent;
    j.child = child;
    j.hinge_parent = hp;
    j.hinge_child = hc;
    j.axis = axis;
    j.lower_limit = -80.0 * std::numbers::pi / 180.0;
    j.upper_limit = 80.0 * std::numbers::pi / 180.0;
    m.joints.push_back(j);
  };
  // ring panels off the center, then corner panels off the ring;
  // axes follow the shared edge, signed so +theta lifts the outer group to +z
  joint(0, 1, kHalf * ex, -kHalf * ex, -ey);
  joint(0, 2, kHalf * ey, -kHalf * ey, ex);
  joint(0, 3, -kHalf * ex, kHalf * ex, ey);
  joint(0, 4, -kHalf * ey, kHalf * ey, -ex);
  joint(1, 5, kHalf * ey, -kHalf * ey, ex);
  joint(2, 6, -kHalf * ex, kHalf * ex, ey);
  joint(3, 7, -kHalf * ey, kHalf * ey, -ex);
  joint(4, 8, kHalf * ex, -kHalf * ex, -ey);

  for (int b = 0; b < 9; ++b) {
    const OpticalCoefficients optics = material_optics(kMaterials[b % 3]);
    SurfaceSpec front;
    front.body = b;
    front.offset = 0.05 * ez;
    front.normal = ez;
    front.area = 1.0;
    front.optics = optics;
    front.is_front = true;
    front.name = "body" + std::to_string(b) + "/front";
    SurfaceSpec back = front;
    back.offset = -0.05 * ez;
    back.normal = -ez;
    back.is_front = false;
    back.name = "body" + std::to_string(b) + "/back";
    m.surfaces.push_back(front);
    m.surfaces.push_back(back);
  }
  m.finalize();
  return m;
}

Kinematics forward_kinematics(const MultibodyModel& model, const VecX& theta) {
  const int n = model.body_count();
  const int m = model.joint_count();
  if (theta.size() != m)
    throw ValidationError("forward_kinematics: theta has " + std::to_string(theta.size()) +
                          " entries, model has " + std::to_string(m) + " joints");

  Kinematics kin;
  kin.body_com.assign(n, Vec3::Zero());
  kin.body_rot.assign(n, Mat3::Identity());
  kin.body_inertia.resize(n);
  kin.joint_pos.assign(m, Vec3::Zero());
  kin.joint_axis.assign(m, Vec3::Zero());

  for (int k = 0; k < m; ++k) {
    const JointSpec& j = model.joints[k];
    const Mat3& rp = kin.body_rot[j.parent];
    const Mat3 rc = rp * axis_angle(j.axis, theta[k]);
    const Vec3 hinge = kin.body_com[j.parent] + rp * j.hinge_parent;
    kin.body_rot[j.child] = rc;
    kin.body_com[j.child] = hinge - rc * j.hinge_child;
    kin.joint_pos[k] = hinge;
    kin.joint_axis[k] = rp * j.axis;
  }

  kin.total_mass = 0.0;
  Vec3 weighted = Vec3::Zero();
  for (int b = 0; b < n; ++b) {
    kin.body_inertia[b] = kin.body_rot[b] * model.bodies[b].inertia * kin.body_rot[b].transpose();
    kin.total_mass += model.bodies[b].mass;
    weighted += model.bodies[b].mass * kin.body_com[b];
  }
  kin.system_com = weighted / kin.total_mass;
  kin.system_inertia = Mat3::Zero();
  for (int b = 0; b < n; ++b)
    kin.system_inertia +=
        kin.body_inertia[b] + parallel_axis(model.bodies[b].mass, kin.body_com[b] - kin.system_com);

  kin.group_mass.assign(m, 0.0);
  kin.group_com.assign(m, Vec3::Zero());
  kin.group_inertia.assign(m, Mat3::Zero());
  for (int k = 0; k < m; ++k) {
    double mg = 0.0;
    Vec3 wg = Vec3::Zero();
    for (int b : model.outer_group(k)) {
      mg += model.bodies[b].mass;
      wg += model.bodies[b].mass * kin.body_com[b];
    }
    kin.group_mass[k] = mg;
    kin.group_com[k] = wg / mg;
    for (int b : model.outer_group(k))
      kin.group_inertia[k] +=
          kin.body_inertia[b] + parallel_axis(model.bodies[b].mass, kin.body_com[b] - kin.group_com[k]);
  }

  kin.surface_center.resize(model.surfaces.size());
  kin.surface_normal.resize(model.surfaces.size());
  for (size_t s = 0; s < model.surfaces.size(); ++s) {
    const SurfaceSpec& f = model.surfaces[s];
    kin.surface_center[s] = kin.body_com[f.body] + kin.body_rot[f.body] * f.offset;
    kin.surface_normal[s] = kin.body_rot[f.body] * f.normal;
  }
  return kin;
}

Mat3 dcm_from_euler(const Vec3& phi) {
  return rot3(phi[2]) * rot1(phi[1]) * rot2(phi[0]);
}

Vec3 sun_vector_body(const Vec3& phi) {
  const double c1 = std::cos(phi[0]), s1 = std::sin(phi[0]);
  const double c2 = std::cos(phi[1]), s2 = std::sin(phi[1]);
  const double c3 = std::cos(phi[2]), s3 = std::sin(phi[2]);
  return {c1 * s2 * s3 - s1 * c3, c1 * s2 * c3 + s1 * s3, c1 * c2};
}

Mat3 body_rate_matrix(const Vec3& phi) {
  Mat3 w;
  w.col(0) = rot3(phi[2]) * rot1(phi[1]) * Vec3::UnitY();
  w.col(1) = rot3(phi[2]) * Vec3::UnitX();
  w.col(2) = Vec3::UnitZ();
  return w;
}

Mat3 euler_rate_matrix(const Vec3& phi) {
  if (std::abs(phi[1]) >= kGimbalGuardRad)
    throw GimbalLockError("attitude chart singular: |phi2| = " +
                          std::to_string(std::abs(phi[1]) * 180.0 / std::numbers::pi) +
                          " deg (guard at 89 deg)");
  return body_rate_matrix(phi).inverse();
}

}  // namespace foldsail
