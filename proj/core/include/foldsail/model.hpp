#pragma once

#include <string>
#include <vector>

#include "foldsail/types.hpp"

namespace foldsail {

/// Fractions of incoming photons reflected specularly, reflected diffusely,
/// and absorbed by a surface. The three must be non-negative and sum to one.
struct OpticalCoefficients {
  double specular = 0.0;
  double diffuse = 0.0;
  double absorptive = 1.0;
};

/// Rigid panel: mass and inertia about its own center of mass, expressed in
/// the panel-local frame (which coincides with the root frame at zero joint
/// angles).
struct BodySpec {
  double mass = 0.0;
  Mat3 inertia = Mat3::Zero();
};

/// Single-axis hinge between a body and its inboard parent. The hinge point
/// and axis are given in the parent's local frame; `hinge_child` locates the
/// same physical point in the child's local frame. At zero angle the child
/// frame is aligned with the parent frame.
struct JointSpec {
  int parent = 0;
  int child = 0;
  Vec3 hinge_parent = Vec3::Zero();
  Vec3 hinge_child = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  double lower_limit = -1.5707963267948966;
  double upper_limit = 1.5707963267948966;
};

/// Flat reflective face carried by a body. Offset is from the body's center
/// of mass, normal is the outward face normal, both in body-local frame.
/// Exactly one face per body is the designated front face used by the
/// control-design (front-only) radiation model.
struct SurfaceSpec {
  int body = 0;
  Vec3 offset = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double area = 0.0;
  OpticalCoefficients optics;
  bool is_front = false;
  std::string name;
};

/// Tree of hinged rigid bodies with reflective surfaces. Body 0 is the root;
/// joint k (0-based) attaches child body k+1 to a parent with a smaller
/// index, so indices grow outward along every branch.
class MultibodyModel {
 public:
  std::vector<BodySpec> bodies;
  std::vector<JointSpec> joints;
  std::vector<SurfaceSpec> surfaces;

  int body_count() const { return static_cast<int>(bodies.size()); }
  int joint_count() const { return static_cast<int>(joints.size()); }

  /// Bodies at or outboard of joint k (the child and all its descendants),
  /// ascending. Computed lazily by finalize().
  const std::vector<int>& outer_group(int joint) const { return outer_groups_.at(joint); }

  /// True if `body` is at or outboard of joint k.
  bool in_outer_group(int joint, int body) const { return outer_mask_.at(joint).at(body) != 0; }

  /// Validates the tree shape, masses, inertias, joints, and surface optics;
  /// throws ValidationError naming the offending element. Also (re)builds the
  /// outer-group cache. Must be called after the spec vectors are filled.
  void finalize();

 private:
  std::vector<std::vector<int>> outer_groups_;
  std::vector<std::vector<char>> outer_mask_;
};

/// Inertia of a homogeneous rectangular box about its center, axis-aligned.
Mat3 box_inertia(double mass, const Vec3& dimensions);

/// Nine identical 1 m x 1 m x 0.1 m, 10 kg panels in a pinwheel: a center
/// panel, four edge-adjacent panels on +x/+y/-x/-y (joints 0..3), and four
/// corner panels hanging off those (joints 4..7). Hinge axes run along the
/// shared edges with signs chosen so a positive angle lifts the outer group
/// toward +z. Each panel carries a front (+z) and back (-z) face, the back
/// inheriting the front optics. Materials cycle MLI, solar-array, mirror by
/// body index.
MultibodyModel canonical_model();

/// Catalog optics rows used by canonical_model(); name is one of
/// "MLI", "SAP", "Mirror".
OpticalCoefficients material_optics(const std::string& name);

/// Body poses and aggregate mass properties at a given joint configuration.
/// Everything is expressed in the root body frame, positions relative to the
/// root body's center of mass.
struct Kinematics {
  std::vector<Vec3> body_com;
  std::vector<Mat3> body_rot;       ///< panel-local -> root frame
  std::vector<Mat3> body_inertia;   ///< about own CoM, root frame axes
  std::vector<Vec3> joint_pos;      ///< hinge point per joint
  std::vector<Vec3> joint_axis;     ///< unit axis per joint, root frame

  double total_mass = 0.0;
  Vec3 system_com = Vec3::Zero();
  Mat3 system_inertia = Mat3::Zero();  ///< about system CoM

  std::vector<double> group_mass;   ///< per joint: outer-group mass
  std::vector<Vec3> group_com;      ///< per joint: outer-group CoM
  std::vector<Mat3> group_inertia;  ///< per joint: about group CoM

  std::vector<Vec3> surface_center;
  std::vector<Vec3> surface_normal;
};

/// Propagates the hinge chain and aggregates mass properties.
/// theta must have one entry per joint (radians).
Kinematics forward_kinematics(const MultibodyModel& model, const VecX& theta);

/// Attitude chart: 2-1-3 rotation sequence, returning the direction cosine
/// matrix mapping inertial vectors into the root body frame.
Mat3 dcm_from_euler(const Vec3& phi);

/// Sun direction in the root body frame; the inertial sun line is +z.
Vec3 sun_vector_body(const Vec3& phi);

/// Maps body angular velocity to Euler angle rates: phidot = C_phi * omega.
/// Throws GimbalLockError when |phi2| is within one degree of 90 deg.
Mat3 euler_rate_matrix(const Vec3& phi);

/// Inverse map: omega = W(phi) * phidot. Columns are the body-frame axes an
/// individual Euler rate spins about.
Mat3 body_rate_matrix(const Vec3& phi);

constexpr double kGimbalGuardRad = 1.5533430342749535;  // 89 deg

}  // namespace foldsail
