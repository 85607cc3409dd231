#include <foldsail/jacobians.hpp>

#include <gtest/gtest.h>

#include "test_fixtures.hpp"

namespace foldsail {
namespace {

using testing::snapshot_phi;
using testing::snapshot_theta;

constexpr double kPressure1au = 4.5564855404067571e-06;

MatX stack_blocks(const WrenchJacobian& jac) {
  MatX all(6, 3 + jac.force_joint.cols());
  all.topLeftCorner(3, 3) = jac.force_attitude;
  all.bottomLeftCorner(3, 3) = jac.torque_attitude;
  all.topRightCorner(3, jac.force_joint.cols()) = jac.force_joint;
  all.bottomRightCorner(3, jac.torque_joint.cols()) = jac.torque_joint;
  return all;
}

TEST(JacobiansTest, SunPartialsMatchChartDerivative) {
  const Vec3 phi = snapshot_phi();
  const Mat3 partials = sun_vector_partials(phi);
  const double h = 1e-7;
  for (int j = 0; j < 3; ++j) {
    Vec3 up = phi, dn = phi;
    up[j] += h;
    dn[j] -= h;
    const Vec3 fd = (sun_vector_body(up) - sun_vector_body(dn)) / (2.0 * h);
    EXPECT_LT((partials.col(j) - fd).norm(), 1e-9) << "angle " << j;
  }
}

TEST(JacobiansTest, ForceNormalPartialMatchesFiniteDifference) {
  const Vec3 sun = Vec3(0.2, -0.1, 0.97).normalized();
  const Vec3 normal = Vec3(0.05, 0.1, 1.0).normalized();
  const OpticalCoefficients optics = material_optics("MLI");
  const Mat3 partial = force_normal_partial(kPressure1au, 1.3, optics, normal, sun);
  const double h = 1e-7;
  for (int j = 0; j < 3; ++j) {
    Vec3 up = normal, dn = normal;
    up[j] += h;
    dn[j] -= h;
    const Vec3 fd = (surface_force(kPressure1au, 1.3, optics, up, sun, false) -
                     surface_force(kPressure1au, 1.3, optics, dn, sun, false)) /
                    (2.0 * h);
    EXPECT_LT((partial.col(j) - fd).norm(), 1e-12) << "axis " << j;
  }
}

TEST(JacobiansTest, SnapshotFrozenValues) {
  const MultibodyModel model = canonical_model();
  const Kinematics kin = forward_kinematics(model, snapshot_theta());
  const WrenchJacobian jac =
      wrench_jacobian(model, kin, snapshot_phi(), kPressure1au, SurfaceSet::front_faces);

  Mat3 dfdphi;
  dfdphi << 2.0094018736250823e-05, -7.3680819681329846e-06, 5.1993208680793795e-07,
      -9.2828285583607055e-06, -2.3210232226001575e-05, -5.6081783522440719e-06,
      1.8405445281786853e-05, -7.6674529146680836e-06, 2.9097370909131965e-07;
  Mat3 dtdphi;
  dtdphi << -1.4491035242192933e-05, 7.0679033297884221e-07, -1.3041318361759328e-06,
      -5.0293710454226808e-06, -1.3536779652755315e-05, -3.2324316034058949e-06,
      1.6861842372406581e-06, -1.6468570216019271e-06, -1.6382913011351859e-07;
  EXPECT_LT((jac.force_attitude - dfdphi).cwiseAbs().maxCoeff(), 1e-17);
  EXPECT_LT((jac.torque_attitude - dtdphi).cwiseAbs().maxCoeff(), 1e-17);

  MatX dfdth(3, 8), dtdth(3, 8);
  dfdth << 6.0596371103502529e-06, 1.5925030584794849e-06, 7.9416168618694715e-07,
      -2.644919296211288e-07, -3.0282787867369955e-06, -3.479495538775813e-07,
      1.3396030129399676e-08, 6.6711745593001524e-06, -5.5274413342609762e-07,
      4.3814069817134888e-06, 5.7646957071020817e-08, -7.6751898192051491e-06,
      1.662415890676046e-06, -1.5858402202546803e-06, -2.5630441007704992e-07,
      1.4130582689545336e-06, 3.2853498154012307e-06, -1.2695966546520327e-05,
      9.9970636752078771e-06, -5.3854792082413683e-06, 9.7896020610537222e-06,
      -4.4224959311431725e-06, 7.6598132198318201e-07, -6.9708352889814346e-06;
  dtdth << 1.4899588087841325e-06, -9.4144043923059863e-06, -3.9805143182972365e-06,
      3.4288705788183322e-06, 8.2974952674090784e-06, -4.548315514941845e-06,
      -3.3673276819252604e-07, 7.1459379004046424e-06, -6.4208149499213685e-07,
      -4.5202346668134546e-06, 6.595914930363635e-06, 3.7303179295471018e-06,
      -1.0009410431302833e-05, -3.2904932952351601e-06, -5.2083231706858804e-07,
      5.0320059204545379e-06, -7.530584773888807e-06, -3.7342118360540809e-06,
      -6.4896818012053526e-07, -7.7638119162558274e-06, 4.6101410065267961e-06,
      1.9828719435434539e-06, 1.8537543204231161e-07, 8.3439295926983681e-06;
  EXPECT_LT((jac.force_joint - dfdth).cwiseAbs().maxCoeff(), 1e-17);
  EXPECT_LT((jac.torque_joint - dtdth).cwiseAbs().maxCoeff(), 1e-17);
}

TEST(JacobiansTest, WrapperBlocksAgree) {
  const MultibodyModel model = canonical_model();
  const Kinematics kin = forward_kinematics(model, snapshot_theta());
  const Vec3 phi = snapshot_phi();
  const WrenchJacobian jac = wrench_jacobian(model, kin, phi, kPressure1au);
  EXPECT_EQ((force_attitude_jacobian(model, kin, phi, kPressure1au) - jac.force_attitude)
                .cwiseAbs()
                .maxCoeff(),
            0.0);
  EXPECT_EQ((torque_attitude_jacobian(model, kin, phi, kPressure1au) - jac.torque_attitude)
                .cwiseAbs()
                .maxCoeff(),
            0.0);
  EXPECT_EQ(
      (force_joint_jacobian(model, kin, phi, kPressure1au) - jac.force_joint).cwiseAbs().maxCoeff(),
      0.0);
  EXPECT_EQ((torque_joint_jacobian(model, kin, phi, kPressure1au) - jac.torque_joint)
                .cwiseAbs()
                .maxCoeff(),
            0.0);
}

TEST(JacobiansTest, MatchesCentralDifferencesQuadratically) {
  const MultibodyModel model = canonical_model();
  const VecX theta = snapshot_theta();
  const Vec3 phi = snapshot_phi();
  const Kinematics kin = forward_kinematics(model, theta);
  const WrenchJacobian analytic =
      wrench_jacobian(model, kin, phi, kPressure1au, SurfaceSet::front_faces);
  const MatX exact = stack_blocks(analytic);
  const double scale = exact.cwiseAbs().maxCoeff();

  double err[3];
  const double steps[3] = {1e-4, 1e-5, 1e-6};
  for (int i = 0; i < 3; ++i) {
    const WrenchJacobian fd =
        finite_difference_wrench(model, theta, phi, kPressure1au, steps[i]);
    err[i] = (stack_blocks(fd) - exact).cwiseAbs().maxCoeff() / scale;
  }
  EXPECT_LT(err[2], 1e-5);          // the contract bound at h = 1e-6
  EXPECT_LT(err[1], err[0]);        // shrinking h helps in the truncation regime
  EXPECT_GT(err[0] / err[1], 20.0)  // ~100x per decade = second order
      << "err(1e-4) = " << err[0] << ", err(1e-5) = " << err[1];
  EXPECT_LT(err[0] / err[1], 500.0);
}

TEST(JacobiansTest, SunlitSetDifferentiatesTheFullModel) {
  // attitude tipped so some backs see the sun: the sunlit-face Jacobian must
  // track the full-face wrench, which the front-only one no longer does
  const MultibodyModel model = canonical_model();
  VecX theta = VecX::Zero(8);
  theta << 1.2, -1.1, 0.9, -1.3, 0.7, -0.8, 1.0, -0.9;
  const Vec3 phi(1.1, -0.4, 0.3);
  const Kinematics kin = forward_kinematics(model, theta);
  const Vec3 sun = sun_vector_body(phi);
  int lit_backs = 0;
  for (size_t f = 0; f < model.surfaces.size(); ++f)
    if (!model.surfaces[f].is_front && kin.surface_normal[f].dot(sun) > 0.05) ++lit_backs;
  ASSERT_GT(lit_backs, 0) << "test state must expose some back faces to the sun";

  const WrenchJacobian analytic =
      wrench_jacobian(model, kin, phi, kPressure1au, SurfaceSet::sunlit_faces);
  const WrenchJacobian fd = finite_difference_wrench(model, theta, phi, kPressure1au, 1e-6,
                                                     WrenchModel::full_faces);
  const double scale = stack_blocks(analytic).cwiseAbs().maxCoeff();
  EXPECT_LT((stack_blocks(fd) - stack_blocks(analytic)).cwiseAbs().maxCoeff() / scale, 1e-6);
}

}  // namespace
}  // namespace foldsail
