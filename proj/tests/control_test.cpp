#include <foldsail/control.hpp>

#include <gtest/gtest.h>

#include <cmath>

#include <foldsail/dynamics.hpp>

#include "test_fixtures.hpp"

namespace foldsail {
namespace {

using testing::fixture_environment;
using testing::fixture_force_target;

MatX care_residual(const MatX& a, const MatX& b, const MatX& q, const MatX& r,
                   const MatX& x) {
  return a.transpose() * x + x * a - x * b * r.inverse() * b.transpose() * x + q;
}

TEST(ControlTest, ScalarRiccatiHasTheTextbookSolution) {
  const MatX a = MatX::Zero(1, 1);
  const MatX b = MatX::Ones(1, 1);
  const MatX q = MatX::Ones(1, 1);
  const MatX r = MatX::Ones(1, 1);
  const LqrGain gain = solve_lqr(a, b, q, r);
  EXPECT_NEAR(gain.riccati_solution(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(gain.k(0, 0), 1.0, 1e-12);
  EXPECT_LT(gain.residual, 1e-12);
}

TEST(ControlTest, DoubleIntegratorHasTheTextbookSolution) {
  MatX a = MatX::Zero(2, 2);
  a(0, 1) = 1.0;
  MatX b = MatX::Zero(2, 1);
  b(1, 0) = 1.0;
  const MatX q = MatX::Identity(2, 2);
  const MatX r = MatX::Ones(1, 1);

  const LqrGain gain = solve_lqr(a, b, q, r);
  const double s3 = std::sqrt(3.0);
  EXPECT_NEAR(gain.riccati_solution(0, 0), s3, 1e-10);
  EXPECT_NEAR(gain.riccati_solution(0, 1), 1.0, 1e-10);
  EXPECT_NEAR(gain.riccati_solution(1, 0), 1.0, 1e-10);
  EXPECT_NEAR(gain.riccati_solution(1, 1), s3, 1e-10);
  EXPECT_NEAR(gain.k(0, 0), 1.0, 1e-10);
  EXPECT_NEAR(gain.k(0, 1), s3, 1e-10);
  EXPECT_LT(care_residual(a, b, q, r, gain.riccati_solution).norm(), 1e-10);
}

TEST(ControlTest, UnstabilizablePairIsRejected) {
  // the +1 mode cannot be reached by the input
  MatX a = MatX::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = -1.0;
  MatX b = MatX::Zero(2, 1);
  b(1, 0) = 1.0;
  EXPECT_THROW(solve_lqr(a, b, MatX::Identity(2, 2), MatX::Ones(1, 1)), SolveError);
}

TEST(ControlTest, StableUncontrollableModeIsAccepted) {
  // the -2 mode is unreachable but already stable: still stabilizable
  MatX a = MatX::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = -2.0;
  MatX b = MatX::Zero(2, 1);
  b(0, 0) = 1.0;
  const LqrGain gain = solve_lqr(a, b, MatX::Identity(2, 2), MatX::Ones(1, 1));
  EXPECT_LT(care_residual(a, b, MatX::Identity(2, 2), MatX::Ones(1, 1),
                          gain.riccati_solution)
                .norm(),
            1e-10);
}

TEST(ControlTest, WeightValidation) {
  const MatX a = MatX::Zero(2, 2);
  const MatX b = MatX::Identity(2, 2);
  MatX q = MatX::Identity(2, 2);
  MatX r = MatX::Identity(2, 2);

  MatX q_asym = q;
  q_asym(0, 1) = 0.5;  // not symmetric
  EXPECT_THROW(solve_lqr(a, b, q_asym, r), ValidationError);

  MatX r_bad = r;
  r_bad(1, 1) = 0.0;  // not positive definite
  EXPECT_THROW(solve_lqr(a, b, q, r_bad), ValidationError);

  EXPECT_THROW(solve_lqr(a, MatX::Identity(3, 3), q, r), ValidationError);
}

TEST(ControlTest, DefaultWeightsScaleByClass) {
  const double omega_n = 6e-4;
  const double ascale = std::numbers::pi / 180.0;
  const LqrWeights w = default_weights(omega_n, 8);
  ASSERT_EQ(w.state.size(), 22);
  ASSERT_EQ(w.input.size(), 8);
  const double angle_w = 1.0 / (ascale * ascale);
  const double rate_w = 1.0 / (omega_n * ascale * omega_n * ascale);
  const double input_w = 1.0 / (omega_n * omega_n * ascale * omega_n * omega_n * ascale);
  for (int i = 0; i < 11; ++i) EXPECT_NEAR(w.state[i] / angle_w, 1.0, 1e-12);
  for (int i = 11; i < 22; ++i) EXPECT_NEAR(w.state[i] / rate_w, 1.0, 1e-12);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(w.input[i] / input_w, 1.0, 1e-12);
}

TEST(ControlTest, NaturalFrequencyRequiresAnOscillatoryMode) {
  SpectrumInfo flat;  // objective = 0
  EXPECT_THROW(natural_frequency(flat), SolveError);
  flat.objective = -2.5e-4;
  EXPECT_EQ(natural_frequency(flat), 2.5e-4);
}

class CanonicalDesign : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    model_ = new MultibodyModel(canonical_model());
    EquilibriumProblem problem;
    problem.force_target_inertial = fixture_force_target();
    solution_ = new EquilibriumSolution(
        solve_equilibrium(*model_, fixture_environment(), problem));
    ASSERT_TRUE(solution_->converged);
  }
  static void TearDownTestSuite() {
    delete solution_;
    delete model_;
    solution_ = nullptr;
    model_ = nullptr;
  }

  static MultibodyModel* model_;
  static EquilibriumSolution* solution_;
};

MultibodyModel* CanonicalDesign::model_ = nullptr;
EquilibriumSolution* CanonicalDesign::solution_ = nullptr;

TEST_F(CanonicalDesign, LinearizationMatchesTheNonlinearModel) {
  const double pressure = radiation_pressure(fixture_environment());
  const LinearizedSystem sys = linearize(*model_, solution_->phi, solution_->theta, pressure);
  const int m = model_->joint_count();
  const int n = 3 + m;
  ASSERT_EQ(sys.a.rows(), 2 * n);
  ASSERT_EQ(sys.a.cols(), 2 * n);
  ASSERT_EQ(sys.b.rows(), 2 * n);
  ASSERT_EQ(sys.b.cols(), m);

  // nonlinear rate of the (phi, theta, phidot, thetadot) state under the
  // smooth front-face model; the quadratic rate-coupling terms vanish from
  // central differences at the equilibrium
  auto state_rate = [&](const VecX& x, const VecX& u) {
    const Vec3 phi = x.head<3>();
    const VecX theta = x.segment(3, m);
    const Vec3 phi_dot = x.segment<3>(n);
    const VecX theta_dot = x.tail(m);
    const Vec3 omega = body_rate_matrix(phi) * phi_dot;
    const Kinematics kin = forward_kinematics(*model_, theta);
    const BodyWrench w = total_wrench(*model_, kin, phi, pressure, WrenchModel::front_only);
    const Vec3 wdot = forward_dynamics(*model_, theta, omega, theta_dot, w.torque, u);
    VecX rate(2 * n);
    rate.head<3>() = phi_dot;
    rate.segment(3, m) = theta_dot;
    rate.segment<3>(n) = euler_rate_matrix(phi) * wdot;
    rate.tail(m) = u;
    return rate;
  };

  VecX x_eq(2 * n);
  x_eq.setZero();
  x_eq.head<3>() = solution_->phi;
  x_eq.segment(3, m) = solution_->theta;
  const double eps = 1e-4;

  MatX a_fd(2 * n, 2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    VecX xp = x_eq, xm = x_eq;
    xp[j] += eps;
    xm[j] -= eps;
    a_fd.col(j) = (state_rate(xp, VecX::Zero(m)) - state_rate(xm, VecX::Zero(m))) / (2 * eps);
  }
  EXPECT_LT((a_fd - sys.a).cwiseAbs().maxCoeff(), 1e-9);

  MatX b_fd(2 * n, m);
  for (int k = 0; k < m; ++k) {
    VecX up = VecX::Zero(m), um = VecX::Zero(m);
    up[k] += eps;
    um[k] -= eps;
    b_fd.col(k) = (state_rate(x_eq, up) - state_rate(x_eq, um)) / (2 * eps);
  }
  EXPECT_LT((b_fd - sys.b).cwiseAbs().maxCoeff(), 1e-9);
}

TEST_F(CanonicalDesign, LqrStabilizesTheCoupledLinearization) {
  const double pressure = radiation_pressure(fixture_environment());
  const double omega_n = natural_frequency(solution_->spectrum);
  const LinearizedSystem sys = linearize(*model_, solution_->phi, solution_->theta, pressure);
  const LqrWeights weights = default_weights(omega_n, model_->joint_count());
  const MatX q = MatX(weights.state.asDiagonal());
  const MatX r = MatX(weights.input.asDiagonal());

  const LqrGain gain = solve_lqr(sys.a, sys.b, q, r);
  EXPECT_LE(gain.residual, 1e-8 * std::max(1.0, q.norm()));

  const MatX x = gain.riccati_solution;
  EXPECT_LT((x - x.transpose()).cwiseAbs().maxCoeff(), 1e-9 * x.norm());
  const Eigen::SelfAdjointEigenSolver<MatX> xeig(x);
  EXPECT_GE(xeig.eigenvalues().minCoeff(), -1e-8 * xeig.eigenvalues().maxCoeff());

  const MatX acl = sys.a - sys.b * gain.k;
  const Eigen::EigenSolver<MatX> eig(acl);
  const double abscissa = eig.eigenvalues().real().maxCoeff();
  EXPECT_LT(abscissa, -0.1 * omega_n);  // frozen run: -0.159 * omega_n
  EXPECT_GT(abscissa, -10.0 * omega_n);
}

}  // namespace
}  // namespace foldsail
