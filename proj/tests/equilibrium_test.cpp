#include <foldsail/equilibrium.hpp>

#include <gtest/gtest.h>

#include <cmath>

#include "test_fixtures.hpp"

namespace foldsail {
namespace {

using testing::fixture_environment;
using testing::fixture_force_target;

TEST(EquilibriumTest, SpectrumFrozenValues) {
  Mat3 a = Vec3(-1e-7, -4e-8, 0.0).asDiagonal();
  SpectrumInfo info = spectrum_objective(a);
  EXPECT_NEAR(info.objective, -0.00031622776601683794, 1e-19);
  EXPECT_NEAR(info.constraint, 0.0, 1e-19);

  a = Vec3(1e-8, -1e-8, 0.0).asDiagonal();
  info = spectrum_objective(a);
  EXPECT_NEAR(info.objective, -0.0001, 1e-18);
  EXPECT_NEAR(info.constraint, 0.0001, 1e-18);
}

TEST(EquilibriumTest, SpectrumIsSimilarityInvariant) {
  const Mat3 d = Vec3(-2.5e-7, -9e-8, -1e-9).asDiagonal();
  Mat3 v;
  v << 1, 0.3, -0.2, 0.1, 1, 0.4, -0.3, 0.2, 1;
  const Mat3 a = v * d * v.inverse();
  const SpectrumInfo plain = spectrum_objective(d);
  const SpectrumInfo conj = spectrum_objective(a);
  EXPECT_NEAR(conj.objective, plain.objective, 1e-12);
  EXPECT_NEAR(conj.constraint, plain.constraint, 1e-12);
}

TEST(EquilibriumTest, InitialGuessFrozenValues) {
  const MultibodyModel model = canonical_model();
  const auto [phi, theta] =
      initial_guess(model, fixture_force_target(), 30.0 * std::numbers::pi / 180.0);
  EXPECT_NEAR(phi[0], 0.19739555984988075, 1e-15);
  EXPECT_NEAR(phi[1], -0.097745579733981569, 1e-15);
  EXPECT_NEAR(phi[2], 0.0, 1e-15);

  // the attitude points the root front normal against the target force
  const Vec3 u = -fixture_force_target().normalized();
  EXPECT_LT((dcm_from_euler(phi) * u - Vec3::UnitZ()).norm(), 1e-13);

  ASSERT_EQ(theta.size(), 8);
  for (int k = 0; k < 8; ++k) {
    EXPECT_NEAR(std::abs(theta[k]), 30.0 * std::numbers::pi / 180.0, 1e-15) << "joint " << k;
  }
}

TEST(EquilibriumTest, InitialGuessAppliesTheRequestedRoll) {
  const MultibodyModel model = canonical_model();
  const auto [phi, theta] =
      initial_guess(model, fixture_force_target(), 0.5, 0.3);
  EXPECT_NEAR(phi[2], 0.3, 1e-15);
  (void)theta;
}

TEST(EquilibriumTest, InitialGuessThrowsInTheChartSingularity) {
  const MultibodyModel model = canonical_model();
  // a force along -y needs the front normal at +y: pitch = -90 deg
  EXPECT_THROW(initial_guess(model, Vec3(0.0, -1e-5, 0.0), 0.5), GimbalLockError);
}

TEST(EquilibriumTest, UnreachableTargetThrows) {
  const MultibodyModel model = canonical_model();
  EquilibriumProblem problem;
  problem.force_target_inertial = Vec3(0.0, 0.0, -1e-3);  // far beyond 2*P*A
  try {
    solve_equilibrium(model, fixture_environment(), problem);
    FAIL() << "expected SolveError";
  } catch (const SolveError& e) {
    EXPECT_NE(std::string(e.what()).find("reachable"), std::string::npos) << e.what();
  }
}

TEST(EquilibriumTest, SolvesTheCanonicalTarget) {
  const MultibodyModel model = canonical_model();
  const Environment env = fixture_environment();
  EquilibriumProblem problem;
  problem.force_target_inertial = fixture_force_target();

  const EquilibriumSolution sol = solve_equilibrium(model, env, problem);
  ASSERT_TRUE(sol.converged) << sol.message;
  EXPECT_LE(sol.force_error, problem.tol_force);
  EXPECT_LE(sol.torque_error, problem.tol_torque);
  EXPECT_LE(sol.spectrum.constraint, problem.tol_spectrum);
  EXPECT_GT(sol.natural_frequency, 1e-4);
  EXPECT_LT(sol.natural_frequency, 1e-2);
  EXPECT_GE(sol.roll_attempts, 1);

  // bounds respected
  EXPECT_LE(std::abs(sol.phi[1]), 85.0 * std::numbers::pi / 180.0 + 1e-12);
  for (int k = 0; k < 8; ++k) {
    EXPECT_LE(sol.theta[k], model.joints[k].upper_limit + 1e-9) << "joint " << k;
    EXPECT_GE(sol.theta[k], model.joints[k].lower_limit - 1e-9) << "joint " << k;
  }

  // the reported wrench must be reproducible from the state it claims
  const Kinematics kin = forward_kinematics(model, sol.theta);
  const BodyWrench w = total_wrench(model, kin, sol.phi, radiation_pressure(env));
  const BodyWrench wi = wrench_to_inertial(w, sol.phi);
  EXPECT_LT((wi.force - sol.force_inertial).norm(), 1e-18);
  EXPECT_LT((wi.force - fixture_force_target()).norm(), problem.tol_force);
  EXPECT_LT(w.torque.norm(), problem.tol_torque);

  // frozen solution neighborhood (the solver is deterministic)
  const double deg = std::numbers::pi / 180.0;
  EXPECT_NEAR(sol.phi[0], 20.478 * deg, 0.5 * deg);
  EXPECT_NEAR(sol.phi[1], -4.569 * deg, 0.5 * deg);
  EXPECT_NEAR(sol.phi[2], -22.025 * deg, 0.5 * deg);
  EXPECT_NEAR(sol.natural_frequency, 6.1146e-4, 5e-6);
}

TEST(EquilibriumTest, PenaltyContinuationAlsoConverges) {
  const MultibodyModel model = canonical_model();
  EquilibriumProblem problem;
  problem.force_target_inertial = fixture_force_target();
  problem.penalty_fallback = true;

  const EquilibriumSolution sol =
      solve_equilibrium(model, fixture_environment(), problem);
  ASSERT_TRUE(sol.converged) << sol.message;
  EXPECT_LE(sol.force_error, problem.tol_force);
  EXPECT_LE(sol.torque_error, problem.tol_torque);
  EXPECT_NE(sol.message.find("penalty"), std::string::npos) << sol.message;
}

TEST(EquilibriumTest, StabilityMatrixDrivesTheReportedSpectrum) {
  const MultibodyModel model = canonical_model();
  const Environment env = fixture_environment();
  EquilibriumProblem problem;
  problem.force_target_inertial = fixture_force_target();
  const EquilibriumSolution sol = solve_equilibrium(model, env, problem);
  ASSERT_TRUE(sol.converged);

  const Kinematics kin = forward_kinematics(model, sol.theta);
  const Mat3 a_phi = stability_matrix(model, kin, sol.phi, radiation_pressure(env));
  const SpectrumInfo info = spectrum_objective(a_phi);
  EXPECT_EQ(info.objective, sol.spectrum.objective);
  EXPECT_EQ(sol.natural_frequency, std::abs(sol.spectrum.objective));
}

}  // namespace
}  // namespace foldsail
