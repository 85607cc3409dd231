#include <benchmark/benchmark.h>

#include <numbers>

#include <foldsail/dynamics.hpp>
#include <foldsail/jacobians.hpp>
#include <foldsail/model.hpp>
#include <foldsail/sim.hpp>
#include <foldsail/srp.hpp>

namespace {

using namespace foldsail;

const MultibodyModel& model() {
  static const MultibodyModel m = canonical_model();
  return m;
}

VecX bench_theta() {
  VecX theta(model().joint_count());
  theta << 0.3, -0.45, 0.8, -0.2, 0.55, -0.7, 0.25, -0.15;
  return theta;
}

const Vec3 kPhi(0.2, -0.1, 0.35);
constexpr double kPressure = 4.4667047744405026e-06;

void BM_ForwardKinematics(benchmark::State& state) {
  const VecX theta = bench_theta();
  for (auto _ : state) benchmark::DoNotOptimize(forward_kinematics(model(), theta));
}
BENCHMARK(BM_ForwardKinematics);

void BM_TotalWrench(benchmark::State& state) {
  const Kinematics kin = forward_kinematics(model(), bench_theta());
  for (auto _ : state)
    benchmark::DoNotOptimize(total_wrench(model(), kin, kPhi, kPressure));
}
BENCHMARK(BM_TotalWrench);

void BM_WrenchJacobian(benchmark::State& state) {
  const Kinematics kin = forward_kinematics(model(), bench_theta());
  for (auto _ : state)
    benchmark::DoNotOptimize(wrench_jacobian(model(), kin, kPhi, kPressure));
}
BENCHMARK(BM_WrenchJacobian);

void BM_MassBlocks(benchmark::State& state) {
  const Kinematics kin = forward_kinematics(model(), bench_theta());
  for (auto _ : state) benchmark::DoNotOptimize(assemble_mass_blocks(model(), kin));
}
BENCHMARK(BM_MassBlocks);

void BM_ForwardDynamics(benchmark::State& state) {
  const VecX theta = bench_theta();
  const Vec3 omega(1e-3, -2e-3, 4e-4);
  const VecX theta_dot = VecX::Constant(theta.size(), 1e-3);
  const Vec3 torque(1e-6, -2e-6, 5e-7);
  const VecX u = VecX::Zero(theta.size());
  for (auto _ : state)
    benchmark::DoNotOptimize(forward_dynamics(model(), theta, omega, theta_dot, torque, u));
}
BENCHMARK(BM_ForwardDynamics);

void BM_SimDerivative(benchmark::State& state) {
  const int m = model().joint_count();
  SimState y0;
  y0.phi = kPhi * 0.05;
  y0.omega = Vec3(1e-4, -5e-5, 2e-4);
  y0.theta = bench_theta() * 0.1;
  y0.theta_dot = VecX::Constant(m, 1e-4);
  const VecX y = y0.pack();
  const VecX u = VecX::Zero(m);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        sim_derivative(model(), y, u, kPressure, WrenchModel::full_faces));
}
BENCHMARK(BM_SimDerivative);

}  // namespace

BENCHMARK_MAIN();
