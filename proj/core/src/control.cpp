#include "foldsail/control.hpp"

#include <cmath>

#include "foldsail/dynamics.hpp"
#include "foldsail/jacobians.hpp"

namespace foldsail {
namespace {

MatX care_residual(const MatX& a, const MatX& s, const MatX& q, const MatX& x) {
  return a.transpose() * x + x * a - x * s * x + q;
}

/// Solves the Lyapunov equation ac' d + d ac = rhs through the Kronecker
/// normal equations; sizes here stay small (n <= a few dozen).
MatX solve_lyapunov(const MatX& ac, const MatX& rhs) {
  const int n = static_cast<int>(ac.rows());
  const MatX eye = MatX::Identity(n, n);
  MatX kron(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      kron.block(i * n, j * n, n, n) =
          ac.transpose()(i, j) * eye;  // I (x) ac' acting on column-stacked d
  for (int i = 0; i < n; ++i)
    kron.block(i * n, i * n, n, n) += ac.transpose();
  VecX vec_rhs(n * n);
  for (int j = 0; j < n; ++j) vec_rhs.segment(j * n, n) = rhs.col(j);
  const VecX vec_d = kron.partialPivLu().solve(vec_rhs);
  MatX d(n, n);
  for (int j = 0; j < n; ++j) d.col(j) = vec_d.segment(j * n, n);
  return 0.5 * (d + d.transpose());
}

void check_stabilizable(const MatX& a, const MatX& b) {
  const int n = static_cast<int>(a.rows());
  const Eigen::EigenSolver<MatX> es(a);
  for (int i = 0; i < n; ++i) {
    const std::complex<double> lam = es.eigenvalues()[i];
    if (lam.real() < -1e-12) continue;
    Eigen::MatrixXcd pencil(n, n + b.cols());
    pencil.leftCols(n) = a.cast<std::complex<double>>();
    pencil.leftCols(n).diagonal().array() -= lam;
    pencil.rightCols(b.cols()) = b.cast<std::complex<double>>();
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
    const double smin = svd.singularValues()(n - 1);
    const double smax = svd.singularValues()(0);
    if (smin <= 1e-10 * std::max(1.0, smax))
      throw SolveError("uncontrollable mode on the closed right half plane (eigenvalue " +
                       std::to_string(lam.real()) + (lam.imag() < 0 ? " - " : " + ") +
                       std::to_string(std::abs(lam.imag())) + "i)");
  }
}

}  // namespace

LinearizedSystem linearize(const MultibodyModel& model, const Vec3& phi, const VecX& theta,
                           double pressure) {
  const int m = model.joint_count();
  const int n = 3 + m;
  const Kinematics kin = forward_kinematics(model, theta);
  const MassMatrixBlocks blocks = assemble_mass_blocks(model, kin);
  const WrenchJacobian jac = wrench_jacobian(model, kin, phi, pressure, SurfaceSet::sunlit_faces);
  const Mat3 rate_map = euler_rate_matrix(phi);
  const auto solve_rot = blocks.rotational.ldlt();

  LinearizedSystem sys;
  sys.a = MatX::Zero(2 * n, 2 * n);
  sys.b = MatX::Zero(2 * n, m);
  sys.a.topRightCorner(n, n).setIdentity();
  // photon torque restores attitude; at zero rates the Euler-rate kinematics
  // contribute only through the rate map
  sys.a.block(n, 0, 3, 3) = rate_map * solve_rot.solve(jac.torque_attitude);
  sys.a.block(n, 3, 3, m) = rate_map * solve_rot.solve(jac.torque_joint);
  sys.b.block(n, 0, 3, m) = -rate_map * solve_rot.solve(blocks.rot_joint);
  sys.b.bottomRows(m).setIdentity();
  return sys;
}

LqrWeights default_weights(double omega_n, int joint_count, double angle_scale) {
  if (!(omega_n > 0.0)) throw ValidationError("LQR weights need a positive natural frequency");
  if (!(angle_scale > 0.0)) throw ValidationError("LQR weights need a positive angle scale");
  const int n = 3 + joint_count;
  LqrWeights w;
  w.state = VecX::Zero(2 * n);
  w.input = VecX::Zero(joint_count);
  const double rate_scale = omega_n * angle_scale;
  const double accel_scale = omega_n * omega_n * angle_scale;
  w.state.head(n).setConstant(1.0 / (angle_scale * angle_scale));
  w.state.tail(n).setConstant(1.0 / (rate_scale * rate_scale));
  w.input.setConstant(1.0 / (accel_scale * accel_scale));
  return w;
}

double natural_frequency(const SpectrumInfo& spectrum) {
  const double omega = -spectrum.objective;
  if (!(omega > 0.0))
    throw SolveError("equilibrium spectrum carries no oscillatory mode");
  return omega;
}

LqrGain solve_lqr(const MatX& a, const MatX& b, const MatX& q, const MatX& r) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.cols());
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != m ||
      r.cols() != m)
    throw ValidationError("LQR matrices have inconsistent shapes");
  if (!q.isApprox(q.transpose(), 1e-10))
    throw ValidationError("LQR state weight must be symmetric");
  if (!r.isApprox(r.transpose(), 1e-10))
    throw ValidationError("LQR input weight must be symmetric");
  const Eigen::LLT<MatX> r_chol(r);
  if (r_chol.info() != Eigen::Success)
    throw ValidationError("LQR input weight must be positive definite");
  check_stabilizable(a, b);

  const MatX s = b * r_chol.solve(b.transpose());

  // Roberts' method: the sign of the Hamiltonian exposes its stable subspace.
  MatX ham(2 * n, 2 * n);
  ham.topLeftCorner(n, n) = a;
  ham.topRightCorner(n, n) = -s;
  ham.bottomLeftCorner(n, n) = -q;
  ham.bottomRightCorner(n, n) = -a.transpose();

  MatX z = ham;
  for (int it = 0; it < 100; ++it) {
    const double scale =
        std::pow(std::abs(z.partialPivLu().determinant()), -1.0 / (2.0 * n));
    const MatX zs = (std::isfinite(scale) && scale > 0.0) ? MatX(scale * z) : z;
    const MatX next = 0.5 * (zs + zs.partialPivLu().inverse());
    const double change = (next - z).norm() / std::max(1.0, z.norm());
    z = next;
    if (change < 1e-14) break;
  }

  // (z + I) [I; X] = 0 across both block rows, solved jointly in least squares
  MatX lhs(2 * n, n), rhs(2 * n, n);
  lhs.topRows(n) = z.topRightCorner(n, n);
  lhs.bottomRows(n) = z.bottomRightCorner(n, n) + MatX::Identity(n, n);
  rhs.topRows(n) = -(z.topLeftCorner(n, n) + MatX::Identity(n, n));
  rhs.bottomRows(n) = -z.bottomLeftCorner(n, n);
  MatX x = lhs.colPivHouseholderQr().solve(rhs);
  x = 0.5 * (x + x.transpose());

  // Newton (Kleinman) refinement: each step solves a Lyapunov equation in the
  // current closed-loop matrix and is quadratically convergent near x.
  double res_norm = care_residual(a, s, q, x).norm();
  for (int it = 0; it < 10; ++it) {
    const MatX ac = a - s * x;
    const MatX delta = solve_lyapunov(ac, -care_residual(a, s, q, x));
    const MatX x_next = x + delta;
    const double next_norm = care_residual(a, s, q, x_next).norm();
    if (!(next_norm < res_norm)) break;
    x = 0.5 * (x_next + x_next.transpose());
    res_norm = next_norm;
    if (res_norm < 1e-12 * std::max(1.0, q.norm())) break;
  }

  LqrGain gain;
  gain.k = r_chol.solve(b.transpose() * x);
  gain.riccati_solution = x;
  gain.residual = res_norm;

  const Eigen::SelfAdjointEigenSolver<MatX> xe(x);
  if (xe.eigenvalues().minCoeff() < -1e-8 * std::max(1.0, xe.eigenvalues().maxCoeff()))
    throw SolveError("Riccati solution is not positive semidefinite");
  const Eigen::EigenSolver<MatX> cle(a - b * gain.k);
  if (cle.eigenvalues().real().maxCoeff() >= 0.0)
    throw SolveError("LQR closed loop is not strictly stable");
  return gain;
}

}  // namespace foldsail
