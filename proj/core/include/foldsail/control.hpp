#pragma once

#include "foldsail/equilibrium.hpp"
#include "foldsail/model.hpp"
#include "foldsail/srp.hpp"
#include "foldsail/types.hpp"

namespace foldsail {

/// Linear model xdot = a x + b u about an equilibrium, with state
/// x = [dphi(3); dtheta(m); dphidot(3); dthetadot(m)] and input
/// u = joint accelerations (m). Rows 1-2 are identity couplings, row 3 the
/// photon-torque dynamics, row 4 zero (the input drives it directly).
struct LinearizedSystem {
  MatX a;
  MatX b;
};

LinearizedSystem linearize(const MultibodyModel& model, const Vec3& phi,
                           const VecX& theta, double pressure);

/// Diagonal LQR weights from per-class deviation scales: angles at
/// `angle_scale`, rates at omega_n * angle_scale, accelerations at
/// omega_n^2 * angle_scale. Entries are inverse squares.
struct LqrWeights {
  VecX state;  ///< diagonal of Q, length 6+2m
  VecX input;  ///< diagonal of R, length m
};

LqrWeights default_weights(double omega_n, int joint_count,
                           double angle_scale = 0.017453292519943295);

/// Oscillation rate of the equilibrium restoring spectrum, |objective|.
/// Throws SolveError when the spectrum carries no oscillatory mode.
double natural_frequency(const SpectrumInfo& spectrum);

struct LqrGain {
  MatX k;                    ///< u = -k x
  MatX riccati_solution;     ///< symmetric PSD
  double residual = 0.0;     ///< ||A'X + XA - XBR^-1B'X + Q||_F
};

/// Continuous-time LQR via the matrix sign function with Newton refinement
/// of the Riccati residual. Checks stabilizability (PBH test on the
/// closed right half plane) and throws SolveError on failure.
LqrGain solve_lqr(const MatX& a, const MatX& b, const MatX& q, const MatX& r);

}  // namespace foldsail
