#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace foldsail {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Model or configuration rejected by a validity check.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A solver failed to reach its convergence / feasibility contract.
class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

/// Attitude representation left its valid chart (|phi2| at or beyond the guard).
class GimbalLockError : public std::runtime_error {
 public:
  explicit GimbalLockError(const std::string& what) : std::runtime_error(what) {}
};

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return s;
}

}  // namespace foldsail
