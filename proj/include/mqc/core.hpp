#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mqc {

using cplx = std::complex<double>;

/// Operator on the four-level space of a single atom, basis order {g, e_x, e_y, e_z}.
using AtomOperator = Eigen::Matrix<cplx, 4, 4>;

/// Operator on the two-atom space. Row/column index is 4 * a1 + a2 (atom 1 major).
using PairOperator = Eigen::Matrix<cplx, 16, 16>;

using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using CMat3 = Eigen::Matrix3cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

namespace constants {
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K
inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s
}  // namespace constants

/// A quadrature or iteration failed its convergence guard.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A resolvent was evaluated at (or too close to) an eigenvalue of the relaxation generator.
class SingularResolventError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws std::invalid_argument unless |v| = 1 to within `tol`.
void require_unit(const Vec3& v, const std::string& what, double tol = 1e-12);
void require_unit(const CVec3& v, const std::string& what, double tol = 1e-12);

}  // namespace mqc
