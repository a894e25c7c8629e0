#pragma once

#include <functional>
#include <sstream>
#include <vector>

#include "mqc/core.hpp"

/// Configuration averages: isotropic orientation quadrature, Maxwell-Boltzmann
/// Doppler averages and Lorentzian-Gaussian convolutions.
namespace mqc::averaging {

/// Nodes and weights of a Gauss rule for the weight of its Jacobi matrix,
/// computed by Golub-Welsch.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre on [-1, 1], weights summing to 2.
GaussRule gauss_legendre(int order);

/// Gauss-Hermite for the standard normal density, weights summing to 1.
GaussRule gauss_hermite_normal(int order);

struct SphereQuadrature {
  std::vector<Vec3> nodes;
  std::vector<double> weights;  ///< sum to 1
  int polar_order = 0;
  int azimuthal_order = 0;

  /// Gauss-Legendre in cos(theta) times uniform trapezoid in phi.
  static SphereQuadrature product(int polar_order = 16, int azimuthal_order = 32);
};

inline constexpr double kOrientationTolerance = 1e-9;

template <class T>
T sphere_sum(const SphereQuadrature& q, const std::function<T(const Vec3&)>& fn) {
  T acc = fn(q.nodes[0]) * q.weights[0];
  for (std::size_t k = 1; k < q.nodes.size(); ++k) acc += fn(q.nodes[k]) * q.weights[k];
  return acc;
}

namespace detail {
inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const cplx& v) { return std::abs(v); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& v) {
  return v.cwiseAbs().maxCoeff();
}
}  // namespace detail

template <class T>
struct CheckedAverage {
  T value;
  double change = 0.0;  ///< |fine - base| after doubling both orders
  double scale = 0.0;   ///< |fine|
};

/// Isotropic average of fn over the unit sphere, evaluated at the given orders
/// and at doubled orders. Throws ConvergenceError if the doubling changes the
/// result by more than `tolerance` relative.
template <class T>
CheckedAverage<T> orientation_average_checked(const std::function<T(const Vec3&)>& fn,
                                              int polar_order = 16, int azimuthal_order = 32,
                                              double tolerance = kOrientationTolerance) {
  const T base = sphere_sum<T>(SphereQuadrature::product(polar_order, azimuthal_order), fn);
  const T fine =
      sphere_sum<T>(SphereQuadrature::product(2 * polar_order, 2 * azimuthal_order), fn);
  CheckedAverage<T> out{fine, detail::magnitude(T(fine - base)), detail::magnitude(fine)};
  if (out.change > tolerance * out.scale && out.change > 1e-300) {
    std::ostringstream os;
    os << "orientation average not converged: doubling the sphere orders changed the result by "
       << out.change << " (scale " << out.scale << ")";
    throw ConvergenceError(os.str());
  }
  return out;
}

template <class T>
T orientation_average(const std::function<T(const Vec3&)>& fn, int polar_order = 16,
                      int azimuthal_order = 32, double tolerance = kOrientationTolerance) {
  return orientation_average_checked<T>(fn, polar_order, azimuthal_order, tolerance).value;
}

/// Delta_bar = k sqrt(kB T / M) [rad/s] with k = 2 pi / lambda.
double maxwell_boltzmann_sigma(double temperature, double mass, double wavelength);

struct DopplerModel {
  double sigma = 0.0;  ///< Delta_bar, in the same units as the lineshape argument
  int order = 64;      ///< Gauss-Hermite order
};

/// Gaussian average of a lineshape L(delta - sum Delta). kappa = 2 uses a
/// single Gaussian of width sqrt(2) sigma. The returned function checks the
/// order-doubling guard (1e-8 relative) at every evaluation.
std::function<cplx(double)> voigt_convolve(std::function<cplx(double)> lineshape, int kappa,
                                           const DopplerModel& model);

/// Explicit two-dimensional product rule for kappa = 2 (reference for the collapsed form).
cplx doppler_average_2d(const std::function<cplx(double)>& lineshape, double detuning,
                        const DopplerModel& model);

/// Faddeeva function w(z) = exp(-z^2) erfc(-i z) for Im z >= 0.
cplx faddeeva(cplx z);

/// exp(x^2) erfc(x) for x >= 0, finite for large x.
double erfcx(double x);

/// E[(a + i(delta - Delta))^{-k}] over Delta ~ N(0, sigma^2), for a > 0 and
/// k = 1, 2, 3. sigma = 0 gives the unaveraged value.
cplx lorentzian_moment(int k, double a, double delta, double sigma);

}  // namespace mqc::averaging
