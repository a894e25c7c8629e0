#pragma once

#include <array>

#include "mqc/core.hpp"

/// Delta-pulse kicks and their decomposition into harmonics of the pulse phase.
namespace mqc::pulses {

/// Superoperator on single-atom operators, acting on the column-major vectorization.
using AtomSuperoperator = Eigen::Matrix<cplx, 16, 16>;

inline constexpr int kMaxHarmonic = 2;
inline constexpr int kPhaseSamples = 2 * kMaxHarmonic + 1;

struct PulseSpec {
  double area = 0.0;  ///< theta [rad]
  CVec3 polarization = CVec3::UnitX();
  int index = 1;
  bool ground_restricted = false;

  void validate() const;

  static PulseSpec first(double area, const CVec3& polarization);
  static PulseSpec second(double area, const CVec3& polarization);
};

/// exp(-i theta M / 2) with M = S^dag e^{i phi} + S e^{-i phi}, S = D . eps^*.
AtomOperator kick_unitary(double area, const CVec3& polarization, double phi);

/// Heisenberg kick X -> U^dag X U as a superoperator.
AtomSuperoperator kick_superoperator(double area, const CVec3& polarization, double phi);

/// R(phi) = sum_l e^{i l phi} R^[l].
///
/// For a ground-restricted pulse the harmonics act as
/// R^[l](X) = Tr(rho^[l] X) I, where rho^[l] are the harmonics of the prepared
/// state U(phi)|g><g|U(phi)^dag; only |l| <= 1 occur.
class KickHarmonics {
 public:
  KickHarmonics(double area, const CVec3& polarization, bool ground_restricted);
  explicit KickHarmonics(const PulseSpec& spec);

  const AtomSuperoperator& operator[](int l) const;
  AtomOperator apply(int l, const AtomOperator& x) const;
  AtomSuperoperator reassemble(double phi) const;

  bool ground_restricted() const { return ground_restricted_; }
  /// Harmonics of U|g><g|U^dag (only meaningful for ground-restricted kicks, but
  /// always available).
  const AtomOperator& prepared_state(int l) const;

 private:
  bool ground_restricted_;
  std::array<AtomSuperoperator, kPhaseSamples> harmonics_;
  std::array<AtomOperator, kPhaseSamples> state_;
};

/// Harmonic l of f(phi) sampled at phi_k = 2 pi k / 5. Exact for trigonometric
/// polynomials of degree <= 2.
template <class T>
T five_point_harmonic(const std::array<T, kPhaseSamples>& samples, int l) {
  T acc = samples[0] * cplx(0.0);
  for (int k = 0; k < kPhaseSamples; ++k) {
    const double phi = 2.0 * kPi * k / kPhaseSamples;
    acc += samples[k] * std::exp(cplx(0.0, -l * phi));
  }
  return acc / cplx(kPhaseSamples);
}

/// (R_a (x) R_b) Y for a two-atom operator Y.
PairOperator apply_pair_kick(const AtomSuperoperator& atom1, const AtomSuperoperator& atom2,
                             const PairOperator& y);

/// theta = (2 d / hbar) E0 sigma sqrt(2 pi) for a Gaussian envelope of rms duration sigma [s].
double area_from_gaussian(double field_amplitude, double sigma, double dipole_moment);

/// Inverse of area_from_gaussian: the product E0 d [J] giving pulse area theta.
double field_dipole_product_from_area(double area, double sigma);

}  // namespace mqc::pulses
