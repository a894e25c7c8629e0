#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "mqc/core.hpp"

/// Superoperators on the 256-dimensional two-atom operator space, written in
/// the Heisenberg convention (they act on observables).
namespace mqc::liouville {

inline constexpr int kSpaceDim = 256;

/// Linear map on two-atom operators. Stored as a sparse matrix acting on the
/// column-major vectorization of a PairOperator.
class Superoperator {
 public:
  using Matrix = Eigen::SparseMatrix<cplx>;

  Superoperator();
  Superoperator(std::string name, Matrix matrix, int phase_increment = 0);

  PairOperator operator()(const PairOperator& x) const;

  const Matrix& matrix() const { return matrix_; }
  const std::string& name() const { return name_; }
  /// Net power of e^{+i xi} removed from this generator: -1 for the part
  /// proportional to e^{-i xi}, +1 for e^{+i xi}, 0 otherwise.
  int phase_increment() const { return phase_increment_; }

  Superoperator operator+(const Superoperator& other) const;
  Superoperator scaled(cplx factor) const;

  /// vec(A X B) = (B^T (x) A) vec(X)
  static Matrix sandwich(const PairOperator& left, const PairOperator& right);
  static Matrix left_multiply(const PairOperator& left);
  static Matrix right_multiply(const PairOperator& right);

 private:
  std::string name_;
  Matrix matrix_;
  int phase_increment_ = 0;
};

/// L_gamma = L_gamma^1 + L_gamma^2 with
/// L_gamma^a Q = (gamma/2) (D_a^dag . [Q, D_a] + [D_a^dag, Q] . D_a).
Superoperator relaxation_generator(double gamma = 1.0);

// -- decay sectors -----------------------------------------------------------
//
// L_gamma is diagonal in the basis {I, |g><e_i|, |e_i><g|, |e_i><e_j|} of each
// atom. The sector of a basis element counts its decaying factors: coherences
// count 1, excited dyads count 2, the identity 0. Sector s has eigenvalue
// -s gamma / 2, s = 0..4.

inline constexpr int kSectorCount = 5;

inline double sector_eigenvalue(int sector, double gamma = 1.0) { return -0.5 * gamma * sector; }

/// Coordinates of x in the decay eigenbasis (same 16x16 layout; the entry at
/// (g g, g g) holds the identity coefficient).
PairOperator to_decay_basis(const PairOperator& x);
PairOperator from_decay_basis(const PairOperator& y);

/// Sector index of every entry of the decay-basis layout.
const Eigen::Matrix<int, 16, 16>& sector_table();

/// Spectral projection of x onto one decay sector.
PairOperator sector_projection(const PairOperator& x, int sector);

/// (z - L_gamma)^{-1} x, computed by entrywise division in the decay basis.
/// Throws SingularResolventError if z lies within 1e-9 gamma of an eigenvalue.
PairOperator resolvent_apply(cplx z, const PairOperator& x, double gamma = 1.0);

/// lim_{z->0} of the resolvent restricted to decaying sectors, i.e. the time
/// integral of e^{L_gamma t} x over [0, inf). The zero sector must be absent
/// from x (checked to 1e-12 relative); otherwise the integral diverges.
PairOperator integrated_resolvent(const PairOperator& x, double gamma = 1.0);

// -- dipole-dipole coupling ----------------------------------------------------

enum class TensorMode { far_field, full };
enum class PhasePart { minus, plus };

/// T = Gamma + i Omega for a given scaled distance xi and direction n.
struct InteractionTensor {
  CMat3 value;
  TensorMode mode;
  double xi;
  Vec3 direction;

  Mat3 collective_decay() const { return value.real(); }
  Mat3 collective_shift() const { return value.imag(); }
};

InteractionTensor interaction_tensor(double xi, const Vec3& n_hat, TensorMode mode,
                                     double gamma = 1.0);

/// e^{+i xi} T(xi, n): the tensor with its oscillating phase removed.
CMat3 interaction_amplitude(double xi, const Vec3& n_hat, TensorMode mode, double gamma = 1.0);

/// The part of L_12 + L_21 carrying e^{-i xi} (minus: the T terms
/// D_a^dag . T . [Q, D_b]) or e^{+i xi} (plus: the T^* terms
/// [D_b^dag, Q] . T^* . D_a), with that phase stripped. `amplitude` is the
/// phase-free tensor; for the plus part its conjugate is used internally.
Superoperator interaction_generator(const CMat3& amplitude, PhasePart part);

Superoperator interaction_generator(const Vec3& n_hat, PhasePart part, TensorMode mode,
                                    double xi_bar, double gamma = 1.0);

// -- physical parameters -------------------------------------------------------

struct PhysicalParams {
  double gamma = 0.0;          ///< spontaneous decay rate [rad/s]
  double omega0 = 0.0;         ///< transition angular frequency [rad/s]
  double wavelength = 0.0;     ///< transition wavelength [m]
  double k0 = 0.0;             ///< transition wavenumber [1/m]
  double mass = 0.0;           ///< atomic mass [kg]
  double temperature = 0.0;    ///< [K]
  double mean_distance = 0.0;  ///< r_bar [m]
  double xi_bar = 0.0;         ///< k0 r_bar
  double doppler_rms = 0.0;    ///< Delta_bar [rad/s]

  /// Validates inputs and derives k0, omega0, xi_bar and Delta_bar. When
  /// `doppler_rms` is given it must agree with the Maxwell-Boltzmann value to
  /// 1e-10 relative.
  static PhysicalParams from_inputs(double temperature, double mass, double wavelength,
                                    double gamma, double mean_distance,
                                    std::optional<double> doppler_rms = std::nullopt);

  /// Rb D2-like parameter set with xi_bar = 80.
  static PhysicalParams paper_defaults();

  /// Same parameters with a different mean distance expressed through xi_bar.
  PhysicalParams with_xi_bar(double xi) const;
  /// Overrides Delta_bar, e.g. for the immobile-atom limit.
  PhysicalParams with_doppler_rms(double rms) const;

  double doppler_over_gamma() const { return doppler_rms / gamma; }

  /// Soft validity notes (far field below xi_bar = 10).
  std::vector<std::string> warnings() const;
};

/// r_bar = 0.554 n^{-1/3} for a number density n [1/m^3].
double mean_distance_from_density(double density);

}  // namespace mqc::liouville
