#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mqc/averaging.hpp"
#include "mqc/hilbert.hpp"
#include "mqc/liouville.hpp"
#include "mqc/scattering.hpp"

/// Demodulated kappa-QC spectra, peak amplitudes, the closed-form peak table,
/// pulse-area scans and the time-domain check.
///
/// Detunings are (omega - kappa omega0) / gamma. Spectra are in units of
/// f^2/gamma^2, peak amplitudes in units of f^2/(sqrt(2 pi) gamma^2).
namespace mqc::spectra {

using scattering::Polarization;

struct SignalSpec {
  int kappa = 1;
  Polarization polarization = Polarization::parallel;
  Vec3 k_hat = Vec3::UnitY();

  void validate() const;
  std::string label() const;  ///< e.g. "P_1_y_par"
};

struct SpectrumOptions {
  liouville::TensorMode mode = liouville::TensorMode::far_field;
  bool include_single = true;
  bool include_double = true;
  int polar_order = 16;
  int azimuthal_order = 32;
  double permutation_prefactor = hilbert::kAtomPermutationPrefactor;
};

/// The configuration-averaged image as a sum of poles in z1 (units of gamma),
/// ready for exact Doppler convolution.
class SignalModel {
 public:
  SignalModel() = default;
  /// `reference` sets the scale for the check that no eigenvalue-0 pole survives.
  SignalModel(SignalSpec spec, scattering::PoleExpansion image, double permutation_prefactor,
              double reference = 1.0);

  /// sum_{s,k} c_{s,k} E[(s/2 + i(delta - sum Delta))^{-k}] with the sum of
  /// kappa Doppler shifts of rms sigma each.
  cplx raw(double detuning, double sigma) const;
  /// Spectral density in f^2/gamma^2.
  cplx spectral_density(double detuning, double sigma) const;
  /// Re of the spectrum at resonance in f^2/(sqrt(2 pi) gamma^2).
  double peak(double sigma) const;

  const SignalSpec& spec() const { return spec_; }
  const scattering::PoleExpansion& image() const { return image_; }

 private:
  SignalSpec spec_;
  scattering::PoleExpansion image_;
  double prefactor_ = hilbert::kAtomPermutationPrefactor;
};

/// Orientation average of t_a conj(t_b) for the phase-free coupling amplitude
/// at xi. `doubling_change`, if given, receives the relative change of the
/// order-doubling guard.
scattering::TensorMoments averaged_tensor_moments(liouville::TensorMode mode, double xi,
                                                   int polar_order = 16, int azimuthal_order = 32,
                                                   double* doubling_change = nullptr);

SignalModel build_signal_model(const SignalSpec& spec, double theta, double xi_bar,
                               const SpectrumOptions& options = {});

struct SpectrumResult {
  std::vector<double> detuning;  ///< (omega - kappa omega0) / gamma
  std::vector<cplx> values;      ///< f^2/gamma^2
  SignalSpec spec;
  double theta = 0.0;
  liouville::PhysicalParams params;
};

/// 801 points over +-8 Delta_bar sqrt(kappa) (at least +-8 gamma sqrt(kappa)).
std::vector<double> default_detuning_grid(int kappa, const liouville::PhysicalParams& params,
                                          int points = 801);

SpectrumResult spectrum(const SignalSpec& spec, double theta,
                        const liouville::PhysicalParams& params,
                        const std::vector<double>& detuning,
                        const SpectrumOptions& options = {});

double peak_amplitude(const SignalSpec& spec, double theta, const liouville::PhysicalParams& params,
                      const SpectrumOptions& options = {});

/// V(x) = sqrt(pi/2) x exp(x^2/2) erfc(x/sqrt(2)).
double voigt_V(double x);

enum class Table1Variant {
  corrected,   ///< 1QC y-par row with V(gamma / (2 Delta_bar))
  as_printed,  ///< 1QC y-par row with V(gamma / (sqrt(2) Delta_bar))
};

/// Closed-form leading-order peak amplitude. gamma and Delta_bar in the same units.
double table1_peak(const SignalSpec& spec, double theta, double gamma, double doppler_rms,
                   double xi_bar, Table1Variant variant = Table1Variant::corrected);

/// The six rows of the peak table.
std::vector<SignalSpec> table1_rows();

/// The five scanned signals: P_1_x_par, P_1_y_par, P_2_x_par, P_2_y_par, P_2_perp.
std::vector<SignalSpec> scan_signals();

struct HarmonicExpansion {
  std::vector<double> coefficients;  ///< A_n, n = 0..n_max
  double residual = 0.0;             ///< max reconstruction error / max |f|
};

/// A(theta) = sum_n A_n cos(n theta / 2) by trapezoid projection over [0, 4 pi).
HarmonicExpansion harmonic_coefficients(const std::function<double(double)>& peak_fn, int n_max,
                                        int samples = 0);

struct PeakScan {
  std::vector<double> theta;
  std::vector<SignalSpec> signals;
  std::vector<std::vector<double>> values;  ///< values[signal][theta index]
};

PeakScan peak_scan(const std::vector<double>& theta, const liouville::PhysicalParams& params,
                   const SpectrumOptions& options = {},
                   const std::vector<SignalSpec>& signals = scan_signals(), int jobs = 1);

/// Scales each curve to max |P| = 1, keeping its sign.
std::vector<double> normalized(const std::vector<double>& values);

/// Spectrum of one configuration: fixed Doppler shifts (units of gamma), fixed
/// distance xi and direction n, no orientation or velocity average. The
/// position-average selection rules (p = 0, l + m = 0) are still applied.
SpectrumResult single_config_spectrum(double delta1, double delta2, double xi, const Vec3& n_hat,
                                      const SignalSpec& spec, double theta,
                                      const std::vector<double>& detuning,
                                      const SpectrumOptions& options = {});

/// Total fluorescence (kappa = 0, single atom) after a pulse pair with phases
/// phi1, phi2 and delay tau (units of 1/gamma), integrated over the fluorescence interval.
double time_domain_yield(const scattering::ChannelConfig& channel, double tau, double phi1,
                         double phi2);

struct OracleOptions {
  double fluorescence_horizon = 40.0;  ///< 1/gamma
  double delay_horizon = 60.0;         ///< 1/gamma
  double step = 0.01;                  ///< 1/gamma
};

/// Single-scattering 1QC spectrum from literal time integration: fluorescence
/// integrated with e^{L t} on a grid, harmonics extracted over pulse phases,
/// and a numerical Fourier transform over the delay.
SpectrumResult time_domain_oracle(const scattering::ChannelConfig& channel, double delta1,
                                  const std::vector<double>& detuning,
                                  const OracleOptions& options = {},
                                  double permutation_prefactor = hilbert::kAtomPermutationPrefactor);

/// Full width at half maximum of f around its maximum at x = 0 (f(0) > 0).
double fwhm(const std::function<double(double)>& f, double scale);

}  // namespace mqc::spectra
