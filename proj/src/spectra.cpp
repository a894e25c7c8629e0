#include "mqc/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "mqc/pulses.hpp"

namespace mqc::spectra {

using scattering::ChannelConfig;
using scattering::PoleExpansion;

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * kPi);

// Removes the eigenvalue-0 poles, which must be absent from every kappa >= 1
// image. `reference` is the natural size of the image (the coupling moments
// for double scattering) so that an image that vanishes identically passes.
PoleExpansion drop_static_poles(PoleExpansion image, double reference) {
  double static_part = 0.0;
  for (int k = 1; k <= scattering::kMaxPoleOrder; ++k)
    static_part = std::max(static_part, std::abs(image.coefficient(0, k)));
  if (static_part > 1e-12 * std::max(image.max_abs(), reference)) {
    std::ostringstream os;
    os << "non-decaying pole with weight " << static_part << " in a demodulated image";
    throw SingularResolventError(os.str());
  }
  for (int k = 1; k <= scattering::kMaxPoleOrder; ++k) image.coefficient(0, k) = 0.0;
  return image;
}

const char* axis_name(const Vec3& k) {
  if (k.isApprox(Vec3::UnitX())) return "x";
  if (k.isApprox(Vec3::UnitY())) return "y";
  if (k.isApprox(Vec3::UnitZ())) return "z";
  return "k";
}

using AtomSuper = pulses::AtomSuperoperator;

AtomSuper single_atom_relaxation() {
  // vec(A X B) = (B^T (x) A) vec(X)
  auto sandwich = [](const AtomOperator& a, const AtomOperator& b) {
    AtomSuper s;
    for (int c = 0; c < 4; ++c)
      for (int cp = 0; cp < 4; ++cp) s.block<4, 4>(4 * c, 4 * cp) = b(cp, c) * a;
    return s;
  };
  const auto& d = hilbert::dipole_operators();
  const AtomOperator id = AtomOperator::Identity();
  AtomSuper l = AtomSuper::Zero();
  for (int i = 0; i < 3; ++i) {
    const AtomOperator up = d.raising(i);
    const AtomOperator n = up * d.lowering[i];
    l += 2.0 * sandwich(up, d.lowering[i]) - sandwich(n, id) - sandwich(id, n);
  }
  return 0.5 * l;
}

AtomOperator unvec(const Eigen::Matrix<cplx, 16, 1>& v) {
  return Eigen::Map<const AtomOperator>(v.data());
}

Eigen::Matrix<cplx, 16, 1> vec(const AtomOperator& x) {
  return Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(x.data());
}

AtomOperator detection_on_atom(const Vec3& k_hat) {
  const auto& d = hilbert::dipole_operators();
  const Mat3 transverse = Mat3::Identity() - k_hat * k_hat.transpose();
  AtomOperator q = AtomOperator::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q += transverse(i, j) * d.raising(i) * d.lowering[j];
  return q;
}

// Simpson weights on n intervals (n even).
double simpson_weight(int j, int n, double h) {
  if (j == 0 || j == n) return h / 3.0;
  return (j % 2 ? 4.0 : 2.0) * h / 3.0;
}

int even_intervals(double horizon, double step) {
  int n = static_cast<int>(std::ceil(horizon / step));
  return n % 2 ? n + 1 : n;
}

// Integral over [0, horizon] of e^{L t} q.
AtomOperator integrated_fluorescence(const AtomOperator& q, double horizon, double step) {
  const AtomSuper l = single_atom_relaxation();
  const int n = even_intervals(horizon, step);
  const double h = horizon / n;
  const AtomSuper propagator = (l * h).exp();
  Eigen::Matrix<cplx, 16, 1> v = vec(q);
  Eigen::Matrix<cplx, 16, 1> acc = Eigen::Matrix<cplx, 16, 1>::Zero();
  for (int j = 0; j <= n; ++j) {
    acc += simpson_weight(j, n, h) * v;
    if (j < n) v = propagator * v;
  }
  // remaining tail relative to the integral
  if (v.norm() > 1e-10 * acc.norm())
    throw ConvergenceError("fluorescence horizon too short: relative tail above 1e-10");
  return unvec(acc);
}

}  // namespace

// -- SignalSpec ------------------------------------------------------------------

void SignalSpec::validate() const {
  if (kappa != 1 && kappa != 2) throw std::invalid_argument("kappa must be 1 or 2");
  require_unit(k_hat, "detection direction");
}

std::string SignalSpec::label() const {
  std::ostringstream os;
  os << "P_" << kappa << "_";
  if (polarization == Polarization::parallel)
    os << axis_name(k_hat) << "_par";
  else
    os << "perp";
  return os.str();
}

// -- SignalModel -----------------------------------------------------------------

SignalModel::SignalModel(SignalSpec spec, PoleExpansion image, double permutation_prefactor,
                         double reference)
    : spec_(std::move(spec)), image_(drop_static_poles(std::move(image), reference)),
      prefactor_(permutation_prefactor) {}

cplx SignalModel::raw(double detuning, double sigma) const {
  const double width = sigma * std::sqrt(static_cast<double>(spec_.kappa));
  cplx acc = 0.0;
  for (int s = 1; s < liouville::kSectorCount; ++s)
    for (int k = 1; k <= scattering::kMaxPoleOrder; ++k) {
      const cplx c = image_.coefficient(s, k);
      if (c == cplx(0.0)) continue;
      acc += c * averaging::lorentzian_moment(k, -liouville::sector_eigenvalue(s), detuning, width);
    }
  return acc;
}

cplx SignalModel::spectral_density(double detuning, double sigma) const {
  return prefactor_ * raw(detuning, sigma) / kSqrt2Pi;
}

double SignalModel::peak(double sigma) const { return prefactor_ * raw(0.0, sigma).real(); }

scattering::TensorMoments averaged_tensor_moments(liouville::TensorMode mode, double xi,
                                                   int polar_order, int azimuthal_order,
                                                   double* doubling_change) {
  std::function<scattering::TensorMoments(const Vec3&)> fn = [mode, xi](const Vec3& n) {
    return scattering::tensor_moments(liouville::interaction_amplitude(xi, n, mode));
  };
  const auto avg = averaging::orientation_average_checked<scattering::TensorMoments>(
      fn, polar_order, azimuthal_order);
  if (doubling_change) *doubling_change = avg.scale > 0.0 ? avg.change / avg.scale : 0.0;
  return avg.value;
}

SignalModel build_signal_model(const SignalSpec& spec, double theta, double xi_bar,
                               const SpectrumOptions& options) {
  spec.validate();
  const ChannelConfig channel = ChannelConfig::preset(spec.polarization, spec.k_hat, theta);
  PoleExpansion image;
  scattering::TensorMoments moments = scattering::TensorMoments::Zero();
  if (options.include_double)
    moments = averaged_tensor_moments(options.mode, xi_bar, options.polar_order,
                                      options.azimuthal_order);
  if (spec.kappa == 1) {
    if (options.include_single) image += scattering::single_scattering_expansion(channel, 1, 0);
    if (options.include_double) {
      image += scattering::double_scattering_kernel(channel, 1, 0).contract(moments);
      image += scattering::double_scattering_kernel(channel, 0, 1).contract(moments);
    }
  } else if (options.include_double) {
    image += scattering::double_scattering_kernel(channel, 1, 1).contract(moments);
  }
  const double reference = options.include_single ? 1.0 : moments.cwiseAbs().maxCoeff();
  return SignalModel(spec, image, options.permutation_prefactor, reference);
}

// -- spectra ---------------------------------------------------------------------

std::vector<double> default_detuning_grid(int kappa, const liouville::PhysicalParams& params,
                                          int points) {
  if (points < 2) throw std::invalid_argument("detuning grid needs at least two points");
  const double half = 8.0 * std::max(params.doppler_over_gamma(), 1.0) * std::sqrt(double(kappa));
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = -half + 2.0 * half * i / (points - 1);
  return grid;
}

SpectrumResult spectrum(const SignalSpec& spec, double theta,
                        const liouville::PhysicalParams& params,
                        const std::vector<double>& detuning, const SpectrumOptions& options) {
  if (detuning.empty()) throw std::invalid_argument("empty detuning grid");
  const SignalModel model = build_signal_model(spec, theta, params.xi_bar, options);
  SpectrumResult out;
  out.detuning = detuning;
  out.spec = spec;
  out.theta = theta;
  out.params = params;
  out.values.reserve(detuning.size());
  const double sigma = params.doppler_over_gamma();
  for (double d : detuning) out.values.push_back(model.spectral_density(d, sigma));
  return out;
}

double peak_amplitude(const SignalSpec& spec, double theta, const liouville::PhysicalParams& params,
                      const SpectrumOptions& options) {
  return build_signal_model(spec, theta, params.xi_bar, options).peak(params.doppler_over_gamma());
}

// -- closed forms ----------------------------------------------------------------

double voigt_V(double x) {
  if (!(x >= 0.0)) throw std::domain_error("V(x) requires x >= 0");
  if (std::isinf(x)) return 1.0;
  return std::sqrt(kPi / 2.0) * x * averaging::erfcx(x / std::sqrt(2.0));
}

double table1_peak(const SignalSpec& spec, double theta, double gamma, double doppler_rms,
                   double xi_bar, Table1Variant variant) {
  spec.validate();
  if (!(xi_bar > 0.0)) throw std::invalid_argument("xi_bar must be positive");
  if (!(gamma > 0.0) || !(doppler_rms >= 0.0)) throw std::invalid_argument("invalid rates");
  const double s = std::sin(theta);
  const double c2 = std::cos(theta / 2.0);
  const double s2 = std::sin(theta / 2.0);
  const double ct = std::cos(theta);
  const double x = doppler_rms > 0.0 ? gamma / doppler_rms : std::numeric_limits<double>::infinity();
  const double inv_xi2 = 1.0 / (xi_bar * xi_bar);
  const bool par = spec.polarization == Polarization::parallel;

  if (spec.kappa == 1) {
    if (!par) return 0.0;
    if (spec.k_hat.isApprox(Vec3::UnitY())) {
      const double arg = variant == Table1Variant::corrected ? x / 2.0 : x / std::sqrt(2.0);
      return voigt_V(arg) * s * s;
    }
    if (!spec.k_hat.isApprox(Vec3::UnitX()))
      throw std::invalid_argument("closed form available for k = x or y only");
    double bracket;
    if (x > 1e6) {
      // x -> infinity with V(y) = 1 - 1/y^2 + O(y^-4)
      bracket = 12.0 * c2 - (4.0 / 3.0) * c2 * s2 * s2 - 3.0 * c2 * (1.0 - 4.0 * c2 - ct) +
                s2 * s2 * (2.0 * c2 - 4.0 * ct);
    } else {
      bracket = 3.0 * x * x * c2 * c2 * c2 -
                3.0 * voigt_V(x / 2.0) * c2 * (x * x + (1.0 - 4.0 * c2 - ct)) +
                voigt_V(1.5 * x) * s2 * s2 * (3.0 * x * x * c2 + (2.0 * c2 - 4.0 * ct));
    }
    return inv_xi2 / 80.0 * s * s * bracket;
  }
  const double v = voigt_V(x / std::sqrt(2.0));
  if (!par) return -3.0 / 320.0 * inv_xi2 * v * s2 * s2 * s * s;
  if (spec.k_hat.isApprox(Vec3::UnitX())) return -3.0 / 320.0 * inv_xi2 * v * std::pow(s, 4);
  if (spec.k_hat.isApprox(Vec3::UnitY())) return -51.0 / 640.0 * inv_xi2 * v * std::pow(s, 4);
  throw std::invalid_argument("closed form available for k = x or y only");
}

std::vector<SignalSpec> table1_rows() {
  return {{1, Polarization::parallel, Vec3::UnitX()}, {1, Polarization::parallel, Vec3::UnitY()},
          {1, Polarization::perpendicular, Vec3::UnitY()},
          {2, Polarization::parallel, Vec3::UnitX()}, {2, Polarization::parallel, Vec3::UnitY()},
          {2, Polarization::perpendicular, Vec3::UnitY()}};
}

std::vector<SignalSpec> scan_signals() {
  return {{1, Polarization::parallel, Vec3::UnitX()}, {1, Polarization::parallel, Vec3::UnitY()},
          {2, Polarization::parallel, Vec3::UnitX()}, {2, Polarization::parallel, Vec3::UnitY()},
          {2, Polarization::perpendicular, Vec3::UnitY()}};
}

// -- pulse-area analysis ---------------------------------------------------------

HarmonicExpansion harmonic_coefficients(const std::function<double(double)>& peak_fn, int n_max,
                                        int samples) {
  if (n_max < 0) throw std::invalid_argument("n_max must be nonnegative");
  const int n = samples > 0 ? samples : 8 * std::max(n_max, 8);
  if (n < 8 * n_max) throw std::invalid_argument("need at least 8 n_max samples");
  std::vector<double> f(n);
  for (int j = 0; j < n; ++j) f[j] = peak_fn(4.0 * kPi * j / n);

  HarmonicExpansion out;
  out.coefficients.assign(n_max + 1, 0.0);
  for (int k = 0; k <= n_max; ++k) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += f[j] * std::cos(k * 2.0 * kPi * j / n);
    out.coefficients[k] = (k == 0 ? 1.0 : 2.0) * acc / n;
  }
  auto reconstruct = [&](double theta) {
    double v = 0.0;
    for (int k = 0; k <= n_max; ++k) v += out.coefficients[k] * std::cos(k * theta / 2.0);
    return v;
  };
  double fmax = 0.0;
  double err = 0.0;
  for (int j = 0; j < n; ++j) {
    fmax = std::max(fmax, std::abs(f[j]));
    err = std::max(err, std::abs(reconstruct(4.0 * kPi * j / n) - f[j]));
    const double mid = 4.0 * kPi * (j + 0.5) / n;
    err = std::max(err, std::abs(reconstruct(mid) - peak_fn(mid)));
  }
  out.residual = fmax > 0.0 ? err / fmax : err;
  if (out.residual > 1e-8) {
    std::ostringstream os;
    os << "cosine series with n_max = " << n_max << " leaves a relative residual of "
       << out.residual;
    throw ConvergenceError(os.str());
  }
  return out;
}

PeakScan peak_scan(const std::vector<double>& theta, const liouville::PhysicalParams& params,
                   const SpectrumOptions& options, const std::vector<SignalSpec>& signals,
                   int jobs) {
  PeakScan scan;
  scan.theta = theta;
  scan.signals = signals;
  scan.values.assign(signals.size(), std::vector<double>(theta.size(), 0.0));
  const double sigma = params.doppler_over_gamma();
  const std::size_t total = theta.size() * signals.size();
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t idx = begin; idx < total; idx += stride) {
      const std::size_t s = idx % signals.size();
      const std::size_t t = idx / signals.size();
      scan.values[s][t] = build_signal_model(signals[s], theta[t], params.xi_bar, options).peak(sigma);
    }
  };
  const int workers = std::max(1, jobs);
  if (workers == 1) {
    work(0, 1);
    return scan;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        work(w, workers);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return scan;
}

std::vector<double> normalized(const std::vector<double>& values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  std::vector<double> out(values);
  if (m > 0.0)
    for (double& v : out) v /= m;
  return out;
}

// -- single configuration ----------------------------------------------------------

SpectrumResult single_config_spectrum(double delta1, double delta2, double xi, const Vec3& n_hat,
                                      const SignalSpec& spec, double theta,
                                      const std::vector<double>& detuning,
                                      const SpectrumOptions& options) {
  spec.validate();
  if (detuning.empty()) throw std::invalid_argument("empty detuning grid");
  const ChannelConfig channel = ChannelConfig::preset(spec.polarization, spec.k_hat, theta);
  const scattering::TensorMoments moments =
      scattering::tensor_moments(liouville::interaction_amplitude(xi, n_hat, options.mode));

  // (image, total Doppler shift)
  std::vector<std::pair<PoleExpansion, double>> parts;
  if (spec.kappa == 1) {
    PoleExpansion first;
    if (options.include_single) first += scattering::single_scattering_expansion(channel, 1, 0);
    if (options.include_double) {
      first += scattering::double_scattering_kernel(channel, 1, 0).contract(moments);
      parts.emplace_back(scattering::double_scattering_kernel(channel, 0, 1).contract(moments),
                         delta2);
    }
    parts.emplace_back(first, delta1);
  } else if (options.include_double) {
    parts.emplace_back(scattering::double_scattering_kernel(channel, 1, 1).contract(moments),
                       delta1 + delta2);
  }

  SpectrumResult out;
  out.detuning = detuning;
  out.spec = spec;
  out.theta = theta;
  out.values.assign(detuning.size(), cplx(0.0));
  for (const auto& [image, shift] : parts) {
    const double reference = options.include_single ? 1.0 : moments.cwiseAbs().maxCoeff();
    const PoleExpansion clean = drop_static_poles(image, reference);
    for (std::size_t i = 0; i < detuning.size(); ++i)
      out.values[i] += options.permutation_prefactor * clean(kI * (detuning[i] - shift)) / kSqrt2Pi;
  }
  return out;
}

// -- time-domain check -------------------------------------------------------------

double time_domain_yield(const ChannelConfig& channel, double tau, double phi1, double phi2) {
  channel.validate();
  if (!(tau >= 0.0)) throw std::invalid_argument("delay must be nonnegative");
  const OracleOptions opt;
  const AtomOperator q = integrated_fluorescence(detection_on_atom(channel.k_hat),
                                                 opt.fluorescence_horizon, opt.step);
  const AtomOperator u1 = pulses::kick_unitary(channel.theta, channel.eps1, phi1);
  const AtomOperator u2 = pulses::kick_unitary(channel.theta, channel.eps2, phi2);
  const AtomOperator rho = u1 * hilbert::dyad(hilbert::g, hilbert::g) * u1.adjoint();
  const AtomSuper evolve = (single_atom_relaxation() * tau).exp();
  const AtomOperator x = unvec(evolve * vec(u2.adjoint() * q * u2));
  return (rho * x).trace().real();
}

SpectrumResult time_domain_oracle(const ChannelConfig& channel, double delta1,
                                  const std::vector<double>& detuning, const OracleOptions& options,
                                  double permutation_prefactor) {
  channel.validate();
  if (detuning.empty()) throw std::invalid_argument("empty detuning grid");
  const AtomOperator q = integrated_fluorescence(detection_on_atom(channel.k_hat),
                                                 options.fluorescence_horizon, options.step);
  constexpr int kPhases = pulses::kPhaseSamples;
  std::array<AtomOperator, kPhases> states;
  std::array<Eigen::Matrix<cplx, 16, 1>, kPhases> observables;
  for (int a = 0; a < kPhases; ++a) {
    const double phi = 2.0 * kPi * a / kPhases;
    const AtomOperator u1 = pulses::kick_unitary(channel.theta, channel.eps1, phi);
    const AtomOperator u2 = pulses::kick_unitary(channel.theta, channel.eps2, phi);
    states[a] = u1 * hilbert::dyad(hilbert::g, hilbert::g) * u1.adjoint();
    observables[a] = vec(u2.adjoint() * q * u2);
  }

  const int n = even_intervals(options.delay_horizon, options.step);
  const double h = options.delay_horizon / n;
  const AtomSuper propagator = (single_atom_relaxation() * h).exp();
  // C(tau): coefficient of e^{i(phi2 - phi1)} in the fluorescence yield
  std::vector<cplx> c(n + 1);
  for (int j = 0; j <= n; ++j) {
    cplx acc = 0.0;
    for (int b = 0; b < kPhases; ++b) {
      const AtomOperator x = unvec(observables[b]);
      const double phi2 = 2.0 * kPi * b / kPhases;
      for (int a = 0; a < kPhases; ++a) {
        const double phi1 = 2.0 * kPi * a / kPhases;
        acc += (states[a] * x).trace() * std::exp(-kI * (phi2 - phi1));
      }
      if (j < n) observables[b] = propagator * observables[b];
    }
    c[j] = acc / double(kPhases * kPhases);
  }
  if (std::abs(c[n]) > 1e-10 * std::abs(c[0]) && std::abs(c[n]) > 1e-300)
    throw ConvergenceError("delay horizon too short for the time-domain check");

  SpectrumResult out;
  out.detuning = detuning;
  out.spec = SignalSpec{1, Polarization::parallel, channel.k_hat};
  out.theta = channel.theta;
  out.values.reserve(detuning.size());
  for (double d : detuning) {
    cplx acc = 0.0;
    const cplx rate = -kI * (d - delta1);
    for (int j = 0; j <= n; ++j) acc += simpson_weight(j, n, h) * std::exp(rate * (j * h)) * c[j];
    out.values.push_back(permutation_prefactor * acc / kSqrt2Pi);
  }
  return out;
}

double fwhm(const std::function<double(double)>& f, double scale) {
  const double half = 0.5 * f(0.0);
  if (!(half > 0.0)) throw std::invalid_argument("fwhm needs a positive maximum at 0");
  auto edge = [&](double dir) {
    double lo = 0.0;
    double hi = 0.1 * scale;
    int guard = 0;
    while (f(dir * hi) > half) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 200) throw ConvergenceError("half maximum not bracketed");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(dir * mid) > half ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  return edge(1.0) + edge(-1.0);
}

}  // namespace mqc::spectra
