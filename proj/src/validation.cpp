#include "mqc/validation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

#include "mqc/averaging.hpp"
#include "mqc/hilbert.hpp"
#include "mqc/pulses.hpp"
#include "mqc/scattering.hpp"
#include "mqc/spectra.hpp"

namespace mqc::validation {

using liouville::PhysicalParams;
using scattering::ChannelConfig;
using spectra::Polarization;
using spectra::SignalSpec;
using spectra::SpectrumOptions;

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * kPi);

std::string signal_key(const SignalSpec& s) { return s.label(); }

SignalSpec p1x() { return {1, Polarization::parallel, Vec3::UnitX()}; }
SignalSpec p1y() { return {1, Polarization::parallel, Vec3::UnitY()}; }
SignalSpec p2x() { return {2, Polarization::parallel, Vec3::UnitX()}; }
SignalSpec p2y() { return {2, Polarization::parallel, Vec3::UnitY()}; }
SignalSpec p2perp() { return {2, Polarization::perpendicular, Vec3::UnitY()}; }

SpectrumOptions single_only() {
  SpectrumOptions o;
  o.include_double = false;
  return o;
}

// Peak amplitude as a function of theta for one signal.
std::function<double(double)> peak_fn(const SignalSpec& spec, const PhysicalParams& params,
                                      const SpectrumOptions& opts = {}) {
  return [spec, params, opts](double theta) {
    return spectra::peak_amplitude(spec, theta, params, opts);
  };
}

double golden_max(const std::function<double(double)>& f, double lo, double hi) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

Eigen::Matrix<cplx, 16, 1> vec(const AtomOperator& x) {
  return Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(x.data());
}

AtomOperator unvec(const Eigen::Matrix<cplx, 16, 1>& v) {
  return Eigen::Map<const AtomOperator>(v.data());
}

template <class M>
M random_matrix(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  M m;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

double max_abs(const spectra::SpectrumResult& r) {
  double m = 0.0;
  for (const cplx& v : r.values) m = std::max(m, std::abs(v));
  return m;
}

nlohmann::json cplx_json(cplx v) { return nlohmann::json::array({v.real(), v.imag()}); }

// -- criteria --------------------------------------------------------------------

CriterionResult table1(const PhysicalParams& p, const Tolerances& tol, int jobs) {
  CriterionResult r{1, "peak table closed forms", true, {}};
  const auto thetas = linspace(0.1 * kPi, 0.9 * kPi, 9);
  const auto rows = spectra::table1_rows();
  const auto scan = spectra::peak_scan(thetas, p, {}, rows, jobs);
  const double sigma = p.doppler_over_gamma();
  double worst_printed = 0.0;
  for (std::size_t s = 0; s < rows.size(); ++s) {
    const SignalSpec& spec = rows[s];
    const bool leading = spec.kappa == 1 && spec.polarization == Polarization::parallel &&
                         spec.k_hat.isApprox(Vec3::UnitY());
    const bool extinct = spec.kappa == 1 && spec.polarization == Polarization::perpendicular;
    double worst = 0.0;
    for (std::size_t t = 0; t < thetas.size(); ++t) {
      const double closed = spectra::table1_peak(spec, thetas[t], 1.0, sigma, p.xi_bar);
      const double num = scan.values[s][t];
      if (extinct) {
        // closed form is exactly 0; measure against the leading row
        const double ref = spectra::table1_peak(p1y(), thetas[t], 1.0, sigma, p.xi_bar);
        worst = std::max(worst, std::abs(num) / ref);
      } else {
        worst = std::max(worst, std::abs(num - closed) / std::abs(closed));
      }
      if (leading) {
        const double printed = spectra::table1_peak(spec, thetas[t], 1.0, sigma, p.xi_bar,
                                                    spectra::Table1Variant::as_printed);
        worst_printed = std::max(worst_printed, std::abs(num - printed) / std::abs(printed));
      }
    }
    const double limit =
        extinct ? tol.perp_extinction : (leading ? tol.table1_leading : tol.table1_subleading);
    const bool ok = worst < limit;
    r.passed = r.passed && ok;
    r.measured["rows"][signal_key(spec)] = {{"max_relative_deviation", worst}, {"limit", limit}};
  }
  r.measured["as_printed_1qc_y_par_deviation"] = worst_printed;
  return r;
}

CriterionResult extinction(const PhysicalParams& p, const Tolerances& tol) {
  CriterionResult r{2, "perpendicular 1QC extinction", true, {}};
  const double theta = 0.5 * kPi;
  const auto grid = spectra::default_detuning_grid(1, p);
  for (const Vec3& k : std::array<Vec3, 2>{Vec3::UnitX(), Vec3::UnitY()}) {
    const SignalSpec perp{1, Polarization::perpendicular, k};
    const SignalSpec par{1, Polarization::parallel, k};
    const double a = max_abs(spectra::spectrum(perp, theta, p, grid));
    const double b = max_abs(spectra::spectrum(par, theta, p, grid));
    const double ratio = a / b;
    r.passed = r.passed && ratio < tol.perp_extinction;
    r.measured[k.isApprox(Vec3::UnitX()) ? "k_x" : "k_y"] = {
        {"max_perp", a}, {"max_par", b}, {"ratio", ratio}};
  }
  // one fixed configuration: the perpendicular signal does not vanish before averaging
  const Vec3 n = Vec3(1.0, 1.0, 1.0).normalized();
  const std::vector<double> d = linspace(-5.0, 5.0, 41);
  const SignalSpec perp{1, Polarization::perpendicular, Vec3::UnitY()};
  const SignalSpec par{1, Polarization::parallel, Vec3::UnitY()};
  const double a = max_abs(spectra::single_config_spectrum(0.0, 0.0, p.xi_bar, n, perp, theta, d));
  const double b = max_abs(spectra::single_config_spectrum(0.0, 0.0, p.xi_bar, n, par, theta, d));
  r.measured["single_configuration_n111"] = {
      {"max_perp", a}, {"max_par", b}, {"ratio", a / b}, {"asserted", false}};
  return r;
}

CriterionResult signs(const PhysicalParams& p) {
  CriterionResult r{3, "sign structure at 0.14 pi", true, {}};
  const double theta = 0.14 * kPi;
  for (const SignalSpec& s : spectra::scan_signals()) {
    const double v = spectra::peak_amplitude(s, theta, p);
    const bool ok = s.kappa == 1 ? v > 0.0 : v < 0.0;
    r.passed = r.passed && ok;
    r.measured[signal_key(s)] = v;
  }
  return r;
}

CriterionResult magnitude_ratio(const PhysicalParams& p, const Tolerances& tol) {
  CriterionResult r{4, "2QC/1QC magnitude ratio at 0.14 pi", true, {}};
  const double theta = 0.14 * kPi;
  const double a = spectra::peak_amplitude(p1x(), theta, p);
  const double b = spectra::peak_amplitude(p2x(), theta, p);
  const double ratio = std::abs(b / a);
  r.passed = ratio >= tol.ratio_low && ratio <= tol.ratio_high;
  r.measured = {{"P_1_x_par", a}, {"P_2_x_par", b}, {"abs_ratio", ratio},
                {"range", {tol.ratio_low, tol.ratio_high}}};
  return r;
}

struct CurveSpec {
  std::string name;
  SignalSpec spec;
  SpectrumOptions options;
  double expected_max;  ///< in units of pi, searched in (0, pi)
  double max_tolerance;
  double period;  ///< in units of pi
};

std::vector<CurveSpec> curve_specs(const Tolerances& tol) {
  const double p2perp_max = 2.0 * std::atan(std::sqrt(2.0)) / kPi;
  return {
      {"P_1_x_par", p1x(), {}, 0.4, tol.p1x_max_location, 4.0},
      // the closed-form period refers to the leading (single-scattering) term; the
      // O(xi^-2) double-scattering correction is reported separately
      {"P_1_y_par_leading", p1y(), single_only(), 0.5, tol.max_location, 1.0},
      {"P_2_x_par", p2x(), {}, 0.5, tol.max_location, 1.0},
      {"P_2_y_par", p2y(), {}, 0.5, tol.max_location, 1.0},
      {"P_2_perp", p2perp(), {}, p2perp_max, tol.max_location, 2.0},
  };
}

double translation_residual(const std::function<double(double)>& f, double period,
                            const std::vector<double>& samples, const std::vector<double>& base,
                            double scale) {
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    worst = std::max(worst, std::abs(f(samples[i] + period) - base[i]));
  return worst / scale;
}

CriterionResult pulse_area(const PhysicalParams& p, const Tolerances& tol, nlohmann::json& notes) {
  CriterionResult r{5, "pulse-area zeros, maxima and periods", true, {}};
  const auto grid = linspace(0.0, kPi, 201);
  std::vector<double> samples;
  for (int i = 0; i < 24; ++i) samples.push_back(4.0 * kPi * (i + 0.37) / 24.0);

  for (const CurveSpec& c : curve_specs(tol)) {
    const auto f = peak_fn(c.spec, p, c.options);
    std::vector<double> coarse(grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      coarse[i] = std::abs(f(grid[i]));
      if (coarse[i] > coarse[best]) best = i;
    }
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    const double at = golden_max([&](double t) { return std::abs(f(t)); }, lo, hi);
    const double fmax = std::abs(f(at));
    const bool max_ok = std::abs(at / kPi - c.expected_max) <= c.max_tolerance;

    double zero = 0.0;
    for (int n = 0; n <= 4; ++n) zero = std::max(zero, std::abs(f(n * kPi)) / fmax);
    const bool zero_ok = zero < tol.zero_level;

    std::vector<double> base(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) base[i] = f(samples[i]);
    const double res = translation_residual(f, c.period * kPi, samples, base, fmax);
    const double half = translation_residual(f, 0.5 * c.period * kPi, samples, base, fmax);
    // the listed period must be the smallest one
    const bool period_ok = res < tol.period_residual && half > 1e3 * tol.period_residual;

    const bool ok = max_ok && zero_ok && period_ok;
    r.passed = r.passed && ok;
    r.measured[c.name] = {{"max_location_over_pi", at / kPi},
                          {"expected_max_over_pi", c.expected_max},
                          {"max_value", fmax},
                          {"zero_level", zero},
                          {"period_over_pi", c.period},
                          {"period_residual", res},
                          {"half_period_residual", half},
                          {"passed", ok}};
  }

  // full 1QC y-par signal including its double-scattering correction
  const auto full = peak_fn(p1y(), p);
  std::vector<double> base(samples.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    base[i] = full(samples[i]);
    scale = std::max(scale, std::abs(base[i]));
  }
  notes["P_1_y_par_full_period_residuals"] = {
      {"pi", translation_residual(full, kPi, samples, base, scale)},
      {"two_pi", translation_residual(full, 2.0 * kPi, samples, base, scale)},
      {"four_pi", translation_residual(full, 4.0 * kPi, samples, base, scale)}};
  return r;
}

CriterionResult ratio_2qc(const PhysicalParams& p, const Tolerances& tol, int jobs) {
  CriterionResult r{6, "2QC y/x ratio 8.5", true, {}};
  std::vector<double> thetas;
  for (int i = 1; i < 40; ++i)
    if (i % 10 != 0) thetas.push_back(4.0 * kPi * i / 40.0);
  const auto scan = spectra::peak_scan(thetas, p, {}, {p2x(), p2y()}, jobs);
  double worst = 0.0;
  for (std::size_t t = 0; t < thetas.size(); ++t)
    worst = std::max(worst, std::abs(scan.values[1][t] / scan.values[0][t] / 8.5 - 1.0));
  r.passed = worst < tol.ratio_2qc;
  r.measured = {{"max_relative_deviation", worst}, {"points", thetas.size()}};
  return r;
}

CriterionResult fourier(const PhysicalParams& p, const Tolerances& tol, nlohmann::json& notes) {
  CriterionResult r{7, "Fourier fingerprints", true, {}};
  constexpr int kNMax = 12;
  struct Case {
    std::string name;
    SignalSpec spec;
    SpectrumOptions options;
    std::map<int, double> expected;
  };
  const std::vector<Case> cases = {
      {"P_1_y_par_leading", p1y(), single_only(), {{0, 0.5}, {4, -0.5}}},
      {"P_2_x_par", p2x(), {}, {{0, -0.375}, {4, 0.5}, {8, -0.125}}},
      {"P_2_y_par", p2y(), {}, {{0, -0.375}, {4, 0.5}, {8, -0.125}}},
  };
  for (const Case& c : cases) {
    const auto f = peak_fn(c.spec, p, c.options);
    const double scale = std::abs(f(0.5 * kPi));  // maximum of these curves
    const auto h = spectra::harmonic_coefficients([&](double t) { return f(t) / scale; }, kNMax);
    double value_dev = 0.0;
    double other = 0.0;
    for (int n = 0; n <= kNMax; ++n) {
      auto it = c.expected.find(n);
      if (it != c.expected.end())
        value_dev = std::max(value_dev, std::abs(h.coefficients[n] - it->second));
      else
        other = std::max(other, std::abs(h.coefficients[n]));
    }
    const bool ok = value_dev < tol.fourier_value && other < tol.fourier_residual &&
                    h.residual < tol.fourier_residual;
    r.passed = r.passed && ok;
    r.measured[c.name] = {{"coefficients", h.coefficients},
                          {"max_expected_deviation", value_dev},
                          {"max_other_coefficient", other},
                          {"reconstruction_residual", h.residual},
                          {"passed", ok}};
  }
  const auto full = peak_fn(p1y(), p);
  const double scale = std::abs(full(0.5 * kPi));
  const auto h = spectra::harmonic_coefficients([&](double t) { return full(t) / scale; }, kNMax);
  notes["P_1_y_par_full_coefficients"] = h.coefficients;
  return r;
}

CriterionResult line_widths(const PhysicalParams& p, const Tolerances& tol) {
  CriterionResult r{8, "line widths", true, {}};
  const double sigma = p.doppler_over_gamma();
  const double theta = 0.5 * kPi;
  const double gaussian = 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma;
  const auto m1 = spectra::build_signal_model(p1y(), theta, p.xi_bar);
  const double w1 = spectra::fwhm([&](double d) { return m1.raw(d, sigma).real(); }, sigma);
  const double dev1 = std::abs(w1 / gaussian - 1.0);
  r.measured["1qc_y_par"] = {{"fwhm_over_gamma", w1},
                            {"gaussian_fwhm_over_gamma", gaussian},
                            {"relative_deviation", dev1}};
  bool ok = dev1 < tol.fwhm;
  for (const SignalSpec& s : {p2x(), p2y()}) {
    const auto m2 = spectra::build_signal_model(s, theta, p.xi_bar);
    const double w2 = spectra::fwhm([&](double d) { return -m2.raw(d, sigma).real(); }, sigma);
    const double dev2 = std::abs(w2 / (std::sqrt(2.0) * w1) - 1.0);
    ok = ok && dev2 < tol.fwhm;
    r.measured[s.label()] = {{"fwhm_over_gamma", w2},
                             {"ratio_to_1qc", w2 / w1},
                             {"relative_deviation_from_sqrt2", dev2}};
  }
  const double hz = p.gamma / (2.0 * kPi);
  r.measured["1qc_fwhm_Hz"] = w1 * hz;
  r.measured["1qc_fwhm_rad_per_s"] = w1 * p.gamma;
  r.passed = ok;
  return r;
}

// Orientation-averaged direct stroboscopic composition on a grid, no Doppler shifts.
std::vector<cplx> direct_spectrum(const SignalSpec& spec, double theta, double xi,
                                  const std::vector<double>& detuning) {
  const ChannelConfig channel = ChannelConfig::preset(spec.polarization, spec.k_hat, theta);
  scattering::ComposeOptions opts;
  opts.xi_bar = xi;
  // the m = 2 images are degree-4 polynomials in n, integrated exactly by this rule
  const auto q = averaging::SphereQuadrature::product(4, 8);
  std::vector<cplx> out(detuning.size(), cplx(0.0));
  for (std::size_t i = 0; i < detuning.size(); ++i) {
    const cplx z1 = kI * detuning[i];
    cplx acc = 0.0;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const auto images = scattering::intensity_images(z1, channel, q.nodes[k], opts);
      auto get = [](const scattering::HarmonicMap& m, int l1, int l2) {
        auto it = m.find({l1, l2});
        return it == m.end() ? cplx(0.0) : it->second;
      };
      cplx v;
      if (spec.kappa == 1)
        v = get(images.single, 1, 0) + get(images.double_, 1, 0) + get(images.double_, 0, 1);
      else
        v = get(images.double_, 1, 1);
      acc += q.weights[k] * v;
    }
    out[i] = hilbert::kAtomPermutationPrefactor * acc / kSqrt2Pi;
  }
  return out;
}

CriterionResult immobile(const PhysicalParams& p, const Tolerances& tol) {
  CriterionResult r{9, "immobile-atom limit", true, {}};
  const double theta = 0.3 * kPi;
  // an even count keeps delta = 0 (where z1 hits the static eigenvalue) off the grid
  const auto grid = linspace(-4.0, 4.0, 10);
  double worst = 0.0;
  for (const SignalSpec& s : {p1x(), p1y(), p2x(), p2y(), p2perp()}) {
    const auto direct = direct_spectrum(s, theta, p.xi_bar, grid);
    double scale = 0.0;
    for (const cplx& v : direct) scale = std::max(scale, std::abs(v));
    nlohmann::json entry;
    for (double rms : {0.0, 1e-4}) {
      const auto spec = spectra::spectrum(s, theta, p.with_doppler_rms(rms * p.gamma), grid);
      double dev = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i)
        dev = std::max(dev, std::abs(spec.values[i] - direct[i]));
      dev /= scale;
      worst = std::max(worst, dev);
      entry[rms == 0.0 ? "doppler_0" : "doppler_1e-4"] = dev;
    }
    r.measured[s.label()] = entry;
  }
  // single scattering alone is the bare complex Lorentzian sin^2(theta)/4 / (1/2 + i delta)
  const auto single =
      spectra::spectrum(p1y(), theta, p.with_doppler_rms(0.0), grid, single_only());
  double lor = 0.0;
  double lscale = 0.0;
  const double s2 = std::sin(theta) * std::sin(theta);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx ref = hilbert::kAtomPermutationPrefactor * (s2 / 4.0) /
                     (cplx(0.5, grid[i]) * kSqrt2Pi);
    lor = std::max(lor, std::abs(single.values[i] - ref));
    lscale = std::max(lscale, std::abs(ref));
  }
  lor /= lscale;
  worst = std::max(worst, lor);
  r.measured["single_scattering_lorentzian"] = lor;
  r.measured["max_relative_deviation"] = worst;
  r.passed = worst < tol.immobile;
  return r;
}

CriterionResult oracle(const Tolerances& tol, nlohmann::json& notes) {
  CriterionResult r{10, "time-domain oracle and first-order ledger", true, {}};
  const auto grid = linspace(-5.0, 5.0, 21);
  double worst = 0.0;
  for (double theta : {0.14 * kPi, 0.5 * kPi}) {
    for (double delta1 : {0.0, 0.7}) {
      const ChannelConfig channel =
          ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), theta);
      const auto time = spectra::time_domain_oracle(channel, delta1, grid);
      const auto laplace = spectra::single_config_spectrum(
          delta1, 0.0, 80.0, Vec3::UnitZ(), p1y(), theta, grid, single_only());
      double dev = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i)
        dev = std::max(dev, std::abs(time.values[i] - laplace.values[i]));
      dev /= max_abs(laplace);
      worst = std::max(worst, dev);
      r.measured["oracle"].push_back(
          {{"theta_over_pi", theta / kPi}, {"delta1", delta1}, {"relative_deviation", dev}});
    }
  }
  const bool oracle_ok = worst < tol.oracle;

  double first = 0.0;
  double raw = 0.0;
  const std::vector<Vec3> dirs = {Vec3::UnitZ(), Vec3(1.0, 2.0, -0.5).normalized(),
                                  Vec3(-0.3, 0.1, 0.9).normalized()};
  for (const Vec3& n : dirs)
    for (cplx z1 : {cplx(0.0, 0.7), cplx(0.2, -1.3)})
      for (Polarization pol : {Polarization::parallel, Polarization::perpendicular}) {
        const ChannelConfig channel = ChannelConfig::preset(pol, Vec3::UnitY(), 0.37 * kPi);
        const auto ledger = scattering::stroboscopic_compose(1, z1, 0.0, n, channel);
        for (const auto& [key, v] : ledger) raw = std::max(raw, std::abs(v));
        const auto kept = scattering::apply_selection_rules(ledger);
        for (const auto& [key, v] : kept) first = std::max(first, std::abs(v));
      }
  const bool first_ok = first < tol.first_order;
  r.measured["oracle_max_relative_deviation"] = worst;
  r.measured["first_order_max_abs"] = first;
  r.measured["first_order_before_selection_max_abs"] = raw;
  r.passed = oracle_ok && first_ok;

  // composition-order comparison at a finite fluorescence Laplace point
  const ChannelConfig channel = ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), 0.5 * kPi);
  scattering::ComposeOptions heis;
  scattering::ComposeOptions written;
  written.order = scattering::CompositionOrder::as_written;
  const cplx z1(0.0, 0.4);
  const cplx z2(0.3, 0.0);
  auto pick = [](const scattering::HarmonicMap& m) {
    auto it = m.find({1, 0});
    return it == m.end() ? cplx(0.0) : it->second;
  };
  const cplx h = pick(scattering::apply_selection_rules(
      scattering::stroboscopic_compose(0, z1, z2, Vec3::UnitZ(), channel, heis)));
  const cplx w = pick(scattering::apply_selection_rules(
      scattering::stroboscopic_compose(0, z1, z2, Vec3::UnitZ(), channel, written)));
  notes["composition_order_1qc_image_at_z2_0.3"] = {{"heisenberg", cplx_json(h)},
                                                   {"as_written", cplx_json(w)}};
  return r;
}

CriterionResult properties(const PhysicalParams& p, const Tolerances& tol, int jobs) {
  CriterionResult r{11, "quadrature and property suite", true, {}};
  std::mt19937_64 rng(20240611);
  bool ok = true;
  auto record = [&](const std::string& name, double value, double limit) {
    const bool pass = value < limit;
    ok = ok && pass;
    r.measured[name] = {{"value", value}, {"limit", limit}, {"passed", pass}};
  };

  // isotropic moments of n
  {
    const auto q = averaging::SphereQuadrature::product(16, 32);
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double m2 = 0.0;
        for (std::size_t k = 0; k < q.nodes.size(); ++k)
          m2 += q.weights[k] * q.nodes[k](i) * q.nodes[k](j);
        err = std::max(err, std::abs(m2 - (i == j ? 1.0 / 3.0 : 0.0)));
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            double m4 = 0.0;
            double m3 = 0.0;
            for (std::size_t k = 0; k < q.nodes.size(); ++k) {
              const Vec3& n = q.nodes[k];
              m4 += q.weights[k] * n(i) * n(j) * n(a) * n(b);
              m3 += q.weights[k] * n(i) * n(j) * n(a);
            }
            const double exact =
                ((i == j) * (a == b) + (i == a) * (j == b) + (i == b) * (j == a)) / 15.0;
            err = std::max({err, std::abs(m4 - exact), std::abs(m3)});
          }
      }
    record("isotropic_moments", err, tol.moments);
  }

  // resolvent identity (z - L) G x = x and the integrated limit -L I x = x
  {
    const auto lg = liouville::relaxation_generator();
    const PairOperator x = random_matrix<PairOperator>(rng);
    double err = 0.0;
    for (cplx z : {cplx(0.3, 0.7), cplx(-0.2, 1.9), cplx(2.0, -0.4)}) {
      const PairOperator g = liouville::resolvent_apply(z, x);
      err = std::max(err, (z * g - lg(g) - x).norm() / x.norm());
    }
    const PairOperator decaying = x - liouville::sector_projection(x, 0);
    const PairOperator integ = liouville::integrated_resolvent(decaying);
    err = std::max(err, (lg(integ) + decaying).norm() / decaying.norm());
    record("resolvent_identity", err, tol.resolvent);
  }

  // kicks: unitarity, harmonic reassembly and the homomorphism property
  {
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    double unit = 0.0;
    double hom = 0.0;
    for (int trial = 0; trial < 6; ++trial) {
      const double area = u(rng);
      const double phi = u(rng);
      CVec3 eps = random_matrix<CVec3>(rng);
      eps.normalize();
      const AtomOperator U = pulses::kick_unitary(area, eps, phi);
      unit = std::max(unit, (U.adjoint() * U - AtomOperator::Identity()).norm());
      const auto R = pulses::kick_superoperator(area, eps, phi);
      const pulses::KickHarmonics harm(area, eps, false);
      hom = std::max(hom, (harm.reassemble(phi) - R).norm() / R.norm());
      const AtomOperator a = random_matrix<AtomOperator>(rng);
      const AtomOperator b = random_matrix<AtomOperator>(rng);
      const AtomOperator lhs = unvec(R * vec(a * b));
      const AtomOperator rhs = unvec(R * vec(a)) * unvec(R * vec(b));
      hom = std::max(hom, (lhs - rhs).norm() / (a.norm() * b.norm()));
    }
    record("kick_unitarity", unit, tol.unitarity);
    record("kick_homomorphism", hom, tol.homomorphism);
  }

  // Heisenberg generators are adjoint to the Schroedinger-picture Lindblad forms
  {
    const PairOperator x = random_matrix<PairOperator>(rng);
    const PairOperator y = random_matrix<PairOperator>(rng);
    const double scale = x.norm() * y.norm();
    auto pairing = [](const PairOperator& a, const PairOperator& b) {
      return (a.adjoint() * b).trace();
    };
    const auto lg = liouville::relaxation_generator();
    double err = std::abs(pairing(y, lg(x)) - pairing(schroedinger_relaxation(y), x)) / scale;
    const CMat3 amp = liouville::interaction_amplitude(7.3, Vec3(0.2, -0.6, 0.77).normalized(),
                                                       liouville::TensorMode::full);
    for (auto part : {liouville::PhasePart::minus, liouville::PhasePart::plus}) {
      const auto li = liouville::interaction_generator(amp, part);
      const double norm = amp.norm();
      err = std::max(err, std::abs(pairing(y, li(x)) -
                                   pairing(schroedinger_interaction(y, amp, part), x)) /
                              (scale * norm));
    }
    record("adjoint_duality", err, tol.duality);
  }

  // far-field m = 2 terms scale as xi^-2
  {
    const ChannelConfig channel = ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), 0.4 * kPi);
    const Vec3 n = Vec3(0.3, -0.5, 0.8).normalized();
    scattering::ComposeOptions a;
    a.xi_bar = p.xi_bar;
    scattering::ComposeOptions b = a;
    b.xi_bar = 2.0 * p.xi_bar;
    const cplx z1(0.0, 0.35);
    const auto va = scattering::apply_selection_rules(scattering::stroboscopic_compose(2, z1, 0.0, n, channel, a));
    const auto vb = scattering::apply_selection_rules(scattering::stroboscopic_compose(2, z1, 0.0, n, channel, b));
    double scale = 0.0;
    double err = 0.0;
    for (const auto& [key, v] : va) {
      scale = std::max(scale, std::abs(v));
      auto it = vb.find(key);
      const cplx w = it == vb.end() ? cplx(0.0) : it->second;
      err = std::max(err, std::abs(w - 0.25 * v));
    }
    record("xi_scaling", scale > 0.0 ? err / scale : 1.0, tol.xi_scaling);
  }

  // determinism: identical bits across reruns and worker counts
  {
    const auto grid = linspace(-50.0, 50.0, 101);
    const auto s1 = spectra::spectrum(p1x(), 0.3 * kPi, p, grid);
    const auto s2 = spectra::spectrum(p1x(), 0.3 * kPi, p, grid);
    const auto thetas = linspace(0.05 * kPi, 1.95 * kPi, 12);
    const auto a = spectra::peak_scan(thetas, p, {}, spectra::scan_signals(), 1);
    const auto b = spectra::peak_scan(thetas, p, {}, spectra::scan_signals(), std::max(2, jobs));
    bool same = std::memcmp(s1.values.data(), s2.values.data(), s1.values.size() * sizeof(cplx)) == 0;
    for (std::size_t s = 0; s < a.values.size(); ++s)
      same = same && std::memcmp(a.values[s].data(), b.values[s].data(),
                                 a.values[s].size() * sizeof(double)) == 0;
    ok = ok && same;
    r.measured["determinism"] = {{"bit_identical", same}, {"passed", same}};
  }
  r.passed = ok;
  return r;
}

}  // namespace

std::map<std::string, double> Tolerances::as_map() const {
  return {{"table1_leading", table1_leading},
          {"table1_subleading", table1_subleading},
          {"perp_extinction", perp_extinction},
          {"ratio_low", ratio_low},
          {"ratio_high", ratio_high},
          {"zero_level", zero_level},
          {"max_location", max_location},
          {"p1x_max_location", p1x_max_location},
          {"period_residual", period_residual},
          {"ratio_2qc", ratio_2qc},
          {"fourier_value", fourier_value},
          {"fourier_residual", fourier_residual},
          {"fwhm", fwhm},
          {"immobile", immobile},
          {"oracle", oracle},
          {"first_order", first_order},
          {"moments", moments},
          {"resolvent", resolvent},
          {"unitarity", unitarity},
          {"homomorphism", homomorphism},
          {"duality", duality},
          {"xi_scaling", xi_scaling}};
}

std::vector<std::string> tolerance_mismatches(const std::map<std::string, std::string>& file_values,
                                              const Tolerances& pinned) {
  const auto expected = pinned.as_map();
  std::vector<std::string> bad;
  for (const auto& [key, text] : file_values) {
    auto it = expected.find(key);
    if (it == expected.end()) {
      bad.push_back(key + " (unknown)");
      continue;
    }
    double v = 0.0;
    std::size_t used = 0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || v != it->second) bad.push_back(key);
  }
  return bad;
}

bool Report::all_passed() const {
  return !criteria.empty() &&
         std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.passed; });
}

nlohmann::json Report::to_json() const {
  nlohmann::json j;
  for (const auto& c : criteria)
    j["criteria"].push_back(
        {{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"measured", c.measured}});
  j["notes"] = notes;
  j["all_passed"] = all_passed();
  return j;
}

Report run_acceptance(const PhysicalParams& params, const Tolerances& tol, int jobs,
                      const Progress& progress) {
  Report report;
  report.notes = nlohmann::json::object();
  auto add = [&](CriterionResult r) {
    if (progress) progress(r);
    report.criteria.push_back(std::move(r));
  };
  add(table1(params, tol, jobs));
  add(extinction(params, tol));
  add(signs(params));
  add(magnitude_ratio(params, tol));
  add(pulse_area(params, tol, report.notes));
  add(ratio_2qc(params, tol, jobs));
  add(fourier(params, tol, report.notes));
  add(line_widths(params, tol));
  add(immobile(params, tol));
  add(oracle(tol, report.notes));
  add(properties(params, tol, jobs));
  auto w = params.warnings();
  if (!w.empty()) report.notes["warnings"] = w;
  return report;
}

PairOperator schroedinger_relaxation(const PairOperator& rho, double gamma) {
  const auto& d = hilbert::dipole_operators();
  PairOperator out = PairOperator::Zero();
  for (int atom = 1; atom <= 2; ++atom)
    for (int i = 0; i < 3; ++i) {
      const PairOperator low = hilbert::embed(d.lowering[i], atom);
      const PairOperator n = low.adjoint() * low;
      out += gamma * (low * rho * low.adjoint() - 0.5 * (n * rho + rho * n));
    }
  return out;
}

PairOperator schroedinger_interaction(const PairOperator& rho, const CMat3& amplitude,
                                      liouville::PhasePart part) {
  const auto& d = hilbert::dipole_operators();
  std::array<std::array<PairOperator, 3>, 2> low;
  for (int atom = 0; atom < 2; ++atom)
    for (int i = 0; i < 3; ++i) low[atom][i] = hilbert::embed(d.lowering[i], atom + 1);
  PairOperator out = PairOperator::Zero();
  for (int a = 0; a < 2; ++a) {
    const int b = 1 - a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const cplx t = amplitude(i, j);
        if (part == liouville::PhasePart::minus)
          out += std::conj(t) * (low[a][i] * rho * low[b][j].adjoint() -
                                 low[b][j].adjoint() * low[a][i] * rho);
        else
          out += t * (low[b][i] * rho * low[a][j].adjoint() - rho * low[a][j].adjoint() * low[b][i]);
      }
  }
  return out;
}

}  // namespace mqc::validation
