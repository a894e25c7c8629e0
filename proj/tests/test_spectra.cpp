#include <doctest.h>

#include <functional>

#include "mqc/averaging.hpp"
#include "mqc/spectra.hpp"

using namespace mqc;
using namespace mqc::spectra;

namespace {

const SignalSpec kP1x{1, Polarization::parallel, Vec3::UnitX()};
const SignalSpec kP1y{1, Polarization::parallel, Vec3::UnitY()};
const SignalSpec kP1perp{1, Polarization::perpendicular, Vec3::UnitY()};
const SignalSpec kP2x{2, Polarization::parallel, Vec3::UnitX()};
const SignalSpec kP2y{2, Polarization::parallel, Vec3::UnitY()};
const SignalSpec kP2perp{2, Polarization::perpendicular, Vec3::UnitY()};

const liouville::PhysicalParams& paper() {
  static const auto p = liouville::PhysicalParams::paper_defaults();
  return p;
}

SpectrumOptions single_only() {
  SpectrumOptions o;
  o.include_double = false;
  return o;
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const cplx& c : v) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("Voigt peak factor") {
    CHECK(voigt_V(0.0) == 0.0);
    CHECK(voigt_V(10.0) == doctest::Approx(0.99028596471731921).epsilon(1e-13));
    CHECK(std::abs(voigt_V(10.0) - (1.0 - 1.0 / 100.0)) < 1e-3);
    CHECK(voigt_V(0.0137) == doctest::Approx(0.016984313370414225).epsilon(1e-13));
    CHECK(voigt_V(1e6) == doctest::Approx(1.0 - 1e-12).epsilon(1e-15));
    CHECK(voigt_V(std::numeric_limits<double>::infinity()) == 1.0);
    double prev = -1.0;
    bool monotone = true;
    for (int i = 0; i <= 4000; ++i) {
      const double x = std::pow(10.0, -4.0 + 10.0 * i / 4000.0);
      const double v = voigt_V(x);
      monotone = monotone && v > prev && v < 1.0 && v >= 0.0;
      prev = v;
    }
    CHECK(monotone);
    CHECK_THROWS_AS(voigt_V(-1.0), std::domain_error);
  }

  TEST_CASE("spectrum shapes and signs at paper parameters") {
    const double theta = 0.14 * kPi;
    const std::vector<double> grid{-20.0, -3.0, 0.0, 3.0, 20.0};
    const auto s1 = spectrum(kP1y, theta, paper(), grid);
    CHECK(s1.values[2].real() > 0.0);
    CHECK(std::abs(s1.values[2].imag()) < 1e-12 * s1.values[2].real());
    CHECK(s1.values[2].real() > s1.values[1].real());
    // dispersive imaginary part
    CHECK(s1.values[1].imag() * s1.values[3].imag() < 0.0);
    CHECK(std::abs(s1.values[1].imag() + s1.values[3].imag()) < 1e-12 * std::abs(s1.values[1].imag()));

    for (const auto& spec : {kP2x, kP2y, kP2perp})
      CHECK(spectrum(spec, theta, paper(), grid).values[2].real() < 0.0);

    const auto full_grid = default_detuning_grid(1, paper());
    CHECK(full_grid.size() == 801);
    CHECK(full_grid.back() == doctest::Approx(8.0 * paper().doppler_over_gamma()));
    for (const Vec3& k : {Vec3(Vec3::UnitX()), Vec3(Vec3::UnitY())}) {
      const double perp = max_abs(spectrum({1, Polarization::perpendicular, k}, theta, paper(), full_grid).values);
      const double par = max_abs(spectrum({1, Polarization::parallel, k}, theta, paper(), full_grid).values);
      CHECK(perp < 1e-12 * par);
    }
    CHECK_THROWS_AS(spectrum(kP1y, theta, paper(), {}), std::invalid_argument);
  }

  TEST_CASE("peak amplitudes") {
    // immobile limit of the leading row
    const auto still = paper().with_doppler_rms(0.0);
    for (double t : {0.1, 0.3, 0.5}) {
      const double s2 = std::pow(std::sin(t * kPi), 2);
      CHECK(peak_amplitude(kP1y, t * kPi, still, single_only()) == doctest::Approx(s2).epsilon(1e-12));
      CHECK(std::abs(peak_amplitude(kP1y, t * kPi, still) - s2) < 1e-3 * s2);
    }
    // exact 17/2 ratio at every pulse area and Doppler width
    for (double rms : {0.0, 1.0, paper().doppler_over_gamma()})
      for (double t : {0.13, 0.5, 1.7, 3.21}) {
        const auto p = paper().with_doppler_rms(rms * paper().gamma);
        CHECK(peak_amplitude(kP2y, t * kPi, p) / peak_amplitude(kP2x, t * kPi, p) ==
              doctest::Approx(8.5).epsilon(1e-12));
      }
    // everything vanishes at theta = pi
    for (const auto& spec : table1_rows()) {
      const double scale = std::abs(peak_amplitude(spec, 0.5 * kPi, paper()));
      CHECK(std::abs(peak_amplitude(spec, kPi, paper())) < 1e-12 * std::max(scale, 1e-20));
    }
  }

  TEST_CASE("closed-form peak table") {
    const double g = 1.0;
    const double dbar = paper().doppler_over_gamma();
    const double expected = -(3.0 / (320.0 * 6400.0)) * voigt_V(g / (std::sqrt(2.0) * dbar));
    CHECK(table1_peak(kP2x, 0.5 * kPi, g, dbar, 80.0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(g / (std::sqrt(2.0) * dbar) == doctest::Approx(0.0194).epsilon(1e-2));
    CHECK(table1_peak(kP1perp, 0.3, g, dbar, 80.0) == 0.0);
    for (double t : {0.0, 1.0, 2.0}) CHECK(std::abs(table1_peak(kP2perp, t * kPi, g, dbar, 80.0)) < 1e-25);
    // |sin^2(t/2) sin^2 t| peaks at 2 atan(sqrt 2)
    const double tmax = 2.0 * std::atan(std::sqrt(2.0));
    const double at = std::abs(table1_peak(kP2perp, tmax, g, dbar, 80.0));
    CHECK(at > std::abs(table1_peak(kP2perp, tmax - 1e-3, g, dbar, 80.0)));
    CHECK(at > std::abs(table1_peak(kP2perp, tmax + 1e-3, g, dbar, 80.0)));
    CHECK(tmax / kPi == doctest::Approx(0.6081).epsilon(1e-4));
    // the printed and corrected leading rows differ only in the Voigt argument
    const double corr = table1_peak(kP1y, 0.5 * kPi, g, dbar, 80.0);
    const double printed = table1_peak(kP1y, 0.5 * kPi, g, dbar, 80.0, Table1Variant::as_printed);
    CHECK(corr == doctest::Approx(voigt_V(g / (2.0 * dbar))));
    CHECK(printed == doctest::Approx(voigt_V(g / (std::sqrt(2.0) * dbar))));
    // numerical peak matches at a generic area
    for (const auto& spec : table1_rows()) {
      if (spec.kappa == 1 && spec.polarization == Polarization::perpendicular) continue;
      const double num = peak_amplitude(spec, 0.27 * kPi, paper());
      const double closed = table1_peak(spec, 0.27 * kPi, g, dbar, 80.0);
      CHECK(std::abs(num / closed - 1.0) < 1e-3);
    }
    CHECK_THROWS_AS(table1_peak({1, Polarization::parallel, Vec3::UnitZ()}, 0.5, g, dbar, 80.0),
                    std::invalid_argument);
  }

  TEST_CASE("cosine-series amplitudes") {
    auto check = [](const std::function<double(double)>& f, std::map<int, double> expected) {
      const auto h = harmonic_coefficients(f, 12);
      for (int n = 0; n <= 12; ++n) {
        const double e = expected.count(n) ? expected[n] : 0.0;
        CHECK(std::abs(h.coefficients[n] - e) < 1e-10);
      }
      CHECK(h.residual < 1e-8);
    };
    check([](double t) { return std::pow(std::sin(t), 2); }, {{0, 0.5}, {4, -0.5}});
    check([](double t) { return -std::pow(std::sin(t), 4); }, {{0, -0.375}, {4, 0.5}, {8, -0.125}});
    check([](double) { return 2.75; }, {{0, 2.75}});
    CHECK_THROWS_AS(harmonic_coefficients([](double t) { return std::abs(std::sin(t)); }, 4),
                    ConvergenceError);

    // normalized numerical curves
    const double s1 = peak_amplitude(kP1y, 0.5 * kPi, paper(), single_only());
    const auto h1 = harmonic_coefficients(
        [&](double t) { return peak_amplitude(kP1y, t, paper(), single_only()) / s1; }, 12);
    CHECK(h1.coefficients[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(h1.coefficients[4] == doctest::Approx(-0.5).epsilon(1e-10));
    const double s2 = std::abs(peak_amplitude(kP2x, 0.5 * kPi, paper()));
    const auto h2 = harmonic_coefficients(
        [&](double t) { return peak_amplitude(kP2x, t, paper()) / s2; }, 12);
    CHECK(h2.coefficients[0] == doctest::Approx(-0.375).epsilon(1e-10));
    CHECK(h2.coefficients[8] == doctest::Approx(-0.125).epsilon(1e-10));
  }

  TEST_CASE("peak scans") {
    std::vector<double> thetas;
    for (int i = 0; i <= 16; ++i) thetas.push_back(0.25 * kPi * i);
    const auto a = peak_scan(thetas, paper(), {}, scan_signals(), 1);
    const auto b = peak_scan(thetas, paper(), {}, scan_signals(), 3);
    CHECK(a.values == b.values);
    CHECK(a.signals.size() == 5);
    CHECK(scan_signals()[4].label() == "P_2_perp");
    CHECK(scan_signals()[0].label() == "P_1_x_par");
    const auto n = normalized(a.values[3]);
    double m = 0.0;
    for (double v : n) m = std::max(m, std::abs(v));
    CHECK(m == doctest::Approx(1.0));
    CHECK(*std::min_element(n.begin(), n.end()) == doctest::Approx(-1.0));
  }

  TEST_CASE("averaging single configurations reproduces the averaged spectrum") {
    const double sigma = 0.2;
    const double xi = 6.0;
    const auto p = paper().with_xi_bar(xi).with_doppler_rms(sigma * paper().gamma);
    const std::vector<double> grid{-1.3, -0.2, 0.0, 0.5, 2.0};
    const auto q = averaging::SphereQuadrature::product(3, 5);  // exact for the degree-4 integrand
    const auto gh = averaging::gauss_hermite_normal(64);
    for (const auto& spec : {kP1x, kP2y}) {
      std::vector<cplx> acc(grid.size(), cplx(0.0));
      for (std::size_t a = 0; a < q.nodes.size(); ++a)
        for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
          // each kappa = 1 term depends on one shift, the kappa = 2 term on the sum
          const double d = spec.kappa == 1 ? sigma * gh.nodes[k] : sigma * gh.nodes[k] / std::sqrt(2.0);
          const auto r = single_config_spectrum(d, d, xi, q.nodes[a], spec, 0.3 * kPi, grid);
          for (std::size_t i = 0; i < grid.size(); ++i) acc[i] += q.weights[a] * gh.weights[k] * r.values[i];
        }
      const auto ref = spectrum(spec, 0.3 * kPi, p, grid);
      double err = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) err = std::max(err, std::abs(acc[i] - ref.values[i]));
      CHECK(err < 1e-9 * max_abs(ref.values));
    }
  }

  TEST_CASE("single configurations") {
    const std::vector<double> grid{-3.0, -0.5, 0.0, 0.25, 4.0};
    const Vec3 n = Vec3(0.1, 0.7, -0.3).normalized();
    const double theta = 0.37 * kPi;
    const auto r = single_config_spectrum(0.0, 0.0, 80.0, n, kP1y, theta, grid, single_only());
    // complex Lorentzian 1/(gamma/2 + i delta) up to a real scale
    const double scale = (r.values[2] * 0.5).real();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const cplx ref = scale / cplx(0.5, grid[i]);
      CHECK(std::abs(r.values[i] - ref) < 1e-9 * std::abs(ref));
    }
    CHECK(std::abs(r.values[2].imag()) < 1e-12 * std::abs(r.values[2]));

    for (const auto& spec : {kP1x, kP2y, kP2perp}) {
      const auto a = single_config_spectrum(0.3, -0.2, 9.0, n, spec, theta, grid);
      const auto b = single_config_spectrum(0.3, -0.2, 9.0, -n, spec, theta, grid);
      CHECK(a.values == b.values);
    }
    // shifts move the line
    const auto shifted = single_config_spectrum(0.25, 0.0, 80.0, n, kP1y, theta, grid, single_only());
    CHECK(std::abs(shifted.values[3].imag()) < 1e-12 * std::abs(shifted.values[3]));
  }

  TEST_CASE("time-domain check") {
    const std::vector<double> grid{-2.0, -0.6, 0.0, 0.3, 1.5};
    for (double theta : {0.14 * kPi, 0.5 * kPi}) {
      const auto ch = scattering::ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), theta);
      const auto t = time_domain_oracle(ch, 0.0, grid);
      const auto l = single_config_spectrum(0.0, 0.0, 80.0, Vec3::UnitZ(), kP1y, theta, grid, single_only());
      for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(t.values[i] - l.values[i]) < 1e-4 * max_abs(l.values));
    }
    const auto ch = scattering::ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), 0.6 * kPi);
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (double tau : {0.0, 0.7, 3.0})
          CHECK(time_domain_yield(ch, tau, a * kPi / 3.0, b * kPi / 3.0) > -1e-14);  // rounding floor

    const auto half = time_domain_oracle(
        scattering::ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), 0.5 * kPi), 0.0, grid);
    const auto full = time_domain_oracle(
        scattering::ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), kPi), 0.0, grid);
    CHECK(max_abs(full.values) < 1e-10 * max_abs(half.values));

    spectra::OracleOptions shortrun;
    shortrun.delay_horizon = 5.0;
    CHECK_THROWS_AS(time_domain_oracle(ch, 0.0, grid, shortrun), ConvergenceError);
  }

  TEST_CASE("full width at half maximum") {
    const double s = 3.0;
    const double w = fwhm([s](double x) { return std::exp(-x * x / (2.0 * s * s)); }, s);
    CHECK(w == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(2.0)) * s).epsilon(1e-10));
    CHECK(fwhm([](double x) { return 1.0 / (0.25 + x * x); }, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(fwhm([](double) { return -1.0; }, 1.0), std::invalid_argument);
  }

  TEST_CASE("signal specs") {
    CHECK(kP1y.label() == "P_1_y_par");
    CHECK(kP2perp.label() == "P_2_perp");
    SignalSpec bad{3, Polarization::parallel, Vec3::UnitY()};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}
