#include <doctest.h>

#include <functional>

#include "mqc/averaging.hpp"
#include "mqc/spectra.hpp"

using namespace mqc;
using namespace mqc::averaging;

namespace {
bool close(cplx a, cplx b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }
}  // namespace

TEST_SUITE("averaging") {
  TEST_CASE("Gauss rules") {
    const auto gl = gauss_legendre(12);
    double s = 0.0, x4 = 0.0;
    for (int i = 0; i < 12; ++i) {
      s += gl.weights[i];
      x4 += gl.weights[i] * std::pow(gl.nodes[i], 4);
    }
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x4 == doctest::Approx(0.4).epsilon(1e-14));
    const auto gh = gauss_hermite_normal(20);
    double m0 = 0.0, m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < 20; ++i) {
      m0 += gh.weights[i];
      m2 += gh.weights[i] * gh.nodes[i] * gh.nodes[i];
      m4 += gh.weights[i] * std::pow(gh.nodes[i], 4);
    }
    CHECK(m0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-13));
    CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
  }

  TEST_CASE("isotropic orientation averages") {
    std::function<double(const Vec3&)> one = [](const Vec3&) { return 1.0; };
    CHECK(orientation_average(one) == doctest::Approx(1.0).epsilon(1e-14));
    const auto q = SphereQuadrature::product();
    double err2 = 0.0, err4 = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        std::function<double(const Vec3&)> f = [&](const Vec3& n) { return n(i) * n(j); };
        err2 = std::max(err2, std::abs(sphere_sum(q, f) - (i == j) / 3.0));
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            std::function<double(const Vec3&)> g = [&](const Vec3& n) {
              return n(i) * n(j) * n(k) * n(l);
            };
            const double exact = ((i == j) * (k == l) + (i == k) * (j == l) + (i == l) * (j == k)) / 15.0;
            err4 = std::max(err4, std::abs(sphere_sum(q, g) - exact));
          }
      }
    CHECK(err2 < 1e-12);
    CHECK(err4 < 1e-12);
  }

  TEST_CASE("orientation guard rejects unresolved integrands") {
    std::function<double(const Vec3&)> spiky = [](const Vec3& n) { return std::exp(40.0 * n(2)); };
    CHECK_THROWS_AS(orientation_average(spiky, 4, 8), ConvergenceError);
  }

  TEST_CASE("Maxwell-Boltzmann Doppler width") {
    const double s = maxwell_boltzmann_sigma(320.0, 1.443e-25, 790e-9);
    CHECK(s / (2.0 * kPi) == doctest::Approx(0.221e9).epsilon(5e-3));
    CHECK(maxwell_boltzmann_sigma(4.0 * 320.0, 1.443e-25, 790e-9) == doctest::Approx(2.0 * s));
    CHECK_THROWS_AS(maxwell_boltzmann_sigma(0.0, 1.0, 1.0), std::invalid_argument);
  }

  TEST_CASE("Gaussian convolution of lineshapes") {
    const DopplerModel model{0.5, 64};
    const auto constant = voigt_convolve([](double) { return cplx(2.5, -1.0); }, 1, model);
    CHECK(close(constant(0.3), cplx(2.5, -1.0), 1e-14));

    const double a = 1.0;
    auto lorentz = [a](double d) { return 1.0 / cplx(a, d); };
    const auto conv = voigt_convolve(lorentz, 1, model);
    // peak of the real Lorentzian a/(a^2 + d^2) after convolution is V(a/sigma)
    CHECK(std::abs(a * conv(0.0).real() - spectra::voigt_V(a / model.sigma)) < 1e-9);
    CHECK(close(conv(0.7), lorentzian_moment(1, a, 0.7, model.sigma), 1e-9));

    const auto conv2 = voigt_convolve(lorentz, 2, model);
    for (double d : {0.0, 0.4, -1.3})
      CHECK(close(conv2(d), doppler_average_2d(lorentz, d, model), 1e-10));

    // a width the default order cannot resolve trips the doubling guard
    const auto bad = voigt_convolve([](double d) { return 1.0 / cplx(0.01, d); }, 1, DopplerModel{5.0, 8});
    CHECK_THROWS_AS(bad(0.0), ConvergenceError);
    CHECK_THROWS_AS(voigt_convolve(lorentz, 3, model), std::invalid_argument);
  }

  TEST_CASE("Faddeeva function against reference values") {
    struct Ref {
      cplx z, w;
    };
    const Ref refs[] = {
        {{0.5, 0.5}, {0.5331567079121748, 0.2304882313844585}},
        {{3.0, 0.01}, {0.0009088307067415815, 0.20114646254019664}},
        {{0.0, 1e-3}, {0.9988726200811509, 0.0}},
        {{-2.5, 0.3}, {0.038226506260685265, -0.24304200853097793}},
        {{12.0, 0.7}, {0.0027620306230082756, 0.04701794381943889}},
        {{1e-8, 6.0}, {0.09277656780053833, 1.506035348905108e-10}},
        {{40.0, 40.0}, {0.007053471210193231, 0.007051267345439577}},
    };
    for (const auto& r : refs) CHECK(std::abs(faddeeva(r.z) - r.w) < 1e-12 * std::abs(r.w));
    CHECK_THROWS_AS(faddeeva(cplx(0.0, -1.0)), std::domain_error);
  }

  TEST_CASE("scaled complementary error function") {
    const std::pair<double, double> refs[] = {{0.0, 1.0},
                                              {0.5, 0.6156903441929258},
                                              {3.0, 0.17900115118138998},
                                              {9.99, 0.05619664070685882},
                                              {10.01, 0.056085454355001924},
                                              {30.0, 0.018795888861416754},
                                              {1e4, 5.641895807268084e-05}};
    for (auto [x, v] : refs) CHECK(erfcx(x) == doctest::Approx(v).epsilon(1e-13));
    CHECK_THROWS_AS(erfcx(-1.0), std::domain_error);
  }

  TEST_CASE("Gaussian moments of Lorentzian powers") {
    const double a = 0.5;
    const double sigma = 3.0;
    const double v = spectra::voigt_V(a / sigma);
    CHECK(lorentzian_moment(1, a, 0.0, sigma).real() == doctest::Approx(v / a).epsilon(1e-12));
    CHECK(lorentzian_moment(2, a, 0.0, sigma).real() ==
          doctest::Approx((1.0 - v) / (sigma * sigma)).epsilon(1e-12));
    CHECK(lorentzian_moment(1, a, 1.2, 0.0) == 1.0 / cplx(a, 1.2));

    // against brute-force Gauss-Hermite where the integrand is smooth on the node scale
    const auto gh = gauss_hermite_normal(200);
    for (int k = 1; k <= 3; ++k)
      for (double s : {0.01, 0.05, 0.09, 0.12, 0.3, 0.8})  // small widths use the moment series
        for (double d : {0.0, 0.45, -1.7}) {
          cplx ref = 0.0;
          for (std::size_t i = 0; i < gh.nodes.size(); ++i)
            ref += gh.weights[i] * std::pow(cplx(1.0, d - s * gh.nodes[i]), -k);
          CHECK(close(lorentzian_moment(k, 1.0, d, s), ref, 1e-10));
        }
    CHECK_THROWS_AS(lorentzian_moment(4, 1.0, 0.0, 1.0), std::invalid_argument);
  }
}
