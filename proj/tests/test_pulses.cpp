#include <doctest.h>

#include <random>

#include "mqc/hilbert.hpp"
#include "mqc/pulses.hpp"

using namespace mqc;
using namespace mqc::pulses;

TEST_SUITE("pulses") {
  TEST_CASE("kick unitary") {
    const AtomOperator u = kick_unitary(kPi, CVec3::UnitX(), 0.0);
    Eigen::Vector4cd ground = Eigen::Vector4cd::Zero();
    ground(hilbert::g) = 1.0;
    Eigen::Vector4cd expected = Eigen::Vector4cd::Zero();
    expected(hilbert::e_x) = -kI;
    CHECK((u * ground - expected).norm() < 1e-15);

    // 2 pi flips the sign of the driven two-level subspace
    const AtomOperator u2 = kick_unitary(2.0 * kPi, CVec3::UnitX(), 0.3);
    AtomOperator p = AtomOperator::Zero();
    p(hilbert::g, hilbert::g) = p(hilbert::e_x, hilbert::e_x) = 1.0;
    CHECK((u2 - (AtomOperator::Identity() - 2.0 * p)).norm() < 1e-14);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int i = 0; i < 20; ++i) {
      CVec3 eps(cplx(uni(rng), uni(rng)), cplx(uni(rng), uni(rng)), cplx(uni(rng), uni(rng)));
      eps.normalize();
      const AtomOperator v = kick_unitary(10.0 * uni(rng), eps, 5.0 * uni(rng));
      CHECK((v.adjoint() * v - AtomOperator::Identity()).norm() < 1e-13);
    }
    CHECK_THROWS_AS(kick_unitary(1.0, CVec3(1.0, 1.0, 0.0), 0.0), std::invalid_argument);
  }

  TEST_CASE("phase harmonics") {
    const CVec3 eps = CVec3(1.0, kI, 0.0) / std::sqrt(2.0);
    const KickHarmonics h(0.7 * kPi, eps, false);
    for (double phi : {0.0, 0.4, 2.1, 5.9}) {
      const AtomSuperoperator direct = kick_superoperator(0.7 * kPi, eps, phi);
      CHECK((h.reassemble(phi) - direct).norm() < 1e-13 * direct.norm());
    }

    const KickHarmonics restricted(0.7 * kPi, CVec3::UnitX(), true);
    CHECK(restricted[2].norm() < 1e-13);
    CHECK(restricted[-2].norm() < 1e-13);
    CHECK(restricted[1].norm() > 1e-3);

    const KickHarmonics zero(0.0, CVec3::UnitX(), false);
    CHECK((zero[0] - AtomSuperoperator::Identity()).norm() < 1e-15);
    for (int l : {-2, -1, 1, 2}) CHECK(zero[l].norm() < 1e-15);

    // excited population after the first pulse sits in the l = 0 harmonic
    const KickHarmonics half(0.5 * kPi, CVec3::UnitX(), true);
    CHECK(half.prepared_state(0)(hilbert::e_x, hilbert::e_x).real() == doctest::Approx(0.5));
    CHECK(std::abs(half.prepared_state(2)(hilbert::e_x, hilbert::e_x)) < 1e-15);

    CHECK_THROWS(h[3]);
  }

  TEST_CASE("pulse specs") {
    CHECK_NOTHROW(PulseSpec::first(1.0, CVec3::UnitX()));
    CHECK(PulseSpec::first(1.0, CVec3::UnitX()).ground_restricted);
    CHECK_FALSE(PulseSpec::second(1.0, CVec3::UnitY()).ground_restricted);
    CHECK_THROWS_AS(PulseSpec::first(-1.0, CVec3::UnitX()), std::invalid_argument);
    PulseSpec bad{1.0, CVec3::UnitX(), 2, true};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }

  TEST_CASE("pair kick factorizes") {
    const auto r1 = kick_superoperator(0.9, CVec3::UnitX(), 0.2);
    const auto r2 = kick_superoperator(1.3, CVec3::UnitY(), 1.1);
    const AtomOperator a = hilbert::dyad(1, 0) + 0.5 * hilbert::dyad(2, 2);
    const AtomOperator b = hilbert::dyad(0, 3) - kI * hilbert::dyad(1, 1);
    auto apply = [](const AtomSuperoperator& r, const AtomOperator& x) {
      Eigen::Matrix<cplx, 16, 1> v = r * Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(x.data());
      return AtomOperator(Eigen::Map<const AtomOperator>(v.data()));
    };
    const PairOperator out = apply_pair_kick(r1, r2, hilbert::kron(a, b));
    CHECK((out - hilbert::kron(apply(r1, a), apply(r2, b))).norm() < 1e-14);
  }

  TEST_CASE("Gaussian pulse area") {
    const double sigma = 21e-15;
    CHECK(area_from_gaussian(0.0, sigma, 1e-29) == 0.0);
    const double a1 = area_from_gaussian(1e8, sigma, 2.5e-29);
    CHECK(area_from_gaussian(2e8, sigma, 2.5e-29) == doctest::Approx(2.0 * a1).epsilon(1e-15));
    const double target = 0.14 * kPi;
    const double product = field_dipole_product_from_area(target, sigma);
    const double d = 2.5e-29;
    CHECK(std::abs(area_from_gaussian(product / d, sigma, d) - target) < 1e-12 * target);
  }
}
