#include <doctest.h>

#include "mqc/hilbert.hpp"
#include "mqc/scattering.hpp"

using namespace mqc;
using namespace mqc::scattering;

namespace {

cplx get(const HarmonicMap& m, int l1, int l2) {
  auto it = m.find({l1, l2});
  return it == m.end() ? cplx(0.0) : it->second;
}

double map_max(const HarmonicMap& m) {
  double v = 0.0;
  for (const auto& [k, c] : m) v = std::max(v, std::abs(c));
  return v;
}

const Vec3 kN = Vec3(0.36, -0.48, 0.8);

}  // namespace

TEST_SUITE("scattering") {
  TEST_CASE("zeroth order carries no interaction phase") {
    const auto ch = ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), 0.3 * kPi);
    const auto ledger = stroboscopic_compose(0, cplx(0.1, 0.4), 0.0, kN, ch);
    CHECK_FALSE(ledger.empty());
    for (const auto& [idx, v] : ledger) CHECK(idx.p == 0);
  }

  TEST_CASE("two pi pulses give no coherence signal") {
    const auto ch = ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), kPi);
    const auto img = intensity_images(cplx(0.0, 0.3), ch, kN);
    CHECK(std::abs(get(img.single, 1, 0)) < 1e-14);
    CHECK(std::abs(get(img.single, -1, 0)) < 1e-14);
  }

  TEST_CASE("first order vanishes after the selection rules") {
    for (auto pol : {Polarization::parallel, Polarization::perpendicular}) {
      const auto ch = ChannelConfig::preset(pol, Vec3::UnitY(), 0.6 * kPi);
      const auto ledger = stroboscopic_compose(1, cplx(0.2, 0.5), 0.0, kN, ch);
      double raw = 0.0;
      for (const auto& [idx, v] : ledger) {
        raw = std::max(raw, std::abs(v));
        CHECK(std::abs(idx.p) == 1);
      }
      CHECK(raw > 1e-4);
      CHECK(map_max(apply_selection_rules(ledger)) < 1e-13);
    }
  }

  TEST_CASE("selection rules on a hand-made ledger") {
    HarmonicLedger ledger;
    ledger[{-1, 0, 1, 0, 0}] = 2.0;
    ledger[{1, 0, 1, 0, 0}] = 5.0;
    ledger[{-1, 0, 1, 0, 1}] = 7.0;
    ledger[{-1, -1, 1, 1, -1}] = 11.0;
    ledger[{-1, -1, 1, 1, 0}] = 3.0;
    const auto kept = apply_selection_rules(ledger);
    CHECK(kept.size() == 2);
    CHECK(get(kept, 1, 0) == cplx(2.0));
    CHECK(get(kept, 1, 1) == cplx(3.0));
  }

  TEST_CASE("harmonics of a real intensity are conjugate pairs") {
    const auto ch = ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), 0.37 * kPi);
    const cplx z(0.15, 0.8);
    const auto a = intensity_images(z, ch, kN);
    const auto b = intensity_images(std::conj(z), ch, kN);
    CHECK(std::abs(get(a.single, -1, 0) - std::conj(get(b.single, 1, 0))) < 1e-14);
    CHECK(std::abs(get(a.double_, -1, -1) - std::conj(get(b.double_, 1, 1))) < 1e-16);
    CHECK(std::abs(get(a.double_, 0, -1) - std::conj(get(b.double_, 0, 1))) < 1e-16);
  }

  TEST_CASE("perpendicular single scattering vanishes at fixed n") {
    const auto ch = ChannelConfig::preset(Polarization::perpendicular, Vec3::UnitY(), 0.5 * kPi);
    const auto img = intensity_images(cplx(0.0, 0.2), ch, kN);
    CHECK(std::abs(get(img.single, 1, 0)) < 1e-15);
    // double scattering does not vanish before the orientation average
    CHECK(std::abs(get(img.double_, 1, 0)) > 1e-8);
  }

  TEST_CASE("far-field double scattering scales as xi^-2") {
    const auto ch = ChannelConfig::preset(Polarization::parallel, Vec3::UnitX(), 0.45 * kPi);
    ComposeOptions a, b;
    a.xi_bar = 40.0;
    b.xi_bar = 80.0;
    const cplx z(0.0, 0.6);
    const cplx va = get(intensity_images(z, ch, kN, a).double_, 1, 1);
    const cplx vb = get(intensity_images(z, ch, kN, b).double_, 1, 1);
    CHECK(std::abs(va) > 0.0);
    CHECK(std::abs(vb - 0.25 * va) < 1e-13 * std::abs(va));
  }

  TEST_CASE("pole expansions reproduce the direct composition") {
    for (auto mode : {liouville::TensorMode::far_field, liouville::TensorMode::full}) {
      for (auto pol : {Polarization::parallel, Polarization::perpendicular}) {
        const auto ch = ChannelConfig::preset(pol, Vec3::UnitY(), 0.41 * kPi);
        ComposeOptions opts;
        opts.mode = mode;
        opts.xi_bar = 6.0;
        const auto moments = tensor_moments(liouville::interaction_amplitude(6.0, kN, mode));
        for (cplx z : {cplx(0.0, 0.7), cplx(0.3, -1.1)}) {
          const auto img = intensity_images(z, ch, kN, opts);
          const cplx s = single_scattering_expansion(ch, 1, 0)(z);
          CHECK(std::abs(s - get(img.single, 1, 0)) < 1e-13);
          for (auto [l1, l2] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
            const cplx k = double_scattering_kernel(ch, l1, l2).contract(moments)(z);
            const cplx d = get(img.double_, l1, l2);
            CHECK(std::abs(k - d) < 1e-12 * std::max(std::abs(d), 1e-3));
          }
        }
      }
    }
  }

  TEST_CASE("emission by atom 2 mirrors emission by atom 1") {
    const auto ch = ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), 0.3 * kPi);
    ComposeOptions atom2;
    atom2.xi_bar = 9.0;
    ComposeOptions atom1 = atom2;
    const auto& d = hilbert::dipole_operators();
    PairOperator q2 = PairOperator::Zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double p = (i == j) - ch.k_hat(i) * ch.k_hat(j);
        q2 += p * hilbert::embed(d.raising(i) * d.lowering[j], 2);
      }
    atom2.observable = q2;
    const cplx z(0.0, 0.45);
    const auto a = intensity_images(z, ch, kN, atom1);
    const auto b = intensity_images(z, ch, kN, atom2);
    CHECK(std::abs(get(a.single, 1, 0) - get(b.single, 0, 1)) < 1e-14);
    CHECK(std::abs(get(a.double_, 1, 0) - get(b.double_, 0, 1)) < 1e-14);
    CHECK(std::abs(get(a.double_, 0, 1) - get(b.double_, 1, 0)) < 1e-14);
    CHECK(std::abs(get(a.double_, 1, 1) - get(b.double_, 1, 1)) < 1e-14);
  }

  TEST_CASE("rotating the whole setup leaves the images unchanged") {
    const Mat3 r = Eigen::AngleAxisd(0.7, Vec3(1.0, -2.0, 0.5).normalized()).toRotationMatrix();
    ChannelConfig ch = ChannelConfig::preset(Polarization::perpendicular, Vec3::UnitY(), 0.55 * kPi);
    ChannelConfig rot = ch;
    rot.k_hat = r * ch.k_hat;
    rot.eps1 = r.cast<cplx>() * ch.eps1;
    rot.eps2 = r.cast<cplx>() * ch.eps2;
    ComposeOptions opts;
    opts.mode = liouville::TensorMode::full;
    opts.xi_bar = 5.0;
    const cplx z(0.1, 0.3);
    const auto a = intensity_images(z, ch, kN, opts);
    const auto b = intensity_images(z, rot, r * kN, opts);
    for (const auto& [key, v] : a.double_) {
      const cplx w = get(b.double_, key.first, key.second);
      CHECK(std::abs(v - w) < 1e-13);
    }
  }

  TEST_CASE("composition orders") {
    const auto ch = ChannelConfig::preset(Polarization::parallel, Vec3::UnitY(), 0.5 * kPi);
    ComposeOptions written;
    written.order = CompositionOrder::as_written;
    const cplx z1(0.0, 0.4), z2(0.3, 0.0);
    const auto h = apply_selection_rules(stroboscopic_compose(0, z1, z2, kN, ch));
    const auto w = apply_selection_rules(stroboscopic_compose(0, z1, z2, kN, ch, written));
    CHECK(std::abs(get(h, 1, 0)) > 0.1);
    CHECK(std::abs(get(w, 1, 0)) < 1e-15);
  }

  TEST_CASE("partial fractions") {
    const auto p = PoleExpansion::product_of_simple_poles({1, 2, 2, 4});
    for (cplx z : {cplx(0.3, 0.2), cplx(-0.1, 2.0)}) {
      const cplx direct = 1.0 / ((z + 0.5) * (z + 1.0) * (z + 1.0) * (z + 2.0));
      CHECK(std::abs(p(z) - direct) < 1e-13 * std::abs(direct));
    }
    CHECK_THROWS(PoleExpansion().coefficient(5, 1));
  }

  TEST_CASE("symmetric tensor coordinates") {
    Mat3 m;
    m << 1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0;
    const auto t = tensor_coordinates(m.cast<cplx>());
    CMat3 back = CMat3::Zero();
    for (int a = 0; a < kTensorBasisSize; ++a) back += t(a) * symmetric_tensor_basis()[a].cast<cplx>();
    CHECK((back - m.cast<cplx>()).norm() < 1e-15);
    Mat3 asym = m;
    asym(0, 1) = -1.0;
    CHECK_THROWS(tensor_coordinates(asym.cast<cplx>()));
  }

  TEST_CASE("channel validation") {
    ChannelConfig c;
    c.eps1 = CVec3(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK_THROWS_AS(stroboscopic_compose(3, cplx(0.0, 1.0), 0.0, kN, ChannelConfig{}), std::exception);
  }
}
