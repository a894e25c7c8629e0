#include "mqc/pulses.hpp"

#include <cmath>

#include "mqc/hilbert.hpp"

namespace mqc::pulses {

namespace {

AtomSuperoperator conjugation(const AtomOperator& u) {
  // vec(U^dag X U) = (U^T (x) U^dag) vec(X)
  AtomSuperoperator s;
  const AtomOperator ud = u.adjoint();
  for (int c = 0; c < 4; ++c)
    for (int cp = 0; cp < 4; ++cp) s.block<4, 4>(4 * c, 4 * cp) = u(cp, c) * ud;
  return s;
}

AtomSuperoperator trace_pairing(const AtomOperator& rho) {
  // X -> Tr(rho X) I
  AtomSuperoperator s = AtomSuperoperator::Zero();
  for (int c = 0; c < 4; ++c)
    for (int r = 0; r < 4; ++r) {
      const cplx w = rho(c, r);
      for (int d = 0; d < 4; ++d) s(d + 4 * d, r + 4 * c) = w;
    }
  return s;
}

}  // namespace

void PulseSpec::validate() const {
  if (!(area >= 0.0) || !std::isfinite(area)) throw std::invalid_argument("pulse area must be >= 0");
  require_unit(polarization, "polarization");
  if (index != 1 && index != 2) throw std::invalid_argument("pulse index must be 1 or 2");
  if (ground_restricted && index != 1)
    throw std::invalid_argument("only the first pulse acts on the ground state");
}

PulseSpec PulseSpec::first(double area, const CVec3& polarization) {
  PulseSpec p{area, polarization, 1, true};
  p.validate();
  return p;
}

PulseSpec PulseSpec::second(double area, const CVec3& polarization) {
  PulseSpec p{area, polarization, 2, false};
  p.validate();
  return p;
}

AtomOperator kick_unitary(double area, const CVec3& polarization, double phi) {
  require_unit(polarization, "polarization");
  const auto& d = hilbert::dipole_operators();
  AtomOperator s = AtomOperator::Zero();
  for (int i = 0; i < 3; ++i) s += std::conj(polarization(i)) * d.lowering[i];
  const AtomOperator m = s.adjoint() * std::exp(kI * phi) + s * std::exp(-kI * phi);
  const AtomOperator p = m * m;
  return AtomOperator::Identity() - p + p * std::cos(0.5 * area) - kI * m * std::sin(0.5 * area);
}

AtomSuperoperator kick_superoperator(double area, const CVec3& polarization, double phi) {
  return conjugation(kick_unitary(area, polarization, phi));
}

KickHarmonics::KickHarmonics(double area, const CVec3& polarization, bool ground_restricted)
    : ground_restricted_(ground_restricted) {
  require_unit(polarization, "polarization");
  std::array<AtomSuperoperator, kPhaseSamples> kicks;
  std::array<AtomOperator, kPhaseSamples> states;
  const AtomOperator ground = hilbert::dyad(hilbert::g, hilbert::g);
  for (int k = 0; k < kPhaseSamples; ++k) {
    const AtomOperator u = kick_unitary(area, polarization, 2.0 * kPi * k / kPhaseSamples);
    kicks[k] = conjugation(u);
    states[k] = u * ground * u.adjoint();
  }
  for (int l = -kMaxHarmonic; l <= kMaxHarmonic; ++l) {
    state_[l + kMaxHarmonic] = five_point_harmonic(states, l);
    harmonics_[l + kMaxHarmonic] = ground_restricted ? trace_pairing(state_[l + kMaxHarmonic])
                                                     : five_point_harmonic(kicks, l);
  }
}

KickHarmonics::KickHarmonics(const PulseSpec& spec)
    : KickHarmonics((spec.validate(), spec.area), spec.polarization, spec.ground_restricted) {}

const AtomSuperoperator& KickHarmonics::operator[](int l) const {
  if (l < -kMaxHarmonic || l > kMaxHarmonic) throw std::out_of_range("harmonic index out of range");
  return harmonics_[l + kMaxHarmonic];
}

const AtomOperator& KickHarmonics::prepared_state(int l) const {
  if (l < -kMaxHarmonic || l > kMaxHarmonic) throw std::out_of_range("harmonic index out of range");
  return state_[l + kMaxHarmonic];
}

AtomOperator KickHarmonics::apply(int l, const AtomOperator& x) const {
  AtomOperator out;
  Eigen::Map<Eigen::Matrix<cplx, 16, 1>>(out.data()) =
      (*this)[l] * Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(x.data());
  return out;
}

AtomSuperoperator KickHarmonics::reassemble(double phi) const {
  AtomSuperoperator s = AtomSuperoperator::Zero();
  for (int l = -kMaxHarmonic; l <= kMaxHarmonic; ++l)
    s += std::exp(kI * (l * phi)) * harmonics_[l + kMaxHarmonic];
  return s;
}

PairOperator apply_pair_kick(const AtomSuperoperator& atom1, const AtomSuperoperator& atom2,
                             const PairOperator& y) {
  // W[(a1,b1),(a2,b2)] = Y[(a1,a2),(b1,b2)] with single-atom vec index a + 4 b
  AtomSuperoperator w;
  for (int a1 = 0; a1 < 4; ++a1)
    for (int a2 = 0; a2 < 4; ++a2)
      for (int b1 = 0; b1 < 4; ++b1)
        for (int b2 = 0; b2 < 4; ++b2) w(a1 + 4 * b1, a2 + 4 * b2) = y(4 * a1 + a2, 4 * b1 + b2);
  const AtomSuperoperator wk = atom1 * w * atom2.transpose();
  PairOperator out;
  for (int a1 = 0; a1 < 4; ++a1)
    for (int a2 = 0; a2 < 4; ++a2)
      for (int b1 = 0; b1 < 4; ++b1)
        for (int b2 = 0; b2 < 4; ++b2) out(4 * a1 + a2, 4 * b1 + b2) = wk(a1 + 4 * b1, a2 + 4 * b2);
  return out;
}

double area_from_gaussian(double field_amplitude, double sigma, double dipole_moment) {
  if (!(sigma > 0.0)) throw std::invalid_argument("pulse duration sigma must be positive");
  return 2.0 * dipole_moment / constants::kHbar * field_amplitude * sigma * std::sqrt(2.0 * kPi);
}

double field_dipole_product_from_area(double area, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("pulse duration sigma must be positive");
  return area * constants::kHbar / (2.0 * sigma * std::sqrt(2.0 * kPi));
}

}  // namespace mqc::pulses
