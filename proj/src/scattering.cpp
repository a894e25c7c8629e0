#include "mqc/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mqc/hilbert.hpp"
#include "mqc/pulses.hpp"

namespace mqc::scattering {

using liouville::PhasePart;
using liouville::Superoperator;

namespace {

constexpr int kMaxOrder = 2;

cplx pair_trace(const PairOperator& rho, const PairOperator& x) {
  return (rho.transpose().cwiseProduct(x)).sum();
}

PairOperator pair_state(const pulses::KickHarmonics& first, int m1, int m2) {
  return hilbert::kron(first.prepared_state(m1), first.prepared_state(m2));
}

// Resolvent used in the second interval: z2 = 0 is the integrated limit.
PairOperator second_interval_resolvent(cplx z2, const PairOperator& x) {
  if (z2 == cplx(0.0)) return liouville::integrated_resolvent(x);
  return liouville::resolvent_apply(z2, x);
}

struct Generators {
  Superoperator minus;
  Superoperator plus;
};

Generators coupling_generators(const Vec3& n_hat, const ComposeOptions& options) {
  const CMat3 amp = liouville::interaction_amplitude(options.xi_bar, n_hat, options.mode);
  return {liouville::interaction_generator(amp, PhasePart::minus),
          liouville::interaction_generator(amp, PhasePart::plus)};
}

// Operators tagged by interaction-phase power p.
using PhaseTerms = std::map<int, PairOperator>;

template <class Resolve>
PhaseTerms couple_and_resolve(const PhaseTerms& in, const Generators& gens, Resolve&& resolve) {
  PhaseTerms out;
  for (const auto& [p, op] : in) {
    for (const Superoperator* l : {&gens.minus, &gens.plus}) {
      const PairOperator next = resolve((*l)(op));
      // p counts e^{-i xi} factors; the minus part carries p_inc = -1
      const int key = p - l->phase_increment();
      auto it = out.find(key);
      if (it == out.end())
        out.emplace(key, next);
      else
        it->second += next;
    }
  }
  return out;
}

void require_order(int m) {
  if (m < 0 || m > kMaxOrder) throw std::invalid_argument("coupling order m must be 0, 1 or 2");
}

HarmonicLedger compose_heisenberg(int m, cplx z1, cplx z2, const Generators& gens,
                                  const PairOperator& q, const pulses::KickHarmonics& first,
                                  const pulses::KickHarmonics& second) {
  auto g2 = [z2](const PairOperator& x) { return second_interval_resolvent(z2, x); };
  auto g1 = [z1](const PairOperator& x) { return liouville::resolvent_apply(z1, x); };

  // chain2[k] : p -> G(z2)[L G(z2)]^k Q
  std::vector<PhaseTerms> chain2(m + 1);
  chain2[0].emplace(0, g2(q));
  for (int k = 1; k <= m; ++k) chain2[k] = couple_and_resolve(chain2[k - 1], gens, g2);

  HarmonicLedger ledger;
  for (int n = 0; n <= m; ++n) {
    for (const auto& [p2, op] : chain2[m - n]) {
      for (int l1 = -pulses::kMaxHarmonic; l1 <= pulses::kMaxHarmonic; ++l1)
        for (int l2 = -pulses::kMaxHarmonic; l2 <= pulses::kMaxHarmonic; ++l2) {
          PhaseTerms chain1;
          chain1.emplace(p2, g1(pulses::apply_pair_kick(second[l1], second[l2], op)));
          for (int j = 0; j < n; ++j) chain1 = couple_and_resolve(chain1, gens, g1);
          for (const auto& [p, x] : chain1)
            for (int m1 = -1; m1 <= 1; ++m1)
              for (int m2 = -1; m2 <= 1; ++m2)
                ledger[{m1, m2, l1, l2, p}] += pair_trace(pair_state(first, m1, m2), x);
        }
    }
  }
  return ledger;
}

HarmonicLedger compose_as_written(int m, cplx z1, cplx z2, const Generators& gens,
                                  const PairOperator& q, const pulses::KickHarmonics& first,
                                  const pulses::KickHarmonics& second) {
  auto g2 = [z2](const PairOperator& x) { return second_interval_resolvent(z2, x); };
  auto g1 = [z1](const PairOperator& x) { return liouville::resolvent_apply(z1, x); };
  HarmonicLedger ledger;
  for (int m1 = -1; m1 <= 1; ++m1)
    for (int m2 = -1; m2 <= 1; ++m2) {
      // ground-restricted first kick: Q -> Tr(rho^[m1] (x) rho^[m2] Q) I
      const PairOperator start =
          pair_trace(pair_state(first, m1, m2), q) * PairOperator::Identity();
      for (int n = 0; n <= m; ++n) {
        PhaseTerms chain1;
        chain1.emplace(0, g1(start));
        for (int j = 0; j < n; ++j) chain1 = couple_and_resolve(chain1, gens, g1);
        for (const auto& [p1, op] : chain1)
          for (int l1 = -pulses::kMaxHarmonic; l1 <= pulses::kMaxHarmonic; ++l1)
            for (int l2 = -pulses::kMaxHarmonic; l2 <= pulses::kMaxHarmonic; ++l2) {
              PhaseTerms chain2;
              chain2.emplace(p1, g2(pulses::apply_pair_kick(second[l1], second[l2], op)));
              for (int j = 0; j < m - n; ++j) chain2 = couple_and_resolve(chain2, gens, g2);
              // pairing with |gg><gg|
              for (const auto& [p, x] : chain2) ledger[{m1, m2, l1, l2, p}] += x(0, 0);
            }
      }
    }
  return ledger;
}

// -- pole-tagged operators -------------------------------------------------------

// Each entry is an operator multiplied by prod_i 1/(z - lambda_{s_i}) for the
// sorted sector list used as key.
using SectorTerms = std::map<std::vector<int>, PairOperator>;

void accumulate(SectorTerms& terms, const std::vector<int>& key, const PairOperator& op) {
  auto it = terms.find(key);
  if (it == terms.end())
    terms.emplace(key, op);
  else
    it->second += op;
}

SectorTerms resolve_sectors(const SectorTerms& in) {
  const auto& table = liouville::sector_table();
  SectorTerms out;
  for (const auto& [key, op] : in) {
    const PairOperator y = liouville::to_decay_basis(op);
    for (int s = 0; s < liouville::kSectorCount; ++s) {
      PairOperator part = PairOperator::Zero();
      bool any = false;
      for (int c = 0; c < 16; ++c)
        for (int r = 0; r < 16; ++r)
          if (table(r, c) == s && y(r, c) != cplx(0.0)) {
            part(r, c) = y(r, c);
            any = true;
          }
      if (!any) continue;
      std::vector<int> next = key;
      next.insert(std::upper_bound(next.begin(), next.end(), s), s);
      accumulate(out, next, liouville::from_decay_basis(part));
    }
  }
  return out;
}

SectorTerms apply_generator(const Superoperator& l, const SectorTerms& in) {
  SectorTerms out;
  for (const auto& [key, op] : in) out.emplace(key, l(op));
  return out;
}

PoleExpansion pair_terms(const PairOperator& rho, const SectorTerms& terms) {
  PoleExpansion out;
  for (const auto& [key, op] : terms) {
    const cplx c = pair_trace(rho, op);
    if (c == cplx(0.0)) continue;
    out += PoleExpansion::product_of_simple_poles(key) * c;
  }
  return out;
}

// Basis generators: index a in [0,6) is the minus part for E_a, [6,12) the plus part.
const std::array<Superoperator, 2 * kTensorBasisSize>& basis_generators() {
  static const std::array<Superoperator, 2 * kTensorBasisSize> gens = [] {
    std::array<Superoperator, 2 * kTensorBasisSize> g;
    const auto& basis = symmetric_tensor_basis();
    for (int a = 0; a < kTensorBasisSize; ++a) {
      g[a] = liouville::interaction_generator(basis[a].cast<cplx>(), PhasePart::minus);
      g[kTensorBasisSize + a] = liouville::interaction_generator(basis[a].cast<cplx>(), PhasePart::plus);
    }
    return g;
  }();
  return gens;
}

}  // namespace

// -- channel -------------------------------------------------------------------

ChannelConfig ChannelConfig::preset(Polarization pol, const Vec3& k_hat, double theta) {
  ChannelConfig c;
  c.k_hat = k_hat;
  c.eps1 = CVec3::UnitX();
  c.eps2 = pol == Polarization::parallel ? CVec3::UnitX() : CVec3::UnitY();
  c.theta = theta;
  c.validate();
  return c;
}

void ChannelConfig::validate() const {
  require_unit(k_hat, "detection direction");
  require_unit(eps1, "first-pulse polarization");
  require_unit(eps2, "second-pulse polarization");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw std::invalid_argument("pulse area must be >= 0");
}

// -- direct composition ----------------------------------------------------------

HarmonicLedger stroboscopic_compose(int m, cplx z1, cplx z2, const Vec3& n_hat,
                                    const ChannelConfig& channel, const ComposeOptions& options) {
  require_order(m);
  channel.validate();
  const Generators gens = coupling_generators(n_hat, options);
  const PairOperator q =
      options.observable ? *options.observable : hilbert::detection_operator(channel.k_hat).op;
  const pulses::KickHarmonics first(channel.theta, channel.eps1, true);
  const pulses::KickHarmonics second(channel.theta, channel.eps2, false);
  if (options.order == CompositionOrder::heisenberg)
    return compose_heisenberg(m, z1, z2, gens, q, first, second);
  return compose_as_written(m, z1, z2, gens, q, first, second);
}

HarmonicMap apply_selection_rules(const HarmonicLedger& ledger) {
  HarmonicMap out;
  for (const auto& [idx, value] : ledger) {
    if (idx.p != 0 || idx.l1 + idx.m1 != 0 || idx.l2 + idx.m2 != 0) continue;
    out[{idx.l1, idx.l2}] += value;
  }
  return out;
}

IntensityImages intensity_images(cplx z1, const ChannelConfig& channel, const Vec3& n_hat,
                                 const ComposeOptions& options) {
  IntensityImages out;
  out.single = apply_selection_rules(stroboscopic_compose(0, z1, 0.0, n_hat, channel, options));
  out.double_ = apply_selection_rules(stroboscopic_compose(2, z1, 0.0, n_hat, channel, options));
  return out;
}

// -- PoleExpansion ---------------------------------------------------------------

PoleExpansion::PoleExpansion() {
  for (auto& row : c_) row.fill(cplx(0.0));
}

cplx PoleExpansion::coefficient(int sector, int order) const {
  if (sector < 0 || sector >= liouville::kSectorCount || order < 1 || order > kMaxPoleOrder)
    throw std::out_of_range("pole index out of range");
  return c_[sector][order - 1];
}

cplx& PoleExpansion::coefficient(int sector, int order) {
  if (sector < 0 || sector >= liouville::kSectorCount || order < 1 || order > kMaxPoleOrder)
    throw std::out_of_range("pole index out of range");
  return c_[sector][order - 1];
}

cplx PoleExpansion::operator()(cplx z) const {
  cplx acc = 0.0;
  for (int s = 0; s < liouville::kSectorCount; ++s) {
    const cplx inv = 1.0 / (z - liouville::sector_eigenvalue(s));
    cplx pw = inv;
    for (int k = 0; k < kMaxPoleOrder; ++k, pw *= inv)
      if (c_[s][k] != cplx(0.0)) acc += c_[s][k] * pw;
  }
  return acc;
}

PoleExpansion& PoleExpansion::operator+=(const PoleExpansion& other) {
  for (int s = 0; s < liouville::kSectorCount; ++s)
    for (int k = 0; k < kMaxPoleOrder; ++k) c_[s][k] += other.c_[s][k];
  return *this;
}

PoleExpansion PoleExpansion::operator*(cplx factor) const {
  PoleExpansion out = *this;
  for (auto& row : out.c_)
    for (auto& v : row) v *= factor;
  return out;
}

double PoleExpansion::max_abs() const {
  double m = 0.0;
  for (const auto& row : c_)
    for (const auto& v : row) m = std::max(m, std::abs(v));
  return m;
}

PoleExpansion PoleExpansion::product_of_simple_poles(std::vector<int> sectors) {
  if (sectors.empty()) throw std::invalid_argument("pole product needs at least one factor");
  std::sort(sectors.begin(), sectors.end());
  PoleExpansion out;
  if (sectors.front() == sectors.back()) {
    if (static_cast<int>(sectors.size()) > kMaxPoleOrder)
      throw std::invalid_argument("pole order exceeds the supported maximum");
    out.coefficient(sectors.front(), static_cast<int>(sectors.size())) = 1.0;
    return out;
  }
  // 1/((z-a)(z-b)) = (1/(a-b)) (1/(z-a) - 1/(z-b))
  const int a = sectors.front();
  const int b = sectors.back();
  std::vector<int> without_a(sectors.begin() + 1, sectors.end());
  std::vector<int> without_b(sectors.begin(), sectors.end() - 1);
  const double inv = 1.0 / (liouville::sector_eigenvalue(a) - liouville::sector_eigenvalue(b));
  out = product_of_simple_poles(without_b);
  out += product_of_simple_poles(without_a) * cplx(-1.0);
  return out * cplx(inv);
}

// -- tensor basis ----------------------------------------------------------------

const std::array<Mat3, kTensorBasisSize>& symmetric_tensor_basis() {
  static const std::array<Mat3, kTensorBasisSize> basis = [] {
    std::array<Mat3, kTensorBasisSize> b;
    const int pairs[kTensorBasisSize][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
    for (int a = 0; a < kTensorBasisSize; ++a) {
      b[a] = Mat3::Zero();
      b[a](pairs[a][0], pairs[a][1]) = 1.0;
      b[a](pairs[a][1], pairs[a][0]) = 1.0;
    }
    return b;
  }();
  return basis;
}

Eigen::Matrix<cplx, kTensorBasisSize, 1> tensor_coordinates(const CMat3& t) {
  if ((t - t.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + t.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("interaction tensor must be symmetric");
  Eigen::Matrix<cplx, kTensorBasisSize, 1> c;
  c << t(0, 0), t(1, 1), t(2, 2), t(0, 1), t(0, 2), t(1, 2);
  return c;
}

TensorMoments tensor_moments(const CMat3& amplitude) {
  const auto t = tensor_coordinates(amplitude);
  return t * t.adjoint();
}

PoleExpansion DoubleScatteringKernel::contract(const TensorMoments& moments) const {
  PoleExpansion out;
  for (int a = 0; a < kTensorBasisSize; ++a)
    for (int b = 0; b < kTensorBasisSize; ++b)
      if (moments(a, b) != cplx(0.0)) out += k[a][b] * moments(a, b);
  return out;
}

// -- kernels ---------------------------------------------------------------------

DoubleScatteringKernel double_scattering_kernel(const ChannelConfig& channel, int l1, int l2) {
  channel.validate();
  const auto& gens = basis_generators();
  const pulses::KickHarmonics first(channel.theta, channel.eps1, true);
  const pulses::KickHarmonics second(channel.theta, channel.eps2, false);
  const PairOperator rho = pair_state(first, -l1, -l2);
  auto kick = [&](const PairOperator& x) {
    return pulses::apply_pair_kick(second[l1], second[l2], x);
  };
  constexpr int kGen = 2 * kTensorBasisSize;

  // second interval, z2 -> 0
  const PairOperator q0 =
      liouville::integrated_resolvent(hilbert::detection_operator(channel.k_hat).op);
  std::array<PairOperator, kGen> q1;
  for (int g = 0; g < kGen; ++g) q1[g] = liouville::integrated_resolvent(gens[g](q0));

  // first interval, all three splits of the two couplings
  const SectorTerms start2 = resolve_sectors({{{}, kick(q0)}});
  std::array<SectorTerms, kGen> start1;
  std::array<SectorTerms, kGen> after_first2;
  for (int g = 0; g < kGen; ++g) {
    start1[g] = resolve_sectors({{{}, kick(q1[g])}});
    after_first2[g] = resolve_sectors(apply_generator(gens[g], start2));
  }

  DoubleScatteringKernel kernel;
  for (int a = 0; a < kTensorBasisSize; ++a)
    for (int b = 0; b < kTensorBasisSize; ++b) {
      PoleExpansion& k = kernel.k[a][b];
      const int minus = a;
      const int plus = kTensorBasisSize + b;
      for (const auto& [g1, g2] : {std::pair{minus, plus}, std::pair{plus, minus}}) {
        // n = 0: both couplings in the second interval
        const PairOperator q2 = liouville::integrated_resolvent(gens[g2](q1[g1]));
        k += pair_terms(rho, resolve_sectors({{{}, kick(q2)}}));
        // n = 1
        k += pair_terms(rho, resolve_sectors(apply_generator(gens[g2], start1[g1])));
        // n = 2
        k += pair_terms(rho, resolve_sectors(apply_generator(gens[g2], after_first2[g1])));
      }
    }
  return kernel;
}

PoleExpansion single_scattering_expansion(const ChannelConfig& channel, int l1, int l2) {
  channel.validate();
  const pulses::KickHarmonics first(channel.theta, channel.eps1, true);
  const pulses::KickHarmonics second(channel.theta, channel.eps2, false);
  const PairOperator q0 =
      liouville::integrated_resolvent(hilbert::detection_operator(channel.k_hat).op);
  const SectorTerms terms =
      resolve_sectors({{{}, pulses::apply_pair_kick(second[l1], second[l2], q0)}});
  return pair_terms(pair_state(first, -l1, -l2), terms);
}

}  // namespace mqc::scattering
