#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mqc/core.hpp"
#include "mqc/liouville.hpp"

/// Stroboscopic composition of kicks, free decay and photon exchange, with the
/// bookkeeping of pulse-phase harmonics and interaction-phase powers.
///
/// All rates and Laplace variables in this module are in units of gamma.
namespace mqc::scattering {

enum class Polarization { parallel, perpendicular };

struct ChannelConfig {
  Vec3 k_hat = Vec3::UnitY();
  CVec3 eps1 = CVec3::UnitX();
  CVec3 eps2 = CVec3::UnitX();
  double theta = 0.5 * kPi;

  /// parallel: eps1 = eps2 = x; perpendicular: eps1 = x, eps2 = y.
  static ChannelConfig preset(Polarization pol, const Vec3& k_hat, double theta);
  void validate() const;
};

/// heisenberg: the detection operator is propagated backwards through the
/// sequence, so the fluorescence interval acts innermost and the first pulse
/// outermost. as_written: the first-pulse map acts on Q_det first.
enum class CompositionOrder { heisenberg, as_written };

struct ComposeOptions {
  liouville::TensorMode mode = liouville::TensorMode::far_field;
  double xi_bar = 80.0;
  CompositionOrder order = CompositionOrder::heisenberg;
  /// Replaces detection_operator(k_hat) when set.
  std::optional<PairOperator> observable;
};

struct HarmonicIndex {
  int m1 = 0;  ///< pulse-1 harmonic of atom 1
  int m2 = 0;  ///< pulse-1 harmonic of atom 2
  int l1 = 0;  ///< pulse-2 harmonic of atom 1
  int l2 = 0;  ///< pulse-2 harmonic of atom 2
  int p = 0;   ///< net power of e^{-i xi}
  auto operator<=>(const HarmonicIndex&) const = default;
};

/// Entries already paired with the initial state |gg><gg|.
using HarmonicLedger = std::map<HarmonicIndex, cplx>;

/// (l1, l2) -> coefficient
using HarmonicMap = std::map<std::pair<int, int>, cplx>;

/// Order-m ledger at Laplace points (z1, z2) for a fixed interatomic direction.
/// z2 = 0 is evaluated as the integrated-fluorescence limit.
HarmonicLedger stroboscopic_compose(int m, cplx z1, cplx z2, const Vec3& n_hat,
                                    const ChannelConfig& channel,
                                    const ComposeOptions& options = {});

/// Keeps l_a + m_a = 0 for both atoms and p = 0, indexed by (l1, l2).
HarmonicMap apply_selection_rules(const HarmonicLedger& ledger);

struct IntensityImages {
  HarmonicMap single;   ///< m = 0
  HarmonicMap double_;  ///< m = 2
};

/// Selection-rule output at orders 0 and 2 with z2 -> 0, before orientation averaging.
IntensityImages intensity_images(cplx z1, const ChannelConfig& channel, const Vec3& n_hat,
                                 const ComposeOptions& options = {});

// -- partial-fraction route ----------------------------------------------------

inline constexpr int kMaxPoleOrder = 3;

/// sum_{s,k} c_{s,k} (z - lambda_s)^{-k} with lambda_s = -s/2, s = 0..4, k = 1..3.
class PoleExpansion {
 public:
  PoleExpansion();

  cplx coefficient(int sector, int order) const;
  cplx& coefficient(int sector, int order);

  cplx operator()(cplx z) const;

  PoleExpansion& operator+=(const PoleExpansion& other);
  PoleExpansion operator*(cplx factor) const;

  double max_abs() const;

  /// Partial fractions of prod_i 1/(z - lambda_{s_i}).
  static PoleExpansion product_of_simple_poles(std::vector<int> sectors);

 private:
  std::array<std::array<cplx, kMaxPoleOrder>, liouville::kSectorCount> c_;
};

/// Real symmetric basis {xx, yy, zz, xy+yx, xz+zx, yz+zy} of 3x3 tensors.
inline constexpr int kTensorBasisSize = 6;
const std::array<Mat3, kTensorBasisSize>& symmetric_tensor_basis();

/// Coordinates t_a of a symmetric tensor, T = sum_a t_a E_a.
Eigen::Matrix<cplx, kTensorBasisSize, 1> tensor_coordinates(const CMat3& t);

using TensorMoments = Eigen::Matrix<cplx, kTensorBasisSize, kTensorBasisSize>;

/// t_a conj(t_b) for one amplitude tensor.
TensorMoments tensor_moments(const CMat3& amplitude);

/// p = 0 double-scattering image at z2 -> 0 as a function of z1:
/// I(z1) = sum_ab t_a conj(t_b) K_ab(z1) for phase-free amplitude T = sum t_a E_a.
struct DoubleScatteringKernel {
  std::array<std::array<PoleExpansion, kTensorBasisSize>, kTensorBasisSize> k;

  PoleExpansion contract(const TensorMoments& moments) const;
};

DoubleScatteringKernel double_scattering_kernel(const ChannelConfig& channel, int l1, int l2);

/// Single-scattering image (m = 0) at z2 -> 0 as a function of z1.
PoleExpansion single_scattering_expansion(const ChannelConfig& channel, int l1, int l2);

}  // namespace mqc::scattering
