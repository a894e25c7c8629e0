#pragma once

#include <array>

#include "mqc/core.hpp"

/// Single-atom J_g=0 <-> J_e=1 space, Cartesian dipole operators, two-atom
/// embeddings and the fluorescence detection operator.
namespace mqc::hilbert {

enum Level : int { g = 0, e_x = 1, e_y = 2, e_z = 3 };

inline constexpr int kAtomDim = 4;
inline constexpr int kPairDim = 16;

/// Prefactor accounting for fluorescence from either atom. Only emission by
/// atom 1 is composed explicitly; the symmetric atom-2 term is equal after the
/// configuration average.
inline constexpr double kAtomPermutationPrefactor = 2.0;

struct DipoleOperators {
  /// D_i = |g><e_i|
  std::array<AtomOperator, 3> lowering;

  AtomOperator raising(int i) const { return lowering[i].adjoint(); }
  /// sum_i D_i^dag D_i
  AtomOperator excited_projector() const;
};

DipoleOperators build_dipole_operators();

/// Shared immutable instance.
const DipoleOperators& dipole_operators();

/// op (x) I for atom_index 1, I (x) op for atom_index 2.
PairOperator embed(const AtomOperator& op, int atom_index);

/// Tensor product a (x) b.
PairOperator kron(const AtomOperator& a, const AtomOperator& b);

/// |a><b| on one atom.
AtomOperator dyad(int a, int b);

struct DetectionOperator {
  PairOperator op;
  Vec3 direction;
  double permutation_prefactor = kAtomPermutationPrefactor;
};

/// Q = sum_ij D_i^dag (delta_ij - k_i k_j) D_j on atom 1, identity on atom 2,
/// in units of f^2.
DetectionOperator detection_operator(const Vec3& k_hat,
                                     double permutation_prefactor = kAtomPermutationPrefactor);

}  // namespace mqc::hilbert
