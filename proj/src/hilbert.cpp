#include "mqc/hilbert.hpp"

#include <cmath>
#include <sstream>

namespace mqc {

void require_unit(const Vec3& v, const std::string& what, double tol) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > tol) {
    std::ostringstream os;
    os << what << " must be a unit vector (|v| = " << v.norm() << ")";
    throw std::invalid_argument(os.str());
  }
}

void require_unit(const CVec3& v, const std::string& what, double tol) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > tol) {
    std::ostringstream os;
    os << what << " must be a unit vector (|v| = " << v.norm() << ")";
    throw std::invalid_argument(os.str());
  }
}

namespace hilbert {

AtomOperator DipoleOperators::excited_projector() const {
  AtomOperator p = AtomOperator::Zero();
  for (const auto& d : lowering) p += d.adjoint() * d;
  return p;
}

AtomOperator dyad(int a, int b) {
  AtomOperator m = AtomOperator::Zero();
  m(a, b) = 1.0;
  return m;
}

DipoleOperators build_dipole_operators() {
  DipoleOperators d;
  for (int i = 0; i < 3; ++i) d.lowering[i] = dyad(g, 1 + i);
  return d;
}

const DipoleOperators& dipole_operators() {
  static const DipoleOperators ops = build_dipole_operators();
  return ops;
}

PairOperator kron(const AtomOperator& a, const AtomOperator& b) {
  PairOperator out;
  for (int a1 = 0; a1 < kAtomDim; ++a1)
    for (int b1 = 0; b1 < kAtomDim; ++b1)
      out.block<kAtomDim, kAtomDim>(kAtomDim * a1, kAtomDim * b1) = a(a1, b1) * b;
  return out;
}

PairOperator embed(const AtomOperator& op, int atom_index) {
  switch (atom_index) {
    case 1: return kron(op, AtomOperator::Identity());
    case 2: return kron(AtomOperator::Identity(), op);
    default: throw std::invalid_argument("atom_index must be 1 or 2");
  }
}

DetectionOperator detection_operator(const Vec3& k_hat, double permutation_prefactor) {
  require_unit(k_hat, "detection direction");
  const auto& d = dipole_operators();
  const Mat3 transverse = Mat3::Identity() - k_hat * k_hat.transpose();
  AtomOperator q = AtomOperator::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (transverse(i, j) != 0.0) q += transverse(i, j) * d.raising(i) * d.lowering[j];
  return DetectionOperator{embed(q, 1), k_hat, permutation_prefactor};
}

}  // namespace hilbert
}  // namespace mqc
