#include "mqc/liouville.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "mqc/averaging.hpp"
#include "mqc/hilbert.hpp"

namespace mqc::liouville {

namespace {

using Triplet = Eigen::Triplet<cplx>;
using VecOp = Eigen::Matrix<cplx, kSpaceDim, 1>;

constexpr int kDim = hilbert::kPairDim;

inline int vec_index(int row, int col) { return row + kDim * col; }

struct Entry {
  int row;
  int col;
  cplx value;
};

std::vector<Entry> nonzeros(const PairOperator& m) {
  std::vector<Entry> out;
  for (int c = 0; c < kDim; ++c)
    for (int r = 0; r < kDim; ++r)
      if (m(r, c) != cplx(0.0)) out.push_back({r, c, m(r, c)});
  return out;
}

Superoperator::Matrix from_triplets(const std::vector<Triplet>& t) {
  Superoperator::Matrix m(kSpaceDim, kSpaceDim);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(cplx(0.0));
  return m;
}

// Per-atom decay order of a dyad |a><b|: 0 for |g><g| (identity slot), 1 for
// coherences, 2 for excited dyads.
int atom_decay_order(int a, int b) {
  if (a == hilbert::g && b == hilbert::g) return 0;
  if (a == hilbert::g || b == hilbert::g) return 1;
  return 2;
}

Eigen::Matrix<int, 16, 16> build_sector_table() {
  Eigen::Matrix<int, 16, 16> t;
  for (int a1 = 0; a1 < 4; ++a1)
    for (int a2 = 0; a2 < 4; ++a2)
      for (int b1 = 0; b1 < 4; ++b1)
        for (int b2 = 0; b2 < 4; ++b2)
          t(4 * a1 + a2, 4 * b1 + b2) = atom_decay_order(a1, b1) + atom_decay_order(a2, b2);
  return t;
}

// Shift between dyad coordinates and decay-basis coordinates on one atom:
// the excited diagonal absorbs sign * (ground-ground entry).
void shift_excited_diagonal(PairOperator& y, const PairOperator& x, int atom, double sign) {
  for (int o1 = 0; o1 < 4; ++o1)
    for (int o2 = 0; o2 < 4; ++o2) {
      const cplx gg = atom == 1 ? x(4 * hilbert::g + o1, 4 * hilbert::g + o2)
                                : x(4 * o1 + hilbert::g, 4 * o2 + hilbert::g);
      if (gg == cplx(0.0)) continue;
      for (int e = 1; e < 4; ++e) {
        if (atom == 1)
          y(4 * e + o1, 4 * e + o2) += sign * gg;
        else
          y(4 * o1 + e, 4 * o2 + e) += sign * gg;
      }
    }
}

void check_resolvent_point(cplx z, double gamma) {
  for (int s = 0; s < kSectorCount; ++s) {
    if (std::abs(z - sector_eigenvalue(s, gamma)) < 1e-9 * gamma) {
      std::ostringstream os;
      os << "resolvent evaluated at z = " << z << ", within 1e-9 gamma of eigenvalue "
         << sector_eigenvalue(s, gamma);
      throw SingularResolventError(os.str());
    }
  }
}

}  // namespace

// -- Superoperator -------------------------------------------------------------

Superoperator::Superoperator() : matrix_(kSpaceDim, kSpaceDim) {}

Superoperator::Superoperator(std::string name, Matrix matrix, int phase_increment)
    : name_(std::move(name)), matrix_(std::move(matrix)), phase_increment_(phase_increment) {
  if (matrix_.rows() != kSpaceDim || matrix_.cols() != kSpaceDim)
    throw std::invalid_argument("superoperator matrix must be 256 x 256");
  if (phase_increment_ < -1 || phase_increment_ > 1)
    throw std::invalid_argument("phase increment must be -1, 0 or +1");
}

PairOperator Superoperator::operator()(const PairOperator& x) const {
  PairOperator out;
  Eigen::Map<VecOp> out_vec(out.data());
  out_vec.noalias() = matrix_ * Eigen::Map<const VecOp>(x.data());
  return out;
}

Superoperator Superoperator::operator+(const Superoperator& other) const {
  if (phase_increment_ != other.phase_increment_)
    throw std::invalid_argument("cannot add superoperators with different phase increments");
  return Superoperator(name_ + "+" + other.name_, Matrix(matrix_ + other.matrix_),
                       phase_increment_);
}

Superoperator Superoperator::scaled(cplx factor) const {
  return Superoperator(name_, Matrix(factor * matrix_), phase_increment_);
}

Superoperator::Matrix Superoperator::sandwich(const PairOperator& left,
                                              const PairOperator& right) {
  const auto a = nonzeros(left);
  const auto b = nonzeros(right);
  std::vector<Triplet> t;
  t.reserve(a.size() * b.size());
  // (A X B)(r, c) = sum A(r, r') X(r', c') B(c', c)
  for (const auto& ea : a)
    for (const auto& eb : b)
      t.emplace_back(vec_index(ea.row, eb.col), vec_index(ea.col, eb.row), ea.value * eb.value);
  return from_triplets(t);
}

Superoperator::Matrix Superoperator::left_multiply(const PairOperator& left) {
  return sandwich(left, PairOperator::Identity());
}

Superoperator::Matrix Superoperator::right_multiply(const PairOperator& right) {
  return sandwich(PairOperator::Identity(), right);
}

Superoperator relaxation_generator(double gamma) {
  const auto& d = hilbert::dipole_operators();
  Superoperator::Matrix m(kSpaceDim, kSpaceDim);
  for (int atom = 1; atom <= 2; ++atom) {
    for (int i = 0; i < 3; ++i) {
      const PairOperator low = hilbert::embed(d.lowering[i], atom);
      const PairOperator up = low.adjoint();
      const PairOperator n = up * low;
      // D^dag [Q, D] + [D^dag, Q] D = 2 D^dag Q D - D^dag D Q - Q D^dag D
      m += Superoperator::Matrix(2.0 * Superoperator::sandwich(up, low) -
                                 Superoperator::left_multiply(n) -
                                 Superoperator::right_multiply(n));
    }
  }
  m *= cplx(0.5 * gamma);
  m.prune(cplx(0.0));
  return Superoperator("L_gamma", std::move(m), 0);
}

// -- decay sectors -------------------------------------------------------------

const Eigen::Matrix<int, 16, 16>& sector_table() {
  static const Eigen::Matrix<int, 16, 16> table = build_sector_table();
  return table;
}

PairOperator to_decay_basis(const PairOperator& x) {
  PairOperator y = x;
  shift_excited_diagonal(y, x, 1, -1.0);
  PairOperator z = y;
  shift_excited_diagonal(z, y, 2, -1.0);
  return z;
}

PairOperator from_decay_basis(const PairOperator& z) {
  PairOperator y = z;
  shift_excited_diagonal(y, z, 2, 1.0);
  PairOperator x = y;
  shift_excited_diagonal(x, y, 1, 1.0);
  return x;
}

PairOperator sector_projection(const PairOperator& x, int sector) {
  if (sector < 0 || sector >= kSectorCount) throw std::invalid_argument("sector out of range");
  PairOperator y = to_decay_basis(x);
  const auto& table = sector_table();
  for (int c = 0; c < kDim; ++c)
    for (int r = 0; r < kDim; ++r)
      if (table(r, c) != sector) y(r, c) = 0.0;
  return from_decay_basis(y);
}

PairOperator resolvent_apply(cplx z, const PairOperator& x, double gamma) {
  check_resolvent_point(z, gamma);
  std::array<cplx, kSectorCount> inv;
  for (int s = 0; s < kSectorCount; ++s) inv[s] = 1.0 / (z - sector_eigenvalue(s, gamma));
  PairOperator y = to_decay_basis(x);
  const auto& table = sector_table();
  for (int c = 0; c < kDim; ++c)
    for (int r = 0; r < kDim; ++r) y(r, c) *= inv[table(r, c)];
  return from_decay_basis(y);
}

PairOperator integrated_resolvent(const PairOperator& x, double gamma) {
  PairOperator y = to_decay_basis(x);
  const auto& table = sector_table();
  const double scale = 1.0 + y.cwiseAbs().maxCoeff();
  for (int c = 0; c < kDim; ++c)
    for (int r = 0; r < kDim; ++r) {
      const int s = table(r, c);
      if (s == 0) {
        if (std::abs(y(r, c)) > 1e-12 * scale) {
          std::ostringstream os;
          os << "non-decaying component " << std::abs(y(r, c))
             << " in the z -> 0 resolvent limit";
          throw SingularResolventError(os.str());
        }
        y(r, c) = 0.0;
      } else {
        y(r, c) /= -sector_eigenvalue(s, gamma);
      }
    }
  return from_decay_basis(y);
}

// -- dipole-dipole coupling ----------------------------------------------------

CMat3 interaction_amplitude(double xi, const Vec3& n_hat, TensorMode mode, double gamma) {
  if (!(xi > 0.0)) throw std::invalid_argument("scaled distance xi must be positive");
  require_unit(n_hat, "interatomic direction");
  const Mat3 nn = n_hat * n_hat.transpose();
  const Mat3 id = Mat3::Identity();
  const double c = 0.75 * gamma;
  if (mode == TensorMode::far_field) return (c * kI / xi) * (id - nn).cast<cplx>();
  const cplx a = c * (kI / xi + 1.0 / (xi * xi) - kI / (xi * xi * xi));
  const cplx b = c * (-kI / xi - 3.0 / (xi * xi) + 3.0 * kI / (xi * xi * xi));
  return a * id.cast<cplx>() + b * nn.cast<cplx>();
}

InteractionTensor interaction_tensor(double xi, const Vec3& n_hat, TensorMode mode,
                                     double gamma) {
  const CMat3 amp = interaction_amplitude(xi, n_hat, mode, gamma);
  return InteractionTensor{std::exp(-kI * xi) * amp, mode, xi, n_hat};
}

Superoperator interaction_generator(const CMat3& amplitude, PhasePart part) {
  const auto& d = hilbert::dipole_operators();
  std::array<std::array<PairOperator, 3>, 2> low;
  for (int atom = 0; atom < 2; ++atom)
    for (int i = 0; i < 3; ++i) low[atom][i] = hilbert::embed(d.lowering[i], atom + 1);

  Superoperator::Matrix m(kSpaceDim, kSpaceDim);
  for (int alpha = 0; alpha < 2; ++alpha) {
    const int beta = 1 - alpha;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const cplx t = amplitude(i, j);
        if (t == cplx(0.0)) continue;
        if (part == PhasePart::minus) {
          // T_ij D_ai^dag (Q D_bj - D_bj Q)
          const PairOperator up = low[alpha][i].adjoint();
          m += Superoperator::Matrix(
              t * (Superoperator::sandwich(up, low[beta][j]) -
                   Superoperator::left_multiply(up * low[beta][j])));
        } else {
          // T*_ij (D_bi^dag Q - Q D_bi^dag) D_aj
          const PairOperator up = low[beta][i].adjoint();
          m += Superoperator::Matrix(
              std::conj(t) * (Superoperator::sandwich(up, low[alpha][j]) -
                              Superoperator::right_multiply(up * low[alpha][j])));
        }
      }
  }
  m.prune(cplx(0.0));
  return part == PhasePart::minus ? Superoperator("L_int-", std::move(m), -1)
                                  : Superoperator("L_int+", std::move(m), +1);
}

Superoperator interaction_generator(const Vec3& n_hat, PhasePart part, TensorMode mode,
                                    double xi_bar, double gamma) {
  return interaction_generator(interaction_amplitude(xi_bar, n_hat, mode, gamma), part);
}

// -- physical parameters -------------------------------------------------------

PhysicalParams PhysicalParams::from_inputs(double temperature, double mass, double wavelength,
                                           double gamma, double mean_distance,
                                           std::optional<double> doppler_rms) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument(std::string(what) + " must be positive and finite");
  };
  positive(mass, "mass");
  positive(wavelength, "wavelength");
  positive(gamma, "gamma");
  positive(mean_distance, "mean distance");
  if (!(temperature >= 0.0) || !std::isfinite(temperature))
    throw std::invalid_argument("temperature must be nonnegative and finite");

  PhysicalParams p;
  p.gamma = gamma;
  p.wavelength = wavelength;
  p.k0 = 2.0 * kPi / wavelength;
  p.omega0 = constants::kSpeedOfLight * p.k0;
  p.mass = mass;
  p.temperature = temperature;
  p.mean_distance = mean_distance;
  p.xi_bar = p.k0 * mean_distance;
  p.doppler_rms =
      temperature > 0.0 ? averaging::maxwell_boltzmann_sigma(temperature, mass, wavelength) : 0.0;
  if (doppler_rms) {
    const double scale = std::max(std::abs(p.doppler_rms), 1e-300);
    if (std::abs(*doppler_rms - p.doppler_rms) > 1e-10 * scale) {
      std::ostringstream os;
      os.precision(17);
      os << "explicit Doppler width " << *doppler_rms
         << " rad/s disagrees with k sqrt(kB T / M) = " << p.doppler_rms << " rad/s";
      throw std::invalid_argument(os.str());
    }
  }
  return p;
}

PhysicalParams PhysicalParams::paper_defaults() {
  const double wavelength = 790e-9;
  const double xi_bar = 80.0;
  const double mean_distance = xi_bar * wavelength / (2.0 * kPi);
  return from_inputs(320.0, 1.443e-25, wavelength, 2.0 * kPi * 6.067e6, mean_distance);
}

PhysicalParams PhysicalParams::with_xi_bar(double xi) const {
  if (!(xi > 0.0)) throw std::invalid_argument("xi_bar must be positive");
  PhysicalParams p = *this;
  p.xi_bar = xi;
  p.mean_distance = xi / k0;
  return p;
}

PhysicalParams PhysicalParams::with_doppler_rms(double rms) const {
  if (!(rms >= 0.0)) throw std::invalid_argument("Doppler width must be nonnegative");
  PhysicalParams p = *this;
  p.doppler_rms = rms;
  return p;
}

std::vector<std::string> PhysicalParams::warnings() const {
  std::vector<std::string> w;
  if (xi_bar < 10.0) {
    std::ostringstream os;
    os << "xi_bar = " << xi_bar << " < 10: far-field coupling is outside its validity range";
    w.push_back(os.str());
  }
  return w;
}

double mean_distance_from_density(double density) {
  if (!(density > 0.0)) throw std::invalid_argument("density must be positive");
  return 0.554 * std::cbrt(1.0 / density);
}

}  // namespace mqc::liouville
