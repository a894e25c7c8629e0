#include "mqc/averaging.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace mqc::averaging {

namespace {

GaussRule golub_welsch(const std::vector<double>& off_diagonal, int order, double mu0) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(order, order);
  for (int k = 0; k + 1 < order; ++k) j(k, k + 1) = j(k + 1, k) = off_diagonal[k];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  if (es.info() != Eigen::Success) throw ConvergenceError("Golub-Welsch eigensolver failed");
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int k = 0; k < order; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    rule.weights[k] = mu0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
  return rule;
}

const GaussRule& cached_rule(int kind, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find({kind, order});
  if (it != cache.end()) return it->second;
  std::vector<double> off(order > 1 ? order - 1 : 0);
  for (int k = 1; k < order; ++k)
    off[k - 1] = kind == 0 ? k / std::sqrt(4.0 * k * k - 1.0) : std::sqrt(static_cast<double>(k));
  GaussRule rule = golub_welsch(off, order, kind == 0 ? 2.0 : 1.0);
  if (kind == 1) {
    double sum = 0.0;
    for (double w : rule.weights) sum += w;
    for (double& w : rule.weights) w /= sum;
  }
  return cache.emplace(std::make_pair(kind, order), std::move(rule)).first->second;
}

cplx gaussian_sum(const std::function<cplx(double)>& fn, double detuning, double sigma,
                  int order) {
  const GaussRule& rule = cached_rule(1, order);
  cplx acc = 0.0;
  for (int k = 0; k < order; ++k) acc += rule.weights[k] * fn(detuning - sigma * rule.nodes[k]);
  return acc;
}

// Weideman's rational approximation with N = 64 terms.
constexpr int kWeidemanN = 64;

struct Weideman {
  double l;
  std::array<double, kWeidemanN> a;  // p(Z) = sum_n a[n] Z^n
};

const Weideman& weideman() {
  static const Weideman w = [] {
    Weideman c;
    const int m = 2 * kWeidemanN;
    c.l = std::sqrt(kWeidemanN / std::sqrt(2.0));
    std::vector<double> f(2 * m, 0.0);  // f[k + m] for k = -m+1 .. m-1
    for (int k = -m + 1; k < m; ++k) {
      const double t = c.l * std::tan(0.5 * k * kPi / m);
      f[k + m] = std::exp(-t * t) * (c.l * c.l + t * t);
    }
    for (int n = 1; n <= kWeidemanN; ++n) {
      double acc = 0.0;
      for (int k = -m + 1; k < m; ++k) acc += f[k + m] * std::cos(kPi * k * n / m);
      c.a[n - 1] = acc / (2.0 * m);
    }
    return c;
  }();
  return w;
}

double double_factorial_odd(int n) {  // (2n-1)!!
  double r = 1.0;
  for (int j = 1; j <= n; ++j) r *= 2.0 * j - 1.0;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

}  // namespace

GaussRule gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be positive");
  return cached_rule(0, order);
}

GaussRule gauss_hermite_normal(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be positive");
  return cached_rule(1, order);
}

SphereQuadrature SphereQuadrature::product(int polar_order, int azimuthal_order) {
  if (polar_order < 1 || azimuthal_order < 1)
    throw std::invalid_argument("sphere quadrature orders must be positive");
  const GaussRule& gl = cached_rule(0, polar_order);
  SphereQuadrature q;
  q.polar_order = polar_order;
  q.azimuthal_order = azimuthal_order;
  q.nodes.reserve(polar_order * azimuthal_order);
  q.weights.reserve(polar_order * azimuthal_order);
  for (int i = 0; i < polar_order; ++i) {
    const double c = gl.nodes[i];
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < azimuthal_order; ++j) {
      const double phi = 2.0 * kPi * j / azimuthal_order;
      q.nodes.emplace_back(s * std::cos(phi), s * std::sin(phi), c);
      q.weights.push_back(0.5 * gl.weights[i] / azimuthal_order);
    }
  }
  return q;
}

double maxwell_boltzmann_sigma(double temperature, double mass, double wavelength) {
  if (!(temperature > 0.0) || !(mass > 0.0) || !(wavelength > 0.0))
    throw std::invalid_argument("temperature, mass and wavelength must be positive");
  const double k = 2.0 * kPi / wavelength;
  return k * std::sqrt(constants::kBoltzmann * temperature / mass);
}

std::function<cplx(double)> voigt_convolve(std::function<cplx(double)> lineshape, int kappa,
                                           const DopplerModel& model) {
  if (kappa != 1 && kappa != 2) throw std::invalid_argument("kappa must be 1 or 2");
  if (!(model.sigma >= 0.0)) throw std::invalid_argument("Doppler width must be nonnegative");
  if (model.order < 1) throw std::invalid_argument("Gauss-Hermite order must be positive");
  if (model.sigma == 0.0) return lineshape;
  const double sigma = model.sigma * std::sqrt(static_cast<double>(kappa));
  const int order = model.order;
  return [lineshape = std::move(lineshape), sigma, order](double detuning) {
    const cplx base = gaussian_sum(lineshape, detuning, sigma, order);
    const cplx fine = gaussian_sum(lineshape, detuning, sigma, 2 * order);
    if (std::abs(fine - base) > 1e-8 * std::abs(fine) && std::abs(fine - base) > 1e-300) {
      std::ostringstream os;
      os << "Gauss-Hermite Doppler average not converged at detuning " << detuning
         << ": order " << order << " -> " << 2 * order << " changed the value by "
         << std::abs(fine - base);
      throw ConvergenceError(os.str());
    }
    return fine;
  };
}

cplx doppler_average_2d(const std::function<cplx(double)>& lineshape, double detuning,
                        const DopplerModel& model) {
  const GaussRule& rule = cached_rule(1, model.order);
  cplx acc = 0.0;
  for (int i = 0; i < model.order; ++i)
    for (int j = 0; j < model.order; ++j)
      acc += rule.weights[i] * rule.weights[j] *
             lineshape(detuning - model.sigma * (rule.nodes[i] + rule.nodes[j]));
  return acc;
}

cplx faddeeva(cplx z) {
  if (z.imag() < 0.0) throw std::domain_error("faddeeva is implemented for Im z >= 0");
  const Weideman& w = weideman();
  const cplx den = w.l - kI * z;
  const cplx zz = (w.l + kI * z) / den;
  cplx p = 0.0;
  for (int n = kWeidemanN - 1; n >= 0; --n) p = p * zz + w.a[n];
  return 2.0 * p / (den * den) + 1.0 / (std::sqrt(kPi) * den);
}

double erfcx(double x) {
  if (!(x >= 0.0)) throw std::domain_error("erfcx is implemented for x >= 0");
  if (x < 10.0) return std::exp(x * x) * std::erfc(x);
  // continued fraction 1/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  double t = x;
  for (int k = 80; k >= 1; --k) t = x + 0.5 * k / t;
  return 1.0 / (std::sqrt(kPi) * t);
}

cplx lorentzian_moment(int k, double a, double delta, double sigma) {
  if (k < 1 || k > 3) throw std::invalid_argument("moment order must be 1, 2 or 3");
  if (!(a > 0.0)) throw std::invalid_argument("Lorentzian half-width must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("Doppler width must be nonnegative");
  const cplx x(a, delta);
  const double ratio = sigma / std::abs(x);
  if (ratio < 0.1) {
    // moment expansion of (x - i Delta)^{-k}
    const cplx r2 = (sigma / x) * (sigma / x);
    cplx term_power = 1.0;
    cplx acc = 0.0;
    for (int n = 0; n < 60; ++n) {
      const cplx term = binomial(k + 2 * n - 1, 2 * n) * double_factorial_odd(n) *
                        (n % 2 ? -1.0 : 1.0) * term_power;
      acc += term;
      if (std::abs(term) < 1e-18 * std::abs(acc)) break;
      term_power *= r2;
    }
    return acc / std::pow(x, k);
  }
  const double s2 = std::sqrt(2.0) * sigma;
  const cplx u = cplx(delta, a) / s2;
  const cplx w = faddeeva(u);
  const cplx w1 = -2.0 * u * w + 2.0 * kI / std::sqrt(kPi);
  const cplx h = -kI * std::sqrt(kPi);
  cplx hk;
  switch (k) {
    case 1: hk = h * std::conj(w); break;
    case 2: hk = h * std::conj(w1); break;
    default: hk = h * std::conj(-2.0 * w - 2.0 * u * w1) / 2.0; break;
  }
  return std::pow(kI, k) * std::pow(s2, -k) * hk;
}

}  // namespace mqc::averaging
