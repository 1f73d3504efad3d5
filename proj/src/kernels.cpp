#include "mfl/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mfl/spectral.hpp"

namespace mfl {

// Multiplier conventions (the single place they are defined):
//   BiotSavart:      K^(k) = c * i k_perp / (2 pi |k|^2),        k_perp = (-k2, k1)
//   SubCoulomb:      K^(k) = c * i k_perp / (2 pi |k|^{3-alpha})   -> BiotSavart at alpha = 1
//   HolderAnalytic:  d=2:  c * i k_perp / (2 pi |k|^{3+gamma})   on shells |k|_inf in modes
//                    d=1:  c * i sign(k) / (2 pi |k|^{1+gamma})  on |k| in modes
//   Cantor:          K1^(k) = -c * s^(k2) mu^_L(k1),  K2^(k) = c * s^(k1) mu^_L(k2)
// with s^(k) = i (-1)^k / (2 pi k) (s^(0) = 0) the sawtooth coefficients and
// mu^_L the level-L Cantor characteristic function. The 1/(2 pi) keeps all
// variants on a comparable amplitude scale at |k| = 1.
//
// The HolderAnalytic coefficient decay |k|^-(1+gamma) (after one derivative)
// is exactly the Weierstrass-type scaling that caps the Holder regularity of
// the antiderivative family at C^{1,gamma}, so the declared gamma is honest
// even though any finite mode list is analytic.

std::vector<int> KernelSpec::default_modes() {
  std::vector<int> m(16);
  for (int i = 0; i < 16; ++i) m[i] = i + 1;
  return m;
}

double KernelSpec::declared_gamma() const {
  switch (type) {
    case KernelType::Zero: return 0.0;
    case KernelType::SubCoulomb: return 1.0 - alpha;
    case KernelType::BiotSavart: return 0.0;
    case KernelType::HolderAnalytic: return gamma;
    case KernelType::Cantor: return std::log(2.0) / std::log(3.0);
  }
  return 0.0;
}

bool KernelSpec::divergence_free() const {
  switch (type) {
    case KernelType::Zero:
    case KernelType::SubCoulomb:
    case KernelType::BiotSavart: return true;
    case KernelType::HolderAnalytic: return d == 2;
    case KernelType::Cantor: return false;
  }
  return false;
}

std::string KernelSpec::name() const {
  switch (type) {
    case KernelType::Zero: return "zero";
    case KernelType::SubCoulomb: return "sub_coulomb";
    case KernelType::BiotSavart: return "biot_savart";
    case KernelType::HolderAnalytic: return "holder";
    case KernelType::Cantor: return "cantor";
  }
  return "?";
}

void validate(const KernelSpec& spec) {
  if (spec.d != 1 && spec.d != 2) throw std::invalid_argument("kernel dimension must be 1 or 2");
  switch (spec.type) {
    case KernelType::Zero: break;
    case KernelType::SubCoulomb:
      if (spec.d != 2) throw std::invalid_argument("SubCoulomb kernel requires d = 2");
      if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
        throw std::invalid_argument("SubCoulomb needs alpha in (0,1)");
      break;
    case KernelType::BiotSavart:
      if (spec.d != 2) throw std::invalid_argument("BiotSavart kernel requires d = 2");
      break;
    case KernelType::HolderAnalytic:
      if (!(spec.gamma > 0.0 && spec.gamma < 0.5))
        throw std::invalid_argument("HolderAnalytic needs gamma in (0, 1/2)");
      if (spec.modes.empty()) throw std::invalid_argument("HolderAnalytic needs a nonempty mode list");
      for (int m : spec.modes)
        if (m < 1) throw std::invalid_argument("HolderAnalytic modes must be >= 1");
      break;
    case KernelType::Cantor:
      if (spec.d != 2) throw std::invalid_argument("Cantor kernel requires d = 2");
      if (spec.cantor_level < 1 || spec.cantor_level > 30)
        throw std::invalid_argument("Cantor level must be in [1, 30]");
      break;
  }
}

std::vector<double> cantor_atoms(int level) {
  if (level < 1 || level > 30) throw std::invalid_argument("Cantor level must be in [1, 30]");
  // Centered construction: X = sum_{j<=L} eps_j 3^-j, eps_j = +-1. The 2^L
  // values are the midpoints of the surviving intervals of length 3^-L.
  std::vector<double> atoms{0.0};
  double step = 1.0;
  for (int j = 1; j <= level; ++j) {
    step /= 3.0;
    std::vector<double> next;
    next.reserve(atoms.size() * 2);
    for (double a : atoms) {
      next.push_back(a - step);
      next.push_back(a + step);
    }
    atoms.swap(next);
  }
  return atoms;
}

double cantor_char(int k, int level) {
  double prod = 1.0;
  double step = 1.0;
  for (int j = 1; j <= level; ++j) {
    step /= 3.0;
    prod *= std::cos(2.0 * std::numbers::pi * k * step);
  }
  return prod;
}

namespace {

// Sawtooth x on [-1/2, 1/2): coefficient of e^{2 pi i k x}.
std::complex<double> sawtooth_hat(int k) {
  if (k == 0) return 0.0;
  double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return std::complex<double>(0.0, sign / (2.0 * std::numbers::pi * k));
}

}  // namespace

KernelSpectrum kernel_spectrum(const KernelSpec& spec, const TorusGrid& grid) {
  validate(spec);
  if (spec.d != grid.d) throw std::invalid_argument("kernel_spectrum: grid dimension mismatch");
  const int M = grid.M;
  const int half = M / 2 + 1;
  const std::size_t n = (grid.d == 1) ? static_cast<std::size_t>(half)
                                      : static_cast<std::size_t>(M) * half;
  KernelSpectrum ks{grid, {}};
  ks.comp[0].assign(n, 0.0);
  if (grid.d == 2) ks.comp[1].assign(n, 0.0);
  if (spec.type == KernelType::Zero) return ks;

  const double two_pi = 2.0 * std::numbers::pi;
  const double c = spec.strength;

  if (grid.d == 1) {
    // HolderAnalytic is the only d=1 variant past validate().
    for (int m : spec.modes) {
      if (m >= M / 2) continue;  // beyond the band (Nyquist excluded)
      ks.comp[0][static_cast<std::size_t>(m)] =
          std::complex<double>(0.0, c / (two_pi * std::pow(m, 1.0 + spec.gamma)));
    }
    return ks;
  }

  auto idx = [&](int i, int j) { return static_cast<std::size_t>(i) * half + j; };
  for (int i = 0; i < M; ++i) {
    int k1 = (i <= M / 2) ? i : i - M;
    for (int j = 0; j < half; ++j) {
      int k2 = j;
      if (k1 == 0 && k2 == 0) continue;
      // The Nyquist planes cannot carry an odd (pure-imaginary) multiplier in
      // a real field; drop them like the spectral derivative does.
      if (std::abs(k1) == M / 2 || k2 == M / 2) continue;
      std::complex<double> m1 = 0.0, m2 = 0.0;
      switch (spec.type) {
        case KernelType::BiotSavart:
        case KernelType::SubCoulomb: {
          double expo = (spec.type == KernelType::BiotSavart) ? 2.0 : 3.0 - spec.alpha;
          double kk = std::sqrt(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
          double amp = c / (two_pi * std::pow(kk, expo));
          m1 = std::complex<double>(0.0, -k2 * amp);
          m2 = std::complex<double>(0.0, k1 * amp);
          break;
        }
        case KernelType::HolderAnalytic: {
          int shell = std::max(std::abs(k1), std::abs(k2));
          bool in = false;
          for (int m : spec.modes) in = in || (m == shell);
          if (!in) break;
          double kk = std::sqrt(static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
          double amp = c / (two_pi * std::pow(kk, 3.0 + spec.gamma));
          m1 = std::complex<double>(0.0, -k2 * amp);
          m2 = std::complex<double>(0.0, k1 * amp);
          break;
        }
        case KernelType::Cantor: {
          m1 = -c * sawtooth_hat(k2) * cantor_char(k1, spec.cantor_level);
          m2 = c * sawtooth_hat(k1) * cantor_char(k2, spec.cantor_level);
          break;
        }
        default: break;
      }
      ks.comp[0][idx(i, j)] = m1;
      ks.comp[1][idx(i, j)] = m2;
    }
  }
  return ks;
}

std::vector<Field> convolve_kernel(const KernelSpectrum& ks, const Field& f) {
  if (!(f.grid == ks.grid)) throw std::invalid_argument("convolve_kernel: grid mismatch");
  Spectrum s = forward(f);
  std::vector<Field> out;
  for (int a = 0; a < f.grid.d; ++a) {
    Spectrum sa = s;
    for (std::size_t i = 0; i < sa.c.size(); ++i) sa.c[i] *= ks.comp[a][i];
    out.push_back(backward(sa));
  }
  return out;
}

std::vector<Field> convolve_kernel(const KernelSpec& spec, const Field& f) {
  return convolve_kernel(kernel_spectrum(spec, f.grid), f);
}

std::vector<Field> mollified_kernel_table(const KernelSpec& spec, const MollifierParams& p,
                                          const TorusGrid& grid) {
  Field vn = vN_field(grid, p);
  double mass = integrate(vn);
  for (double& x : vn.v) x /= mass;
  return convolve_kernel(spec, vn);
}

}  // namespace mfl
