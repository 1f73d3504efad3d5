#pragma once

#include <complex>
#include <string>
#include <vector>

#include "mfl/grid.hpp"
#include "mfl/mollifier.hpp"

namespace mfl {

// Interaction kernels on the torus. All variants have zero mean; the
// divergence-free ones (SubCoulomb, BiotSavart, HolderAnalytic in d=2) are
// built from the perpendicular gradient. Multiplier conventions are fixed in
// kernels.cpp next to kernel_spectrum(); tests rely on those exact forms.
enum class KernelType { Zero, SubCoulomb, BiotSavart, HolderAnalytic, Cantor };

struct KernelSpec {
  KernelType type = KernelType::Zero;
  int d = 1;
  double strength = 1.0;  // sign allowed (attractive/repulsive orientation)
  double alpha = 0.5;     // SubCoulomb singularity: K0 in C^{1-alpha}
  double gamma = 0.25;    // HolderAnalytic regularity target
  // HolderAnalytic frequency content: d=1 wavenumbers |k| in the list, d=2
  // square shells |k|_inf in the list.
  std::vector<int> modes = default_modes();
  int cantor_level = 12;

  static std::vector<int> default_modes();
  // The exponent the rate calculator should use for this kernel.
  double declared_gamma() const;
  bool divergence_free() const;
  std::string name() const;
};

// Throws std::invalid_argument for unsupported (variant, d) pairs or
// parameters outside the admissible ranges.
void validate(const KernelSpec& spec);

// Vector Fourier multiplier on the r2c half-spectrum layout of `grid`;
// comp[a] has one entry per stored mode. comp[1] is empty when d = 1.
struct KernelSpectrum {
  TorusGrid grid;
  std::vector<std::complex<double>> comp[2];
};

KernelSpectrum kernel_spectrum(const KernelSpec& spec, const TorusGrid& grid);

// (K * f) per component. Spectral multiplication throughout; for the Cantor
// variant the multiplier entries are the exact Stieltjes integrals of the
// level-L measure (see kernels.cpp), so this equals direct summation against
// the 2^L atoms for bandlimited f.
std::vector<Field> convolve_kernel(const KernelSpec& spec, const Field& f);
std::vector<Field> convolve_kernel(const KernelSpectrum& ks, const Field& f);

// K * V^N tabulated on the grid, the field both drift evaluators sample.
// V^N enters normalized to exact unit discrete mass (same convention as
// mollified_density) so the table is consistent with K * rho^N.
std::vector<Field> mollified_kernel_table(const KernelSpec& spec, const MollifierParams& p,
                                          const TorusGrid& grid);

// Atom positions of the centered level-L Cantor measure on [-1/2, 1/2]
// (midpoints of the surviving intervals; mass 2^-L each).
std::vector<double> cantor_atoms(int level);

// Characteristic function of that measure at integer frequency k:
// prod_{j=1..L} cos(2 pi k 3^-j). Real and even in k.
double cantor_char(int k, int level);

}  // namespace mfl
