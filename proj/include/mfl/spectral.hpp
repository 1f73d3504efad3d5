#pragma once

#include <complex>
#include <vector>

#include "mfl/grid.hpp"

namespace mfl {

// Fourier conventions used throughout:
//   f(x) = sum_k c_k e^{2 pi i k.x},   c_k = h^d (-1)^{k_1+...+k_d} DFT_k
// where DFT is the unnormalized FFTW forward transform of the node samples
// (the sign comes from the node offset x_0 = -1/2). Every *diagonal*
// operation (derivatives, heat factor, shift phases, kernel multipliers,
// dealiasing) commutes with that sign and is applied directly to the raw
// DFT values. Only convolve() needs the sign and the h^d scale explicitly.
//
// Spectrum stores the raw forward DFT in FFTW r2c half-complex layout:
// d=1: M/2+1 entries, k = 0..M/2. d=2: M x (M/2+1) row-major, row i holds
// k1 = i for i <= M/2 and i - M otherwise, column j holds k2 = j.
struct Spectrum {
  TorusGrid grid;
  std::vector<std::complex<double>> c;
};

Spectrum forward(const Field& f);
// Inverse transform, including the 1/M^d normalization.
Field backward(const Spectrum& s);

// Calls fn(k1, k2, coeff) for every stored mode (k2 = 0 always in d=1).
// Conjugate-symmetric partners are implicit; fn must respect that (it gets
// only the stored half).
template <class F>
void for_each_mode(Spectrum& s, F&& fn) {
  const int M = s.grid.M;
  const int half = M / 2 + 1;
  if (s.grid.d == 1) {
    for (int k = 0; k < half; ++k) fn(k, 0, s.c[static_cast<std::size_t>(k)]);
    return;
  }
  for (int i = 0; i < M; ++i) {
    int k1 = (i <= M / 2) ? i : i - M;
    for (int j = 0; j < half; ++j) fn(k1, j, s.c[static_cast<std::size_t>(i) * half + j]);
  }
}

// Torus convolution (f*g)(x) = int f(y) g(x-y) dy of two fields on the same
// grid. Exact for bandlimited data; integrate(convolve(f,g)) factorizes as
// integrate(f)*integrate(g) to roundoff.
Field convolve(const Field& f, const Field& g);

// d/dx_a via multiplier 2 pi i k_a, with the Nyquist plane k_a = -M/2
// zeroed (its derivative is pure-imaginary and cannot live in a real field).
// If top_octave is non-null it receives the fraction of spectral energy in
// the top octave (|k|_inf > M/4), the caller's under-resolution signal.
std::vector<Field> spectral_gradient(const Field& f, double* top_octave = nullptr);

// Fraction of non-constant spectral energy carried by modes |k|_inf > M/4.
double top_octave_fraction(const Field& f);

// f(x - y): phase e^{-2 pi i k.y}. For the Nyquist modes the real part of
// the phase is used (cosine interpretation), which keeps shifts by whole
// grid cells exact.
Field shift_field(const Field& f, const double* y);

// Zero every mode with |k_a| > M/3 for some axis (2/3 rule).
void dealias_23(Spectrum& s);

// exp(t/2 * Laplacian): multiplier e^{-t/2 (2 pi |k|)^2}. t >= 0.
Field heat_semigroup(const Field& f, double t);

}  // namespace mfl
