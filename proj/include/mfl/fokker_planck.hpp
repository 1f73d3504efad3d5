#pragma once

#include <array>

#include "mfl/grid.hpp"
#include "mfl/kernels.hpp"
#include "mfl/particles.hpp"

namespace mfl {

struct FPState {
  Field rho;
  double t = 0.0;
  double lambda = 2.0;  // positivity band (lambda^-1, lambda) from rho0
  double q = 4.0;       // Lebesgue exponent tracked by the monotonicity check
};

// Throws unless q >= 2 and q > d.
FPState make_fp_state(const RhoZero& r, const TorusGrid& g, double q);

struct FPOptions {
  // Midpoint (explicit RK2) transport; plain Euler when false.
  bool midpoint_transport = true;
  // 2/3-rule truncation of the quadratic flux rho * (K * rho).
  bool dealias = true;
  // Step-rejection depth: a step whose density dips below -positivity_tol *
  // max(rho) is redone as two half steps, recursively.
  int max_halvings = 12;
  double positivity_tol = 1e-13;

  // Itô-mode multiplier for the common-noise increment, per mode with
  // phi = 2 pi k . (sigma dB):
  //   Order1:          1 - i phi - phi^2 / 2            (strong order 1 here:
  //     the noise multipliers commute, so the quadratic phase term is the
  //     whole Milstein correction and no Levy areas appear)
  //   EulerMultiplier: 1 - i phi - |2 pi sigma^T k|^2 dt / 2   (textbook
  //     Euler-Maruyama; strong order 1/2, kept for term-isolation checks)
  enum class NoiseScheme { Order1, EulerMultiplier };
  NoiseScheme noise_scheme = NoiseScheme::Order1;
};

struct StepReport {
  int halvings = 0;
  double min_density = 0.0;
};

// Splitting solver for d rho = 1/2 Laplacian rho dt - div(rho (K * rho)) dt:
// exact Fourier integrating factor for the heat part, explicit (midpoint)
// conservative transport with dealiasing. The k = 0 mode is untouched by
// both parts, so mass is conserved to roundoff.
class FPSolver {
 public:
  FPSolver(const TorusGrid& g, const KernelSpec& spec, FPOptions opt = {});

  StepReport step_deterministic(FPState& state, double dt) const;

  // Deterministic step plus the common-noise Fourier multiplier for the
  // increment sigma dB (see FPOptions::NoiseScheme). dB has d components.
  // The multiplier is applied once per supplied increment (halving inside
  // would need to split dB); a negative density afterwards throws.
  StepReport step_ito(FPState& state, double dt, const double* dB,
                      const std::array<double, 4>& sigma) const;

  const TorusGrid& grid() const { return grid_; }
  const KernelSpec& kernel() const { return spec_; }
  const FPOptions& options() const { return opt_; }

 private:
  TorusGrid grid_;
  KernelSpec spec_;
  FPOptions opt_;
  KernelSpectrum ks_;
  bool zero_kernel_;

  void step_once(Field& rho, double dt, int depth, StepReport& rep) const;
};

// Single-shot convenience wrappers.
StepReport fp_step_deterministic(FPState& state, double dt, const KernelSpec& spec,
                                 const FPOptions& opt = {});
StepReport spde_step_ito(FPState& state, double dt, const double* dB,
                         const std::array<double, 4>& sigma, const KernelSpec& spec,
                         const FPOptions& opt = {});

// rho(t, x) = u(t, x - Y): the exact reduction of spatially constant common
// noise to a translation of the deterministic solution.
Field shift_solution(const Field& u, const double* Y);

}  // namespace mfl
