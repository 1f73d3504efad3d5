#include "mfl/fokker_planck.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mfl/spectral.hpp"

namespace mfl {

FPState make_fp_state(const RhoZero& r, const TorusGrid& g, double q) {
  if (!(q >= 2.0) || !(q > g.d))
    throw std::invalid_argument("FP state needs q >= 2 and q > d, got q = " + std::to_string(q));
  FPState st;
  st.rho = rho0_field(r, g);
  st.t = 0.0;
  st.lambda = r.lambda();
  st.q = q;
  return st;
}

FPSolver::FPSolver(const TorusGrid& g, const KernelSpec& spec, FPOptions opt)
    : grid_(g), spec_(spec), opt_(opt), ks_(kernel_spectrum(spec, g)),
      zero_kernel_(spec.type == KernelType::Zero) {
  if (opt_.max_halvings < 0 || opt_.max_halvings > 40)
    throw std::invalid_argument("max_halvings out of range");
}

namespace {

void heat_factor(Spectrum& s, double dt) {
  const double two_pi = 2.0 * std::numbers::pi;
  for_each_mode(s, [&](int k1, int k2, std::complex<double>& c) {
    double w2 = two_pi * two_pi * (static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2);
    c *= std::exp(-0.5 * dt * w2);
  });
}

}  // namespace

// Spectral divergence of the flux rho u with u = K * rho, from the spectrum
// of rho. Output is added as -div into `out`.
static void transport_rhs(const Spectrum& rho_hat, const KernelSpectrum& ks, bool dealias,
                          Spectrum& out) {
  const TorusGrid& g = rho_hat.grid;
  const int M = g.M;
  Field rho = backward(rho_hat);
  out.grid = g;
  out.c.assign(rho_hat.c.size(), 0.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int a = 0; a < g.d; ++a) {
    Spectrum ua = rho_hat;
    for (std::size_t i = 0; i < ua.c.size(); ++i) ua.c[i] *= ks.comp[a][i];
    Field u = backward(ua);
    Field flux(g);
    for (std::size_t i = 0; i < flux.v.size(); ++i) flux.v[i] = rho.v[i] * u.v[i];
    Spectrum fa = forward(flux);
    if (dealias) dealias_23(fa);
    std::size_t idx = 0;
    for_each_mode(fa, [&](int k1, int k2, std::complex<double>& c) {
      int ka = (a == 0) ? k1 : k2;
      if (std::abs(k1) == M / 2 || k2 == M / 2)
        c = 0.0;
      else
        c *= std::complex<double>(0.0, two_pi * ka);
      out.c[idx++] -= c;
    });
  }
}

void FPSolver::step_once(Field& rho, double dt, int depth, StepReport& rep) const {
  Spectrum rh = forward(rho);
  heat_factor(rh, dt);
  if (!zero_kernel_) {
    Spectrum rhs;
    if (opt_.midpoint_transport) {
      transport_rhs(rh, ks_, opt_.dealias, rhs);
      Spectrum half = rh;
      for (std::size_t i = 0; i < half.c.size(); ++i) half.c[i] += 0.5 * dt * rhs.c[i];
      transport_rhs(half, ks_, opt_.dealias, rhs);
    } else {
      transport_rhs(rh, ks_, opt_.dealias, rhs);
    }
    for (std::size_t i = 0; i < rh.c.size(); ++i) rh.c[i] += dt * rhs.c[i];
  }
  Field next = backward(rh);
  double mn = field_min(next);
  double scale = std::max(1.0, field_max(next));
  if (mn < -opt_.positivity_tol * scale) {
    if (depth >= opt_.max_halvings)
      throw std::runtime_error(
          "density went negative and the step-halving budget is exhausted; reduce dt or refine M");
    step_once(rho, 0.5 * dt, depth + 1, rep);
    step_once(rho, 0.5 * dt, depth + 1, rep);
    rep.halvings = std::max(rep.halvings, depth + 1);
    return;
  }
  rep.min_density = mn;
  rho = std::move(next);
}

StepReport FPSolver::step_deterministic(FPState& state, double dt) const {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (!(state.rho.grid == grid_)) throw std::invalid_argument("step: grid mismatch");
  StepReport rep;
  step_once(state.rho, dt, 0, rep);
  state.t += dt;
  return rep;
}

StepReport FPSolver::step_ito(FPState& state, double dt, const double* dB,
                              const std::array<double, 4>& sigma) const {
  StepReport rep = step_deterministic(state, dt);
  const int d = grid_.d;
  // sigma dB and 2 pi sigma^T k, the two contractions the multiplier needs
  double sdB[2] = {0.0, 0.0};
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) sdB[a] += sigma[a * 2 + b] * dB[b];
  bool zero_noise = true;
  for (int a = 0; a < d; ++a) zero_noise = zero_noise && sigma[a * 2] == 0.0 && sigma[a * 2 + 1] == 0.0;
  if (zero_noise) return rep;

  const double two_pi = 2.0 * std::numbers::pi;
  const int M = grid_.M;
  Spectrum rh = forward(state.rho);
  for_each_mode(rh, [&](int k1, int k2, std::complex<double>& c) {
    double k[2] = {static_cast<double>(k1), static_cast<double>(k2)};
    double phi = two_pi * (k[0] * sdB[0] + k[1] * sdB[1]);
    double quad;  // the Ito-correction part of the multiplier
    if (opt_.noise_scheme == FPOptions::NoiseScheme::Order1) {
      quad = 0.5 * phi * phi;
    } else {
      double w[2] = {0.0, 0.0};  // sigma^T k
      for (int b = 0; b < d; ++b)
        for (int a = 0; a < d; ++a) w[b] += sigma[a * 2 + b] * k[a];
      quad = 0.5 * two_pi * two_pi * (w[0] * w[0] + w[1] * w[1]) * dt;
    }
    if (std::abs(k1) == M / 2 || k2 == M / 2) {
      c *= 1.0 - quad;  // Nyquist cannot carry the odd (imaginary) part
    } else {
      c *= std::complex<double>(1.0 - quad, -phi);
    }
  });
  Field next = backward(rh);
  double mn = field_min(next);
  if (mn < -opt_.positivity_tol * std::max(1.0, field_max(next)))
    throw std::runtime_error("noise multiplier drove the density negative; reduce dt");
  rep.min_density = mn;
  state.rho = std::move(next);
  return rep;
}

StepReport fp_step_deterministic(FPState& state, double dt, const KernelSpec& spec,
                                 const FPOptions& opt) {
  return FPSolver(state.rho.grid, spec, opt).step_deterministic(state, dt);
}

StepReport spde_step_ito(FPState& state, double dt, const double* dB,
                         const std::array<double, 4>& sigma, const KernelSpec& spec,
                         const FPOptions& opt) {
  return FPSolver(state.rho.grid, spec, opt).step_ito(state, dt, dB, sigma);
}

Field shift_solution(const Field& u, const double* Y) { return shift_field(u, Y); }

}  // namespace mfl
