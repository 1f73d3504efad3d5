#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfl/grid.hpp"
#include "mfl/mollifier.hpp"

namespace mfl {

// Piecewise-constant time-dependent diffusion matrix sigma_t (d x d, row
// major, unused entries zero). value(t) applies on [t_i, t_{i+1}).
struct SigmaTable {
  int d = 1;
  std::vector<double> t{0.0};
  std::vector<std::array<double, 4>> m{{0.0, 0.0, 0.0, 0.0}};

  static SigmaTable scalar(int d, double s);
  const std::array<double, 4>& value(double time) const;
  bool is_zero() const;
  // Largest absolute matrix entry, the boundedness constant reported per run.
  double bound() const;
  std::string tag() const;  // CSV label: "0" / "0.3" / "table"
};

// One realization of the common noise: raw Brownian increments dB_n and the
// accumulated shift Y_{n+1} = Y_n + sigma_{t_n} dB_n (fixed accumulation
// order, so every consumer sees identical values). hash identifies the dB
// sequence (FNV-1a over its bytes) for pathwise-coupling audits.
struct NoisePath {
  double dt = 0.0;
  int steps = 0;
  int d = 1;
  std::vector<double> dB;  // steps * d
  std::vector<double> Y;   // (steps + 1) * d
  std::uint64_t hash = 0;
};

NoisePath simulate_noise_path(const SigmaTable& sigma, double dt, int steps, std::uint64_t seed,
                              std::uint32_t replica);

// Initial density family rho0(x) = 1 + a * prod_j cos(2 pi x_j) (product
// form) or 1 + a * sum_j cos(2 pi x_j). peak_dev is the largest deviation
// from 1 (a, resp. d*a); the positivity band parameter is
// lambda = 1/(1 - peak_dev).
struct RhoZero {
  double a = 0.5;
  bool product_form = true;
  int d = 1;

  double peak_dev() const { return product_form ? std::abs(a) : d * std::abs(a); }
  double lambda() const { return 1.0 / (1.0 - peak_dev()); }
  double density(const double* x) const;
};

void validate(const RhoZero& r);  // |peak_dev| <= 0.9

Field rho0_field(const RhoZero& r, const TorusGrid& g);

struct ParticleEnsemble {
  int d = 1;
  std::int64_t N = 0;
  MollifierParams moll;
  std::uint64_t seed = 0;
  std::uint32_t replica = 0;
  std::vector<double> x;  // AoS, N*d, canonical positions
};

// N i.i.d. samples from rho0: Newton-refined inverse CDF in d=1 (the cosine
// family has an analytic CDF), rejection sampling under the flat envelope in
// d=2. Pure function of (seed, replica, particle index).
ParticleEnsemble sample_initial(const RhoZero& r, std::int64_t N, const MollifierParams& p,
                                std::uint64_t seed, std::uint32_t replica);

// velocity_i = (1/N) sum_k table(wrap(X_i - X_k)), accumulated in index
// order k = 0..N-1 (bitwise reproducibility). Returns N*d values.
std::vector<double> drift_direct(const ParticleEnsemble& ens, const std::vector<Field>& table,
                                 Interp scheme = Interp::Linear);

// Particle-mesh route: deposit S^N, convolve with the table spectrally,
// interpolate back at the particles.
std::vector<double> drift_mesh(const ParticleEnsemble& ens, const std::vector<Field>& table,
                               Interp scheme = Interp::Linear);

// X_i += vel_i dt + dW_i + sigma dB (the last term only when sigma_dB is
// non-null), then wrap. dW is drawn inside from the per-particle counter
// stream at `step`; sigma_dB is the precomputed d-vector sigma_{t_n} dB_n
// shared by every particle.
void em_step(ParticleEnsemble& ens, double dt, std::span<const double> vel, std::uint64_t step,
             const double* sigma_dB);

// rho^N = V^N * S^N on the grid, normalized to exact unit discrete mass
// (the raw lattice-sum V^N carries the grid quadrature defect; dividing by
// its own discrete mass keeps every density diagnostic mass-consistent).
Field mollified_density(const ParticleEnsemble& ens, const TorusGrid& g);

}  // namespace mfl
