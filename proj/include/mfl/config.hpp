#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfl/diagnostics.hpp"
#include "mfl/kernels.hpp"
#include "mfl/particles.hpp"

namespace mfl {

enum class DriftMode { Direct, Mesh };
enum class NoiseMode { Shift, Ito };

// Flat key = value experiment description. The full namespace, with
// defaults in brackets:
//
//   model.d       [1]      spatial dimension, 1 or 2
//   model.beta    [0.2]    mollifier exponent
//   model.q       [4]      Lebesgue index monitored by the solver, q >= 2, q > d
//   model.delta   [0]      slack subtracted from the rate exponent
//   kernel.type   [holder] zero | sub_coulomb | biot_savart | holder | cantor
//   kernel.strength [1]
//   kernel.alpha  [0.5]    sub_coulomb singularity exponent, in (0,1)
//   kernel.gamma  [0.25]   holder regularity, in (0, 1/2)
//   kernel.modes  [16]     holder series truncation (modes 1..value)
//   kernel.cantor_level [12]
//   noise.sigma   [0.3]    scalar common-noise intensity (sigma_t = value * I)
//   noise.mode    [shift]  shift | ito
//   init.a        [0.5]    cosine amplitude of the initial density
//   init.product  [true]   d=2 initial data: product of 1d profiles
//   grid.M        [0]      0 = auto from the resolution rule at the largest N
//   time.T        [0.2]
//   time.dt       [0]      0 = auto (CFL guard against the drift table)
//   time.diag_every [0]    diagnostics every k-th step; 0 = about 20 samples
//   sweep.N       [256,512,1024] comma-separated particle counts
//   sweep.replicas [4]
//   sweep.moment  [1]      m for the L^m(Omega) summary statistic
//   run.seed      [1]
//   run.workers   [1]
//   run.out       [out]
//   run.drift     [mesh]   direct | mesh
//   run.exploratory_beta [false]  relax the beta range check
struct ExperimentConfig {
  int d = 1;
  double beta = 0.2;
  double q = 4.0;
  double delta = 0.0;
  KernelSpec kernel{KernelType::HolderAnalytic, 1, 1.0, 0.5, 0.25, {}, 12};
  double sigma = 0.3;
  NoiseMode noise = NoiseMode::Shift;
  double rho0_a = 0.5;
  bool rho0_product = true;
  int M = 0;
  double T = 0.2;
  double dt = 0.0;
  int diag_every = 0;
  std::vector<std::int64_t> N_list{256, 512, 1024};
  int replicas = 4;
  int moment = 1;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = "out";
  DriftMode drift = DriftMode::Mesh;
  bool exploratory_beta = false;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical serialization: every key in a fixed order with shortest
// round-trip numerals. Equal configs produce identical text, and the run id
// is the FNV-1a hash of this text.
std::string canonical_config(const ExperimentConfig& cfg);
std::uint64_t config_run_id(const ExperimentConfig& cfg);

struct ValidatedConfig {
  ExperimentConfig cfg;  // auto-derivable fields (M, diag cadence) filled in
  double lambda = 0.0;
  bool theta_valid = false;
  ThetaBreakdown theta_parts;
  std::vector<std::string> warnings;
  std::string canonical;
  std::uint64_t run_id = 0;
};

// Applies every admissibility check and collects all violations into one
// error. On success returns the config with grid size and diagnostics
// cadence resolved (dt stays 0 when automatic: the run fixes it against the
// measured drift bound before any trajectory starts).
ValidatedConfig validate_config(const ExperimentConfig& cfg);

const char* to_string(DriftMode m);
const char* to_string(NoiseMode m);

}  // namespace mfl
