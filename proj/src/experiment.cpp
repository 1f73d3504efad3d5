#include "mfl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "mfl/fokker_planck.hpp"
#include "mfl/kernels.hpp"
#include "mfl/mollifier.hpp"
#include "mfl/particles.hpp"
#include "mfl/rate_fit.hpp"

namespace mfl {
namespace {

std::string fmt(double x) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

struct Shared {
  const ValidatedConfig* vc = nullptr;
  TorusGrid grid;
  RhoZero r0;
  SigmaTable sigma;
  double dt = 0.0;
  int steps = 0;
  std::vector<int> diag_steps;
  std::vector<MollifierParams> moll;       // one per N
  std::vector<std::vector<Field>> table;   // mollified drift table per N
  std::vector<NoisePath> paths;            // one per replica
  bool shared_u = true;                    // shift mode: one deterministic solve
  std::vector<std::vector<Field>> usnap;   // [0] or [replica] -> per diag step
};

double table_sup(const std::vector<Field>& t) {
  double m = 0.0;
  for (const auto& f : t) m = std::max(m, std::max(std::abs(field_min(f)), std::abs(field_max(f))));
  return m;
}

// Reference solve with band monitoring. `path` is null for the shared
// deterministic solution.
std::vector<Field> solve_reference(const Shared& sh, const NoisePath* path, int replica,
                                   std::vector<std::string>& flags) {
  const auto& cfg = sh.vc->cfg;
  FPState state = make_fp_state(sh.r0, sh.grid, cfg.q);
  FPSolver solver(sh.grid, cfg.kernel);
  const double lam = sh.vc->lambda;
  std::vector<Field> snaps;
  snaps.reserve(sh.diag_steps.size());
  std::size_t di = 0;
  bool banded = false;
  for (int n = 0; n <= sh.steps; ++n) {
    if (di < sh.diag_steps.size() && sh.diag_steps[di] == n) {
      snaps.push_back(state.rho);
      ++di;
    }
    if (n == sh.steps) break;
    if (path != nullptr)
      solver.step_ito(state, sh.dt, path->dB.data() + static_cast<std::size_t>(n) * sh.grid.d,
                      sh.sigma.value(n * sh.dt));
    else
      solver.step_deterministic(state, sh.dt);
    if (!banded) {
      const double lo = field_min(state.rho), hi = field_max(state.rho);
      if (lo < 1.0 / lam - 1e-6 || hi > lam + 1e-6) {
        banded = true;
        flags.push_back("lambda band exit at t = " + fmt((n + 1) * sh.dt) +
                        (path ? " (replica " + std::to_string(replica) + ")" : " (reference)") +
                        ": range [" + fmt(lo) + ", " + fmt(hi) + "] vs [" + fmt(1.0 / lam) + ", " +
                        fmt(lam) + "]");
      }
    }
  }
  return snaps;
}

EntropyTrace run_job(const Shared& sh, std::uint32_t replica, std::size_t iN) {
  const auto& cfg = sh.vc->cfg;
  const std::int64_t N = cfg.N_list[iN];
  ParticleEnsemble ens = sample_initial(sh.r0, N, sh.moll[iN], cfg.seed, replica);
  const auto& snaps = sh.usnap[sh.shared_u ? 0 : replica];
  const NoisePath& path = sh.paths[replica];
  const bool carry_noise = cfg.noise == NoiseMode::Ito && !sh.sigma.is_zero();

  EntropyTrace trace;
  std::size_t di = 0;
  double sdb[2] = {0.0, 0.0};
  for (int n = 0; n <= sh.steps; ++n) {
    if (di < sh.diag_steps.size() && sh.diag_steps[di] == n) {
      const Field rhoN = mollified_density(ens, sh.grid);
      const Field& u = snaps[di];
      const EntropyValue H = relative_entropy(rhoN, u);
      const EntropyValue I = fisher_information(rhoN, u);
      const double l1 = l1_distance(rhoN, u);
      const BLBracket bl = bounded_lipschitz(std::span<const double>(ens.x), N, u);
      trace.push(n * sh.dt, H.value, I.value, l1, bl, H.clamps + I.clamps);
      ++di;
    }
    if (n == sh.steps) break;
    const std::vector<double> vel = cfg.drift == DriftMode::Direct
                                        ? drift_direct(ens, sh.table[iN])
                                        : drift_mesh(ens, sh.table[iN]);
    const double* sigma_db = nullptr;
    if (carry_noise) {
      // The lab-frame common-noise kick, bitwise equal to the path's own
      // accumulation so SPDE and particles see one increment.
      for (int a = 0; a < cfg.d; ++a)
        sdb[a] = path.Y[static_cast<std::size_t>(n + 1) * cfg.d + a] -
                 path.Y[static_cast<std::size_t>(n) * cfg.d + a];
      sigma_db = sdb;
    }
    em_step(ens, sh.dt, vel, static_cast<std::uint64_t>(n), sigma_db);
  }
  return trace;
}

}  // namespace

RunResult run_experiment(const ValidatedConfig& vc) {
  const auto& cfg = vc.cfg;
  Shared sh;
  sh.vc = &vc;
  sh.grid = make_grid(cfg.d, cfg.M);
  sh.r0 = RhoZero{cfg.rho0_a, cfg.rho0_product, cfg.d};
  sh.sigma = SigmaTable::scalar(cfg.d, cfg.sigma);

  // Drift tables per N, built serially so FFTW planning stays single file.
  double drift_bound = 0.0;
  sh.moll.reserve(cfg.N_list.size());
  sh.table.reserve(cfg.N_list.size());
  for (std::int64_t N : cfg.N_list) {
    MollifierParams mp;
    mp.beta = cfg.beta;
    mp.N = N;
    mp.d = cfg.d;
    mp.exploratory = cfg.exploratory_beta;
    sh.moll.push_back(mp);
    sh.table.push_back(mollified_kernel_table(cfg.kernel, mp, sh.grid));
    drift_bound = std::max(drift_bound, table_sup(sh.table.back()));
  }

  // Limit drift bound including the SPDE side: |K * rho| over the lambda
  // band, proxied by the initial value scaled to the band ceiling.
  {
    const Field u0 = rho0_field(sh.r0, sh.grid);
    const auto ku = convolve_kernel(cfg.kernel, u0);
    drift_bound = std::max(drift_bound, table_sup(ku) * vc.lambda);
  }

  const double dt0 = cfg.dt > 0.0
                         ? cfg.dt
                         : std::min(cfg.T / 100.0, sh.grid.h() / (8.0 * std::max(drift_bound, 0.125)));
  sh.steps = std::max(1, static_cast<int>(std::ceil(cfg.T / dt0 - 1e-9)));
  sh.dt = cfg.T / sh.steps;
  const int diag_every = cfg.diag_every > 0 ? cfg.diag_every : std::max(1, sh.steps / 20);
  for (int n = 0; n < sh.steps; n += diag_every) sh.diag_steps.push_back(n);
  sh.diag_steps.push_back(sh.steps);

  sh.paths.reserve(static_cast<std::size_t>(cfg.replicas));
  for (int r = 0; r < cfg.replicas; ++r)
    sh.paths.push_back(simulate_noise_path(sh.sigma, sh.dt, sh.steps, cfg.seed,
                                           static_cast<std::uint32_t>(r)));

  std::vector<std::string> flags;
  sh.shared_u = cfg.noise == NoiseMode::Shift || sh.sigma.is_zero();
  if (sh.shared_u) {
    sh.usnap.resize(1);
    sh.usnap[0] = solve_reference(sh, nullptr, 0, flags);
  } else {
    sh.usnap.resize(static_cast<std::size_t>(cfg.replicas));
    for (int r = 0; r < cfg.replicas; ++r)
      sh.usnap[static_cast<std::size_t>(r)] = solve_reference(sh, &sh.paths[static_cast<std::size_t>(r)], r, flags);
  }

  const std::size_t num_n = cfg.N_list.size();
  const std::size_t jobs = static_cast<std::size_t>(cfg.replicas) * num_n;
  std::vector<std::vector<EntropyTrace>> traces(static_cast<std::size_t>(cfg.replicas),
                                                std::vector<EntropyTrace>(num_n));

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs) return;
      try {
        const std::uint32_t r = static_cast<std::uint32_t>(j / num_n);
        const std::size_t iN = j % num_n;
        traces[r][iN] = run_job(sh, r, iN);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(jobs);
        return;
      }
    }
  };

  const int nw = std::min<int>(cfg.workers, static_cast<int>(jobs));
  if (nw <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nw));
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::int64_t clamp_total = 0;
  for (const auto& row : traces)
    for (const auto& tr : row) clamp_total += tr.total_clamps();
  if (clamp_total > 0)
    flags.push_back("entropy log floor hit " + std::to_string(clamp_total) + " times");

  RunResult res;
  res.vc = vc;
  res.dt = sh.dt;
  res.steps = sh.steps;
  res.diag_every = diag_every;
  res.diag_steps = sh.diag_steps;
  res.drift_bound = drift_bound;
  for (const auto& p : sh.paths) res.noise_hashes.push_back(p.hash);
  res.traces = std::move(traces);
  res.flags = std::move(flags);
  return res;
}

std::string render_csv(const RunResult& r) {
  const auto& cfg = r.vc.cfg;
  const std::string run_id = hex16(r.vc.run_id);
  const std::string beta = fmt(cfg.beta);
  const std::string gamma = fmt(cfg.kernel.declared_gamma());
  const std::string sigma_tag = SigmaTable::scalar(cfg.d, cfg.sigma).tag();
  const std::string kernel = cfg.kernel.name();
  const std::string seed = std::to_string(cfg.seed);

  std::string s = "run_id,replica,N,beta,gamma,d,sigma_tag,kernel,t,H,I,L1,BL_lo,BL_hi,clamps,noise_hash,seed\n";
  for (std::size_t rep = 0; rep < r.traces.size(); ++rep) {
    const std::string hash = hex16(r.noise_hashes[rep]);
    for (std::size_t iN = 0; iN < cfg.N_list.size(); ++iN) {
      const EntropyTrace& tr = r.traces[rep][iN];
      for (std::size_t ti = 0; ti < tr.times.size(); ++ti) {
        s += run_id;
        s += ',';
        s += std::to_string(rep);
        s += ',';
        s += std::to_string(cfg.N_list[iN]);
        s += ',';
        s += beta;
        s += ',';
        s += gamma;
        s += ',';
        s += std::to_string(cfg.d);
        s += ',';
        s += sigma_tag;
        s += ',';
        s += kernel;
        s += ',';
        s += fmt(tr.times[ti]);
        s += ',';
        s += fmt(tr.H[ti]);
        s += ',';
        s += fmt(tr.I[ti]);
        s += ',';
        s += fmt(tr.L1[ti]);
        s += ',';
        s += fmt(tr.BL_lo[ti]);
        s += ',';
        s += fmt(tr.BL_hi[ti]);
        s += ',';
        s += std::to_string(tr.clamps[ti]);
        s += ',';
        s += hash;
        s += ',';
        s += seed;
        s += '\n';
      }
    }
  }
  return s;
}

std::string render_manifest(const RunResult& r) {
  using json = nlohmann::ordered_json;
  const auto& cfg = r.vc.cfg;
  json m;
  m["schema"] = 1;
  m["run_id"] = hex16(r.vc.run_id);
  m["seed"] = cfg.seed;
  m["canonical_config"] = r.vc.canonical;
  m["grid_M"] = cfg.M;
  m["dt"] = r.dt;
  m["steps"] = r.steps;
  m["diag_every"] = r.diag_every;
  json times = json::array();
  for (int n : r.diag_steps) times.push_back(n * r.dt);
  m["diag_times"] = times;
  m["lambda"] = r.vc.lambda;
  if (r.vc.theta_valid) {
    json th;
    th["value"] = r.vc.theta_parts.value;
    th["theta1"] = r.vc.theta_parts.theta1;
    th["theta2"] = r.vc.theta_parts.theta2;
    th["theta3"] = r.vc.theta_parts.theta3;
    m["theta"] = th;
  } else {
    m["theta"] = nullptr;
  }
  m["drift_bound"] = r.drift_bound;
  json hashes = json::array();
  for (auto h : r.noise_hashes) hashes.push_back(hex16(h));
  m["noise_hashes"] = hashes;
  m["flags"] = r.flags;
  json files;
  files["rows"] = "rows.csv";
  json tr = json::array();
  for (std::size_t rep = 0; rep < r.traces.size(); ++rep)
    for (std::int64_t N : cfg.N_list) tr.push_back(trace_filename(static_cast<std::uint32_t>(rep), N));
  files["traces"] = tr;
  m["files"] = files;
  m["warnings"] = r.vc.warnings;
  return m.dump(2) + "\n";
}

std::string trace_filename(std::uint32_t replica, std::int64_t N) {
  return "trace_r" + std::to_string(replica) + "_N" + std::to_string(N) + ".csv";
}

std::string render_trace(const EntropyTrace& tr) {
  std::string s = "t,H,I,L1,BL_lo,BL_hi,clamps\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    s += fmt(tr.times[i]);
    s += ',';
    s += fmt(tr.H[i]);
    s += ',';
    s += fmt(tr.I[i]);
    s += ',';
    s += fmt(tr.L1[i]);
    s += ',';
    s += fmt(tr.BL_lo[i]);
    s += ',';
    s += fmt(tr.BL_hi[i]);
    s += ',';
    s += std::to_string(tr.clamps[i]);
    s += '\n';
  }
  return s;
}

void write_run(const RunResult& r) {
  namespace fs = std::filesystem;
  const fs::path dir(r.vc.cfg.out_dir);
  fs::create_directories(dir);
  auto dump = [&](const fs::path& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << content;
  };
  dump("rows.csv", render_csv(r));
  dump("manifest.json", render_manifest(r));
  for (std::size_t rep = 0; rep < r.traces.size(); ++rep)
    for (std::size_t iN = 0; iN < r.vc.cfg.N_list.size(); ++iN)
      dump(trace_filename(static_cast<std::uint32_t>(rep), r.vc.cfg.N_list[iN]),
           render_trace(r.traces[rep][iN]));
}

std::vector<std::vector<double>> sup_H_matrix(const RunResult& r) {
  std::vector<std::vector<double>> m;
  m.reserve(r.traces.size());
  for (const auto& row : r.traces) {
    std::vector<double> v;
    v.reserve(row.size());
    for (const auto& tr : row) v.push_back(tr.sup_H());
    m.push_back(std::move(v));
  }
  return m;
}

std::vector<double> median_sup_H(const RunResult& r) {
  const auto m = sup_H_matrix(r);
  std::vector<double> med(r.vc.cfg.N_list.size());
  for (std::size_t iN = 0; iN < med.size(); ++iN) {
    std::vector<double> col;
    col.reserve(m.size());
    for (const auto& row : m) col.push_back(row[iN]);
    med[iN] = median_of(std::move(col));
  }
  return med;
}

}  // namespace mfl
