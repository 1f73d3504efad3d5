#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfl/config.hpp"
#include "mfl/diagnostics.hpp"

namespace mfl {

// One full sweep: for each replica one common-noise path shared across the
// whole N list, one coupled particle/SPDE trajectory per (replica, N), and
// an entropy trace per trajectory. Everything downstream (CSV, manifest,
// trace files) is a pure rendering of this record, so reruns and different
// worker counts produce identical bytes.
struct RunResult {
  ValidatedConfig vc;
  double dt = 0.0;
  int steps = 0;
  int diag_every = 1;
  std::vector<int> diag_steps;
  double drift_bound = 0.0;  // sup of the mollified drift tables, used by the dt guard
  std::vector<std::uint64_t> noise_hashes;        // per replica
  std::vector<std::vector<EntropyTrace>> traces;  // [replica][N index]
  std::vector<std::string> flags;                 // band exits, clamp events
};

RunResult run_experiment(const ValidatedConfig& vc);

// Fixed-order rendering of the CSV schema:
// run_id, replica, N, beta, gamma, d, sigma_tag, kernel, t, H, I, L1,
// BL_lo, BL_hi, clamps, noise_hash, seed.
std::string render_csv(const RunResult& r);
std::string render_manifest(const RunResult& r);
std::string trace_filename(std::uint32_t replica, std::int64_t N);
std::string render_trace(const EntropyTrace& tr);

// Writes rows.csv, manifest.json and one trace file per (replica, N) under
// cfg.out_dir, creating the directory if needed.
void write_run(const RunResult& r);

// Across-replica response matrices for rate fitting: sup over saved times of
// H, per replica (rows) and N (columns).
std::vector<std::vector<double>> sup_H_matrix(const RunResult& r);
std::vector<double> median_sup_H(const RunResult& r);

}  // namespace mfl
