// Command-line front end: validate configs, run single simulations or full
// sweeps, refit rates from a previously written rows.csv, and print the
// reference-constant table next to the library's own values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mfl/config.hpp"
#include "mfl/diagnostics.hpp"
#include "mfl/experiment.hpp"
#include "mfl/grid.hpp"
#include "mfl/kernels.hpp"
#include "mfl/mollifier.hpp"
#include "mfl/rate_fit.hpp"
#include "oracles.hpp"

using namespace mfl;

namespace {

struct Overrides {
  CLI::Option* seed = nullptr;
  CLI::Option* workers = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* drift = nullptr;
  CLI::Option* noise = nullptr;
  std::uint64_t seed_v = 0;
  int workers_v = 0;
  std::string out_v, drift_v, noise_v;
};

void attach_overrides(CLI::App* cmd, Overrides& o) {
  o.seed = cmd->add_option("--seed", o.seed_v, "override run.seed");
  o.workers = cmd->add_option("--workers", o.workers_v, "override run.workers")
                  ->check(CLI::PositiveNumber);
  o.out = cmd->add_option("--out", o.out_v, "override run.out");
  o.drift = cmd->add_option("--drift", o.drift_v, "override run.drift")
                ->check(CLI::IsMember({"direct", "mesh"}));
  o.noise = cmd->add_option("--noise", o.noise_v, "override noise.mode")
                ->check(CLI::IsMember({"shift", "ito"}));
}

ExperimentConfig load_with_overrides(const std::string& path, const Overrides& o) {
  ExperimentConfig cfg = load_config(path);
  if (o.seed->count()) cfg.seed = o.seed_v;
  if (o.workers->count()) cfg.workers = o.workers_v;
  if (o.out->count()) cfg.out_dir = o.out_v;
  if (o.drift->count()) cfg.drift = o.drift_v == "direct" ? DriftMode::Direct : DriftMode::Mesh;
  if (o.noise->count()) cfg.noise = o.noise_v == "shift" ? NoiseMode::Shift : NoiseMode::Ito;
  return cfg;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void print_validation(const ValidatedConfig& vc) {
  std::printf("run id        %s\n", hex16(vc.run_id).c_str());
  std::printf("grid          M = %d (h = %g), d = %d\n", vc.cfg.M, 1.0 / vc.cfg.M, vc.cfg.d);
  std::printf("initial data  a = %g, lambda = %g\n", vc.cfg.rho0_a, vc.lambda);
  if (vc.theta_valid) {
    const auto& th = vc.theta_parts;
    std::printf("rate exponent theta = %.6f  (pieces %.6f / %.6f / %.6f, slack %g)\n", th.value,
                th.theta1, th.theta2, th.theta3, vc.cfg.delta);
  } else {
    std::printf("rate exponent unavailable for these parameters\n");
  }
  for (const auto& w : vc.warnings) std::printf("warning       %s\n", w.c_str());
}

void print_summary(const RunResult& r) {
  const auto& cfg = r.vc.cfg;
  std::printf("steps         %d at dt = %g (diagnostics every %d)\n", r.steps, r.dt, r.diag_every);
  std::printf("drift bound   %g\n", r.drift_bound);
  const auto med = median_sup_H(r);
  std::printf("%12s  %s\n", "N", "median sup_t H");
  for (std::size_t i = 0; i < med.size(); ++i)
    std::printf("%12lld  %.6e\n", static_cast<long long>(cfg.N_list[i]), med[i]);
  for (const auto& f : r.flags) std::printf("flag          %s\n", f.c_str());
}

void print_fit_report(const RateFit& fit, bool theta_valid, const ThetaBreakdown& th) {
  std::printf("fitted slope  %.4f  [%.4f, %.4f], residual %.3g\n", fit.slope, fit.slope_lo,
              fit.slope_hi, fit.residual);
  if (!theta_valid) {
    std::printf("no guaranteed exponent for these parameters; slope reported as-is\n");
    return;
  }
  std::printf("guaranteed    theta = %.6f, so the expected slope is at most %.6f\n", th.value,
              -th.value);
  std::printf("margin check  slope <= -theta/2: %s  (%.4f vs %.6f)\n",
              fit.slope <= -0.5 * th.value ? "yes" : "no", fit.slope, -0.5 * th.value);
}

void emit_plot_script(std::string dir, const RateFit& fit) {
  if (dir.empty()) dir = ".";
  std::filesystem::create_directories(dir);
  const std::string dat = (std::filesystem::path(dir) / "rates.dat").string();
  const std::string gp = (std::filesystem::path(dir) / "rates.gp").string();
  std::ofstream d(dat);
  d << "# N  response  fitted\n";
  for (std::size_t i = 0; i < fit.N.size(); ++i)
    d << fit.N[i] << ' ' << fit.response[i] << ' '
      << std::exp(fit.intercept + fit.slope * std::log(fit.N[i])) << '\n';
  // The script names the data file without a directory, so run gnuplot from
  // the directory both files land in.
  std::ofstream g(gp);
  g << "set logscale xy\n"
    << "set xlabel 'N'\n"
    << "set ylabel 'median sup_t H'\n"
    << "set key left bottom\n"
    << "plot 'rates.dat' using 1:2 with points pt 7 title 'measured', \\\n"
    << "     'rates.dat' using 1:3 with lines title 'slope "
    << fit.slope << "'\n";
  std::printf("plot script   %s (data in %s)\n", gp.c_str(), dat.c_str());
}

RateFit fit_from_run(const RunResult& r) {
  std::vector<double> Nd(r.vc.cfg.N_list.begin(), r.vc.cfg.N_list.end());
  return rate_fit_replicated(Nd, sup_H_matrix(r), r.vc.cfg.seed);
}

int cmd_validate(const std::string& path, const Overrides& o) {
  const ValidatedConfig vc = validate_config(load_with_overrides(path, o));
  print_validation(vc);
  std::printf("canonical form follows\n%s", vc.canonical.c_str());
  return 0;
}

int run_and_write(ExperimentConfig cfg, bool fit) {
  const ValidatedConfig vc = validate_config(cfg);
  print_validation(vc);
  const RunResult r = run_experiment(vc);
  print_summary(r);
  write_run(r);
  std::printf("wrote         %s/rows.csv, manifest.json, %zu trace files\n",
              r.vc.cfg.out_dir.c_str(), r.traces.size() * r.vc.cfg.N_list.size());
  if (fit && r.vc.cfg.N_list.size() >= 3) {
    const RateFit f = fit_from_run(r);
    print_fit_report(f, vc.theta_valid, vc.theta_parts);
  }
  return 0;
}

int cmd_simulate(const std::string& path, const Overrides& o) {
  ExperimentConfig cfg = load_with_overrides(path, o);
  if (cfg.N_list.size() > 1) {
    std::printf("simulate uses the first particle count only: N = %lld\n",
                static_cast<long long>(cfg.N_list.front()));
    cfg.N_list.resize(1);
  }
  return run_and_write(std::move(cfg), false);
}

int cmd_sweep(const std::string& path, const Overrides& o, bool plot) {
  ExperimentConfig cfg = load_with_overrides(path, o);
  const ValidatedConfig vc = validate_config(cfg);
  print_validation(vc);
  const RunResult r = run_experiment(vc);
  print_summary(r);
  write_run(r);
  std::printf("wrote         %s/rows.csv, manifest.json, %zu trace files\n",
              r.vc.cfg.out_dir.c_str(), r.traces.size() * r.vc.cfg.N_list.size());
  if (r.vc.cfg.N_list.size() >= 3) {
    const RateFit f = fit_from_run(r);
    print_fit_report(f, vc.theta_valid, vc.theta_parts);
    if (plot) emit_plot_script(r.vc.cfg.out_dir, f);
  } else if (plot) {
    std::printf("plot skipped: need at least three particle counts\n");
  }
  return 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  return out;
}

int cmd_rates(const std::string& csv_path, bool plot) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + csv_path);
  const std::string expect =
      "run_id,replica,N,beta,gamma,d,sigma_tag,kernel,t,H,I,L1,BL_lo,BL_hi,clamps,noise_hash,seed";
  if (line != expect) throw std::runtime_error("unrecognized CSV header in " + csv_path);

  std::map<std::pair<long long, long long>, double> sup_h;  // (replica, N) -> sup_t H
  double beta = 0.0, gamma = 0.0;
  int d = 0;
  std::uint64_t seed = 1;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 17) throw std::runtime_error("malformed row: " + line);
    const long long rep = std::stoll(f[1]);
    const long long N = std::stoll(f[2]);
    const double H = std::stod(f[9]);
    auto [it, fresh] = sup_h.try_emplace({rep, N}, H);
    if (!fresh) it->second = std::max(it->second, H);
    if (first) {
      beta = std::stod(f[3]);
      gamma = std::stod(f[4]);
      d = std::stoi(f[5]);
      seed = std::stoull(f[16]);
      first = false;
    }
  }
  if (first) throw std::runtime_error("no data rows in " + csv_path);

  std::set<long long> reps, Ns;
  for (const auto& [k, v] : sup_h) {
    reps.insert(k.first);
    Ns.insert(k.second);
  }
  std::vector<double> Nd(Ns.begin(), Ns.end());
  std::vector<std::vector<double>> per_replica;
  for (long long rep : reps) {
    auto& row = per_replica.emplace_back();
    for (long long N : Ns) {
      const auto it = sup_h.find({rep, N});
      if (it == sup_h.end())
        throw std::runtime_error("replica " + std::to_string(rep) + " has no rows for N = " +
                                 std::to_string(N));
      row.push_back(it->second);
    }
  }

  std::printf("parsed        %zu replicas x %zu particle counts (beta = %g, gamma = %g, d = %d)\n",
              reps.size(), Ns.size(), beta, gamma, d);
  const RateFit fit = rate_fit_replicated(Nd, per_replica, seed);
  std::printf("%12s  %s\n", "N", "median sup_t H");
  for (std::size_t i = 0; i < fit.N.size(); ++i)
    std::printf("%12.0f  %.6e\n", fit.N[i], fit.response[i]);

  bool theta_ok = false;
  ThetaBreakdown th;
  try {
    th = theta(beta, gamma, d, 0.0);
    theta_ok = true;
  } catch (const std::domain_error&) {
  }
  print_fit_report(fit, theta_ok, th);
  if (plot) emit_plot_script(std::filesystem::path(csv_path).parent_path().string(), fit);
  return 0;
}

struct OracleRow {
  std::string quantity, route;
  double reference;
  bool has_library;
  double library;
};

int cmd_oracle() {
  const TorusGrid g = make_grid(1, 256);
  Field flat(g), cosine(g), small(g);
  for (int i = 0; i < g.M; ++i) {
    flat.at(i) = 1.0;
    cosine.at(i) = 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * g.node(i));
    small.at(i) = 1.0 + 0.05 * std::cos(2.0 * std::numbers::pi * g.node(i));
  }
  const OptimalBeta ob = optimal_beta(0.25, 2);
  double beta_star = 0.0, theta_star = 0.0;
  oracle::optimal_beta_grid(0.25, 2, beta_star, theta_star);

  const std::vector<OracleRow> rows = {
      {"bump mass, d = 1 (closed form)", "error function", oracle::bump_mass_closed(1), true,
       mollifier_normalizer(1)},
      {"bump mass, d = 1 (quadrature)", "adaptive Simpson", oracle::bump_mass_quadrature(1), true,
       mollifier_normalizer(1)},
      {"bump mass, d = 2 (closed form)", "elementary integral", oracle::bump_mass_closed(2), true,
       mollifier_normalizer(2)},
      {"entropy of 1 + 0.5 cos (closed form)", "log series", oracle::entropy_cosine_closed(0.5),
       true, relative_entropy(cosine, flat).value},
      {"entropy of 1 + 0.5 cos (quadrature)", "adaptive Simpson",
       oracle::entropy_cosine_quadrature(0.5), true, relative_entropy(cosine, flat).value},
      {"fisher info of 1 + 0.05 cos", "adaptive Simpson", oracle::fisher_cosine_quadrature(0.05),
       true, fisher_information(small, flat).value},
      {"fisher small-a law at a = 0.05", "2 pi^2 a^2", oracle::fisher_small_a(0.05), false, 0.0},
      {"L1 norm of 0.5 cos", "closed form 2a/pi", oracle::l1_cosine(0.5), true,
       l1_distance(cosine, flat)},
      {"transport distance of atoms at 0, 0.1", "geodesic", oracle::circle_w1_two_atoms(0.0, 0.1),
       false, 0.0},
      {"heat mode decay, k = 1, t = 0.1", "exp(-2 pi^2 k^2 t)", oracle::heat_mode_decay(1, 0.1),
       false, 0.0},
      {"rate exponent (0.2, 0.25, d = 1)", "independent recomputation",
       oracle::theta_reference(0.2, 0.25, 1, 0.0), true, theta(0.2, 0.25, 1, 0.0).value},
      {"rate exponent (0.2, 0.25, d = 2)", "independent recomputation",
       oracle::theta_reference(0.2, 0.25, 2, 0.0), true, theta(0.2, 0.25, 2, 0.0).value},
      {"best beta for gamma = 0.25, d = 2", "grid search at 1e-6", beta_star, true, ob.beta_star},
      {"best exponent at that beta", "grid search at 1e-6", theta_star, true, ob.theta_star},
  };

  std::printf("%-40s %-26s %-22s %-22s %s\n", "quantity", "route", "reference", "library", "diff");
  double worst = 0.0;
  for (const auto& r : rows) {
    if (r.has_library) {
      const double diff = std::abs(r.library - r.reference);
      worst = std::max(worst, diff);
      std::printf("%-40s %-26s %-22.15g %-22.15g %.2e\n", r.quantity.c_str(), r.route.c_str(),
                  r.reference, r.library, diff);
    } else {
      std::printf("%-40s %-26s %-22.15g %-22s %s\n", r.quantity.c_str(), r.route.c_str(),
                  r.reference, "-", "-");
    }
  }
  std::printf("largest gap between reference and library: %.2e\n", worst);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interacting-particle / mean-field laboratory"};
  app.require_subcommand(1);

  std::string config_path, csv_path;
  bool plot = false;

  auto* validate = app.add_subcommand("validate", "parse a config, print the canonical form");
  validate->add_option("config", config_path, "config file")->required();
  Overrides ov_validate;
  attach_overrides(validate, ov_validate);

  auto* simulate = app.add_subcommand("simulate", "run the first particle count only");
  simulate->add_option("config", config_path, "config file")->required();
  Overrides ov_simulate;
  attach_overrides(simulate, ov_simulate);

  auto* sweep = app.add_subcommand("sweep", "run the full particle-count sweep and fit the rate");
  sweep->add_option("config", config_path, "config file")->required();
  sweep->add_flag("--plot", plot, "emit a gnuplot script next to the CSV");
  Overrides ov_sweep;
  attach_overrides(sweep, ov_sweep);

  auto* rates = app.add_subcommand("rates", "refit the decay rate from a rows.csv");
  rates->add_option("csv", csv_path, "rows.csv written by sweep or simulate")->required();
  rates->add_flag("--plot", plot, "emit a gnuplot script next to the CSV");

  auto* oracle_cmd = app.add_subcommand("oracle", "print reference constants and library values");
  (void)oracle_cmd;

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(config_path, ov_validate);
    if (simulate->parsed()) return cmd_simulate(config_path, ov_simulate);
    if (sweep->parsed()) return cmd_sweep(config_path, ov_sweep, plot);
    if (rates->parsed()) return cmd_rates(csv_path, plot);
    if (oracle_cmd->parsed()) return cmd_oracle();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
