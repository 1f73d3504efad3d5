#include "mfl/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mfl/mollifier.hpp"

namespace mfl {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw std::invalid_argument("config: key '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::int64_t> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<std::int64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_int(key, item));
  }
  if (out.empty()) throw std::invalid_argument("config: key '" + key + "' expects a list of integers");
  return out;
}

KernelType parse_kernel_type(const std::string& v) {
  if (v == "zero") return KernelType::Zero;
  if (v == "sub_coulomb") return KernelType::SubCoulomb;
  if (v == "biot_savart") return KernelType::BiotSavart;
  if (v == "holder") return KernelType::HolderAnalytic;
  if (v == "cantor") return KernelType::Cantor;
  throw std::invalid_argument("config: unknown kernel.type '" + v +
                              "' (expected zero|sub_coulomb|biot_savart|holder|cantor)");
}

std::string fmt_double(double x) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

int holder_mode_count(const KernelSpec& k) {
  return k.modes.empty() ? 16 : static_cast<int>(k.modes.size());
}

}  // namespace

const char* to_string(DriftMode m) { return m == DriftMode::Direct ? "direct" : "mesh"; }
const char* to_string(NoiseMode m) { return m == NoiseMode::Shift ? "shift" : "ito"; }

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.kernel.modes.clear();
  int kernel_modes = 16;
  std::vector<std::string> seen;

  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key or value");
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    seen.push_back(key);

    if (key == "model.d") cfg.d = static_cast<int>(parse_int(key, val));
    else if (key == "model.beta") cfg.beta = parse_double(key, val);
    else if (key == "model.q") cfg.q = parse_double(key, val);
    else if (key == "model.delta") cfg.delta = parse_double(key, val);
    else if (key == "kernel.type") cfg.kernel.type = parse_kernel_type(val);
    else if (key == "kernel.strength") cfg.kernel.strength = parse_double(key, val);
    else if (key == "kernel.alpha") cfg.kernel.alpha = parse_double(key, val);
    else if (key == "kernel.gamma") cfg.kernel.gamma = parse_double(key, val);
    else if (key == "kernel.modes") kernel_modes = static_cast<int>(parse_int(key, val));
    else if (key == "kernel.cantor_level") cfg.kernel.cantor_level = static_cast<int>(parse_int(key, val));
    else if (key == "noise.sigma") cfg.sigma = parse_double(key, val);
    else if (key == "noise.mode") {
      if (val == "shift") cfg.noise = NoiseMode::Shift;
      else if (val == "ito") cfg.noise = NoiseMode::Ito;
      else throw std::invalid_argument("config: noise.mode expects shift or ito, got '" + val + "'");
    } else if (key == "init.a") cfg.rho0_a = parse_double(key, val);
    else if (key == "init.product") cfg.rho0_product = parse_bool(key, val);
    else if (key == "grid.M") cfg.M = static_cast<int>(parse_int(key, val));
    else if (key == "time.T") cfg.T = parse_double(key, val);
    else if (key == "time.dt") cfg.dt = parse_double(key, val);
    else if (key == "time.diag_every") cfg.diag_every = static_cast<int>(parse_int(key, val));
    else if (key == "sweep.N") cfg.N_list = parse_int_list(key, val);
    else if (key == "sweep.replicas") cfg.replicas = static_cast<int>(parse_int(key, val));
    else if (key == "sweep.moment") cfg.moment = static_cast<int>(parse_int(key, val));
    else if (key == "run.seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, val));
    else if (key == "run.workers") cfg.workers = static_cast<int>(parse_int(key, val));
    else if (key == "run.out") cfg.out_dir = val;
    else if (key == "run.drift") {
      if (val == "direct") cfg.drift = DriftMode::Direct;
      else if (val == "mesh") cfg.drift = DriftMode::Mesh;
      else throw std::invalid_argument("config: run.drift expects direct or mesh, got '" + val + "'");
    } else if (key == "run.exploratory_beta") cfg.exploratory_beta = parse_bool(key, val);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  cfg.kernel.d = cfg.d;
  if (cfg.kernel.modes.empty())
    for (int m = 1; m <= kernel_modes; ++m) cfg.kernel.modes.push_back(m);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::string s;
  auto kv = [&s](const char* k, const std::string& v) {
    s += k;
    s += " = ";
    s += v;
    s += '\n';
  };
  kv("model.d", std::to_string(cfg.d));
  kv("model.beta", fmt_double(cfg.beta));
  kv("model.q", fmt_double(cfg.q));
  kv("model.delta", fmt_double(cfg.delta));
  kv("kernel.type", cfg.kernel.name());
  kv("kernel.strength", fmt_double(cfg.kernel.strength));
  kv("kernel.alpha", fmt_double(cfg.kernel.alpha));
  kv("kernel.gamma", fmt_double(cfg.kernel.gamma));
  kv("kernel.modes", std::to_string(holder_mode_count(cfg.kernel)));
  kv("kernel.cantor_level", std::to_string(cfg.kernel.cantor_level));
  kv("noise.sigma", fmt_double(cfg.sigma));
  kv("noise.mode", to_string(cfg.noise));
  kv("init.a", fmt_double(cfg.rho0_a));
  kv("init.product", cfg.rho0_product ? "true" : "false");
  kv("grid.M", std::to_string(cfg.M));
  kv("time.T", fmt_double(cfg.T));
  kv("time.dt", fmt_double(cfg.dt));
  kv("time.diag_every", std::to_string(cfg.diag_every));
  std::string ns;
  for (std::size_t i = 0; i < cfg.N_list.size(); ++i) {
    if (i) ns += ',';
    ns += std::to_string(cfg.N_list[i]);
  }
  kv("sweep.N", ns);
  kv("sweep.replicas", std::to_string(cfg.replicas));
  kv("sweep.moment", std::to_string(cfg.moment));
  kv("run.seed", std::to_string(cfg.seed));
  kv("run.out", cfg.out_dir);
  kv("run.drift", to_string(cfg.drift));
  kv("run.exploratory_beta", cfg.exploratory_beta ? "true" : "false");
  // run.workers is deliberately absent: worker count must not affect outputs.
  return s;
}

std::uint64_t config_run_id(const ExperimentConfig& cfg) { return fnv1a(canonical_config(cfg)); }

ValidatedConfig validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  ExperimentConfig out = cfg;

  if (out.d != 1 && out.d != 2) errors.push_back("model.d must be 1 or 2");
  const double beta_max = out.d == 1 ? 0.25 : 1.0 / 3.0;
  if (!(out.beta > 0.0 && out.beta < 1.0)) {
    errors.push_back("model.beta must lie in (0, 1)");
  } else if (out.beta >= beta_max) {
    if (out.exploratory_beta)
      warnings.push_back("model.beta = " + fmt_double(out.beta) + " is outside the rate regime (0, " +
                         fmt_double(beta_max) + ") for d = " + std::to_string(out.d) +
                         "; continuing because run.exploratory_beta = true");
    else
      errors.push_back("model.beta must lie in (0, " + fmt_double(beta_max) + ") for d = " +
                       std::to_string(out.d) + ", got " + fmt_double(out.beta) +
                       " (set run.exploratory_beta to relax)");
  }
  if (!(out.q >= 2.0) || !(out.q > out.d))
    errors.push_back("model.q must satisfy q >= 2 and q > d");
  if (out.delta < 0.0) errors.push_back("model.delta must be >= 0");

  out.kernel.d = out.d;
  try {
    validate(out.kernel);
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  if (out.kernel.type == KernelType::HolderAnalytic &&
      !(out.kernel.gamma > 0.0 && out.kernel.gamma < 0.5))
    errors.push_back("kernel.gamma = " + fmt_double(out.kernel.gamma) +
                     " violates the divergence regularity range gamma in (0, 1/2)");
  if (out.kernel.type == KernelType::Cantor && out.sigma != 0.0)
    errors.push_back("cantor kernel requires noise.sigma = 0 (the rough-kernel result holds without common noise)");

  if (!(out.sigma >= 0.0)) errors.push_back("noise.sigma must be >= 0");
  if (!(std::abs(out.rho0_a) < 1.0))
    errors.push_back("init.a must satisfy |a| < 1 so the initial density stays positive");
  const double peak = (out.rho0_product ? 1.0 : static_cast<double>(out.d)) * std::abs(out.rho0_a);
  double lambda = 0.0;
  if (peak > 0.9) {
    errors.push_back("init.a gives peak deviation " + fmt_double(peak) +
                     " > 0.9; the density band would be too thin to monitor");
  } else {
    lambda = 1.0 / (1.0 - peak);
  }

  if (!(out.T > 0.0 && out.T <= 0.5))
    errors.push_back("time.T must lie in (0, 0.5]: beyond that the guaranteed existence window is not monitored");
  if (out.dt < 0.0) errors.push_back("time.dt must be >= 0 (0 selects the automatic step)");
  if (out.dt > 0.0 && out.dt > out.T) errors.push_back("time.dt exceeds time.T");
  if (out.diag_every < 0) errors.push_back("time.diag_every must be >= 0");

  if (out.N_list.empty()) errors.push_back("sweep.N must list at least one particle count");
  for (auto n : out.N_list)
    if (n < 2) errors.push_back("sweep.N entries must be >= 2");
  if (out.replicas < 1) errors.push_back("sweep.replicas must be >= 1");
  if (out.moment < 1) errors.push_back("sweep.moment must be >= 1");
  if (out.workers < 1) errors.push_back("run.workers must be >= 1");

  // Resolution rule at the largest N, rounded up to a power of two.
  if (errors.empty()) {
    std::int64_t nmax = 0;
    for (auto n : out.N_list) nmax = std::max(nmax, n);
    const double s = std::pow(static_cast<double>(nmax), out.beta / out.d);
    const int need = static_cast<int>(std::ceil(8.0 * s));
    if (out.M == 0) {
      int m = 32;
      while (m < need) m *= 2;
      out.M = m;
    } else if (out.M < need) {
      errors.push_back("grid.M = " + std::to_string(out.M) + " violates the resolution rule M >= 8 N^(beta/d) = " +
                       std::to_string(need) + " at N = " + std::to_string(nmax));
    } else if (out.M % 2 != 0) {
      errors.push_back("grid.M must be even");
    }
  }

  if (out.diag_every == 0 && errors.empty()) {
    // Aim for about 20 diagnostic times once dt is known; if dt is still
    // automatic the run resolves the cadence after fixing dt.
    if (out.dt > 0.0) {
      const int steps = static_cast<int>(std::ceil(out.T / out.dt));
      out.diag_every = std::max(1, steps / 20);
    }
  }

  if (!errors.empty()) {
    std::string msg = "config validation failed:";
    for (const auto& e : errors) {
      msg += "\n  - ";
      msg += e;
    }
    throw std::invalid_argument(msg);
  }

  ValidatedConfig v;
  v.cfg = out;
  v.lambda = lambda;
  const double g = out.kernel.declared_gamma();
  if (g > 0.0 && g < 0.5 && out.beta < beta_max) {
    try {
      v.theta_parts = theta(out.beta, g, out.d, out.delta);
      v.theta_valid = true;
    } catch (const std::exception& e) {
      warnings.push_back(std::string("rate exponent unavailable: ") + e.what());
    }
  } else {
    warnings.push_back("rate exponent unavailable: kernel regularity gamma = " + fmt_double(g) +
                       " is outside (0, 1/2) or beta is exploratory");
  }
  v.warnings = std::move(warnings);
  v.canonical = canonical_config(out);
  v.run_id = fnv1a(v.canonical);
  return v;
}

}  // namespace mfl
