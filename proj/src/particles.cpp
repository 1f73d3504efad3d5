#include "mfl/particles.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include "mfl/rng.hpp"
#include "mfl/spectral.hpp"

namespace mfl {

SigmaTable SigmaTable::scalar(int d, double s) {
  SigmaTable tab;
  tab.d = d;
  tab.t = {0.0};
  tab.m = {{s, 0.0, 0.0, d == 2 ? s : 0.0}};
  return tab;
}

const std::array<double, 4>& SigmaTable::value(double time) const {
  std::size_t i = 0;
  while (i + 1 < t.size() && time >= t[i + 1]) ++i;
  return m[i];
}

bool SigmaTable::is_zero() const {
  for (const auto& mat : m)
    for (double v : mat)
      if (v != 0.0) return false;
  return true;
}

double SigmaTable::bound() const {
  double b = 0.0;
  for (const auto& mat : m)
    for (double v : mat) b = std::max(b, std::abs(v));
  return b;
}

std::string SigmaTable::tag() const {
  if (is_zero()) return "0";
  if (m.size() == 1 && m[0][1] == 0.0 && m[0][2] == 0.0 && (d == 1 || m[0][0] == m[0][3])) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", m[0][0]);
    return buf;
  }
  return "table";
}

namespace {

std::uint64_t fnv1a(const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

NoisePath simulate_noise_path(const SigmaTable& sigma, double dt, int steps, std::uint64_t seed,
                              std::uint32_t replica) {
  if (!(dt > 0.0) || steps < 0) throw std::invalid_argument("simulate_noise_path: bad dt/steps");
  const int d = sigma.d;
  NoisePath path;
  path.dt = dt;
  path.steps = steps;
  path.d = d;
  path.dB.resize(static_cast<std::size_t>(steps) * d);
  path.Y.assign(static_cast<std::size_t>(steps + 1) * d, 0.0);
  const double root_dt = std::sqrt(dt);
  const std::uint64_t stream = rng::stream_id(rng::Purpose::CommonNoise, replica, 0);
  for (int n = 0; n < steps; ++n) {
    double z0, z1;
    rng::normal_pair(seed, stream, static_cast<std::uint64_t>(n), z0, z1);
    path.dB[static_cast<std::size_t>(n) * d] = root_dt * z0;
    if (d == 2) path.dB[static_cast<std::size_t>(n) * d + 1] = root_dt * z1;
    const auto& s = sigma.value(n * dt);
    for (int a = 0; a < d; ++a) {
      double inc = 0.0;
      for (int b = 0; b < d; ++b) inc += s[a * 2 + b] * path.dB[static_cast<std::size_t>(n) * d + b];
      path.Y[static_cast<std::size_t>(n + 1) * d + a] = path.Y[static_cast<std::size_t>(n) * d + a] + inc;
    }
  }
  path.hash = fnv1a(path.dB.data(), path.dB.size() * sizeof(double));
  return path;
}

void validate(const RhoZero& r) {
  if (r.d != 1 && r.d != 2) throw std::invalid_argument("rho0 dimension must be 1 or 2");
  if (!(r.peak_dev() <= 0.9))
    throw std::invalid_argument("rho0 amplitude too large: peak deviation " +
                                std::to_string(r.peak_dev()) + " > 0.9 breaks the positivity band");
}

double RhoZero::density(const double* x) const {
  const double two_pi = 2.0 * std::numbers::pi;
  if (product_form) {
    double prod = 1.0;
    for (int j = 0; j < d; ++j) prod *= std::cos(two_pi * x[j]);
    return 1.0 + a * prod;
  }
  double sum = 0.0;
  for (int j = 0; j < d; ++j) sum += std::cos(two_pi * x[j]);
  return 1.0 + a * sum;
}

Field rho0_field(const RhoZero& r, const TorusGrid& g) {
  validate(r);
  if (r.d != g.d) throw std::invalid_argument("rho0_field: grid dimension mismatch");
  Field f(g);
  if (g.d == 1) {
    for (int j = 0; j < g.M; ++j) {
      double x = g.node(j);
      f.at(j) = r.density(&x);
    }
  } else {
    for (int i = 0; i < g.M; ++i)
      for (int j = 0; j < g.M; ++j) {
        double x[2] = {g.node(i), g.node(j)};
        f.at(i, j) = r.density(x);
      }
  }
  return f;
}

namespace {

// Inverse of F(x) = x + 1/2 + (a/2pi) sin(2pi x) on [-1/2, 1/2): safeguarded
// Newton (the density 1 + a cos is the derivative and stays >= 1 - |a| > 0).
double invert_cdf_1d(double u, double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double lo = -0.5, hi = 0.5;
  double x = u - 0.5;
  for (int it = 0; it < 200; ++it) {
    double f = x + 0.5 + a / two_pi * std::sin(two_pi * x) - u;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    // The density (= derivative) is >= 1 - |a|, so |x - root| <= |f| / (1-|a|):
    // stopping on tiny f already pins the root to full precision.
    if (std::abs(f) < 1e-16 || hi - lo < 1e-16) break;
    double fp = 1.0 + a * std::cos(two_pi * x);
    double next = x - f / fp;
    x = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
  }
  return wrap(x);
}

}  // namespace

ParticleEnsemble sample_initial(const RhoZero& r, std::int64_t N, const MollifierParams& p,
                                std::uint64_t seed, std::uint32_t replica) {
  validate(r);
  validate(p);
  if (N < 2) throw std::invalid_argument("sample_initial: N >= 2 required");
  if (r.d != p.d) throw std::invalid_argument("sample_initial: rho0/mollifier dimension mismatch");
  ParticleEnsemble ens;
  ens.d = r.d;
  ens.N = N;
  ens.moll = p;
  ens.seed = seed;
  ens.replica = replica;
  ens.x.resize(static_cast<std::size_t>(N) * r.d);
  const double envelope = 1.0 + r.peak_dev();
  for (std::int64_t i = 0; i < N; ++i) {
    const std::uint64_t stream =
        rng::stream_id(rng::Purpose::InitialSample, replica, static_cast<std::uint64_t>(i));
    if (r.d == 1) {
      double u = rng::uniform(seed, stream, 0, 0);
      ens.x[static_cast<std::size_t>(i)] = invert_cdf_1d(u, r.a);
    } else {
      // Rejection under the flat envelope; two counter steps per trial give
      // the three uniforms a trial needs.
      for (std::uint64_t trial = 0;; ++trial) {
        // uniform() lands in (0,1]; shifting gives (-1/2, 1/2] and wrap folds
        // the single boundary point back to -1/2.
        double x[2] = {wrap(rng::uniform(seed, stream, 2 * trial, 0) - 0.5),
                       wrap(rng::uniform(seed, stream, 2 * trial, 1) - 0.5)};
        double accept = rng::uniform(seed, stream, 2 * trial + 1, 0);
        if (accept * envelope <= r.density(x)) {
          ens.x[static_cast<std::size_t>(i) * 2] = x[0];
          ens.x[static_cast<std::size_t>(i) * 2 + 1] = x[1];
          break;
        }
        if (trial > 10000) throw std::runtime_error("rejection sampler failed to accept");
      }
    }
  }
  return ens;
}

std::vector<double> drift_direct(const ParticleEnsemble& ens, const std::vector<Field>& table,
                                 Interp scheme) {
  const int d = ens.d;
  if (static_cast<int>(table.size()) != d)
    throw std::invalid_argument("drift_direct: table component count mismatch");
  std::vector<double> vel(static_cast<std::size_t>(ens.N) * d, 0.0);
  const double invN = 1.0 / static_cast<double>(ens.N);
  for (std::int64_t i = 0; i < ens.N; ++i) {
    double acc[2] = {0.0, 0.0};
    for (std::int64_t k = 0; k < ens.N; ++k) {
      double diff[2];
      for (int a = 0; a < d; ++a)
        diff[a] = wrap(ens.x[static_cast<std::size_t>(i) * d + a] -
                       ens.x[static_cast<std::size_t>(k) * d + a]);
      for (int a = 0; a < d; ++a) acc[a] += interpolate(table[a], diff, scheme);
    }
    for (int a = 0; a < d; ++a) vel[static_cast<std::size_t>(i) * d + a] = acc[a] * invN;
  }
  return vel;
}

std::vector<double> drift_mesh(const ParticleEnsemble& ens, const std::vector<Field>& table,
                               Interp scheme) {
  const int d = ens.d;
  if (static_cast<int>(table.size()) != d)
    throw std::invalid_argument("drift_mesh: table component count mismatch");
  Field dep = deposit(ens.x, ens.N, table[0].grid);
  std::vector<double> vel(static_cast<std::size_t>(ens.N) * d);
  for (int a = 0; a < d; ++a) {
    Field conv = convolve(table[a], dep);
    for (std::int64_t i = 0; i < ens.N; ++i)
      vel[static_cast<std::size_t>(i) * d + a] =
          interpolate(conv, &ens.x[static_cast<std::size_t>(i) * d], scheme);
  }
  return vel;
}

void em_step(ParticleEnsemble& ens, double dt, std::span<const double> vel, std::uint64_t step,
             const double* sigma_dB) {
  if (!(dt > 0.0)) throw std::invalid_argument("em_step: dt must be positive");
  if (static_cast<std::int64_t>(vel.size()) != ens.N * ens.d)
    throw std::invalid_argument("em_step: velocity array size mismatch");
  const double root_dt = std::sqrt(dt);
  const int d = ens.d;
  for (std::int64_t i = 0; i < ens.N; ++i) {
    const std::uint64_t stream =
        rng::stream_id(rng::Purpose::Idiosyncratic, ens.replica, static_cast<std::uint64_t>(i));
    double z0, z1;
    rng::normal_pair(ens.seed, stream, step, z0, z1);
    const double dW[2] = {root_dt * z0, root_dt * z1};
    for (int a = 0; a < d; ++a) {
      double& xa = ens.x[static_cast<std::size_t>(i) * d + a];
      double move = vel[static_cast<std::size_t>(i) * d + a] * dt + dW[a];
      if (sigma_dB) move += sigma_dB[a];
      xa = wrap(xa + move);
    }
  }
}

Field mollified_density(const ParticleEnsemble& ens, const TorusGrid& g) {
  Field dep = deposit(ens.x, ens.N, g);
  Field vn = vN_field(g, ens.moll);
  Field rho = convolve(dep, vn);
  double mass = integrate(rho);
  for (double& v : rho.v) v /= mass;
  return rho;
}

}  // namespace mfl
