#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "mfl/fokker_planck.hpp"
#include "mfl/grid.hpp"
#include "mfl/kernels.hpp"
#include "mfl/particles.hpp"
#include "mfl/rng.hpp"
#include "mfl/spectral.hpp"
#include "oracles.hpp"

using namespace mfl;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

RhoZero cosine_rho(double a, int d) {
  RhoZero r;
  r.a = a;
  r.d = d;
  return r;
}

KernelSpec holder_1d(double strength = 1.0) {
  KernelSpec h;
  h.type = KernelType::HolderAnalytic;
  h.d = 1;
  h.gamma = 0.25;
  h.strength = strength;
  return h;
}

KernelSpec biot_savart() {
  KernelSpec b;
  b.type = KernelType::BiotSavart;
  b.d = 2;
  return b;
}

// The full drift-diffusion right-hand side assembled from first principles:
// 1/2 lap rho - div(rho (K * rho)), every derivative spectral.
Field reference_rhs(const Field& rho, const KernelSpec& spec) {
  auto u = convolve_kernel(spec, rho);
  Field out(rho.grid);
  auto g1 = spectral_gradient(rho);
  for (int a = 0; a < rho.grid.d; ++a) {
    auto g2 = spectral_gradient(g1[a]);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += 0.5 * g2[a].v[i];
    Field flux(rho.grid);
    for (std::size_t i = 0; i < flux.v.size(); ++i) flux.v[i] = rho.v[i] * u[a].v[i];
    auto gf = spectral_gradient(flux);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= gf[a].v[i];
  }
  return out;
}

Field sharp_cosine(const TorusGrid& g, double a) {
  Field f(g);
  for (int i = 0; i < g.M; ++i) f.at(i) = 1.0 + a * std::cos(kTwoPi * g.node(i));
  return f;
}

}  // namespace

TEST_CASE("state construction: exponent checks and initial data") {
  TorusGrid g = make_grid(1, 32);
  CHECK_THROWS_AS(make_fp_state(cosine_rho(0.5, 1), g, 1.5), std::invalid_argument);
  TorusGrid g2 = make_grid(2, 32);
  CHECK_THROWS_AS(make_fp_state(cosine_rho(0.5, 2), g2, 2.0), std::invalid_argument);

  FPState st = make_fp_state(cosine_rho(0.5, 1), g, 4.0);
  CHECK(st.t == 0.0);
  CHECK(st.lambda == 2.0);
  CHECK(st.q == 4.0);
  Field want = rho0_field(cosine_rho(0.5, 1), g);
  CHECK(sup_diff(st.rho, want) == 0.0);
}

TEST_CASE("free evolution matches the heat kernel decay") {
  TorusGrid g = make_grid(1, 64);
  KernelSpec zero;
  zero.d = 1;
  FPSolver solver(g, zero);
  FPState st = make_fp_state(cosine_rho(0.5, 1), g, 4.0);
  const double dt = 1e-3;
  for (int n = 0; n < 50; ++n) solver.step_deterministic(st, dt);
  const double decay = oracle::heat_mode_decay(1, 0.05);
  double worst = 0.0;
  for (int i = 0; i < g.M; ++i)
    worst = std::max(worst, std::abs(st.rho.at(i) - (1.0 + 0.5 * decay * std::cos(kTwoPi * g.node(i)))));
  CHECK(worst < 1e-12);
  CHECK(st.t == doctest::Approx(0.05).epsilon(1e-12));

  TorusGrid gg = make_grid(2, 32);
  KernelSpec zero2;
  zero2.d = 2;
  FPSolver solver2(gg, zero2);
  FPState st2 = make_fp_state(cosine_rho(0.4, 2), gg, 4.0);
  for (int n = 0; n < 20; ++n) solver2.step_deterministic(st2, dt);
  const double decay2 = oracle::heat_mode_decay(1, 0.02) * oracle::heat_mode_decay(1, 0.02);
  double worst2 = 0.0;
  for (int i = 0; i < gg.M; ++i)
    for (int j = 0; j < gg.M; ++j) {
      double want = 1.0 + 0.4 * decay2 * std::cos(kTwoPi * gg.node(i)) * std::cos(kTwoPi * gg.node(j));
      worst2 = std::max(worst2, std::abs(st2.rho.at(i, j) - want));
    }
  CHECK(worst2 < 1e-12);
}

TEST_CASE("the flat density is a fixed point of the nonlinear flow") {
  TorusGrid g = make_grid(2, 32);
  FPSolver solver(g, biot_savart());
  FPState st;
  st.rho = Field(g);
  for (double& v : st.rho.v) v = 1.0;
  st.lambda = 2.0;
  st.q = 4.0;
  for (int n = 0; n < 10; ++n) solver.step_deterministic(st, 1e-3);
  Field flat(g);
  for (double& v : flat.v) v = 1.0;
  CHECK(sup_diff(st.rho, flat) < 1e-13);
}

TEST_CASE("mass, positivity band and Lebesgue-norm decay along the flow") {
  TorusGrid g = make_grid(2, 32);
  FPSolver solver(g, biot_savart());
  FPState st = make_fp_state(cosine_rho(0.5, 2), g, 4.0);
  const double dt = 1e-3;
  double prev_norm = lp_norm(st.rho, 4.0);
  for (int n = 0; n < 50; ++n) {
    solver.step_deterministic(st, dt);
    CHECK(integrate(st.rho) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(field_min(st.rho) >= 1.0 / st.lambda - 1e-6);
    CHECK(field_max(st.rho) <= st.lambda + 1e-6);
    double norm = lp_norm(st.rho, 4.0);
    CHECK(norm <= prev_norm + 1e-8);
    prev_norm = norm;
  }
}

TEST_CASE("one step is first-order consistent with the assembled operator") {
  TorusGrid g = make_grid(1, 64);
  KernelSpec h = holder_1d();
  FPSolver solver(g, h);
  std::vector<double> log_dt, log_res;
  for (double dt : {4e-3, 2e-3, 1e-3, 5e-4}) {
    FPState st = make_fp_state(cosine_rho(0.5, 1), g, 4.0);
    Field before = st.rho;
    solver.step_deterministic(st, dt);
    Field mid(g);
    for (std::size_t i = 0; i < mid.v.size(); ++i) mid.v[i] = 0.5 * (before.v[i] + st.rho.v[i]);
    Field rhs = reference_rhs(mid, h);
    double res = 0.0;
    for (std::size_t i = 0; i < rhs.v.size(); ++i)
      res = std::max(res, std::abs((st.rho.v[i] - before.v[i]) / dt - rhs.v[i]));
    log_dt.push_back(std::log(dt));
    log_res.push_back(std::log(res));
  }
  const double slope = oracle::ls_slope(log_dt, log_res);
  CHECK(slope > 0.9);
  CHECK(slope < 1.1);
}

TEST_CASE("zero diffusion matrix reduces the noisy step to the deterministic one") {
  TorusGrid g = make_grid(2, 32);
  FPSolver solver(g, biot_savart());
  FPState noisy = make_fp_state(cosine_rho(0.5, 2), g, 4.0);
  FPState det = noisy;
  const std::array<double, 4> sigma0 = {0.0, 0.0, 0.0, 0.0};
  const double dB[2] = {0.33, -0.71};
  solver.step_ito(noisy, 1e-3, dB, sigma0);
  solver.step_deterministic(det, 1e-3);
  CHECK(noisy.rho.v == det.rho.v);
  CHECK(noisy.t == det.t);
}

TEST_CASE("noise multiplier closed forms on a single mode") {
  TorusGrid g = make_grid(1, 64);
  KernelSpec zero;
  zero.d = 1;
  const double dt = 1e-3;
  const double sigma_val = 0.3;
  const std::array<double, 4> sigma = {sigma_val, 0.0, 0.0, 0.0};
  const double heat = oracle::heat_mode_decay(1, dt);

  auto run_one = [&](FPOptions::NoiseScheme scheme, double dB) {
    FPOptions opt;
    opt.noise_scheme = scheme;
    FPSolver solver(g, zero, opt);
    FPState st = make_fp_state(cosine_rho(0.5, 1), g, 4.0);
    solver.step_ito(st, dt, &dB, sigma);
    return st;
  };

  const double dB = 0.05;
  const double phi = kTwoPi * sigma_val * dB;

  FPState o1 = run_one(FPOptions::NoiseScheme::Order1, dB);
  double worst = 0.0;
  for (int i = 0; i < g.M; ++i) {
    double want = 1.0 + 0.5 * heat *
                            ((1.0 - 0.5 * phi * phi) * std::cos(kTwoPi * g.node(i)) +
                             phi * std::sin(kTwoPi * g.node(i)));
    worst = std::max(worst, std::abs(o1.rho.at(i) - want));
  }
  CHECK(worst < 1e-13);

  FPState em = run_one(FPOptions::NoiseScheme::EulerMultiplier, dB);
  const double q = 2.0 * std::numbers::pi * std::numbers::pi * sigma_val * sigma_val * dt;
  worst = 0.0;
  for (int i = 0; i < g.M; ++i) {
    double want = 1.0 + 0.5 * heat *
                            ((1.0 - q) * std::cos(kTwoPi * g.node(i)) +
                             phi * std::sin(kTwoPi * g.node(i)));
    worst = std::max(worst, std::abs(em.rho.at(i) - want));
  }
  CHECK(worst < 1e-13);

  // A zero increment carries no first-order term: only the schemes' quadratic
  // corrections remain, which vanishes for the pathwise one (its multiplier
  // degenerates to 1, leaving just an extra transform roundtrip) and leaves
  // the pure damping factor for the textbook one.
  FPState o1_flat = run_one(FPOptions::NoiseScheme::Order1, 0.0);
  FPState det = make_fp_state(cosine_rho(0.5, 1), g, 4.0);
  FPSolver(g, zero).step_deterministic(det, dt);
  CHECK(sup_diff(o1_flat.rho, det.rho) < 1e-15);

  FPState em_flat = run_one(FPOptions::NoiseScheme::EulerMultiplier, 0.0);
  worst = 0.0;
  for (int i = 0; i < g.M; ++i) {
    double want = 1.0 + 0.5 * heat * (1.0 - q) * std::cos(kTwoPi * g.node(i));
    worst = std::max(worst, std::abs(em_flat.rho.at(i) - want));
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("noisy evolution conserves mass pathwise") {
  TorusGrid g = make_grid(1, 64);
  FPSolver solver(g, holder_1d());
  FPState st = make_fp_state(cosine_rho(0.5, 1), g, 4.0);
  const double dt = 1e-3;
  const std::array<double, 4> sigma = {0.3, 0.0, 0.0, 0.0};
  const double root_dt = std::sqrt(dt);
  for (int n = 0; n < 20; ++n) {
    double z0 = 0.0, z1 = 0.0;
    rng::normal_pair(5, rng::stream_id(rng::Purpose::CommonNoise, 0, 0), n, z0, z1);
    double dB = root_dt * z0;
    solver.step_ito(st, dt, &dB, sigma);
    CHECK(integrate(st.rho) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(field_min(st.rho) > 0.0);
  }
}

TEST_CASE("constant-shift reduction: translate, compose, identity") {
  TorusGrid g = make_grid(2, 64);
  Field u(g);
  for (int i = 0; i < g.M; ++i)
    for (int j = 0; j < g.M; ++j)
      u.at(i, j) = 1.0 + 0.3 * std::cos(kTwoPi * g.node(i)) * std::cos(2.0 * kTwoPi * g.node(j));

  const double y[2] = {0.17, -0.31};
  Field shifted = shift_solution(u, y);
  double worst = 0.0;
  for (int i = 0; i < g.M; ++i)
    for (int j = 0; j < g.M; ++j) {
      double want = 1.0 + 0.3 * std::cos(kTwoPi * (g.node(i) - y[0])) *
                              std::cos(2.0 * kTwoPi * (g.node(j) - y[1]));
      worst = std::max(worst, std::abs(shifted.at(i, j) - want));
    }
  CHECK(worst < 1e-12);

  const double z[2] = {-0.05, 0.4};
  const double yz[2] = {y[0] + z[0], y[1] + z[1]};
  Field two_hops = shift_solution(shift_solution(u, y), z);
  CHECK(sup_diff(two_hops, shift_solution(u, yz)) < 1e-12);

  const double none[2] = {0.0, 0.0};
  CHECK(sup_diff(shift_solution(u, none), u) < 1e-14);
}

TEST_CASE("step rejection halves exactly when the density dips negative") {
  TorusGrid g = make_grid(1, 64);

  auto sharp_state = [&]() {
    FPState st;
    st.rho = sharp_cosine(g, 0.9);
    st.lambda = 1000.0;
    st.q = 4.0;
    return st;
  };

  // Strong advection over a long step: a single halving rescues it.
  {
    FPState st = sharp_state();
    FPSolver solver(g, holder_1d(100.0));
    StepReport rep = solver.step_deterministic(st, 0.008);
    CHECK(rep.halvings == 1);
    CHECK(rep.min_density > 0.0);
    CHECK(integrate(st.rho) == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Harder push: two levels deep.
  {
    FPState st = sharp_state();
    FPSolver solver(g, holder_1d(400.0));
    StepReport rep = solver.step_deterministic(st, 0.002);
    CHECK(rep.halvings == 2);
    CHECK(rep.min_density > 0.0);
  }

  // With no halving budget the same step must throw instead.
  {
    FPState st = sharp_state();
    FPOptions strict;
    strict.max_halvings = 0;
    FPSolver solver(g, holder_1d(100.0), strict);
    CHECK_THROWS_AS(solver.step_deterministic(st, 0.008), std::runtime_error);
  }

  // And some steps are beyond any budget.
  {
    FPState st = sharp_state();
    FPSolver solver(g, holder_1d(200.0));
    CHECK_THROWS_AS(solver.step_deterministic(st, 0.008), std::runtime_error);
  }
}

TEST_CASE("argument screening: bad steps and mismatched grids") {
  TorusGrid g = make_grid(1, 32);
  KernelSpec zero;
  zero.d = 1;
  FPSolver solver(g, zero);
  FPState st = make_fp_state(cosine_rho(0.5, 1), g, 4.0);
  CHECK_THROWS_AS(solver.step_deterministic(st, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solver.step_deterministic(st, -1e-3), std::invalid_argument);

  FPState wrong = make_fp_state(cosine_rho(0.5, 1), make_grid(1, 64), 4.0);
  CHECK_THROWS_AS(solver.step_deterministic(wrong, 1e-3), std::invalid_argument);

  FPOptions deep;
  deep.max_halvings = 99;
  CHECK_THROWS_AS(FPSolver(g, zero, deep), std::invalid_argument);
}
