#include "mfl/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfl/spectral.hpp"

namespace mfl {
namespace {

constexpr double kLogFloorRel = 1e-12;
constexpr double kMassTol = 1e-8;

void require_unit_mass(const Field& f, const char* who) {
  const double m = integrate(f);
  if (std::abs(m - 1.0) > kMassTol)
    throw std::domain_error(std::string(who) + ": input mass " + std::to_string(m) +
                            " differs from 1 by more than 1e-8");
}

Field normalized(const Field& f) {
  Field out = f;
  const double m = integrate(f);
  for (double& v : out.v) v /= m;
  return out;
}

// Node masses of the discretized measure: nonnegative, total exactly 1.
std::vector<double> node_masses(const Field& f) {
  std::vector<double> w(f.v.size());
  double tot = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = std::max(0.0, f.v[j]);
    tot += w[j];
  }
  if (tot <= 0.0) throw std::domain_error("bounded_lipschitz: measure has no positive mass");
  for (double& v : w) v /= tot;
  return w;
}

std::vector<double> deposited_masses(std::span<const double> pts, std::int64_t n,
                                     const TorusGrid& g) {
  Field dep = deposit(pts, n, g);
  std::vector<double> w(dep.v.size());
  const double hd = std::pow(g.h(), g.d);
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = dep.v[j] * hd;
  return w;
}

// Characteristic coefficients c_k = sum_j w_j exp(-2 pi i k.x_j) for the low
// frequencies used by the lower bound. Axis tables keep this O(kmax M^d).
struct CharTable {
  int kmax = 0;
  int d = 1;
  std::vector<std::complex<double>> c;  // d=1: index k-1; d=2: (k1+kmax) * (kmax+1) + k2

  std::complex<double> at(int k1, int k2) const {
    if (d == 1) return c[static_cast<std::size_t>(k1 - 1)];
    return c[static_cast<std::size_t>((k1 + kmax) * (kmax + 1) + k2)];
  }
};

CharTable char_coeffs_masses(const std::vector<double>& w, const TorusGrid& g, int kmax) {
  using cplx = std::complex<double>;
  const int M = g.M;
  const double two_pi = 2.0 * std::numbers::pi_v<double>;
  std::vector<std::vector<cplx>> axis(static_cast<std::size_t>(2 * kmax + 1));
  for (int k = -kmax; k <= kmax; ++k) {
    auto& row = axis[static_cast<std::size_t>(k + kmax)];
    row.resize(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) row[static_cast<std::size_t>(j)] = std::polar(1.0, -two_pi * k * g.node(j));
  }
  CharTable t;
  t.kmax = kmax;
  t.d = g.d;
  if (g.d == 1) {
    t.c.resize(static_cast<std::size_t>(kmax));
    for (int k = 1; k <= kmax; ++k) {
      cplx s = 0.0;
      const auto& row = axis[static_cast<std::size_t>(k + kmax)];
      for (int j = 0; j < M; ++j) s += w[static_cast<std::size_t>(j)] * row[static_cast<std::size_t>(j)];
      t.c[static_cast<std::size_t>(k - 1)] = s;
    }
    return t;
  }
  // Contract the second axis first, then the first.
  t.c.assign(static_cast<std::size_t>((2 * kmax + 1) * (kmax + 1)), cplx(0.0));
  std::vector<std::vector<cplx>> partial(static_cast<std::size_t>(kmax + 1));
  for (int k2 = 0; k2 <= kmax; ++k2) {
    auto& p = partial[static_cast<std::size_t>(k2)];
    p.assign(static_cast<std::size_t>(M), cplx(0.0));
    const auto& row2 = axis[static_cast<std::size_t>(k2 + kmax)];
    for (int j1 = 0; j1 < M; ++j1) {
      cplx s = 0.0;
      const double* wrow = w.data() + static_cast<std::size_t>(j1) * static_cast<std::size_t>(M);
      for (int j2 = 0; j2 < M; ++j2) s += wrow[j2] * row2[static_cast<std::size_t>(j2)];
      p[static_cast<std::size_t>(j1)] = s;
    }
  }
  for (int k1 = -kmax; k1 <= kmax; ++k1) {
    const auto& row1 = axis[static_cast<std::size_t>(k1 + kmax)];
    for (int k2 = 0; k2 <= kmax; ++k2) {
      cplx s = 0.0;
      const auto& p = partial[static_cast<std::size_t>(k2)];
      for (int j1 = 0; j1 < M; ++j1) s += row1[static_cast<std::size_t>(j1)] * p[static_cast<std::size_t>(j1)];
      t.c[static_cast<std::size_t>((k1 + kmax) * (kmax + 1) + k2)] = s;
    }
  }
  return t;
}

CharTable char_coeffs_points(std::span<const double> pts, std::int64_t n, int d, int kmax) {
  using cplx = std::complex<double>;
  const double two_pi = 2.0 * std::numbers::pi_v<double>;
  CharTable t;
  t.kmax = kmax;
  t.d = d;
  if (d == 1) {
    t.c.assign(static_cast<std::size_t>(kmax), cplx(0.0));
    for (std::int64_t i = 0; i < n; ++i)
      for (int k = 1; k <= kmax; ++k)
        t.c[static_cast<std::size_t>(k - 1)] += std::polar(1.0, -two_pi * k * pts[static_cast<std::size_t>(i)]);
  } else {
    t.c.assign(static_cast<std::size_t>((2 * kmax + 1) * (kmax + 1)), cplx(0.0));
    for (std::int64_t i = 0; i < n; ++i) {
      const double x1 = pts[static_cast<std::size_t>(2 * i)];
      const double x2 = pts[static_cast<std::size_t>(2 * i + 1)];
      for (int k1 = -kmax; k1 <= kmax; ++k1)
        for (int k2 = 0; k2 <= kmax; ++k2)
          t.c[static_cast<std::size_t>((k1 + kmax) * (kmax + 1) + k2)] +=
              std::polar(1.0, -two_pi * (k1 * x1 + k2 * x2));
    }
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& v : t.c) v *= inv;
  return t;
}

// phi_k(x) = Re(e^{i psi} e^{2 pi i k.x}) / (2 pi |k|_2) satisfies
// ||phi||_inf <= 1 and Lip(phi) <= 1, so |c_k(mu) - c_k(nu)| / (2 pi |k|_2)
// is a certified lower bound of the dual norm.
double char_lower(const CharTable& a, const CharTable& b) {
  const double two_pi = 2.0 * std::numbers::pi_v<double>;
  double best = 0.0;
  if (a.d == 1) {
    for (int k = 1; k <= a.kmax; ++k)
      best = std::max(best, std::abs(a.at(k, 0) - b.at(k, 0)) / (two_pi * k));
    return best;
  }
  for (int k1 = -a.kmax; k1 <= a.kmax; ++k1)
    for (int k2 = 0; k2 <= a.kmax; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;  // k = 0 and conjugate duplicates
      const double nk = std::hypot(static_cast<double>(k1), static_cast<double>(k2));
      best = std::max(best, std::abs(a.at(k1, k2) - b.at(k1, k2)) / (two_pi * nk));
    }
  return best;
}

// Exact 1d optimal transport on the circle: the cumulative mass difference
// D_j, shifted by its median, integrates to the geodesic W1 cost.
double ot_upper_1d(const std::vector<double>& wa, const std::vector<double>& wb, double h) {
  const std::size_t M = wa.size();
  std::vector<double> D(M);
  double run = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    run += wa[j] - wb[j];
    D[j] = run;
  }
  std::vector<double> sorted = D;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(M / 2), sorted.end());
  const double med = sorted[M / 2];
  double cost = 0.0;
  for (std::size_t j = 0; j < M; ++j) cost += std::abs(D[j] - med);
  return std::min(2.0, cost * h);
}

void mat_mul(int M, const std::vector<double>& A, const std::vector<double>& B,
             std::vector<double>& C) {
  C.assign(static_cast<std::size_t>(M) * static_cast<std::size_t>(M), 0.0);
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < M; ++k) {
      const double a = A[static_cast<std::size_t>(i) * M + static_cast<std::size_t>(k)];
      if (a == 0.0) continue;
      const double* brow = B.data() + static_cast<std::size_t>(k) * M;
      double* crow = C.data() + static_cast<std::size_t>(i) * M;
      for (int j = 0; j < M; ++j) crow[j] += a * brow[j];
    }
}

// Entropic transport with the separable geodesic-L1 cost, rounded to a plan
// with exact marginals, so the reported cost upper-bounds the discrete W1.
double ot_upper_2d(const std::vector<double>& wa, const std::vector<double>& wb,
                   const TorusGrid& g) {
  const int M = g.M;
  const std::size_t n2 = static_cast<std::size_t>(M) * static_cast<std::size_t>(M);
  const double h = g.h();
  const double eps = std::max(2.0 * h, 0.02);

  std::vector<double> C1(n2), G(n2), GC(n2);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      const double delta = std::abs(g.node(a) - g.node(b));
      const double dist = std::min(delta, 1.0 - delta);
      C1[static_cast<std::size_t>(a) * M + static_cast<std::size_t>(b)] = dist;
      G[static_cast<std::size_t>(a) * M + static_cast<std::size_t>(b)] = std::exp(-2.0 * dist / eps);
      GC[static_cast<std::size_t>(a) * M + static_cast<std::size_t>(b)] = std::exp(-2.0 * dist / eps) * dist;
    }

  std::vector<double> U(n2, 1.0), V(n2, 1.0), T(n2), S(n2);
  auto sandwich = [&](const std::vector<double>& X, std::vector<double>& out) {
    mat_mul(M, G, X, T);
    mat_mul(M, T, G, out);
  };

  double err = 1.0;
  for (int it = 0; it < 300 && err > 1e-12; ++it) {
    sandwich(V, S);
    for (std::size_t j = 0; j < n2; ++j) U[j] = (wa[j] == 0.0) ? 0.0 : wa[j] / S[j];
    sandwich(U, S);
    err = 0.0;
    for (std::size_t j = 0; j < n2; ++j) {
      const double vnew = (wb[j] == 0.0) ? 0.0 : wb[j] / S[j];
      err += std::abs(V[j] * S[j] - wb[j]);
      V[j] = vnew;
    }
  }

  // Round to feasible: scale rows then columns down to their targets, then
  // patch the leftover mass with the rank-one completion.
  sandwich(V, S);
  for (std::size_t j = 0; j < n2; ++j) {
    const double r = U[j] * S[j];
    if (r > wa[j] && r > 0.0) U[j] *= wa[j] / r;
  }
  sandwich(U, S);
  for (std::size_t j = 0; j < n2; ++j) {
    const double c = V[j] * S[j];
    if (c > wb[j] && c > 0.0) V[j] *= wb[j] / c;
  }

  std::vector<double> era(n2), erb(n2);
  sandwich(V, S);
  double missing = 0.0;
  for (std::size_t j = 0; j < n2; ++j) {
    era[j] = std::max(0.0, wa[j] - U[j] * S[j]);
    missing += era[j];
  }
  sandwich(U, S);
  for (std::size_t j = 0; j < n2; ++j) erb[j] = std::max(0.0, wb[j] - V[j] * S[j]);

  // <P, C> for C = C1 (+) C1 via two sandwich contractions.
  double cost = 0.0;
  mat_mul(M, GC, V, T);
  mat_mul(M, T, G, S);
  for (std::size_t j = 0; j < n2; ++j) cost += U[j] * S[j];
  mat_mul(M, G, V, T);
  mat_mul(M, T, GC, S);
  for (std::size_t j = 0; j < n2; ++j) cost += U[j] * S[j];

  if (missing > 1e-300) {
    // Rank-one remainder: contract the axis marginals of the two residues.
    std::vector<double> a1(static_cast<std::size_t>(M), 0.0), a2(static_cast<std::size_t>(M), 0.0);
    std::vector<double> b1(static_cast<std::size_t>(M), 0.0), b2(static_cast<std::size_t>(M), 0.0);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        a1[static_cast<std::size_t>(i)] += era[static_cast<std::size_t>(i) * M + static_cast<std::size_t>(j)];
        a2[static_cast<std::size_t>(j)] += era[static_cast<std::size_t>(i) * M + static_cast<std::size_t>(j)];
        b1[static_cast<std::size_t>(i)] += erb[static_cast<std::size_t>(i) * M + static_cast<std::size_t>(j)];
        b2[static_cast<std::size_t>(j)] += erb[static_cast<std::size_t>(i) * M + static_cast<std::size_t>(j)];
      }
    double extra = 0.0;
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b) {
        const double c1 = C1[static_cast<std::size_t>(a) * M + static_cast<std::size_t>(b)];
        extra += a1[static_cast<std::size_t>(a)] * b1[static_cast<std::size_t>(b)] * c1 +
                 a2[static_cast<std::size_t>(a)] * b2[static_cast<std::size_t>(b)] * c1;
      }
    cost += extra / missing;
  }
  return std::min(2.0, cost);
}

double ot_upper(const std::vector<double>& wa, const std::vector<double>& wb, const TorusGrid& g) {
  return g.d == 1 ? ot_upper_1d(wa, wb, g.h()) : ot_upper_2d(wa, wb, g);
}

int lower_kmax(int d) { return d == 1 ? 8 : 4; }

}  // namespace

EntropyValue relative_entropy(const Field& f, const Field& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("relative_entropy: grid mismatch");
  require_unit_mass(f, "relative_entropy");
  require_unit_mass(g, "relative_entropy");
  const Field fn = normalized(f), gn = normalized(g);
  const double floor = kLogFloorRel;  // both means are 1 after normalization
  EntropyValue out;
  double acc = 0.0;
  for (std::size_t j = 0; j < fn.v.size(); ++j) {
    double a = fn.v[j], b = gn.v[j];
    if (a < floor) {
      a = floor;
      ++out.clamps;
    }
    if (b < floor) {
      b = floor;
      ++out.clamps;
    }
    acc += fn.v[j] * (std::log(a) - std::log(b));
  }
  out.value = acc * std::pow(f.grid.h(), f.grid.d);
  return out;
}

EntropyValue fisher_information(const Field& f, const Field& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("fisher_information: grid mismatch");
  require_unit_mass(f, "fisher_information");
  require_unit_mass(g, "fisher_information");
  const Field fn = normalized(f), gn = normalized(g);
  const double floor = kLogFloorRel;
  const auto gf = spectral_gradient(fn);
  const auto gg = spectral_gradient(gn);
  EntropyValue out;
  double acc = 0.0;
  for (std::size_t j = 0; j < fn.v.size(); ++j) {
    double a = fn.v[j], b = gn.v[j];
    if (a < floor) {
      a = floor;
      ++out.clamps;
    }
    if (b < floor) {
      b = floor;
      ++out.clamps;
    }
    double s = 0.0;
    for (int ax = 0; ax < f.grid.d; ++ax) {
      const double u = gf[static_cast<std::size_t>(ax)].v[j] / a - gg[static_cast<std::size_t>(ax)].v[j] / b;
      s += u * u;
    }
    acc += fn.v[j] * s;
  }
  out.value = acc * std::pow(f.grid.h(), f.grid.d);
  return out;
}

double l1_distance(const Field& f, const Field& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("l1_distance: grid mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < f.v.size(); ++j) acc += std::abs(f.v[j] - g.v[j]);
  return acc * std::pow(f.grid.h(), f.grid.d);
}

BLBracket bounded_lipschitz(const Field& mu, const Field& nu) {
  if (!(mu.grid == nu.grid)) throw std::invalid_argument("bounded_lipschitz: grid mismatch");
  const auto wa = node_masses(mu), wb = node_masses(nu);
  const int kmax = lower_kmax(mu.grid.d);
  BLBracket out;
  out.lower = char_lower(char_coeffs_masses(wa, mu.grid, kmax), char_coeffs_masses(wb, mu.grid, kmax));
  out.upper = ot_upper(wa, wb, mu.grid);
  return out;
}

BLBracket bounded_lipschitz(std::span<const double> pts, std::int64_t n, const Field& nu) {
  const auto wa = deposited_masses(pts, n, nu.grid);
  const auto wb = node_masses(nu);
  const int kmax = lower_kmax(nu.grid.d);
  BLBracket out;
  out.lower = char_lower(char_coeffs_points(pts, n, nu.grid.d, kmax),
                         char_coeffs_masses(wb, nu.grid, kmax));
  // Depositing the atoms moves each by at most h per axis; the allowance
  // keeps the rounded transport cost an upper bound for the original pair.
  out.upper = std::min(2.0, ot_upper(wa, wb, nu.grid) + nu.grid.d * nu.grid.h());
  return out;
}

BLBracket bounded_lipschitz(std::span<const double> pts_a, std::int64_t na,
                            std::span<const double> pts_b, std::int64_t nb, const TorusGrid& g) {
  const auto wa = deposited_masses(pts_a, na, g);
  const auto wb = deposited_masses(pts_b, nb, g);
  const int kmax = lower_kmax(g.d);
  BLBracket out;
  out.lower = char_lower(char_coeffs_points(pts_a, na, g.d, kmax),
                         char_coeffs_points(pts_b, nb, g.d, kmax));
  out.upper = std::min(2.0, ot_upper(wa, wb, g) + 2.0 * g.d * g.h());
  return out;
}

ThetaBreakdown theta(double beta, double gamma, int d, double delta) {
  if (d != 1 && d != 2) throw std::domain_error("theta: d must be 1 or 2");
  if (!(gamma > 0.0 && gamma < 0.5))
    throw std::domain_error("theta: gamma must lie in (0, 1/2), got " + std::to_string(gamma));
  const double beta_max = 0.5 / (1.0 + 1.0 / d);
  if (!(beta > 0.0 && beta < beta_max))
    throw std::domain_error("theta: beta must lie in (0, " + std::to_string(beta_max) +
                            ") for d = " + std::to_string(d) + ", got " + std::to_string(beta));
  if (delta < 0.0) throw std::domain_error("theta: delta must be >= 0");
  ThetaBreakdown out;
  out.theta1 = beta * (1.0 - 2.0 * gamma);
  out.theta2 = (beta / d) * gamma * gamma;
  out.theta3 = 0.5 - beta * (1.0 + 1.0 / d);
  out.value = std::min({out.theta1, out.theta2, out.theta3}) - delta;
  if (out.value <= 0.0)
    throw std::domain_error("theta: delta = " + std::to_string(delta) +
                            " consumes the entire rate min(theta1, theta2, theta3) = " +
                            std::to_string(out.value + delta));
  return out;
}

OptimalBeta optimal_beta(double gamma, int d) {
  if (d != 1 && d != 2) throw std::domain_error("optimal_beta: d must be 1 or 2");
  if (!(gamma > 0.0 && gamma < 0.5))
    throw std::domain_error("optimal_beta: gamma must lie in (0, 1/2), got " + std::to_string(gamma));
  const double a = std::min(1.0 - 2.0 * gamma, gamma * gamma / d);
  OptimalBeta out;
  out.beta_star = 0.5 / ((1.0 + 1.0 / d) + a);
  out.theta_star = a * out.beta_star;
  return out;
}

void EntropyTrace::push(double t, double h, double i, double l1, BLBracket bl, std::int64_t cl) {
  times.push_back(t);
  H.push_back(h);
  I.push_back(i);
  L1.push_back(l1);
  BL_lo.push_back(bl.lower);
  BL_hi.push_back(bl.upper);
  clamps.push_back(cl);
}

double EntropyTrace::sup_H() const {
  double m = 0.0;
  for (double v : H) m = std::max(m, v);
  return m;
}

double EntropyTrace::max_L1() const {
  double m = 0.0;
  for (double v : L1) m = std::max(m, v);
  return m;
}

std::int64_t EntropyTrace::total_clamps() const {
  std::int64_t s = 0;
  for (auto c : clamps) s += c;
  return s;
}

}  // namespace mfl
