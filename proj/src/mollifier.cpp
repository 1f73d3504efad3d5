#include "mfl/mollifier.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mfl {

namespace {

double cd(int d) { return d == 1 ? 0.5 : 0.5 / std::numbers::pi_v<double>; }

// Unnormalized radial profile (without C_d / Z_d).
inline double profile(double r2) {
  return r2 <= 0.25 ? std::exp(-r2) : std::exp(0.25 - std::sqrt(r2));
}

double adaptive_simpson(double (*f)(double, int), int d, double a, double b, double fa, double fm,
                        double fb, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm, d), frm = f(rm, d);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, d, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, d, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double z_integrand(double r, int d) {
  double p = cd(d) * profile(r * r);
  if (d == 1) return 2.0 * p;                                // two half-lines
  return 2.0 * std::numbers::pi_v<double> * r * p;           // polar measure
}

double quad(double a, double b, int d, double tol) {
  return adaptive_simpson(z_integrand, d, a, b, z_integrand(a, d),
                          z_integrand(0.5 * (a + b), d), z_integrand(b, d), tol, 48);
}

}  // namespace

double mollifier_normalizer(int d) {
  if (d != 1 && d != 2) throw std::invalid_argument("mollifier dimension must be 1 or 2");
  // Split at the branch point; beyond r = 60 the tail is below 1e-26.
  static const double z1 = quad(0.0, 0.5, 1, 1e-14) + quad(0.5, 60.0, 1, 1e-14);
  static const double z2 = quad(0.0, 0.5, 2, 1e-14) + quad(0.5, 60.0, 2, 1e-14);
  return d == 1 ? z1 : z2;
}

void validate(const MollifierParams& p) {
  if (p.d != 1 && p.d != 2) throw std::invalid_argument("mollifier dimension must be 1 or 2");
  if (p.N < 2) throw std::invalid_argument("mollifier needs N >= 2, got " + std::to_string(p.N));
  double beta_max = 0.5 / (1.0 + 1.0 / p.d);
  if (p.exploratory) beta_max = 1.0;
  if (!(p.beta > 0.0 && p.beta < beta_max))
    throw std::invalid_argument("beta = " + std::to_string(p.beta) + " outside (0, " +
                                std::to_string(beta_max) + ") for d = " + std::to_string(p.d) +
                                (p.exploratory ? "" : " (set exploratory to relax)"));
  if (p.lattice_radius < 0) throw std::invalid_argument("lattice_radius must be >= 0");
}

double mollifier_scale(const MollifierParams& p) {
  return std::pow(static_cast<double>(p.N), p.beta / p.d);
}

double v0_radial(double r, int d) { return cd(d) / mollifier_normalizer(d) * profile(r * r); }

double v0(const double* y, int d) {
  double r2 = y[0] * y[0];
  if (d == 2) r2 += y[1] * y[1];
  return cd(d) / mollifier_normalizer(d) * profile(r2);
}

double v0_peak(int d) { return cd(d) / mollifier_normalizer(d); }

void grad_v0(const double* y, int d, double* grad) {
  double r2 = y[0] * y[0];
  if (d == 2) r2 += y[1] * y[1];
  double p = cd(d) / mollifier_normalizer(d) * profile(r2);
  if (r2 <= 0.25) {
    for (int a = 0; a < d; ++a) grad[a] = -2.0 * y[a] * p;
  } else {
    double r = std::sqrt(r2);
    for (int a = 0; a < d; ++a) grad[a] = -(y[a] / r) * p;
  }
}

int auto_lattice_radius(double s, int d) {
  if (!(s > 0.0)) throw std::invalid_argument("mollifier scale must be positive");
  // Every discarded image with |k|_inf = m lies at scaled distance at least
  // s(m - 1/2), where the profile is below e^{1/4 - s(m - 1/2)}. Grow R until
  // the whole discarded tail (shell counts 2 resp. 8m) is < 1e-15 in units
  // of the N^beta amplitude.
  const double cz = cd(d) / mollifier_normalizer(d);
  for (int R = 2; R <= 4096; ++R) {
    double tail = 0.0;
    for (int m = R + 1;; ++m) {
      double count = (d == 1) ? 2.0 : 8.0 * m;
      double term = count * cz * std::exp(0.25 - s * (m - 0.5));
      tail += term;
      if (term < 1e-30) break;
    }
    if (tail < 1e-15) return R;
  }
  throw std::invalid_argument("mollifier scale too small to truncate the periodization");
}

int required_M(const MollifierParams& p) {
  return static_cast<int>(std::ceil(8.0 * mollifier_scale(p)));
}

namespace {

struct LatticeSum {
  double s, amp, cz;
  int R;
  LatticeSum(const MollifierParams& p) {
    validate(p);
    s = mollifier_scale(p);
    amp = std::pow(static_cast<double>(p.N), p.beta);
    cz = cd(p.d) / mollifier_normalizer(p.d);
    R = p.lattice_radius > 0 ? p.lattice_radius : auto_lattice_radius(s, p.d);
  }
};

// Terms with squared scaled distance beyond this are < 1e-19 and are skipped.
constexpr double kR2Cut = 1900.0;

}  // namespace

double vn_point(const double* x, const MollifierParams& p) {
  LatticeSum ls(p);
  double acc = 0.0;
  if (p.d == 1) {
    for (int k = -ls.R; k <= ls.R; ++k) {
      double u = ls.s * (x[0] + k);
      double r2 = u * u;
      if (r2 < kR2Cut) acc += profile(r2);
    }
  } else {
    for (int k1 = -ls.R; k1 <= ls.R; ++k1) {
      double u1 = ls.s * (x[0] + k1);
      double a = u1 * u1;
      if (a >= kR2Cut) continue;
      for (int k2 = -ls.R; k2 <= ls.R; ++k2) {
        double u2 = ls.s * (x[1] + k2);
        double r2 = a + u2 * u2;
        if (r2 < kR2Cut) acc += profile(r2);
      }
    }
  }
  return ls.amp * ls.cz * acc;
}

Field vN_field(const TorusGrid& g, const MollifierParams& p) {
  LatticeSum ls(p);
  if (g.d != p.d) throw std::invalid_argument("vN_field: grid dimension mismatch");
  if (g.M < required_M(p))
    throw std::invalid_argument("resolution rule M >= 8 N^(beta/d) violated: need M >= " +
                                std::to_string(required_M(p)) + ", got " + std::to_string(g.M));
  const int M = g.M, half = M / 2;
  const int nk = 2 * ls.R + 1;
  Field out(g);

  // V^N is even and the node set is reflection-symmetric (node j <-> node
  // M - j), so only the first half is computed; the rest is mirrored, which
  // is exact because the symmetric lattice sum is mathematically even.
  if (p.d == 1) {
    for (int j = 0; j <= half; ++j) {
      double acc = 0.0;
      for (int k = -ls.R; k <= ls.R; ++k) {
        double u = ls.s * (g.node(j) + k);
        double r2 = u * u;
        if (r2 < kR2Cut) acc += profile(r2);
      }
      out.at(j) = ls.amp * ls.cz * acc;
    }
    for (int j = 1; j < half; ++j) out.at(M - j) = out.at(j);
    return out;
  }

  std::vector<double> off2(static_cast<std::size_t>(half + 1) * nk);
  for (int i = 0; i <= half; ++i)
    for (int k = 0; k < nk; ++k) {
      double u = ls.s * (g.node(i) + (k - ls.R));
      off2[static_cast<std::size_t>(i) * nk + k] = u * u;
    }
  for (int i = 0; i <= half; ++i) {
    const double* row1 = &off2[static_cast<std::size_t>(i) * nk];
    for (int j = 0; j <= half; ++j) {
      const double* row2 = &off2[static_cast<std::size_t>(j) * nk];
      double acc = 0.0;
      for (int k1 = 0; k1 < nk; ++k1) {
        double a = row1[k1];
        if (a >= kR2Cut) continue;
        for (int k2 = 0; k2 < nk; ++k2) {
          double r2 = a + row2[k2];
          if (r2 < kR2Cut) acc += profile(r2);
        }
      }
      out.at(i, j) = ls.amp * ls.cz * acc;
    }
  }
  for (int i = 0; i <= half; ++i)
    for (int j = 1; j < half; ++j) out.at(i, M - j) = out.at(i, j);
  for (int i = 1; i < half; ++i)
    for (int j = 0; j < M; ++j) out.at(M - i, j) = out.at(i, j);
  return out;
}

std::vector<Field> grad_vN_field(const TorusGrid& g, const MollifierParams& p) {
  LatticeSum ls(p);
  if (g.d != p.d) throw std::invalid_argument("grad_vN_field: grid dimension mismatch");
  if (g.M < required_M(p))
    throw std::invalid_argument("resolution rule M >= 8 N^(beta/d) violated: need M >= " +
                                std::to_string(required_M(p)) + ", got " + std::to_string(g.M));
  const int M = g.M, half = M / 2;
  // d/dy of v0(s(y+k)) is s * grad_v0 at u = s(y+k): -2u v0 inside, -u/|u| v0
  // outside; the extra factor s comes out of the chain rule.
  const double pref = ls.amp * ls.cz * ls.s;

  if (p.d == 1) {
    Field gx(g);
    for (int j = 0; j <= half; ++j) {
      double acc = 0.0;
      for (int k = -ls.R; k <= ls.R; ++k) {
        double u = ls.s * (g.node(j) + k);
        double r2 = u * u;
        if (r2 >= kR2Cut) continue;
        double pr = profile(r2);
        acc += (r2 <= 0.25) ? -2.0 * u * pr : -(u / std::sqrt(r2)) * pr;
      }
      gx.at(j) = pref * acc;
    }
    // gradient of an even function is odd
    for (int j = 1; j < half; ++j) gx.at(M - j) = -gx.at(j);
    return {gx};
  }

  const int nk = 2 * ls.R + 1;
  std::vector<double> off(static_cast<std::size_t>(half + 1) * nk);
  for (int i = 0; i <= half; ++i)
    for (int k = 0; k < nk; ++k)
      off[static_cast<std::size_t>(i) * nk + k] = ls.s * (g.node(i) + (k - ls.R));
  Field g0(g), g1(g);
  for (int i = 0; i <= half; ++i) {
    const double* row1 = &off[static_cast<std::size_t>(i) * nk];
    for (int j = 0; j <= half; ++j) {
      const double* row2 = &off[static_cast<std::size_t>(j) * nk];
      double a0 = 0.0, a1 = 0.0;
      for (int k1 = 0; k1 < nk; ++k1) {
        double u1 = row1[k1];
        double sq1 = u1 * u1;
        if (sq1 >= kR2Cut) continue;
        for (int k2 = 0; k2 < nk; ++k2) {
          double u2 = row2[k2];
          double r2 = sq1 + u2 * u2;
          if (r2 >= kR2Cut) continue;
          double pr = profile(r2);
          double f = (r2 <= 0.25) ? -2.0 * pr : -pr / std::sqrt(r2);
          a0 += f * u1;
          a1 += f * u2;
        }
      }
      g0.at(i, j) = pref * a0;
      g1.at(i, j) = pref * a1;
    }
  }
  for (int i = 0; i <= half; ++i)
    for (int j = 1; j < half; ++j) {
      g0.at(i, M - j) = g0.at(i, j);
      g1.at(i, M - j) = -g1.at(i, j);
    }
  for (int i = 1; i < half; ++i)
    for (int j = 0; j < M; ++j) {
      g0.at(M - i, j) = -g0.at(i, j);
      g1.at(M - i, j) = g1.at(i, j);
    }
  return {g0, g1};
}

}  // namespace mfl
