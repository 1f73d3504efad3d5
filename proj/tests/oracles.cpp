#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oracle {
namespace {

constexpr double kPi = std::numbers::pi_v<double>;

double simpson_segment(const std::function<double(double)>& f, double a, double fa, double b,
                       double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double err = left + right - whole;
  if (depth <= 0 || std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
  return simpson_segment(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_segment(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_segment(f, a, fa, b, fb, m, fm, whole, tol, 60);
}

double bump_profile(double r, int d) {
  const double pref = d == 1 ? 0.5 : 1.0 / (2.0 * kPi);
  return pref * (r <= 0.5 ? std::exp(-r * r) : std::exp(0.25 - r));
}

double bump_mass_closed(int d) {
  if (d == 1) return (std::sqrt(kPi) * std::erf(0.5) + 2.0 * std::exp(-0.25)) / 2.0;
  return 0.5 + std::exp(-0.25);
}

double bump_mass_quadrature(int d) {
  if (d == 1) {
    const auto f = [](double r) { return bump_profile(r, 1); };
    return 2.0 * (simpson(f, 0.0, 0.5, 1e-15) + simpson(f, 0.5, 60.0, 1e-15));
  }
  const auto f = [](double r) { return r * bump_profile(r, 2); };
  return 2.0 * kPi * (simpson(f, 0.0, 0.5, 1e-15) + simpson(f, 0.5, 60.0, 1e-15));
}

double entropy_cosine_closed(double a) {
  const double b = std::sqrt(1.0 - a * a);
  return std::log(0.5 * (1.0 + b)) + (1.0 - b);
}

double entropy_cosine_quadrature(double a) {
  const auto f = [a](double x) {
    const double v = 1.0 + a * std::cos(2.0 * kPi * x);
    return v * std::log(v);
  };
  return simpson(f, 0.0, 1.0, 1e-14);
}

double fisher_cosine_quadrature(double a) {
  const auto f = [a](double x) {
    const double s = 2.0 * kPi * a * std::sin(2.0 * kPi * x);
    return s * s / (1.0 + a * std::cos(2.0 * kPi * x));
  };
  return simpson(f, 0.0, 1.0, 1e-13);
}

double fisher_small_a(double a) { return 2.0 * kPi * kPi * a * a; }

double l1_cosine(double a) { return 2.0 * a / kPi; }

double circle_w1_two_atoms(double p, double q) {
  double w = std::abs(p - q);
  w -= std::floor(w);
  return std::min(w, 1.0 - w);
}

double ks_critical_1pct(double n) { return 1.63 / std::sqrt(n); }

double heat_mode_decay(int k, double t) { return std::exp(-2.0 * kPi * kPi * k * k * t); }

double theta_reference(double beta, double gamma, int d, double delta) {
  const double t1 = beta * (1.0 - 2.0 * gamma);
  const double t2 = beta * gamma * gamma / d;
  const double t3 = 0.5 - beta * (1.0 + 1.0 / d);
  return std::min(t1, std::min(t2, t3)) - delta;
}

void optimal_beta_grid(double gamma, int d, double& beta_star, double& theta_star) {
  const double bmax = 0.5 / (1.0 + 1.0 / d);
  beta_star = 0.0;
  theta_star = -1.0;
  for (double b = 1e-6; b < bmax; b += 1e-6) {
    const double th = theta_reference(b, gamma, d, 0.0);
    if (th > theta_star) {
      theta_star = th;
      beta_star = b;
    }
  }
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

std::vector<double> cantor_atoms_reference(int L) {
  std::vector<double> pts{0.0};
  double scale = 1.0;
  for (int j = 1; j <= L; ++j) {
    scale /= 3.0;
    std::vector<double> nxt;
    nxt.reserve(pts.size() * 2);
    for (double p : pts) {
      nxt.push_back(p - scale);
      nxt.push_back(p + scale);
    }
    pts.swap(nxt);
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

double cantor_char_reference(int k, int L) {
  double prod = 1.0;
  double scale = 1.0;
  for (int j = 1; j <= L; ++j) {
    scale /= 3.0;
    prod *= std::cos(2.0 * kPi * k * scale);
  }
  return prod;
}

double lattice_tail_bound(double s, int R, int d) {
  const double pref = d == 1 ? 0.5 : 1.0 / (2.0 * kPi);
  const double Z = bump_mass_closed(d);
  double sum = 0.0;
  for (int m = R + 1; m < R + 5000; ++m) {
    const double count = d == 1 ? 2.0 : 8.0 * m;
    const double term = count * (pref / Z) * std::exp(0.25 - s * (m - 0.5));
    if (term < 1e-320) break;
    sum += term;
    if (term < 1e-30 * sum) break;
  }
  return sum;
}

}  // namespace oracle
