#include "mfl/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mfl {

TorusGrid make_grid(int d, int M) {
  if (d != 1 && d != 2) throw std::invalid_argument("grid dimension must be 1 or 2, got " + std::to_string(d));
  if (M < 4 || M % 2 != 0) throw std::invalid_argument("grid size must be even and >= 4, got " + std::to_string(M));
  return TorusGrid{d, M};
}

double wrap(double x) {
  double w = x - std::round(x);
  // round() sends the half-integer ties to the even side, which can land on
  // +1/2; fold that onto the canonical representative.
  if (w == 0.5) w = -0.5;
  return w;
}

double integrate(const Field& f) {
  double s = 0.0;
  for (double x : f.v) s += x;
  double hd = f.grid.h();
  if (f.grid.d == 2) hd *= f.grid.h();
  return s * hd;
}

double field_min(const Field& f) {
  double m = f.v[0];
  for (double x : f.v) m = std::min(m, x);
  return m;
}

double field_max(const Field& f) {
  double m = f.v[0];
  for (double x : f.v) m = std::max(m, x);
  return m;
}

double lp_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1");
  double s = 0.0;
  for (double x : f.v) s += std::pow(std::abs(x), p);
  double hd = f.grid.h();
  if (f.grid.d == 2) hd *= f.grid.h();
  return std::pow(s * hd, 1.0 / p);
}

double sup_diff(const Field& f, const Field& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("sup_diff: grid mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < f.v.size(); ++i) m = std::max(m, std::abs(f.v[i] - g.v[i]));
  return m;
}

namespace detail {

void cic_locate(double x, int M, int& i0, double& frac) {
  double u = (x + 0.5) * M;
  double fl = std::floor(u);
  i0 = static_cast<int>(fl);
  frac = u - fl;
  if (i0 >= M) {  // x == 0.5 - eps can round up to the identified endpoint
    i0 = 0;
    frac = 0.0;
  }
}

}  // namespace detail

Field deposit(std::span<const double> pos, std::int64_t n, const TorusGrid& g) {
  if (n <= 0) throw std::invalid_argument("deposit: need at least one particle");
  if (static_cast<std::int64_t>(pos.size()) != n * g.d)
    throw std::invalid_argument("deposit: position array length does not match n*d");
  Field out(g);
  const int M = g.M;
  const double w = 1.0 / static_cast<double>(n);
  for (std::int64_t p = 0; p < n; ++p) {
    int i0[2] = {0, 0};
    double fr[2] = {0.0, 0.0};
    for (int a = 0; a < g.d; ++a) {
      double x = pos[static_cast<std::size_t>(p) * g.d + a];
      if (!(x >= -0.5 && x < 0.5))
        throw std::domain_error("deposit: position outside canonical torus range [-1/2, 1/2)");
      detail::cic_locate(x, M, i0[a], fr[a]);
    }
    if (g.d == 1) {
      int j = i0[0], j1 = (j + 1) % M;
      out.at(j) += w * (1.0 - fr[0]);
      out.at(j1) += w * fr[0];
    } else {
      int i = i0[0], i1 = (i + 1) % M;
      int j = i0[1], j1 = (j + 1) % M;
      out.at(i, j) += w * (1.0 - fr[0]) * (1.0 - fr[1]);
      out.at(i, j1) += w * (1.0 - fr[0]) * fr[1];
      out.at(i1, j) += w * fr[0] * (1.0 - fr[1]);
      out.at(i1, j1) += w * fr[0] * fr[1];
    }
  }
  // Convert the unit total weight into a density with unit integral.
  double inv_hd = M;
  if (g.d == 2) inv_hd *= M;
  for (double& x : out.v) x *= inv_hd;
  return out;
}

namespace {

inline double catmull_rom(double fm1, double f0, double f1, double f2, double t) {
  // Standard C^1 cubic through f0 (t=0) and f1 (t=1) with centered-slope tangents.
  double a = -0.5 * fm1 + 1.5 * f0 - 1.5 * f1 + 0.5 * f2;
  double b = fm1 - 2.5 * f0 + 2.0 * f1 - 0.5 * f2;
  double c = 0.5 * (f1 - fm1);
  return ((a * t + b) * t + c) * t + f0;
}

}  // namespace

double interpolate(const Field& f, const double* x, Interp scheme) {
  const TorusGrid& g = f.grid;
  const int M = g.M;
  int i0[2];
  double fr[2];
  for (int a = 0; a < g.d; ++a) {
    if (!(x[a] >= -0.5 && x[a] < 0.5))
      throw std::domain_error("interpolate: point outside canonical torus range [-1/2, 1/2)");
    detail::cic_locate(x[a], M, i0[a], fr[a]);
  }
  if (scheme == Interp::Linear) {
    if (g.d == 1) {
      int j = i0[0], j1 = (j + 1) % M;
      return f.at(j) * (1.0 - fr[0]) + f.at(j1) * fr[0];
    }
    int i = i0[0], i1 = (i + 1) % M;
    int j = i0[1], j1 = (j + 1) % M;
    return f.at(i, j) * (1.0 - fr[0]) * (1.0 - fr[1]) + f.at(i, j1) * (1.0 - fr[0]) * fr[1] +
           f.at(i1, j) * fr[0] * (1.0 - fr[1]) + f.at(i1, j1) * fr[0] * fr[1];
  }
  // Cubic
  if (g.d == 1) {
    int j = i0[0];
    int jm = (j + M - 1) % M, j1 = (j + 1) % M, j2 = (j + 2) % M;
    return catmull_rom(f.at(jm), f.at(j), f.at(j1), f.at(j2), fr[0]);
  }
  int i = i0[0];
  double rows[4];
  for (int r = -1; r <= 2; ++r) {
    int ir = (i + r + M) % M;
    int j = i0[1];
    int jm = (j + M - 1) % M, j1 = (j + 1) % M, j2 = (j + 2) % M;
    rows[r + 1] = catmull_rom(f.at(ir, jm), f.at(ir, j), f.at(ir, j1), f.at(ir, j2), fr[1]);
  }
  return catmull_rom(rows[0], rows[1], rows[2], rows[3], fr[0]);
}

}  // namespace mfl
