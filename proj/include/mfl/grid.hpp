#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mfl {

// Uniform periodic grid on the torus [-1/2, 1/2)^d, d in {1, 2}.
// Nodes along each axis: x_j = -1/2 + j*h with h = 1/M (left endpoint
// included, right endpoint identified with the left).
struct TorusGrid {
  int d = 1;
  int M = 64;

  double h() const { return 1.0 / M; }
  std::int64_t size() const {
    std::int64_t n = 1;
    for (int a = 0; a < d; ++a) n *= M;
    return n;
  }
  double node(int j) const { return -0.5 + j * h(); }

  bool operator==(const TorusGrid&) const = default;
};

// Throws std::invalid_argument unless d in {1,2} and M is an even value >= 4.
// (Even M keeps the Nyquist bookkeeping of the spectral ops uniform; every
// production grid is a power of two anyway.)
TorusGrid make_grid(int d, int M);

// Scalar field sampled at grid nodes, row-major (axis 0 slowest).
struct Field {
  TorusGrid grid;
  std::vector<double> v;

  Field() = default;
  explicit Field(const TorusGrid& g) : grid(g), v(static_cast<std::size_t>(g.size()), 0.0) {}

  double& at(int i) { return v[static_cast<std::size_t>(i)]; }
  double at(int i) const { return v[static_cast<std::size_t>(i)]; }
  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * grid.M + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * grid.M + j]; }
};

// Canonical representative in [-1/2, 1/2). wrap(0.5) == -0.5.
double wrap(double x);

// Trapezoid rule; on a periodic grid this is just h^d * sum of samples.
double integrate(const Field& f);

double field_min(const Field& f);
double field_max(const Field& f);
// (integral of |f|^p)^(1/p)
double lp_norm(const Field& f, double p);
double sup_diff(const Field& f, const Field& g);

// Cloud-in-cell deposition of n points onto the grid; the result is the
// empirical measure smeared over nearest nodes, normalized to unit mass
// (integrate == 1 up to roundoff; the per-particle weights sum to 1 exactly
// before the final h^-d scaling). Positions are AoS, length n*d, and must
// already be canonical; anything outside [-1/2, 1/2) throws.
Field deposit(std::span<const double> pos, std::int64_t n, const TorusGrid& g);

enum class Interp { Linear, Cubic };

// Periodic interpolation of f at the point x (d components, canonical).
// Linear: tensor-product CIC weights (the adjoint of deposit). Cubic:
// tensor-product Catmull-Rom through the 4 nearest nodes per axis.
double interpolate(const Field& f, const double* x, Interp scheme = Interp::Linear);

namespace detail {
// Common kernel of deposit/interpolate: base node index and fractional
// offset for one coordinate. u = (x + 1/2)/h, i0 = floor(u) mod M.
void cic_locate(double x, int M, int& i0, double& frac);
}  // namespace detail

}  // namespace mfl
