#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfl/grid.hpp"

namespace mfl {

struct EntropyValue {
  double value = 0.0;
  std::int64_t clamps = 0;  // how many nodes hit the log floor
};

// H(f|g) = int f ln(f/g). Both fields must carry mass 1 within 1e-8; they
// are renormalized internally, which together with the log-sum inequality
// pins the discrete value at >= -(roundoff). Values below
// 1e-12 * (field mean) are floored inside the logarithms only (never in the
// mass) and counted in `clamps`.
EntropyValue relative_entropy(const Field& f, const Field& g);

// I(f|g) = int f |grad ln(f/g)|^2, spectral gradients, same floor/clamp
// policy for the divisions.
EntropyValue fisher_information(const Field& f, const Field& g);

double l1_distance(const Field& f, const Field& g);

// Bracket for the Kantorovich-Rubinstein norm over {phi: ||phi||_inf <= 1,
// Lip(phi) <= 1}. Lower: best admissible low-frequency wave (exact pairing,
// via the spectrum for fields and the empirical characteristic function for
// particle lists). Upper: geodesic-cost optimal transport of the node-mass
// discretizations - exact circular-CDF transport in d=1, entropic transport
// rounded to a feasible plan (hence a true upper bound of the discretized
// problem) in d=2 - capped at the trivial bound 2. Discretization moves
// point masses by at most h per axis.
struct BLBracket {
  double lower = 0.0;
  double upper = 0.0;
};

BLBracket bounded_lipschitz(const Field& mu, const Field& nu);
BLBracket bounded_lipschitz(std::span<const double> pts, std::int64_t n, const Field& nu);
BLBracket bounded_lipschitz(std::span<const double> pts_a, std::int64_t na,
                            std::span<const double> pts_b, std::int64_t nb, const TorusGrid& g);

// Guaranteed decay exponent theta = min(beta(1-2 gamma), (beta/d) gamma^2,
// 1/2 - beta(1+1/d)) - delta, valid only inside the parameter ranges it was
// derived for. Throws naming the violated bound.
struct ThetaBreakdown {
  double theta1 = 0.0, theta2 = 0.0, theta3 = 0.0;
  double value = 0.0;
};
ThetaBreakdown theta(double beta, double gamma, int d, double delta = 0.0);

// Maximizer of theta(beta, gamma, d, 0) over admissible beta. The increasing
// pieces are beta*min(1-2 gamma, gamma^2/d) and the decreasing one is
// 1/2 - beta(1+1/d); the optimum sits at their crossing, strictly inside the
// admissible interval.
struct OptimalBeta {
  double beta_star = 0.0;
  double theta_star = 0.0;
};
OptimalBeta optimal_beta(double gamma, int d);

// Per-trajectory diagnostic record.
struct EntropyTrace {
  std::vector<double> times, H, I, L1, BL_lo, BL_hi;
  std::vector<std::int64_t> clamps;

  void push(double t, double h, double i, double l1, BLBracket bl, std::int64_t cl);
  double H0() const { return H.empty() ? 0.0 : H.front(); }
  double sup_H() const;
  double max_L1() const;
  std::int64_t total_clamps() const;
};

}  // namespace mfl
