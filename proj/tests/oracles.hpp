#pragma once

#include <functional>
#include <vector>

// Reference values computed without touching the main library: closed forms,
// adaptive quadrature, direct summation. Tests compare library output against
// these, so nothing here may include an mfl header.
namespace oracle {

// Adaptive Simpson quadrature to absolute tolerance `tol`.
double simpson(const std::function<double(double)>& f, double a, double b, double tol);

// Radial profile of the base bump before normalization: gaussian core up to
// r = 1/2, matched exponential tail beyond, times the dimension prefactor.
double bump_profile(double r, int d);

// Mass of the bump over R^d: closed form (error function / elementary) and an
// independent quadrature of the same integrand.
double bump_mass_closed(int d);
double bump_mass_quadrature(int d);

// int (1 + a cos 2 pi x) ln(1 + a cos 2 pi x) dx over one period.
double entropy_cosine_closed(double a);
double entropy_cosine_quadrature(double a);

// Fisher information of 1 + a cos(2 pi x) against the flat density: exact
// quadrature of (2 pi a sin)^2 / (1 + a cos), and the small-a law 2 pi^2 a^2.
double fisher_cosine_quadrature(double a);
double fisher_small_a(double a);

// int |a cos(2 pi x)| dx = 2a/pi.
double l1_cosine(double a);

// Geodesic distance of two atoms on the unit circle.
double circle_w1_two_atoms(double p, double q);

// Asymptotic 1% critical value of the one-sample Kolmogorov-Smirnov statistic.
double ks_critical_1pct(double n);

// Amplitude factor of the mode cos(2 pi k x) after time t of d/dt = 1/2 Lap.
double heat_mode_decay(int k, double t);

// Rate exponent pieces, written out independently of the library.
double theta_reference(double beta, double gamma, int d, double delta);

// Argmax of theta over beta by grid search at resolution 1e-6.
void optimal_beta_grid(double gamma, int d, double& beta_star, double& theta_star);

// Plain least-squares slope of y against x (no logs taken here).
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

// Midpoints of the level-L Cantor construction on [-1/2, 1/2]: the centered
// ternary points sum_{j<=L} s_j 3^{-j}, s_j in {-1, +1}; 2^L values, sorted.
std::vector<double> cantor_atoms_reference(int L);

// Product formula for the characteristic function of the level-L measure.
double cantor_char_reference(int k, int L);

// One-shell truncation-tail bound of the periodized bump: the mass that a
// lattice sum truncated at radius R can miss, per the comparison-series
// argument (monotone tail, shell cardinality in d = 2).
double lattice_tail_bound(double s, int R, int d);

}  // namespace oracle
