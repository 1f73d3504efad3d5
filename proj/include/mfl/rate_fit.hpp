#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mfl {

// Least-squares fit of log(response) against log(N). `slope_lo/hi` is a
// bootstrap percentile interval when replicate data is supplied, otherwise
// it collapses onto the point estimate.
struct RateFit {
  std::vector<double> N;
  std::vector<double> response;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of log-space residuals
  double slope_lo = 0.0;
  double slope_hi = 0.0;
};

// Requires >= 3 distinct N and strictly positive responses.
RateFit rate_fit(std::span<const double> N, std::span<const double> response);

// per_replica[r][i] is the response of replica r at N[i]. The fitted curve
// uses the across-replica median per N; the interval comes from resampling
// replicas with replacement (counter-based RNG, so reruns agree).
RateFit rate_fit_replicated(std::span<const double> N,
                            const std::vector<std::vector<double>>& per_replica,
                            std::uint64_t seed, int resamples = 400);

double median_of(std::vector<double> v);

}  // namespace mfl
