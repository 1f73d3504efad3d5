#include "mfl/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "mfl/rng.hpp"

namespace mfl {
namespace {

void check_inputs(std::span<const double> N, std::span<const double> response) {
  if (N.size() != response.size()) throw std::invalid_argument("rate_fit: size mismatch");
  std::set<double> distinct(N.begin(), N.end());
  if (distinct.size() < 3) throw std::invalid_argument("rate_fit: need at least 3 distinct N values");
  for (double r : response)
    if (!(r > 0.0)) throw std::domain_error("rate_fit: responses must be strictly positive");
  for (double n : N)
    if (!(n > 0.0)) throw std::domain_error("rate_fit: N values must be strictly positive");
}

struct LineFit {
  double slope, intercept, residual;
};

LineFit ls_loglog(std::span<const double> N, std::span<const double> response) {
  const std::size_t n = N.size();
  double sx = 0, sy = 0;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(N[i]);
    y[i] = std::log(response[i]);
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f{};
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    rss += e * e;
  }
  f.residual = std::sqrt(rss / static_cast<double>(n));
  return f;
}

}  // namespace

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median_of: empty");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RateFit rate_fit(std::span<const double> N, std::span<const double> response) {
  check_inputs(N, response);
  const LineFit f = ls_loglog(N, response);
  RateFit out;
  out.N.assign(N.begin(), N.end());
  out.response.assign(response.begin(), response.end());
  out.slope = f.slope;
  out.intercept = f.intercept;
  out.residual = f.residual;
  out.slope_lo = out.slope_hi = f.slope;
  return out;
}

RateFit rate_fit_replicated(std::span<const double> N,
                            const std::vector<std::vector<double>>& per_replica,
                            std::uint64_t seed, int resamples) {
  const std::size_t R = per_replica.size();
  if (R == 0) throw std::invalid_argument("rate_fit_replicated: no replicas");
  for (const auto& row : per_replica)
    if (row.size() != N.size()) throw std::invalid_argument("rate_fit_replicated: ragged replica data");

  std::vector<double> med(N.size());
  for (std::size_t i = 0; i < N.size(); ++i) {
    std::vector<double> col(R);
    for (std::size_t r = 0; r < R; ++r) col[r] = per_replica[r][i];
    med[i] = median_of(std::move(col));
  }
  RateFit out = rate_fit(N, med);
  if (R < 2 || resamples < 1) return out;

  const std::uint64_t stream = rng::stream_id(rng::Purpose::Bootstrap, 0, 0);
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(resamples));
  std::vector<double> resp(N.size());
  std::vector<double> col(R);
  std::vector<std::size_t> picks(R);
  for (int b = 0; b < resamples; ++b) {
    // One multiset of replicas per resample, shared by every N: the
    // resample must preserve the pathwise coupling across the sweep.
    for (std::size_t r = 0; r < R; ++r) {
      const double u = rng::uniform(seed, stream, static_cast<std::uint64_t>(b) * R + r, 0);
      picks[r] = std::min(R - 1, static_cast<std::size_t>(u * static_cast<double>(R)));
    }
    bool ok = true;
    for (std::size_t i = 0; i < N.size() && ok; ++i) {
      for (std::size_t r = 0; r < R; ++r) col[r] = per_replica[picks[r]][i];
      resp[i] = median_of(col);
      if (!(resp[i] > 0.0)) ok = false;
    }
    if (!ok) continue;
    slopes.push_back(ls_loglog(N, resp).slope);
  }
  if (!slopes.empty()) {
    std::sort(slopes.begin(), slopes.end());
    const auto pick = [&](double p) {
      const double idx = p * static_cast<double>(slopes.size() - 1);
      return slopes[static_cast<std::size_t>(std::llround(idx))];
    };
    out.slope_lo = pick(0.025);
    out.slope_hi = pick(0.975);
  }
  return out;
}

}  // namespace mfl
