#include "dualbound/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace dualbound {

namespace {

double pairwise_sum_range(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(data, half) +
         pairwise_sum_range(data + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_range(values.data(), values.size());
}

BoundEstimate estimate_mean(std::span<const double> samples,
                            double ci_multiplier) {
  if (samples.empty()) {
    throw std::invalid_argument("estimate_mean: empty sample set");
  }
  BoundEstimate est;
  est.count = samples.size();
  const double n = static_cast<double>(samples.size());
  est.mean = pairwise_sum(samples) / n;

  if (samples.size() == 1) {
    est.degenerate = true;
    return est;
  }
  std::vector<double> sq(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double d = samples[i] - est.mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / (n - 1.0);
  if (var <= 0.0) {
    est.degenerate = true;
    return est;
  }
  est.std_error = std::sqrt(var / n);
  est.half_width = ci_multiplier * est.std_error;
  return est;
}

}  // namespace dualbound
