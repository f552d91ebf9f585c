#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dualbound {

// Pairwise (cascade) summation over a fixed index order.  Used everywhere a
// Monte Carlo aggregate must not depend on thread scheduling.
double pairwise_sum(std::span<const double> values);

// Sample mean / standard error / confidence half-width of a batch of i.i.d.
// draws.  half_width = ci_multiplier * stderr; a single sample or an exactly
// constant batch is reported with half_width 0 and the degenerate flag set.
struct BoundEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double half_width = 0.0;
  std::size_t count = 0;
  bool degenerate = false;
};

BoundEstimate estimate_mean(std::span<const double> samples,
                            double ci_multiplier = 1.96);

}  // namespace dualbound
