#pragma once

#include <cstdint>
#include <vector>

#include "rwavg/kernel.hpp"

namespace rwavg {

struct MonteCarloOptions {
  long trials = 100000;
  long horizon = 1000;
  std::uint64_t seed = 1;
  int threads = 1;  // results do not depend on this
};

struct ReturnEstimate {
  long horizon = 0;
  long trials = 0;
  long returns = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // 99% normal approximation
};

// P(first return to x within each horizon) from one batch of walks; horizons ascending.
std::vector<ReturnEstimate> monte_carlo_returns(const WalkKernel& k, const VertexId& x,
                                                const std::vector<long>& horizons, long trials,
                                                std::uint64_t seed, int threads = 1);

ReturnEstimate monte_carlo_return(const WalkKernel& k, const VertexId& x, const MonteCarloOptions& opts);

ReturnEstimate make_estimate(long horizon, long trials, long returns);

}  // namespace rwavg
