#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rwavg/montecarlo.hpp"
#include "rwavg/series.hpp"

namespace rwavg {

struct TotalConvergenceDiagnostic {
  long horizon = 0;
  std::vector<VertexId> sample;
  std::vector<double> k;            // k[n] = max over the sample of f^(n)(x,x), k[0] = 0
  std::vector<double> partial_sum;  // partial_sum[n] = sum_{m<=n} k[m]
  bool orbit_complete = false;      // sample max is the true supremum
  std::string note;
};

struct GeneratingFunctionEval {
  VertexId vertex;
  double z = 0.0;
  long horizon = 0;
  double F_partial = 0.0;
  double G_partial = 0.0;
  std::optional<double> F_tail_bound;  // true F(x,x|z) in [F_partial, F_partial + bound]
  std::optional<double> G_tail_bound;
};

// Partial sums at z; tail bounds z^(N+1)/(1-z) for z < 1, sharpened by k_n up to the
// diagnostic's horizon when an orbit-complete diagnostic is supplied.
GeneratingFunctionEval evaluate_F_G(const ReturnSeries& s, double z,
                                    const TotalConvergenceDiagnostic* diag = nullptr);

struct FAtOneBracket {
  double lower = 0.0;  // sum_{n<=N} f^(n)
  ReturnEstimate mc;   // P(return within the MC horizon)
};

FAtOneBracket F_at_one_bracket(const WalkKernel& k, const VertexId& x, long N, const MonteCarloOptions& mc);

TotalConvergenceDiagnostic total_convergence(const WalkKernel& k, const std::vector<VertexId>& sample, long N,
                                             const SeriesOptions& opts = {});

// Tail of sum_{n>N} c z^n for c <= 1.
double geometric_tail(double z, long N);

}  // namespace rwavg
