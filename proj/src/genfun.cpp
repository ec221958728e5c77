#include "rwavg/genfun.hpp"

#include <cmath>
#include <set>

namespace rwavg {

double geometric_tail(double z, long N) {
  if (z >= 1.0) return INFINITY;
  if (z <= 0.0) return 0.0;
  return std::pow(z, static_cast<double>(N + 1)) / (1.0 - z);
}

GeneratingFunctionEval evaluate_F_G(const ReturnSeries& s, double z, const TotalConvergenceDiagnostic* diag) {
  if (!(z >= 0.0 && z <= 1.0)) throw std::invalid_argument("evaluate_F_G: z must lie in [0,1]");
  GeneratingFunctionEval e;
  e.vertex = s.vertex;
  e.z = z;
  e.horizon = s.horizon;
  CompensatedSum F, G;
  double zn = 1.0;
  for (long n = 0; n <= s.horizon; ++n) {
    if (n > 0) F.add(s.f[n] * zn);
    G.add(s.p[n] * zn);
    zn *= z;
  }
  e.F_partial = F.value();
  e.G_partial = G.value();
  if (z < 1.0) {
    double tail = geometric_tail(z, s.horizon);
    if (diag != nullptr && diag->orbit_complete && diag->horizon > s.horizon) {
      CompensatedSum t;
      double zm = std::pow(z, static_cast<double>(s.horizon + 1));
      for (long n = s.horizon + 1; n <= diag->horizon; ++n) {
        t.add(diag->k[n] * zm);
        zm *= z;
      }
      tail = t.value() + geometric_tail(z, diag->horizon);
    }
    e.F_tail_bound = tail;
    e.G_tail_bound = geometric_tail(z, s.horizon);
  }
  return e;
}

FAtOneBracket F_at_one_bracket(const WalkKernel& k, const VertexId& x, long N, const MonteCarloOptions& mc) {
  if (mc.horizon < N) throw std::invalid_argument("F_at_one_bracket: MC horizon must be >= N");
  FAtOneBracket b;
  b.lower = return_series(k, x, N, Arithmetic::Float).f_sum();
  b.mc = monte_carlo_return(k, x, mc);
  return b;
}

TotalConvergenceDiagnostic total_convergence(const WalkKernel& k, const std::vector<VertexId>& sample, long N,
                                             const SeriesOptions& opts) {
  if (sample.empty()) throw std::invalid_argument("total_convergence: empty sample");
  TotalConvergenceDiagnostic d;
  d.horizon = N;
  d.sample = sample;
  d.k.assign(N + 1, 0.0);
  for (auto& x : sample) {
    auto s = return_series(k, x, N, Arithmetic::Float, opts);
    for (long n = 1; n <= N; ++n) d.k[n] = std::max(d.k[n], s.f[n]);
  }
  d.partial_sum.assign(N + 1, 0.0);
  CompensatedSum acc;
  for (long n = 1; n <= N; ++n) {
    acc.add(d.k[n]);
    d.partial_sum[n] = acc.value();
  }
  const auto& g = k.graph();
  if (auto oc = g.orbit_count()) {
    std::set<int> hit;
    for (auto& x : sample) hit.insert(g.orbit_of(x));
    d.orbit_complete = static_cast<int>(hit.size()) == *oc;
    d.note = d.orbit_complete ? "sample meets every vertex orbit" : "sample misses a vertex orbit; heuristic";
  } else {
    d.note = "family does not declare finitely many orbits; heuristic";
  }
  return d;
}

}  // namespace rwavg
