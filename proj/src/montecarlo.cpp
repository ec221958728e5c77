#include "rwavg/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace rwavg {

namespace {

constexpr int kBlocks = 64;
constexpr double kZ99 = 2.5758293035489;

// Return time of one walk, or 0 if it has not returned by hmax.
long zd_walk(int d, long hmax, std::mt19937_64& rng) {
  std::array<std::int64_t, 6> x{};
  const std::uint64_t deg = 2 * static_cast<std::uint64_t>(d);
  long t = 0;
  auto at_origin = [&] {
    for (int i = 0; i < d; ++i)
      if (x[i] != 0) return false;
    return true;
  };
  while (t < hmax) {
    const std::uint64_t r = rng();
    for (int half = 0; half < 2 && t < hmax; ++half) {
      const std::uint64_t bits = half ? (r >> 32) : (r & 0xffffffffull);
      const std::uint64_t k = (bits * deg) >> 32;
      x[k >> 1] += (k & 1) ? 1 : -1;
      ++t;
      if (at_origin()) return t;
    }
  }
  return 0;
}

long generic_walk(const WalkKernel& k, const VertexId& x, long hmax, std::mt19937_64& rng) {
  VertexId v = x;
  for (long t = 1; t <= hmax; ++t) {
    const std::uint64_t r = rng();
    const double u = static_cast<double>(r >> 11) * 0x1.0p-53;
    k.step(v, u, r);
    if (v == x) return t;
  }
  return 0;
}

}  // namespace

ReturnEstimate make_estimate(long horizon, long trials, long returns) {
  ReturnEstimate e;
  e.horizon = horizon;
  e.trials = trials;
  e.returns = returns;
  e.estimate = trials > 0 ? static_cast<double>(returns) / static_cast<double>(trials) : 0.0;
  e.std_error = trials > 0 ? std::sqrt(e.estimate * (1.0 - e.estimate) / static_cast<double>(trials)) : 0.0;
  e.ci_low = std::max(0.0, e.estimate - kZ99 * e.std_error);
  e.ci_high = std::min(1.0, e.estimate + kZ99 * e.std_error);
  return e;
}

std::vector<ReturnEstimate> monte_carlo_returns(const WalkKernel& k, const VertexId& x,
                                                const std::vector<long>& horizons, long trials,
                                                std::uint64_t seed, int threads) {
  if (trials < 1) throw std::invalid_argument("monte_carlo: trials must be >= 1");
  if (horizons.empty() || horizons.front() < 1) throw std::invalid_argument("monte_carlo: horizons must be >= 1");
  if (!std::is_sorted(horizons.begin(), horizons.end()))
    throw std::invalid_argument("monte_carlo: horizons must be ascending");
  k.graph().require_valid(x);
  const long hmax = horizons.back();
  const auto* zd = dynamic_cast<const ZdGraph*>(&k.graph());
  const bool fast = zd != nullptr && k.simple();

  std::vector<std::vector<long>> counts(kBlocks, std::vector<long>(horizons.size(), 0));
  auto run_block = [&](int b) {
    const long n = trials / kBlocks + (b < trials % kBlocks ? 1 : 0);
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(b) + 1)));
    auto& c = counts[b];
    for (long i = 0; i < n; ++i) {
      const long t = fast ? zd_walk(zd->dim(), hmax, rng) : generic_walk(k, x, hmax, rng);
      if (t == 0) continue;
      for (std::size_t h = 0; h < horizons.size(); ++h)
        if (t <= horizons[h]) ++c[h];
    }
  };
  const int nt = std::max(1, std::min(threads, kBlocks));
  if (nt == 1) {
    for (int b = 0; b < kBlocks; ++b) run_block(b);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i)
      pool.emplace_back([&] {
        for (int b = next++; b < kBlocks; b = next++) run_block(b);
      });
    for (auto& t : pool) t.join();
  }
  std::vector<ReturnEstimate> out;
  for (std::size_t h = 0; h < horizons.size(); ++h) {
    long r = 0;
    for (int b = 0; b < kBlocks; ++b) r += counts[b][h];
    out.push_back(make_estimate(horizons[h], trials, r));
  }
  return out;
}

ReturnEstimate monte_carlo_return(const WalkKernel& k, const VertexId& x, const MonteCarloOptions& opts) {
  return monte_carlo_returns(k, x, {opts.horizon}, opts.trials, opts.seed, opts.threads).front();
}

}  // namespace rwavg
