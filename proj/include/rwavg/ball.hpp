#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "rwavg/graph.hpp"
#include "rwavg/numeric.hpp"

namespace rwavg {

struct BallMember {
  VertexId id;
  long distance;
};

struct Ball {
  VertexId origin;
  long radius = 0;
  std::vector<BallMember> members;          // sorted by (distance, id)
  std::vector<VertexId> boundary;           // members with a neighbour outside, sorted
  std::vector<std::int64_t> sphere_sizes;   // index = distance

  std::size_t size() const { return members.size(); }
  std::unordered_map<VertexId, std::size_t, VertexHash> index() const {
    std::unordered_map<VertexId, std::size_t, VertexHash> ix;
    ix.reserve(members.size() * 2);
    for (std::size_t i = 0; i < members.size(); ++i) ix.emplace(members[i].id, i);
    return ix;
  }
};

inline constexpr std::size_t kNoBallLimit = std::numeric_limits<std::size_t>::max();

// Exact BFS ball. `within` optionally restricts the search to an induced subgraph;
// max_members is a memory guard.
template <class Pred>
Ball ball_where(const LazyGraph& g, const VertexId& origin, long radius, Pred within,
                std::size_t max_members = kNoBallLimit) {
  if (radius < 0) throw GraphError("ball: radius must be >= 0");
  g.require_valid(origin);
  Ball b;
  b.origin = origin;
  b.radius = radius;
  std::unordered_map<VertexId, long, VertexHash> dist{{origin, 0}};
  std::vector<VertexId> frontier{origin};
  b.members.push_back({origin, 0});
  for (long d = 1; d <= radius; ++d) {
    std::vector<VertexId> next;
    for (const auto& x : frontier) {
      for (auto& y : g.neighbors(x)) {
        if (!within(y)) continue;
        if (dist.emplace(y, d).second) next.push_back(y);
      }
      if (dist.size() > max_members)
        throw GraphError("ball: B(" + to_string(origin) + ", " + std::to_string(radius) + ") exceeds " +
                         std::to_string(max_members) + " vertices");
    }
    std::sort(next.begin(), next.end());
    for (auto& y : next) b.members.push_back({y, d});
    frontier.swap(next);
    if (frontier.empty()) break;
  }
  b.sphere_sizes.assign(radius + 1, 0);
  for (auto& m : b.members) ++b.sphere_sizes[m.distance];
  if (radius == 0) {
    b.boundary = {origin};
  } else {
    for (auto& m : b.members) {
      if (m.distance < radius) continue;  // inner vertices have all neighbours at distance <= radius
      for (auto& y : g.neighbors(m.id)) {
        if (within(y) && !dist.count(y)) {
          b.boundary.push_back(m.id);
          break;
        }
      }
    }
    std::sort(b.boundary.begin(), b.boundary.end());
  }
  return b;
}

inline Ball ball(const LazyGraph& g, const VertexId& origin, long radius, std::size_t max_members = kNoBallLimit) {
  return ball_where(g, origin, radius, [](const VertexId&) { return true; }, max_members);
}

struct SphereBallRatio {
  std::vector<Rational> ratio;  // ratio[k] = |S(o,n+1)| / |B(o,n)| with n = k+1, n = 1..n_max
  std::vector<Rational> running_sup;
  Rational sup;
  // The supremum is a finite-range witness, not the global supremum.
  static constexpr const char* caveat = "finite-range witness over 1 <= n <= n_max";
};

inline SphereBallRatio sphere_ball_ratio(const LazyGraph& g, const VertexId& origin, long n_max) {
  if (n_max < 1) throw GraphError("sphere_ball_ratio: n_max must be >= 1");
  const Ball b = ball(g, origin, n_max + 1);
  SphereBallRatio out;
  std::int64_t cum = b.sphere_sizes[0];
  for (long n = 1; n <= n_max; ++n) {
    cum += b.sphere_sizes[n];
    Rational r(b.sphere_sizes[n + 1], cum);
    out.ratio.push_back(r);
    if (out.running_sup.empty() || r > out.sup) out.sup = r;
    out.running_sup.push_back(out.sup);
  }
  return out;
}

inline Rational boundary_ratio(const LazyGraph& g, const VertexId& origin, long n) {
  if (n < 0) throw GraphError("boundary_ratio: n must be >= 0");
  const Ball b = ball(g, origin, n);
  return Rational(static_cast<std::int64_t>(b.boundary.size()), static_cast<std::int64_t>(b.size()));
}

}  // namespace rwavg
