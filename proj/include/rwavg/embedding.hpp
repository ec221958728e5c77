#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>

#include "rwavg/ball.hpp"
#include "rwavg/families.hpp"

namespace rwavg {

// Injective adjacency-preserving map from a subgraph into the graph.
struct GraphEmbedding {
  std::string tag;
  VertexId base_point;
  VertexId target;
  std::function<bool(const VertexId&)> domain;   // source subgraph vertex predicate
  std::function<VertexId(const VertexId&)> map;
  long checked_radius = 0;
  bool verified = false;
};

namespace detail {

inline std::shared_ptr<std::map<VertexId, VertexId>> tree_correspondence(const LazyGraph& g, const VertexId& base,
                                                                         const VertexId& target, long radius) {
  auto m = std::make_shared<std::map<VertexId, VertexId>>();
  (*m)[base] = target;
  std::set<VertexId> used{target};
  std::deque<std::pair<VertexId, long>> q{{base, 0}};
  while (!q.empty()) {
    auto [u, d] = q.front();
    q.pop_front();
    if (d == radius) continue;
    const VertexId v = m->at(u);
    auto by_degree = [&](std::vector<VertexId> xs, const std::function<bool(const VertexId&)>& skip) {
      std::vector<std::pair<std::size_t, VertexId>> out;
      for (auto& x : xs)
        if (!skip(x)) out.emplace_back(g.degree(x), x);
      std::sort(out.begin(), out.end());
      return out;
    };
    auto nu = by_degree(g.neighbors(u), [&](const VertexId& x) { return m->count(x) > 0; });
    auto nv = by_degree(g.neighbors(v), [&](const VertexId& x) { return used.count(x) > 0; });
    if (nu.size() != nv.size()) throw GraphError("embedding: degree mismatch at " + to_string(u));
    for (std::size_t i = 0; i < nu.size(); ++i) {
      if (nu[i].first != nv[i].first) throw GraphError("embedding: degree mismatch at " + to_string(nu[i].second));
      (*m)[nu[i].second] = nv[i].second;
      used.insert(nv[i].second);
      q.emplace_back(nu[i].second, d + 1);
    }
  }
  return m;
}

}  // namespace detail

// Spot-check adjacency preservation and injectivity on B(base_point, r) within the domain.
inline void verify_embedding(const LazyGraph& g, GraphEmbedding& e, long r) {
  const Ball b = ball_where(g, e.base_point, r, e.domain);
  std::set<VertexId> images;
  for (auto& mem : b.members) {
    const VertexId w = e.map(mem.id);
    if (!images.insert(w).second) throw GraphError("embedding: not injective at " + to_string(mem.id));
    if (mem.distance == r) continue;
    for (auto& z : g.neighbors(mem.id)) {
      if (!e.domain(z)) continue;
      const VertexId wz = e.map(z);
      auto nb = g.neighbors(w);
      if (!std::binary_search(nb.begin(), nb.end(), wz))
        throw GraphError("embedding: edge (" + to_string(mem.id) + "," + to_string(z) + ") maps to non-edge (" +
                         to_string(w) + "," + to_string(wz) + ")");
    }
  }
  if (e.map(e.base_point) != e.target) throw GraphError("embedding: base point does not map to target");
  e.checked_radius = r;
  e.verified = true;
}

// Supported tags: "identity" (any family), "lower_half" (hair: translations of the
// half-space of non-positive height), "automorphism" (homogeneous and bihomogeneous trees).
inline GraphEmbedding embedding_for(const LazyGraph& g, const std::string& tag, const VertexId& target,
                                    long check_radius = 4) {
  g.require_valid(target);
  GraphEmbedding e;
  e.tag = tag;
  e.target = target;
  if (tag == "identity") {
    e.base_point = target;
    e.domain = [](const VertexId&) { return true; };
    e.map = [](const VertexId& v) { return v; };
  } else if (tag == "lower_half" && g.family() == "hair") {
    if (target[2] > 0) throw GraphError("embedding: lower_half target must have height <= 0");
    e.base_point = g.root();
    e.domain = [](const VertexId& v) { return v[2] <= 0; };
    e.map = [t = target](const VertexId& v) { return VertexId{v[0] + t[0], v[1] + t[1], v[2] + t[2]}; };
  } else if (tag == "automorphism" && (g.family() == "homogeneous_tree" || g.family() == "bihomogeneous_tree")) {
    const auto reps = g.orbit_representatives();
    e.base_point = reps.at(static_cast<std::size_t>(g.orbit_of(target)));
    const long radius = check_radius;
    auto corr = detail::tree_correspondence(g, e.base_point, target, radius);
    e.map = [corr](const VertexId& v) {
      auto it = corr->find(v);
      if (it == corr->end()) throw GraphError("embedding: vertex " + to_string(v) + " outside the constructed ball");
      return it->second;
    };
    // Only vertices of the constructed ball are in the domain.
    e.domain = [corr](const VertexId& v) { return corr->count(v) > 0; };
  } else {
    throw GraphError("embedding: unsupported family/subgraph pair (" + g.family() + ", " + tag + ")");
  }
  verify_embedding(g, e, check_radius);
  return e;
}

}  // namespace rwavg
