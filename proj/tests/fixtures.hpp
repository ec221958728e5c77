#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rwavg/ball.hpp"
#include "rwavg/families.hpp"

namespace rwavg::fixtures {

inline std::vector<nlohmann::json> all_family_specs() {
  using nlohmann::json;
  return {
      json{{"family", "zd"}, {"params", {{"d", 1}}}},
      json{{"family", "zd"}, {"params", {{"d", 2}}}},
      json{{"family", "zd"}, {"params", {{"d", 3}}}},
      json{{"family", "homogeneous_tree"}, {"params", {{"q", 3}}}},
      json{{"family", "bihomogeneous_tree"}, {"params", {{"m", 2}, {"n", 3}}}},
      json{{"family", "tree_prime"}, {"params", {{"k", 3}, {"n", 2}}}},
      json{{"family", "tree_doubleprime"}, {"params", {{"k", 3}, {"n", 3}, {"seed", 5}}}},
      json{{"family", "trt"}, {"params", {{"alpha", 0.25}}}},
      json{{"family", "ntd"}, {"params", {{"alpha", 3}, {"beta", 2}}}},
      json{{"family", "nongeomlim"}, {"params", json::object()}},
      json{{"family", "hair"}, {"params", json::object()}},
      json{{"family", "cubes"}, {"params", json::object()}},
  };
}

// Root plus three vertices at BFS distances 1, 3 and 5 (first in vertex order).
inline std::vector<VertexId> sample_vertices(const LazyGraph& g) {
  const Ball b = ball(g, g.root(), 5);
  std::vector<VertexId> out{g.root()};
  for (long d : {1L, 3L, 5L}) {
    for (auto& m : b.members) {
      if (m.distance == d) {
        out.push_back(m.id);
        break;
      }
    }
  }
  return out;
}

}  // namespace rwavg::fixtures
