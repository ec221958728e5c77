#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rwavg/vertex.hpp"

namespace rwavg {

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Infinite, locally finite graph given by a neighbour oracle.
// Implementations are immutable after construction, so concurrent queries are safe.
class LazyGraph {
 public:
  virtual ~LazyGraph() = default;

  virtual std::string family() const = 0;
  virtual nlohmann::json params() const = 0;
  virtual VertexId root() const = 0;
  virtual bool valid(const VertexId& v) const = 0;
  // Sorted, duplicate-free.
  virtual std::vector<VertexId> neighbors(const VertexId& v) const = 0;

  virtual std::size_t degree(const VertexId& v) const { return neighbors(v).size(); }

  // Uniform neighbour move, used by Monte Carlo walkers. r is a uniform 64-bit draw.
  virtual void step_uniform(VertexId& v, std::uint64_t r) const {
    auto nb = neighbors(v);
    v = nb[r % nb.size()];
  }

  virtual bool bounded_geometry() const { return true; }

  // Finitely many orbits under automorphisms (when known).
  virtual std::optional<int> orbit_count() const { return std::nullopt; }
  virtual int orbit_of(const VertexId&) const { return -1; }
  virtual std::vector<VertexId> orbit_representatives() const { return {}; }

  // Cheap lower bound on |B(v, r)|, used to fail fast before a large BFS.
  virtual double ball_size_lower_bound(const VertexId& /*v*/, long /*r*/) const { return 0.0; }

  // Name of the lattice this graph locally resembles ("Z", "Z3"), if any.
  virtual std::vector<std::string> reference_lattices() const { return {}; }

  // Distance from v to the nearest vertex whose neighbourhood differs from the
  // reference lattice (degree mismatch). For a simple random walk, f^(n)(v,v)
  // equals the reference coefficient whenever floor(n/2) < reference_radius.
  virtual long reference_radius(const VertexId& v, const std::string& ref) const {
    return bfs_reference_radius(v, ref, 4096);
  }

  void require_valid(const VertexId& v) const {
    if (!valid(v)) throw GraphError("invalid vertex " + to_string(v) + " for family " + family());
  }

 protected:
  static std::size_t reference_degree(const std::string& ref) {
    if (ref == "Z") return 2;
    if (ref == "Z2") return 4;
    if (ref == "Z3") return 6;
    throw GraphError("unknown reference lattice " + ref);
  }

  long bfs_reference_radius(const VertexId& v, const std::string& ref, long cap) const {
    const std::size_t want = reference_degree(ref);
    std::unordered_map<VertexId, long, VertexHash> seen{{v, 0}};
    std::vector<VertexId> frontier{v};
    for (long d = 0; d <= cap; ++d) {
      std::vector<VertexId> next;
      for (const auto& x : frontier) {
        if (degree(x) != want) return d;
        for (auto& y : neighbors(x)) {
          if (seen.emplace(y, d + 1).second) next.push_back(y);
        }
      }
      frontier.swap(next);
    }
    return cap;
  }
};

using GraphPtr = std::shared_ptr<const LazyGraph>;

}  // namespace rwavg
