#pragma once

#include <algorithm>
#include <climits>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rwavg/graph.hpp"

namespace rwavg {

inline constexpr long kUnboundedRadius = LONG_MAX / 4;

// ---------------------------------------------------------------- Z^d

class ZdGraph final : public LazyGraph {
 public:
  explicit ZdGraph(int d) : d_(d) {
    if (d < 1 || d > 6) throw GraphError("zd: dimension d must satisfy 1 <= d <= 6");
  }
  int dim() const { return d_; }

  std::string family() const override { return "zd"; }
  nlohmann::json params() const override { return {{"d", d_}}; }
  VertexId root() const override { return VertexId(std::vector<std::int64_t>(d_, 0)); }
  bool valid(const VertexId& v) const override { return static_cast<int>(v.size()) == d_; }

  std::vector<VertexId> neighbors(const VertexId& v) const override {
    std::vector<VertexId> out;
    out.reserve(2 * d_);
    for (int i = 0; i < d_; ++i) {
      for (int s : {-1, 1}) {
        VertexId w = v;
        w[i] += s;
        out.push_back(std::move(w));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::size_t degree(const VertexId&) const override { return 2 * d_; }
  void step_uniform(VertexId& v, std::uint64_t r) const override {
    auto k = r % (2 * d_);
    v[k / 2] += (k & 1) ? 1 : -1;
  }

  std::optional<int> orbit_count() const override { return 1; }
  int orbit_of(const VertexId&) const override { return 0; }
  std::vector<VertexId> orbit_representatives() const override { return {root()}; }

  std::vector<std::string> reference_lattices() const override {
    return {d_ == 1 ? "Z" : "Z" + std::to_string(d_)};
  }
  long reference_radius(const VertexId&, const std::string& ref) const override {
    return ref == reference_lattices()[0] ? kUnboundedRadius : 0;
  }

 private:
  int d_;
};

// ---------------------------------------------------------------- radial trees
//
// Trees that are spherically symmetric about the root: every vertex at level l
// has children(l) children. A vertex is encoded as [l, i_1, ..., i_k], where
// i_j is the child index chosen at the j-th branching level (children >= 2)
// strictly below l.

class RadialTree final : public LazyGraph {
 public:
  enum class Kind { Homogeneous, Bihomogeneous, Prime, DoublePrime, Ntd, NonGeomLim };

  // special: sorted (level, children) pairs for every level whose child count is not 1.
  RadialTree(Kind kind, std::string tag, nlohmann::json params,
             std::vector<std::pair<std::int64_t, std::int64_t>> special, std::int64_t max_level,
             std::optional<std::int64_t> period = std::nullopt,
             std::vector<std::int64_t> period_children = {})
      : kind_(kind), tag_(std::move(tag)), params_(std::move(params)), max_level_(max_level),
        period_(period), period_children_(std::move(period_children)) {
    if (period_) {
      return;
    }
    levels_.reserve(special.size());
    counts_.reserve(special.size());
    for (auto& [l, c] : special) {
      levels_.push_back(l);
      counts_.push_back(c);
      if (c >= 2) branch_.push_back(l);
    }
  }

  Kind kind() const { return kind_; }
  std::int64_t max_level() const { return max_level_; }

  std::int64_t children(std::int64_t level) const {
    if (level < 0 || level > max_level_) throw GraphError(tag_ + ": level beyond generated range");
    if (period_) {
      if (level == 0) return period_children_[0];
      return period_children_[1 + (level - 1) % *period_];
    }
    auto it = std::lower_bound(levels_.begin(), levels_.end(), level);
    if (it != levels_.end() && *it == level) return counts_[it - levels_.begin()];
    return 1;
  }
  std::int64_t level_degree(std::int64_t level) const {
    return children(level) + (level > 0 ? 1 : 0);
  }
  // Number of branching levels strictly below `level`.
  std::int64_t branchings_below(std::int64_t level) const {
    if (period_) {
      std::int64_t n = 0;
      if (level > 0 && period_children_[0] >= 2) ++n;
      if (level > 1) {
        const auto p = *period_;
        const std::int64_t full = (level - 1) / p, rem = (level - 1) % p;
        std::int64_t per = 0, part = 0;
        for (std::int64_t j = 0; j < p; ++j) {
          if (period_children_[1 + j] >= 2) {
            ++per;
            if (j < rem) ++part;
          }
        }
        n += full * per + part;
      }
      return n;
    }
    return std::lower_bound(branch_.begin(), branch_.end(), level) - branch_.begin();
  }

  std::string family() const override { return tag_; }
  nlohmann::json params() const override { return params_; }
  VertexId root() const override { return VertexId{0}; }

  bool valid(const VertexId& v) const override {
    if (v.size() == 0 || v[0] < 0 || v[0] > max_level_) return false;
    const std::int64_t l = v[0];
    if (static_cast<std::int64_t>(v.size()) != 1 + branchings_below(l)) return false;
    // Check each index against the child count of its branching level.
    std::size_t k = 1;
    std::int64_t lev = 0;
    while (k < v.size()) {
      while (children(lev) < 2) ++lev;
      if (v[k] < 0 || v[k] >= children(lev)) return false;
      ++k;
      ++lev;
    }
    return true;
  }

  std::vector<VertexId> neighbors(const VertexId& v) const override {
    std::vector<VertexId> out;
    const std::int64_t l = v[0];
    if (l > 0) out.push_back(parent(v));
    const auto c = children(l);
    if (c == 1) {
      VertexId w = v;
      w[0] = l + 1;
      out.push_back(std::move(w));
    } else {
      for (std::int64_t j = 0; j < c; ++j) {
        VertexId w = v;
        w[0] = l + 1;
        w.c.push_back(j);
        out.push_back(std::move(w));
      }
    }
    return out;
  }
  std::size_t degree(const VertexId& v) const override {
    return static_cast<std::size_t>(level_degree(v[0]));
  }
  void step_uniform(VertexId& v, std::uint64_t r) const override {
    const std::int64_t l = v[0];
    const auto c = children(l);
    const auto deg = static_cast<std::uint64_t>(c + (l > 0 ? 1 : 0));
    auto k = static_cast<std::int64_t>(r % deg);
    if (l > 0) {
      if (k == 0) {
        if (children(l - 1) >= 2) v.c.pop_back();
        v[0] = l - 1;
        return;
      }
      --k;
    }
    v[0] = l + 1;
    if (c >= 2) v.c.push_back(k);
  }

  VertexId parent(const VertexId& v) const {
    VertexId w = v;
    w[0] = v[0] - 1;
    if (children(v[0] - 1) >= 2) w.c.pop_back();
    return w;
  }

  bool bounded_geometry() const override { return kind_ != Kind::NonGeomLim; }

  std::optional<int> orbit_count() const override {
    switch (kind_) {
      case Kind::Homogeneous: return 1;
      case Kind::Bihomogeneous: return 2;
      case Kind::Prime: return 1 + static_cast<int>(*period_ / 2);
      default: return std::nullopt;
    }
  }
  int orbit_of(const VertexId& v) const override {
    switch (kind_) {
      case Kind::Homogeneous: return 0;
      case Kind::Bihomogeneous: return (v[0] % 2 == 0) ? 0 : 1;
      case Kind::Prime: {
        const auto p = *period_;
        const auto pos = v[0] % p;
        return static_cast<int>(std::min(pos, p - pos));
      }
      default: return -1;
    }
  }
  std::vector<VertexId> orbit_representatives() const override {
    auto n = orbit_count();
    if (!n) return {};
    std::vector<VertexId> reps;
    for (int k = 0; k < *n; ++k) {
      // Walk down the first-child path to level k.
      VertexId v = root();
      for (int s = 0; s < k; ++s) step_uniform(v, v[0] > 0 ? 1 : 0);
      reps.push_back(v);
    }
    return reps;
  }

  // Degrees by distance from v (d = 0..depth) when the tree is spherically
  // symmetric about v; empty otherwise.
  std::vector<std::int64_t> radial_degrees_about(const VertexId& v, std::int64_t depth) const {
    std::vector<std::int64_t> deg;
    const bool is_root = v[0] == 0;
    if (kind_ == Kind::Homogeneous) {
      deg.assign(depth + 1, level_degree(1));
      deg[0] = children(0);
    } else if (kind_ == Kind::Bihomogeneous) {
      const auto d0 = level_degree(v[0]);
      const auto d1 = level_degree(v[0] + 1);
      for (std::int64_t d = 0; d <= depth; ++d) deg.push_back(d % 2 == 0 ? d0 : d1);
    } else if (is_root) {
      for (std::int64_t d = 0; d <= depth; ++d) deg.push_back(level_degree(d));
    }
    return deg;
  }

  std::vector<std::string> reference_lattices() const override { return {"Z"}; }
  long reference_radius(const VertexId& v, const std::string& ref) const override {
    if (ref != "Z") return 0;
    const std::int64_t l = v[0];
    if (level_degree(l) != 2) return 0;
    std::int64_t down = kUnboundedRadius, up = kUnboundedRadius;
    if (auto s = next_special(l + 1)) down = *s - l;
    if (auto s = prev_special(l - 1)) {
      up = l - *s;
    } else if (auto s2 = next_special(1)) {
      up = l + *s2;  // root of degree 2: the nearest special vertex sits in a sibling branch
    }
    return static_cast<long>(std::min(up, down));
  }

  // Smallest level >= from whose degree differs from 2.
  std::optional<std::int64_t> next_special(std::int64_t from) const {
    if (from <= 0) {
      if (level_degree(0) != 2) return 0;
      from = 1;
    }
    if (period_) {
      for (std::int64_t lev = from; lev < from + *period_ + 1; ++lev)
        if (children(lev) != 1) return lev;
      return std::nullopt;
    }
    auto it = std::lower_bound(levels_.begin(), levels_.end(), from);
    if (it == levels_.end()) return std::nullopt;
    return *it;
  }
  // Largest level <= from whose degree differs from 2.
  std::optional<std::int64_t> prev_special(std::int64_t from) const {
    if (from < 0) return std::nullopt;
    if (period_) {
      for (std::int64_t lev = from; lev >= std::max<std::int64_t>(1, from - *period_); --lev)
        if (children(lev) != 1) return lev;
      if (from - *period_ <= 0 && level_degree(0) != 2) return 0;
      return std::nullopt;
    }
    auto it = std::upper_bound(levels_.begin(), levels_.end(), from);
    while (it != levels_.begin()) {
      --it;
      if (*it > 0) return *it;
      if (level_degree(0) != 2) return 0;
      break;
    }
    if (from >= 0 && level_degree(0) != 2) return 0;
    return std::nullopt;
  }

 private:
  Kind kind_;
  std::string tag_;
  nlohmann::json params_;
  std::int64_t max_level_;
  std::optional<std::int64_t> period_;
  std::vector<std::int64_t> period_children_;  // [root, levels 1..period]
  std::vector<std::int64_t> levels_, counts_, branch_;
};

// ---------------------------------------------------------------- TRT
//
// Vertices (n,p) with p in Z_{n+1}; spine edges (n,0)-(n+1,0), cycle edges (n,p)-(n,p+1).

class TrtGraph final : public LazyGraph {
 public:
  TrtGraph(double alpha, nlohmann::json params) : alpha_(alpha), params_(std::move(params)) {}
  double alpha() const { return alpha_; }

  std::string family() const override { return "trt"; }
  nlohmann::json params() const override { return params_; }
  VertexId root() const override { return VertexId{0, 0}; }
  bool valid(const VertexId& v) const override {
    return v.size() == 2 && v[0] >= 0 && v[1] >= 0 && v[1] <= v[0];
  }
  std::vector<VertexId> neighbors(const VertexId& v) const override {
    const auto n = v[0], p = v[1];
    std::vector<VertexId> out;
    if (p == 0) {
      if (n >= 1) out.push_back({n - 1, 0});
      out.push_back({n + 1, 0});
    }
    if (n >= 1) {
      const auto m = n + 1;
      out.push_back({n, (p + 1) % m});
      out.push_back({n, (p + m - 1) % m});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  double alpha_;
  nlohmann::json params_;
};

// ---------------------------------------------------------------- hair graph
//
// Z^3 without the horizontal edges between vertices of positive height.

class HairGraph final : public LazyGraph {
 public:
  std::string family() const override { return "hair"; }
  nlohmann::json params() const override { return nlohmann::json::object(); }
  VertexId root() const override { return VertexId{0, 0, 0}; }
  bool valid(const VertexId& v) const override { return v.size() == 3; }
  static bool upper(const VertexId& v) { return v[2] > 0; }

  std::vector<VertexId> neighbors(const VertexId& v) const override {
    std::vector<VertexId> out;
    if (v[2] > 0) {
      out.push_back({v[0], v[1], v[2] - 1});
      out.push_back({v[0], v[1], v[2] + 1});
      return out;
    }
    for (int i = 0; i < 3; ++i) {
      for (int s : {-1, 1}) {
        VertexId w = v;
        w[i] += s;
        out.push_back(std::move(w));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::size_t degree(const VertexId& v) const override { return v[2] > 0 ? 2 : 6; }
  void step_uniform(VertexId& v, std::uint64_t r) const override {
    if (v[2] > 0) {
      v[2] += (r & 1) ? 1 : -1;
      return;
    }
    auto k = r % 6;
    v[k / 2] += (k & 1) ? 1 : -1;
  }
  std::vector<std::string> reference_lattices() const override { return {"Z", "Z3"}; }
  long reference_radius(const VertexId& v, const std::string& ref) const override {
    if (ref == "Z") return v[2] > 0 ? static_cast<long>(v[2]) : 0;
    if (ref == "Z3") return v[2] <= 0 ? static_cast<long>(1 - v[2]) : 0;
    return 0;
  }
};

// ---------------------------------------------------------------- cubes graph
//
// Spine N; cube {0..n_i}^3 attached to spine vertex i at its all-zeros corner.
// Vertex (i,a,b,c); the spine vertex i is (i,0,0,0).

class CubesGraph final : public LazyGraph {
 public:
  CubesGraph(std::int64_t scale, std::int64_t offset) : scale_(scale), offset_(offset) {
    if (scale < 1 || offset < 0) throw GraphError("cubes: side n_i = scale*i + offset needs scale >= 1, offset >= 0");
  }
  std::int64_t side(std::int64_t i) const { return scale_ * i + offset_; }

  std::string family() const override { return "cubes"; }
  nlohmann::json params() const override { return {{"scale", scale_}, {"offset", offset_}}; }
  VertexId root() const override { return VertexId{0, 0, 0, 0}; }
  bool valid(const VertexId& v) const override {
    if (v.size() != 4 || v[0] < 0) return false;
    const auto s = side(v[0]);
    for (int k = 1; k < 4; ++k)
      if (v[k] < 0 || v[k] > s) return false;
    return true;
  }
  static bool on_spine(const VertexId& v) { return v[1] == 0 && v[2] == 0 && v[3] == 0; }

  std::vector<VertexId> neighbors(const VertexId& v) const override {
    std::vector<VertexId> out;
    const auto s = side(v[0]);
    for (int k = 1; k < 4; ++k) {
      if (v[k] > 0) {
        VertexId w = v;
        w[k] -= 1;
        out.push_back(std::move(w));
      }
      if (v[k] < s) {
        VertexId w = v;
        w[k] += 1;
        out.push_back(std::move(w));
      }
    }
    if (on_spine(v)) {
      if (v[0] >= 1) out.push_back({v[0] - 1, 0, 0, 0});
      out.push_back({v[0] + 1, 0, 0, 0});
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::size_t degree(const VertexId& v) const override {
    const auto s = side(v[0]);
    std::size_t d = on_spine(v) ? (v[0] >= 1 ? 2 : 1) : 0;
    for (int k = 1; k < 4; ++k) d += (v[k] > 0 ? 1 : 0) + (v[k] < s ? 1 : 0);
    return d;
  }
  void step_uniform(VertexId& v, std::uint64_t r) const override {
    const auto s = side(v[0]);
    std::uint64_t k = r % degree(v);
    for (int c = 1; c < 4; ++c) {
      if (v[c] > 0 && k-- == 0) {
        v[c] -= 1;
        return;
      }
      if (v[c] < s && k-- == 0) {
        v[c] += 1;
        return;
      }
    }
    if (v[0] >= 1 && k-- == 0) {
      v[0] -= 1;
      return;
    }
    v[0] += 1;
  }
  std::vector<std::string> reference_lattices() const override { return {"Z3"}; }

  // Counts the other cubes' points reachable through the spine.
  double ball_size_lower_bound(const VertexId& v, long r) const override {
    const std::int64_t up = v[1] + v[2] + v[3];
    double total = 0.0;
    for (std::int64_t j = std::max<std::int64_t>(0, v[0] - r); j <= v[0] + r; ++j) {
      if (j == v[0]) continue;
      const std::int64_t m = r - up - (j > v[0] ? j - v[0] : v[0] - j);
      if (m >= 0) total += corner_simplex_count(side(j), m);
    }
    return total;
  }

  long reference_radius(const VertexId& v, const std::string& ref) const override {
    if (ref != "Z3") return 0;
    const auto s = side(v[0]);
    std::int64_t r = kUnboundedRadius;
    for (int k = 1; k < 4; ++k) r = std::min({r, v[k], s - v[k]});
    return static_cast<long>(r);
  }

 private:
  // #{(a,b,c) in {0..s}^3 : a+b+c <= m} by inclusion-exclusion.
  static double corner_simplex_count(std::int64_t s, std::int64_t m) {
    auto tet = [](std::int64_t t) { return t < 0 ? 0.0 : (t + 1.0) * (t + 2.0) * (t + 3.0) / 6.0; };
    return tet(m) - 3.0 * tet(m - (s + 1)) + 3.0 * tet(m - 2 * (s + 1)) - tet(m - 3 * (s + 1));
  }

  std::int64_t scale_, offset_;
};

// ---------------------------------------------------------------- construction

namespace detail {

inline std::int64_t get_int(const nlohmann::json& p, const char* key, std::int64_t dflt) {
  if (!p.contains(key)) return dflt;
  if (!p.at(key).is_number_integer()) throw GraphError(std::string("parameter '") + key + "' must be an integer");
  return p.at(key).get<std::int64_t>();
}

inline double get_num(const nlohmann::json& p, const char* key, double dflt) {
  if (!p.contains(key)) return dflt;
  if (!p.at(key).is_number()) throw GraphError(std::string("parameter '") + key + "' must be a number");
  return p.at(key).get<double>();
}

inline constexpr std::int64_t kDenseLevels = 1 << 20;
inline constexpr std::int64_t kSparseLevels = std::int64_t{1} << 40;

}  // namespace detail

inline std::shared_ptr<RadialTree> make_homogeneous_tree(std::int64_t q) {
  if (q < 2) throw GraphError("homogeneous_tree: degree q must satisfy q >= 2");
  return std::make_shared<RadialTree>(RadialTree::Kind::Homogeneous, "homogeneous_tree",
                                      nlohmann::json{{"q", q}}, std::vector<std::pair<std::int64_t, std::int64_t>>{},
                                      detail::kSparseLevels, 1, std::vector<std::int64_t>{q, q - 1});
}

inline std::shared_ptr<RadialTree> make_bihomogeneous_tree(std::int64_t m, std::int64_t n) {
  if (m < 2 || n < 2) throw GraphError("bihomogeneous_tree: requires m >= 2 and n >= 2");
  // Root has degree m; odd levels degree n, even levels degree m.
  return std::make_shared<RadialTree>(RadialTree::Kind::Bihomogeneous, "bihomogeneous_tree",
                                      nlohmann::json{{"m", m}, {"n", n}},
                                      std::vector<std::pair<std::int64_t, std::int64_t>>{}, detail::kSparseLevels, 2,
                                      std::vector<std::int64_t>{m, n - 1, m - 1});
}

inline std::shared_ptr<RadialTree> make_tree_prime(std::int64_t k, std::int64_t n) {
  if (k < 3 || n < 1) throw GraphError("tree_prime: requires k >= 3 and n >= 1");
  std::vector<std::int64_t> pc{k};
  for (std::int64_t j = 1; j <= n; ++j) pc.push_back(j == n ? k - 1 : 1);
  return std::make_shared<RadialTree>(RadialTree::Kind::Prime, "tree_prime", nlohmann::json{{"k", k}, {"n", n}},
                                      std::vector<std::pair<std::int64_t, std::int64_t>>{}, detail::kSparseLevels, n,
                                      pc);
}

inline std::shared_ptr<RadialTree> make_tree_doubleprime(std::int64_t k, std::int64_t n, std::uint64_t seed) {
  if (k < 3 || n < 1) throw GraphError("tree_doubleprime: requires k >= 3 and n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> gap(1, n);
  std::vector<std::pair<std::int64_t, std::int64_t>> special{{0, k}};
  for (std::int64_t l = gap(rng); l <= detail::kDenseLevels; l += gap(rng)) special.emplace_back(l, k - 1);
  return std::make_shared<RadialTree>(RadialTree::Kind::DoublePrime, "tree_doubleprime",
                                      nlohmann::json{{"k", k}, {"n", n}, {"seed", seed}}, std::move(special),
                                      detail::kDenseLevels);
}

inline std::shared_ptr<RadialTree> make_ntd(std::int64_t alpha, std::int64_t beta) {
  if (beta < 2) throw GraphError("ntd: beta must be an integer >= 2");
  if (alpha < 1) throw GraphError("ntd: alpha must be a natural number >= 1");
  std::vector<std::pair<std::int64_t, std::int64_t>> special;
  if (alpha != 1) {
    std::int64_t s = 0, pw = 1;
    special.emplace_back(0, alpha);
    while (true) {
      pw *= beta;
      s += pw;
      if (s > detail::kSparseLevels) break;
      special.emplace_back(s, alpha);
    }
  }
  return std::make_shared<RadialTree>(RadialTree::Kind::Ntd, "ntd", nlohmann::json{{"alpha", alpha}, {"beta", beta}},
                                      std::move(special), detail::kSparseLevels);
}

inline std::shared_ptr<RadialTree> make_nongeomlim(std::int64_t s1) {
  if (s1 < 1) throw GraphError("nongeomlim: s1 must be >= 1");
  std::vector<std::pair<std::int64_t, std::int64_t>> special;
  std::int64_t s = s1;
  for (std::int64_t j = 1; s <= detail::kDenseLevels; ++j) {
    if (j >= 2) special.emplace_back(s, j);
    s += j + 1;
  }
  return std::make_shared<RadialTree>(RadialTree::Kind::NonGeomLim, "nongeomlim", nlohmann::json{{"s1", s1}},
                                      std::move(special), detail::kDenseLevels);
}

inline GraphPtr build_family(const nlohmann::json& spec) {
  if (!spec.contains("family") || !spec.at("family").is_string())
    throw GraphError("graph spec: missing string field 'family'");
  const auto fam = spec.at("family").get<std::string>();
  const nlohmann::json p = spec.contains("params") ? spec.at("params") : nlohmann::json::object();
  using detail::get_int;
  using detail::get_num;
  if (fam == "zd") return std::make_shared<ZdGraph>(static_cast<int>(get_int(p, "d", 2)));
  if (fam == "homogeneous_tree") return make_homogeneous_tree(get_int(p, "q", 3));
  if (fam == "bihomogeneous_tree") return make_bihomogeneous_tree(get_int(p, "m", 2), get_int(p, "n", 3));
  if (fam == "tree_prime") return make_tree_prime(get_int(p, "k", 3), get_int(p, "n", 2));
  if (fam == "tree_doubleprime")
    return make_tree_doubleprime(get_int(p, "k", 3), get_int(p, "n", 2),
                                 static_cast<std::uint64_t>(get_int(p, "seed", 1)));
  if (fam == "ntd") return make_ntd(get_int(p, "alpha", 3), get_int(p, "beta", 2));
  if (fam == "nongeomlim") return make_nongeomlim(get_int(p, "s1", 1));
  if (fam == "trt") {
    const double alpha = get_num(p, "alpha", 0.25);
    if (!(alpha > 0.0 && alpha < 1.0 / 3.0)) throw GraphError("trt: alpha must satisfy 0 < alpha < 1/3");
    nlohmann::json q = p;
    q["alpha"] = alpha;
    if (!q.contains("schedule")) q["schedule"] = "inverse_square";
    return std::make_shared<TrtGraph>(alpha, q);
  }
  if (fam == "hair") return std::make_shared<HairGraph>();
  if (fam == "cubes") return std::make_shared<CubesGraph>(get_int(p, "scale", 1), get_int(p, "offset", 0));
  throw GraphError("unknown family tag '" + fam + "'");
}

}  // namespace rwavg
