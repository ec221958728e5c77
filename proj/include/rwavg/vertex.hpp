#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

namespace rwavg {

// Canonical integer-tuple vertex encoding; ordering is lexicographic.
struct VertexId {
  std::vector<std::int64_t> c;

  VertexId() = default;
  VertexId(std::initializer_list<std::int64_t> l) : c(l) {}
  explicit VertexId(std::vector<std::int64_t> v) : c(std::move(v)) {}

  std::size_t size() const { return c.size(); }
  std::int64_t operator[](std::size_t i) const { return c[i]; }
  std::int64_t& operator[](std::size_t i) { return c[i]; }

  auto operator<=>(const VertexId&) const = default;
  bool operator==(const VertexId&) const = default;
};

struct VertexHash {
  std::size_t operator()(const VertexId& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull ^ v.c.size();
    for (auto x : v.c) {
      h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

inline std::string to_string(const VertexId& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.c.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v.c[i]);
  }
  return s + "]";
}

inline void to_json(nlohmann::json& j, const VertexId& v) { j = v.c; }
inline void from_json(const nlohmann::json& j, VertexId& v) {
  v.c = j.get<std::vector<std::int64_t>>();
}

}  // namespace rwavg
