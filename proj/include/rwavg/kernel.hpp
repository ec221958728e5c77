#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rwavg/ball.hpp"
#include "rwavg/families.hpp"
#include "rwavg/numeric.hpp"

namespace rwavg {

struct KernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T>
using Row = std::vector<std::pair<VertexId, T>>;

// Transition probabilities adapted to a LazyGraph.
class WalkKernel {
 public:
  explicit WalkKernel(GraphPtr g) : graph_(std::move(g)) {}
  virtual ~WalkKernel() = default;

  const LazyGraph& graph() const { return *graph_; }
  GraphPtr graph_ptr() const { return graph_; }

  virtual std::string kind() const = 0;
  virtual Row<double> row(const VertexId& x) const = 0;
  virtual bool has_exact_rows() const { return false; }
  virtual Row<Rational> row_exact(const VertexId& /*x*/) const {
    throw KernelError("kernel '" + kind() + "' has irrational entries; exact-rational mode unavailable");
  }
  // Reversibility measure m(x), when the walk is reversible.
  virtual std::optional<double> measure(const VertexId&) const { return std::nullopt; }
  virtual bool reversible() const { return false; }
  virtual bool simple() const { return false; }

  // One Monte Carlo step; u is uniform in [0,1), r a uniform 64-bit draw.
  virtual void step(VertexId& v, double u, std::uint64_t r) const {
    (void)r;
    auto rw = row(v);
    double acc = 0.0;
    for (auto& [y, p] : rw) {
      acc += p;
      if (u < acc) {
        v = y;
        return;
      }
    }
    v = rw.back().first;
  }

  template <class T>
  Row<T> row_as(const VertexId& x) const {
    if constexpr (std::is_same_v<T, double>) {
      return row(x);
    } else {
      return row_exact(x);
    }
  }

 protected:
  GraphPtr graph_;
};

using KernelPtr = std::shared_ptr<const WalkKernel>;

class SimpleKernel final : public WalkKernel {
 public:
  using WalkKernel::WalkKernel;
  std::string kind() const override { return "simple"; }
  Row<double> row(const VertexId& x) const override {
    auto nb = graph_->neighbors(x);
    const double p = 1.0 / static_cast<double>(nb.size());
    Row<double> out;
    out.reserve(nb.size());
    for (auto& y : nb) out.emplace_back(std::move(y), p);
    return out;
  }
  bool has_exact_rows() const override { return true; }
  Row<Rational> row_exact(const VertexId& x) const override {
    auto nb = graph_->neighbors(x);
    const Rational p(1, static_cast<long>(nb.size()));
    Row<Rational> out;
    for (auto& y : nb) out.emplace_back(std::move(y), p);
    return out;
  }
  std::optional<double> measure(const VertexId& x) const override {
    return static_cast<double>(graph_->degree(x));
  }
  bool reversible() const override { return true; }
  bool simple() const override { return true; }
  void step(VertexId& v, double, std::uint64_t r) const override { graph_->step_uniform(v, r); }
};

// Custom kernel on the TRT graph with spine drift and cycle rotation.
class TrtKernel final : public WalkKernel {
 public:
  // schedule: "inverse_square" p_n = (1-(n+1)^-2)^(1/n); "rational_cubic" p_n = 1-(n+1)^-3.
  TrtKernel(GraphPtr g, double alpha, std::string schedule)
      : WalkKernel(std::move(g)), alpha_(alpha), alpha_q_(alpha), schedule_(std::move(schedule)) {
    if (!(alpha > 0.0 && alpha < 1.0 / 3.0)) throw KernelError("trt kernel: alpha must satisfy 0 < alpha < 1/3");
    if (schedule_ != "inverse_square" && schedule_ != "rational_cubic")
      throw KernelError("trt kernel: unknown schedule '" + schedule_ + "'");
  }
  std::string kind() const override { return "custom"; }
  double alpha() const { return alpha_; }
  const std::string& schedule() const { return schedule_; }

  double p(std::int64_t n) const {
    const double m = static_cast<double>(n + 1);
    if (schedule_ == "inverse_square") return std::pow(1.0 - 1.0 / (m * m), 1.0 / static_cast<double>(n));
    return 1.0 - 1.0 / (m * m * m);
  }
  Rational p_exact(std::int64_t n) const {
    if (schedule_ != "rational_cubic") throw KernelError("trt kernel: schedule '" + schedule_ + "' is irrational");
    const long m = static_cast<long>(n + 1);
    return Rational(1) - Rational(1, m * m * m);
  }

  Row<double> row(const VertexId& x) const override { return build<double>(x); }
  bool has_exact_rows() const override { return schedule_ == "rational_cubic"; }

  void step(VertexId& v, double u, std::uint64_t) const override {
    const auto n = v[0], q = v[1];
    if (n == 0 || (n == 1 && q == 1)) {
      v[0] = 1;
      v[1] = 0;
      return;
    }
    const double pn = p(n), a = (1.0 - pn) * alpha_;
    if (q != 0) {
      const auto m = n + 1;
      v[1] = u < pn ? (q + 1) % m : (q + m - 1) % m;
      return;
    }
    if (u < a) {
      v[0] = n - 1;
    } else if (u < a + pn) {
      v[1] = 1;
    } else if (u < 2 * a + pn) {
      v[1] = n;  // for n = 1 this is (1,1) as well
    } else {
      v[0] = n + 1;
    }
  }
  Row<Rational> row_exact(const VertexId& x) const override { return build<Rational>(x); }

 private:
  template <class T>
  Row<T> build(const VertexId& x) const {
    const auto n = x[0], q = x[1];
    Row<T> out;
    if (n == 0 || (n == 1 && q == 1)) {
      out.emplace_back(VertexId{1, 0}, T(1));
      return out;
    }
    T pn, a;
    if constexpr (std::is_same_v<T, double>) {
      pn = p(n);
      a = alpha_;
    } else {
      pn = p_exact(n);
      a = alpha_q_;
    }
    const T one(1), two(2);
    if (n == 1) {
      out.emplace_back(VertexId{0, 0}, (one - pn) * a);
      out.emplace_back(VertexId{1, 1}, pn + (one - pn) * a);
      out.emplace_back(VertexId{2, 0}, (one - pn) * (one - two * a));
    } else if (q == 0) {
      out.emplace_back(VertexId{n - 1, 0}, (one - pn) * a);
      out.emplace_back(VertexId{n, 1}, pn);
      out.emplace_back(VertexId{n, n}, (one - pn) * a);
      out.emplace_back(VertexId{n + 1, 0}, (one - pn) * (one - two * a));
    } else {
      const auto m = n + 1;
      out.emplace_back(VertexId{n, (q + 1) % m}, pn);
      out.emplace_back(VertexId{n, (q + m - 1) % m}, one - pn);
      std::sort(out.begin(), out.end(), [](auto& l, auto& r) { return l.first < r.first; });
    }
    return out;
  }

  double alpha_;
  Rational alpha_q_;
  std::string schedule_;
};

struct KernelCheck {
  bool ok = true;
  std::string message;
  double max_row_deficit = 0.0;
};

// Row sums, adaptedness and (when claimed) detailed balance on B(center, r).
inline KernelCheck validate_kernel(const WalkKernel& k, const VertexId& center, long r, double tol = 1e-12) {
  const auto& g = k.graph();
  const Ball b = ball(g, center, r);
  KernelCheck out;
  for (auto& mem : b.members) {
    const auto& x = mem.id;
    auto nb = g.neighbors(x);
    if (k.has_exact_rows()) {
      Rational s = 0;
      for (auto& [y, p] : k.row_exact(x)) s += p;
      if (s != 1) {
        out.ok = false;
        out.message = "row sum at " + to_string(x) + " is " + s.str();
        out.max_row_deficit = std::max(out.max_row_deficit, std::fabs(1.0 - to_double(s)));
        return out;
      }
    }
    CompensatedSum s;
    for (auto& [y, p] : k.row(x)) {
      s.add(p);
      if (p < 0.0) {
        out.ok = false;
        out.message = "negative probability at " + to_string(x);
        return out;
      }
      if (y != x && !std::binary_search(nb.begin(), nb.end(), y)) {
        out.ok = false;
        out.message = "non-adapted transition " + to_string(x) + " -> " + to_string(y);
        return out;
      }
    }
    const double deficit = std::fabs(1.0 - s.value());
    out.max_row_deficit = std::max(out.max_row_deficit, deficit);
    if (deficit > tol) {
      out.ok = false;
      out.message = "row sum deficit " + std::to_string(deficit) + " at " + to_string(x);
      return out;
    }
  }
  return out;
}

// Detailed-balance scan; returns the first violating edge, if any.
inline std::optional<std::string> detailed_balance_violation(const WalkKernel& k, const VertexId& center, long r,
                                                             double tol = 1e-12) {
  const auto& g = k.graph();
  const Ball b = ball(g, center, r);
  for (auto& mem : b.members) {
    const auto mx = k.measure(mem.id);
    if (!mx) return "no reversibility measure at " + to_string(mem.id);
    for (auto& [y, pxy] : k.row(mem.id)) {
      double pyx = 0.0;
      for (auto& [z, p] : k.row(y))
        if (z == mem.id) pyx = p;
      const auto my = k.measure(y);
      if (!my) return "no reversibility measure at " + to_string(y);
      if (std::fabs(*mx * pxy - *my * pyx) > tol * std::max(1.0, *mx * pxy))
        return "edge (" + to_string(mem.id) + "," + to_string(y) + ")";
    }
  }
  return std::nullopt;
}

// Kernel factory. kind: "simple" or "custom" (TRT family only).
inline KernelPtr kernel_for(GraphPtr g, const std::string& kind = "simple",
                            const nlohmann::json& params = nlohmann::json::object()) {
  KernelPtr k;
  if (kind == "simple") {
    k = std::make_shared<SimpleKernel>(g);
  } else if (kind == "custom") {
    if (g->family() != "trt") throw KernelError("custom kernel is only defined for the trt family");
    const auto gp = g->params();
    const double alpha = params.value("alpha", gp.value("alpha", 0.25));
    const std::string sched = params.value("schedule", gp.value("schedule", std::string("inverse_square")));
    k = std::make_shared<TrtKernel>(g, alpha, sched);
  } else {
    throw KernelError("unknown kernel kind '" + kind + "'");
  }
  auto chk = validate_kernel(*k, g->root(), 6);
  if (!chk.ok) throw KernelError("kernel validation failed: " + chk.message);
  return k;
}

// Default kernel of a family: TRT uses its custom walk, everything else the simple walk.
inline KernelPtr default_kernel(GraphPtr g) {
  return kernel_for(g, g->family() == "trt" ? "custom" : "simple");
}

}  // namespace rwavg
