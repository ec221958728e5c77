#include <gtest/gtest.h>

#include <map>

#include "fixtures.hpp"
#include "rwavg/kernel.hpp"

using namespace rwavg;
using nlohmann::json;

namespace {
GraphPtr fam(const std::string& tag, json params = json::object()) {
  return build_family(json{{"family", tag}, {"params", params}});
}
}  // namespace

TEST(Kernel, SimpleRowsOnPathAndTree) {
  auto k = kernel_for(fam("zd", {{"d", 1}}));
  auto r = k->row_exact(VertexId{0});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].first, VertexId{-1});
  EXPECT_EQ(r[1].first, VertexId{1});
  EXPECT_EQ(r[0].second, Rational(1, 2));
  EXPECT_EQ(r[1].second, Rational(1, 2));
  auto t = kernel_for(fam("homogeneous_tree", {{"q", 3}}));
  auto rt = t->row_exact(VertexId{0});
  ASSERT_EQ(rt.size(), 3u);
  for (auto& [y, p] : rt) EXPECT_EQ(p, Rational(1, 3));
}

TEST(Kernel, EveryFamilyValidates) {
  for (auto& spec : fixtures::all_family_specs()) {
    auto g = build_family(spec);
    auto k = default_kernel(g);
    auto chk = validate_kernel(*k, g->root(), 7);
    EXPECT_TRUE(chk.ok) << spec.dump() << ": " << chk.message;
    EXPECT_LE(chk.max_row_deficit, 1e-12);
  }
}

TEST(Kernel, TrtRowsSumToOneExactly) {
  auto g = fam("trt", {{"alpha", 0.25}, {"schedule", "rational_cubic"}});
  auto k = kernel_for(g, "custom");
  ASSERT_TRUE(k->has_exact_rows());
  for (std::int64_t n = 0; n <= 12; ++n)
    for (std::int64_t p = 0; p <= n; ++p) {
      Rational s = 0;
      for (auto& [y, pr] : k->row_exact(VertexId{n, p})) {
        EXPECT_GE(pr, 0);
        s += pr;
      }
      EXPECT_EQ(s, 1) << n << "," << p;
    }
}

TEST(Kernel, TrtDefaultScheduleIsIrrationalButNormalised) {
  auto g = fam("trt");
  auto k = kernel_for(g, "custom");
  EXPECT_FALSE(k->has_exact_rows());
  EXPECT_THROW(k->row_exact(VertexId{3, 0}), KernelError);
  const auto& trt = dynamic_cast<const TrtKernel&>(*k);
  for (std::int64_t n = 1; n <= 40; ++n) {
    const double pn = trt.p(n);
    EXPECT_NEAR(std::pow(pn, n), 1.0 - 1.0 / ((n + 1.0) * (n + 1.0)), 1e-13);
    if (n > 1) {
      EXPECT_GT(std::pow(pn, n), std::pow(trt.p(n - 1), n - 1));
    }
    double s = 0;
    for (auto& [y, pr] : k->row(VertexId{n, 0})) s += pr;
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
}

TEST(Kernel, TrtSamplerMatchesRows) {
  auto k = kernel_for(fam("trt"), "custom");
  const int M = 200000;
  for (auto x : {VertexId{0, 0}, VertexId{1, 0}, VertexId{1, 1}, VertexId{2, 0}, VertexId{5, 0}, VertexId{5, 3}}) {
    std::map<VertexId, int> hits;
    for (int i = 0; i < M; ++i) {
      VertexId v = x;
      k->step(v, (i + 0.5) / M, 0);
      ++hits[v];
    }
    std::map<VertexId, double> want;
    for (auto& [y, p] : k->row(x)) want[y] += p;
    for (auto& [y, c] : hits) {
      ASSERT_TRUE(want.count(y)) << to_string(x) << " -> " << to_string(y);
      EXPECT_NEAR(static_cast<double>(c) / M, want[y], 2.0 / M);
    }
  }
}

TEST(Kernel, DetailedBalance) {
  auto z = kernel_for(fam("zd", {{"d", 2}}));
  EXPECT_FALSE(detailed_balance_violation(*z, VertexId{0, 0}, 4).has_value());
  auto h = kernel_for(fam("hair"));
  EXPECT_FALSE(detailed_balance_violation(*h, VertexId{0, 0, 0}, 4).has_value());
  auto t = kernel_for(fam("trt"), "custom");
  EXPECT_FALSE(t->reversible());
  EXPECT_TRUE(detailed_balance_violation(*t, VertexId{0, 0}, 3).has_value());
}

TEST(Kernel, FactoryErrors) {
  EXPECT_THROW(kernel_for(fam("zd"), "custom"), KernelError);
  EXPECT_THROW(kernel_for(fam("zd"), "lazy"), KernelError);
  EXPECT_THROW(kernel_for(fam("trt"), "custom", json{{"schedule", "linear"}}), KernelError);
}

TEST(Kernel, SimpleStepFollowsNeighbours) {
  auto g = fam("cubes");
  auto k = kernel_for(g);
  VertexId v{3, 0, 0, 0};
  auto nb = g->neighbors(v);
  for (std::uint64_t r = 0; r < 10; ++r) {
    VertexId w = v;
    k->step(w, 0.0, r);
    EXPECT_TRUE(std::binary_search(nb.begin(), nb.end(), w));
  }
}
