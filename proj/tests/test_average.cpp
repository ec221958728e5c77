#include <gtest/gtest.h>

#include <cmath>

#include "rwavg/genfun.hpp"
#include "rwavg/measure.hpp"
#include "rwavg/series.hpp"

using namespace rwavg;
using nlohmann::json;

namespace {
GraphPtr fam(const std::string& tag, json params = json::object()) {
  return build_family(json{{"family", tag}, {"params", params}});
}
}  // namespace

TEST(Measure, BallWeightsOnZAndTree) {
  auto z = fam("zd", {{"d", 1}});
  auto lam = measure_balls(z, z->root());
  auto l2 = lam.at(2);
  ASSERT_EQ(l2.atoms.size(), 5u);
  for (auto& a : l2.atoms) EXPECT_DOUBLE_EQ(a.mass, 0.2);
  auto t = fam("homogeneous_tree", {{"q", 3}});
  auto lt = measure_balls(t, t->root()).at(1);
  ASSERT_EQ(lt.atoms.size(), 4u);
  for (auto& a : lt.atoms) EXPECT_DOUBLE_EQ(a.mass, 0.25);
}

TEST(Measure, ClassResolutionMatchesVertexResolution) {
  // Invariant functions per family: level for trees, height for hair, coordinate sum for cubes.
  std::vector<std::pair<std::string, VertexFn>> cases{
      {"zd", [](const VertexId&) { return 1.0; }},
      {"homogeneous_tree", [](const VertexId& v) { return static_cast<double>(v[0]); }},
      {"bihomogeneous_tree", [](const VertexId& v) { return static_cast<double>(v[0]); }},
      {"ntd", [](const VertexId& v) { return static_cast<double>(v[0]); }},
      {"hair", [](const VertexId& v) { return static_cast<double>(v[2]); }},
      {"cubes", [](const VertexId& v) { return static_cast<double>(v[0] + v[1] + v[2] + v[3]); }},
  };
  for (auto& [tag, f] : cases) {
    auto g = fam(tag);
    auto lam = measure_balls(g, g->root());
    for (long n : {0L, 1L, 3L, 6L}) {
      auto v = lam.at(n, Resolution::Vertices), c = lam.at(n, Resolution::Classes);
      EXPECT_DOUBLE_EQ(v.support_size, c.support_size) << tag << " n=" << n;
      EXPECT_TRUE(c.lumped || tag == "zd") << tag;
    }
    auto a = average_trace(f, lam, window(1, 6), Resolution::Vertices);
    auto b = average_trace(f, lam, window(1, 6), Resolution::Classes);
    for (std::size_t i = 0; i < a.values.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-12) << tag;
  }
}

TEST(Measure, IcfSupports) {
  auto h = fam("hair");
  auto sk = measure_icf(h, "hair_skewed");
  auto l = sk.at(2, Resolution::Vertices);
  // heights -2..0 carry diamonds of radius 0..2, heights 1..4 radius 3..0
  EXPECT_DOUBLE_EQ(l.support_size, 1 + 5 + 13 + 25 + 13 + 5 + 1);
  EXPECT_DOUBLE_EQ(sk.at(2, Resolution::Classes).support_size, l.support_size);
  auto c = fam("cubes");
  auto cu = measure_icf(c, "cube_union");
  EXPECT_DOUBLE_EQ(cu.at(3, Resolution::Vertices).support_size, cu.at(3, Resolution::Classes).support_size);
  EXPECT_THROW(measure_icf(c, "hair_skewed"), AverageError);
  EXPECT_THROW(measure_icf(h, "spiral"), AverageError);
  EXPECT_THROW(measure_from_spec(h, json{{"kind", "weird"}}), AverageError);
}

TEST(Measure, BadWeightsAreRejected) {
  auto z = fam("zd", {{"d", 1}});
  auto bad = measure_custom(z, "bad", [](long) {
    return std::vector<std::pair<VertexId, double>>{{VertexId{0}, 0.7}, {VertexId{1}, 0.2}};
  });
  EXPECT_THROW(bad.at(0), AverageError);
  auto neg = measure_custom(z, "neg", [](long) {
    return std::vector<std::pair<VertexId, double>>{{VertexId{0}, 1.5}, {VertexId{1}, -0.5}};
  });
  EXPECT_THROW(neg.at(0), AverageError);
}

TEST(Trace, ConstantsAndFiniteSets) {
  auto z = fam("zd", {{"d", 2}});
  auto lam = measure_balls(z, z->root());
  auto c = average_trace([](const VertexId&) { return 0.3; }, lam, window(0, 20));
  for (double v : c.values) EXPECT_NEAR(v, 0.3, 1e-15);
  EXPECT_TRUE(c.sandwich_ok);
  auto fin = average_trace(indicator([](const VertexId& v) { return std::abs(v[0]) + std::abs(v[1]) <= 2; }), lam,
                           window(2, 200, 2));
  EXPECT_LT(fin.values.back(), 13.0 / 80000 + 1e-12);
  EXPECT_EQ(measurable_verdict("finite", fin).verdict, "measurable");
  EXPECT_THROW(average_trace([](const VertexId&) { return NAN; }, lam, window(0, 1)), AverageError);
}

TEST(Trace, RescaleAndInducedIdentity) {
  auto z = fam("zd", {{"d", 1}});
  auto lam = measure_balls(z, z->root());
  auto even = [](const VertexId& v) { return v[0] % 2 == 0; };
  auto r = rescale(lam, even, "even");
  auto l = r.at(3);
  for (auto& a : l.atoms) EXPECT_TRUE(even(a.rep));
  // lambda(S ∩ T) = lambda(S) * lambda_S(T) for T = nonnegative integers
  auto nonneg = [](const VertexId& v) { return v[0] >= 0; };
  auto t_full = average_trace(indicator([&](const VertexId& v) { return even(v) && nonneg(v); }), lam, window(100, 400, 50));
  auto t_s = average_trace(indicator(even), lam, window(100, 400, 50));
  auto t_ind = average_trace(indicator(nonneg), r, window(100, 400, 50));
  for (std::size_t i = 0; i < t_full.values.size(); ++i)
    EXPECT_NEAR(t_full.values[i], t_s.values[i] * t_ind.values[i], 1e-12);
  EXPECT_NEAR(t_ind.values.back(), 0.5, 0.01);
  EXPECT_THROW(rescale(lam, [](const VertexId& v) { return v[0] > 1000; }).at(2), AverageError);
}

TEST(NonAlgebra, BallsOnZ) {
  auto z = fam("zd", {{"d", 1}});
  auto r = nonalgebra_counterexample(measure_balls(z, z->root()), 3000);
  EXPECT_EQ(r.k, (std::vector<long>{0, 2, 10, 42, 170, 682, 2730}));
  EXPECT_NEAR(r.trace_A.inf_estimate, 0.5, 0.02);
  EXPECT_NEAR(r.trace_A.sup_estimate, 0.5, 0.02);
  EXPECT_NEAR(r.trace_B.inf_estimate, 0.5, 0.02);
  EXPECT_NEAR(r.trace_B.sup_estimate, 0.5, 0.02);
  EXPECT_GE(r.separation, 0.05);
  for (double v : r.ab_at_a_ends) EXPECT_GE(v, 0.2);
  for (double v : r.ab_at_c_ends) EXPECT_LE(v, 0.15);
  EXPECT_EQ(r.verdict_AB.verdict, "non-measurable");
  EXPECT_EQ(r.verdict_A.verdict, "measurable");
  // Membership is consistent with the traces.
  EXPECT_EQ(r.AB(VertexId{0}), r.A(VertexId{0}) && r.B(VertexId{0}));
  auto m = nonalgebra_counterexample(measure_balls(z, z->root()), 3000, true);
  EXPECT_GE(m.separation, 0.05);
  EXPECT_NE(m.A(VertexId{1}), r.A(VertexId{1}));
  EXPECT_THROW(nonalgebra_counterexample(measure_balls(z, z->root()), 20), AverageError);
}

TEST(Compare, BallsAtDifferentCentres) {
  auto z = fam("zd", {{"d", 2}});
  auto a = measure_balls(z, VertexId{0, 0}), b = measure_balls(z, VertexId{3, -1});
  auto rep = measure_compare(a, b, 30);
  EXPECT_TRUE(rep.comparable) << rep.message;
  EXPECT_LE(rep.C, 64.0);
  auto h = fam("hair");
  auto rb = measure_compare(measure_balls(h, h->root()), measure_icf(h, "hair_skewed"), 6);
  EXPECT_FALSE(rb.comparable);
  EXPECT_NE(rb.message.find("no witness"), std::string::npos);
}

TEST(Alexandroff, SandwichOnTreeLevels) {
  auto t = fam("homogeneous_tree", {{"q", 3}});
  auto lam = measure_balls(t, t->root());
  auto f = [](const VertexId& v) { return v[0] % 2 == 0 ? 1.0 : 0.0; };
  auto r = alexandroff_bounds(f, lam, window(4, 16), Resolution::Classes);
  EXPECT_TRUE(r.sandwich_ok);
  EXPECT_TRUE(r.tail_sandwich);
  EXPECT_EQ(r.liminf_estimate, 0.0);
  EXPECT_EQ(r.limsup_estimate, 1.0);
}

TEST(PowerSeries, MatchesClosedFormOnZ) {
  auto f = reference_f("Z", 200);
  auto e = avg_power_series(f, 0.5, 200, &f);
  EXPECT_NEAR(e.partial, 1.0 - std::sqrt(0.75), 1e-13);
  ASSERT_TRUE(e.tail_bound.has_value());
  EXPECT_LT(*e.tail_bound, 1e-40);
  EXPECT_THROW(avg_power_series(f, 1.0, 10), AverageError);
}

TEST(PowerSeries, BihomogeneousReturnOscillates) {
  auto g = fam("bihomogeneous_tree", {{"m", 2}, {"n", 3}});
  auto k = default_kernel(g);
  auto F = memoize([&](const VertexId& v) {
    return evaluate_F_G(return_series(*k, v, 400, Arithmetic::Float), 0.9).F_partial;
  });
  auto tr = average_trace(F, measure_balls(g, g->root()), window(8, 24), Resolution::Classes);
  EXPECT_GT(tr.oscillation, 0.01);
  EXPECT_NE(measurable_verdict("F", tr).verdict, "measurable");
}

TEST(Identity, AgreesOffExceptionalSets) {
  auto z = fam("zd", {{"d", 2}});
  auto lam = measure_balls(z, z->root());
  auto a1 = [](const VertexId&, long n) { return n % 2 == 0 ? 1.0 / (n + 1) : 0.0; };
  auto a2 = [](const VertexId& v, long n) {
    return std::abs(v[0]) + std::abs(v[1]) < n ? 5.0 : (n % 2 == 0 ? 1.0 / (n + 1) : 0.0);
  };
  auto exc = [](const VertexId& v, long n) { return std::abs(v[0]) + std::abs(v[1]) < n; };
  auto r = identity_on_average_check(a1, a2, exc, lam, window(10, 80, 10), 0.5, 30, Resolution::Vertices);
  EXPECT_TRUE(r.ok) << r.message;
  EXPECT_EQ(r.max_offset_diff, 0.0);
  auto bad = identity_on_average_check(a1, [](const VertexId&, long) { return 0.0; }, exc, lam, window(10, 20, 10),
                                       0.5, 10, Resolution::Vertices);
  EXPECT_FALSE(bad.ok);
}

TEST(Partition, SplitAverageOnZ) {
  auto z = fam("zd", {{"d", 1}});
  auto lam = measure_balls(z, z->root());
  auto f = [](const VertexId& v) { return v[0] >= 0 ? 0.2 : 0.8; };
  std::vector<PartSpec> parts{{"pos", [](const VertexId& v) { return v[0] >= 0; }, std::nullopt},
                              {"neg", [](const VertexId& v) { return v[0] < 0; }, 0.8}};
  auto r = partition_split_average(f, parts, lam, window(10, 100, 10));
  EXPECT_NEAR(r.limits[0], 0.2, 1e-15);
  EXPECT_LT(r.max_gap, 1e-12);
  std::vector<PartSpec> overlap{{"all", [](const VertexId&) { return true; }, 0.5},
                                {"pos", [](const VertexId& v) { return v[0] >= 0; }, 0.5}};
  EXPECT_THROW(partition_split_average(f, overlap, lam, window(1, 3)), AverageError);
}
