#include <gtest/gtest.h>

#include "rwavg/classifier.hpp"

using namespace rwavg;
using nlohmann::json;

namespace {
json spec(const std::string& fam, json params = json::object()) { return json{{"family", fam}, {"params", params}}; }
}  // namespace

TEST(Params, RoundTripAndValidation) {
  ClassifierParams p;
  p.delta = 0.05;
  p.window = {2, 4};
  p.resolution = Resolution::Vertices;
  auto q = ClassifierParams::from_json(p.to_json());
  EXPECT_EQ(q.delta, 0.05);
  EXPECT_EQ(q.window, (std::vector<long>{2, 4}));
  EXPECT_EQ(q.resolution, Resolution::Vertices);
  EXPECT_THROW(ClassifierParams::from_json(json{{"delta", 0.5}}), std::invalid_argument);
  EXPECT_THROW(ClassifierParams::from_json(json{{"resolution", "atoms"}}), std::invalid_argument);
}

TEST(Local, PlaneIsRecurrentSpaceIsTransient) {
  ClassifierParams p;
  p.mc_trials = 20000;
  auto z2 = make_context(spec("zd", {{"d", 2}}), "balls", p);
  EXPECT_EQ(classify_local(*z2.kernel, VertexId{0, 0}, p).cls, LocalClass::Recurrent);
  auto tree = make_context(spec("homogeneous_tree", {{"q", 3}}), "balls", p);
  auto lv = classify_local(*tree.kernel, VertexId{0}, p);
  ASSERT_EQ(lv.cls, LocalClass::Transient);
  ASSERT_TRUE(lv.F_upper.has_value());
  // F(o,o) = 1/2 on the 3-regular tree
  EXPECT_NEAR(*lv.F_upper, 0.5, 0.01);
}

TEST(Local, TrtUsesSpineQuotient) {
  ClassifierParams p;
  p.mc_trials = 20000;
  auto ctx = make_context(spec("trt", {{"alpha", 0.25}}), "balls", p);
  auto lv = classify_local(*ctx.kernel, VertexId{0, 0}, p);
  EXPECT_EQ(lv.cls, LocalClass::Transient);
  ASSERT_TRUE(lv.F_upper.has_value());
  EXPECT_DOUBLE_EQ(*lv.F_upper, 0.5);
}

TEST(Classify, PlaneVerdictAndLattice) {
  auto ctx = make_context(spec("zd", {{"d", 2}}), "balls", ClassifierParams{});
  auto v = classify(ctx);
  EXPECT_EQ(v.local.cls, LocalClass::Recurrent);
  EXPECT_EQ(v.average.cls, AverageClass::ROA);
  EXPECT_EQ(v.thermo.cls, ThermoClass::ROA_t);
  EXPECT_TRUE(v.lattice_ok());
  auto j = v.to_json();
  EXPECT_EQ(j["thermo"]["route"], "single orbit");
  EXPECT_EQ(j["thermo"]["z_grid"].size(), 4u);
}

TEST(Classify, BihomogeneousIsUnclassifiable) {
  auto ctx = make_context(spec("bihomogeneous_tree", {{"m", 2}, {"n", 3}}), "balls", ClassifierParams{});
  auto v = classify(ctx);
  EXPECT_EQ(v.local.cls, LocalClass::Transient);
  EXPECT_EQ(v.average.cls, AverageClass::TOA);
  EXPECT_EQ(v.thermo.cls, ThermoClass::Unclassifiable);
  ASSERT_TRUE(v.thermo.witness_n.has_value());
  EXPECT_GT(v.thermo.trace.alpha_osc[*v.thermo.witness_n], 0.01);
  EXPECT_TRUE(v.lattice_ok());
}

TEST(Classify, NtdWindowAndVerdict) {
  auto ctx = make_context(spec("ntd", {{"alpha", 3}, {"beta", 2}}), "balls", ClassifierParams{});
  const auto w = ctx.window();
  ASSERT_EQ(w.size(), 5u);
  // midpoint between s_12 = 8190 and s_13 = 16382
  EXPECT_EQ(w.front(), 12286);
  auto v = classify(ctx);
  EXPECT_EQ(v.local.cls, LocalClass::Transient);
  EXPECT_EQ(v.average.cls, AverageClass::ROA);
  EXPECT_EQ(v.thermo.cls, ThermoClass::ROA_t);
}

TEST(Lattice, FlagsForbiddenCombinations) {
  Verdict v;
  v.local.cls = LocalClass::Recurrent;
  v.average.cls = AverageClass::TOA;
  v.average.sup = SupClass::Suptransient;
  v.thermo.cls = ThermoClass::ROA_t;
  v.average.infL_estimate = 0.9;
  v.average.supL_estimate = 0.5;
  auto bad = lattice_violations(v);
  EXPECT_EQ(bad.size(), 4u);
  Verdict ok;
  ok.local.cls = LocalClass::Transient;
  ok.average.cls = AverageClass::ROA;
  ok.thermo.cls = ThermoClass::TOA_t;
  EXPECT_TRUE(lattice_violations(ok).empty());
}

TEST(Jensen, LineAndPlane) {
  for (int d : {1, 2}) {
    auto ctx = make_context(spec("zd", {{"d", d}}), "balls", ClassifierParams{});
    auto rep = jensen_bound_check(*ctx.kernel, ctx.lambda, {0.5, 0.9}, 400, {2, 4});
    EXPECT_TRUE(rep.ok) << d;
    for (auto& pt : rep.points) {
      EXPECT_GE(pt.slack, -1e-12);  // tails are below rounding at z = 0.5
      // vertex-transitive: F is constant, so the Jensen gap vanishes
      EXPECT_NEAR(pt.point_slack, 0.0, 1e-9);
    }
  }
}

TEST(Growth, HairBallsGrow) {
  auto ctx = make_context(spec("hair"), "balls", ClassifierParams{});
  auto r = averaged_G_growth(*ctx.kernel, ctx.lambda, {0.9, 0.999}, 400, {2, 4, 6});
  EXPECT_TRUE(r.grows) << r.message;
  auto z = make_context(spec("zd", {{"d", 3}}), "balls", ClassifierParams{});
  EXPECT_FALSE(averaged_G_growth(*z.kernel, z.lambda, {0.9}, 200, {2, 4}).grows);
}

TEST(Subgraph, InferenceAndRefusal) {
  SubgraphEvidence e;
  e.set = "S";
  auto r = subgraph_inference(e);
  EXPECT_EQ(r.cls, AverageClass::Inconclusive);
  EXPECT_NE(r.refusal.find("missing hypothesis"), std::string::npos);
  e.measure_of_S = 0.3;
  e.rescaled_F_upper = 0.5;
  EXPECT_EQ(subgraph_inference(e).cls, AverageClass::TOA);
  SubgraphEvidence two;
  two.measure_of_S = 0.5;
  two.rescaled_F_lower = 0.99;
  two.complement_F_lower = 0.995;
  auto refused = subgraph_inference(two);
  EXPECT_EQ(refused.cls, AverageClass::Inconclusive);
  EXPECT_NE(refused.refusal.find("boundary"), std::string::npos);
  two.boundary_null = true;
  EXPECT_EQ(subgraph_inference(two).cls, AverageClass::ROA);
}
