#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "rwavg/network.hpp"

using namespace rwavg;
using nlohmann::json;

namespace {
GraphPtr fam(const std::string& tag, json params = json::object()) {
  return build_family(json{{"family", tag}, {"params", params}});
}
}  // namespace

TEST(Network, SimpleWalkHasUnitResistances) {
  auto k = default_kernel(fam("zd", {{"d", 2}}));
  auto net = build_network(*k, VertexId{0, 0}, 4);
  for (auto& e : net.edges) EXPECT_EQ(e.resistance(), 1.0);
  EXPECT_EQ(net.nodes.size(), 41u);
  EXPECT_EQ(net.interior_count(), 25u);
}

TEST(Network, NonReversibleKernelIsRejected) {
  auto k = kernel_for(fam("trt"), "custom");
  try {
    build_network(*k, VertexId{0, 0}, 4);
    FAIL() << "expected FlowError";
  } catch (const FlowError& e) {
    EXPECT_NE(std::string(e.what()).find("not reversible"), std::string::npos);
  }
}

TEST(Network, SeriesParallelOnZ) {
  auto k = default_kernel(fam("zd", {{"d", 1}}));
  for (long R = 1; R <= 64; ++R) {
    auto f = solve_flow(*k, VertexId{0}, R);
    EXPECT_NEAR(f.effective_resistance, R / 2.0, 1e-10) << R;
    EXPECT_LE(f.kirchhoff_residual, 1e-10);
  }
}

TEST(Network, TreeLimitAndRadialQuotient) {
  auto k = default_kernel(fam("homogeneous_tree", {{"q", 3}}));
  auto f = solve_flow(*k, VertexId{0}, 30);
  EXPECT_EQ(f.network->kind, "radial");
  EXPECT_NEAR(f.effective_resistance, 2.0 / 3.0, 1e-6);
  for (auto spec : fixtures::all_family_specs()) {
    auto kk = default_kernel(build_family(spec));
    auto rn = build_radial_network(*kk, kk->graph().root(), 6);
    if (!rn) continue;
    const double radial = effective_resistance(*rn, VertexId{0}).effective_resistance;
    const double full = effective_resistance(build_network(*kk, kk->graph().root(), 6), kk->graph().root()).effective_resistance;
    EXPECT_NEAR(radial, full, 1e-10) << spec.dump();
  }
}

TEST(Capacity, DivergenceFlags) {
  const std::vector<long> radii{4, 8, 16, 32};
  auto z = capacity_estimate(*default_kernel(fam("zd", {{"d", 1}})), VertexId{0}, radii);
  EXPECT_TRUE(z.divergent);
  EXPECT_EQ(z.cap_estimate, 0.0);
  auto z2 = capacity_estimate(*default_kernel(fam("zd", {{"d", 2}})), VertexId{0, 0}, radii);
  EXPECT_TRUE(z2.divergent);
  EXPECT_TRUE(z2.monotone);
  // logarithmic growth: increments roughly constant
  EXPECT_NEAR(z2.increments[2] / z2.increments[1], 1.0, 0.2);
  auto z3 = capacity_estimate(*default_kernel(fam("zd", {{"d", 3}})), VertexId{0, 0, 0}, radii);
  EXPECT_FALSE(z3.divergent);
  EXPECT_GT(z3.cap_estimate, 0.0);
  // m * R_inf against the lattice Green function G(0,0) = 1.5164
  EXPECT_NEAR(z3.green_bound, 1.516386, 0.08);
  auto ntd = capacity_estimate(*default_kernel(fam("ntd", {{"alpha", 3}, {"beta", 2}})), VertexId{0}, radii);
  EXPECT_FALSE(ntd.divergent);
  auto ntd22 = capacity_estimate(*default_kernel(fam("ntd", {{"alpha", 2}, {"beta", 2}})), VertexId{0},
                                 std::vector<long>{64, 256, 1024, 4096});
  EXPECT_TRUE(ntd22.divergent);
  EXPECT_THROW(capacity_estimate(*default_kernel(fam("zd")), VertexId{0}, {4, 4}), FlowError);
}

TEST(Checks, RayleighAndThomsonOnEveryFamily) {
  for (auto& spec : fixtures::all_family_specs()) {
    auto g = build_family(spec);
    auto k = default_kernel(g);
    if (!k->reversible()) continue;
    for (auto& x : fixtures::sample_vertices(*g)) {
      auto ray = rayleigh_check(*k, x, {2, 3, 4, 5, 6});
      EXPECT_TRUE(ray.ok) << spec.dump() << " " << to_string(x) << ": " << ray.message;
      auto f = effective_resistance(build_network(*k, x, 6), x);
      auto th = thomson_check(f, 20, 3);
      EXPECT_TRUE(th.ok) << spec.dump() << " " << to_string(x);
      EXPECT_LT(th.max_inner, 1e-9) << spec.dump();
    }
  }
}

TEST(Checks, ThomsonDetectsNonHarmonicFlow) {
  auto k = default_kernel(fam("zd", {{"d", 2}}));
  auto f = effective_resistance(build_network(*k, VertexId{0, 0}, 5), VertexId{0, 0});
  // Push all current along one axis: still a unit flow, not the minimal one.
  std::vector<double> u(f.u.size(), 0.0);
  const auto& net = *f.network;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto& a = net.nodes[net.edges[e].a];
    const auto& b = net.nodes[net.edges[e].b];
    if (a[1] == 0 && b[1] == 0 && a[0] >= 0 && b[0] == a[0] + 1) u[e] = 1.0;
  }
  EXPECT_NEAR(kirchhoff_residual(net, u, net.index.at(VertexId{0, 0}), 1.0), 0.0, 1e-15);
  FlowSolution bad = f;
  bad.u = u;
  bad.energy = flow_energy(net, u);
  EXPECT_FALSE(thomson_check(bad, 50, 1).ok);
}

TEST(Translate, IdentityHairAndBihomogeneous) {
  auto z = default_kernel(fam("zd", {{"d", 2}}));
  auto f = solve_flow(*z, VertexId{0, 0}, 6);
  auto id = translate_flow(f, embedding_for(z->graph(), "identity", VertexId{0, 0}), z->graph());
  EXPECT_EQ(id.u, f.u);
  EXPECT_EQ(id.energy, f.energy);

  auto hg = fam("hair");
  auto h = default_kernel(hg);
  auto half = solve_flow(*h, hg->root(), 10, [](const VertexId& v) { return v[2] <= 0; });
  for (auto t : {VertexId{3, -2, 0}, VertexId{0, 0, -7}, VertexId{-5, 1, -1}}) {
    auto moved = translate_flow(half, embedding_for(*hg, "lower_half", t), *hg);
    EXPECT_NEAR(moved.energy, half.energy, 1e-9);
    EXPECT_EQ(moved.source, t);
  }
  EXPECT_THROW(embedding_for(*hg, "lower_half", VertexId{0, 0, 2}), GraphError);

  auto bg = fam("bihomogeneous_tree", {{"m", 2}, {"n", 3}});
  auto b = default_kernel(bg);
  const long R = 6;
  const auto reps = bg->orbit_representatives();
  for (auto& rep : reps) {
    auto base = effective_resistance(build_network(*b, rep, R), rep);
    // another vertex in the same orbit, two steps away
    VertexId far = rep;
    for (int s = 0; s < 2; ++s) bg->step_uniform(far, 1);
    ASSERT_EQ(bg->orbit_of(far), bg->orbit_of(rep));
    auto moved = translate_flow(base, embedding_for(*bg, "automorphism", far, R), *bg);
    EXPECT_NEAR(moved.energy, base.energy, 1e-9);
  }
  EXPECT_THROW(translate_flow(solve_flow(*b, reps[0], 4), embedding_for(*bg, "identity", reps[0]), *bg), FlowError);
}

TEST(Witness, BihomogeneousYesPlaneNo) {
  const std::vector<long> radii{4, 8, 16, 32};
  auto bg = fam("bihomogeneous_tree", {{"m", 2}, {"n", 3}});
  auto b = default_kernel(bg);
  auto w = toa_flow_witness(*b, fixtures::sample_vertices(*bg), radii, 10.0);
  EXPECT_TRUE(w.witness) << w.message;
  EXPECT_GT(w.min_cap, 0.0);
  auto z2 = default_kernel(fam("zd", {{"d", 2}}));
  auto n = toa_flow_witness(*z2, {VertexId{0, 0}}, radii, 10.0);
  EXPECT_FALSE(n.witness);
  ASSERT_TRUE(n.failing.has_value());
}
