#include "rwavg/demo.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace rwavg {

using nlohmann::json;

namespace {

json fam(const std::string& tag, json params = json::object()) { return json{{"family", tag}, {"params", params}}; }

std::string triple(const std::string& a, const std::string& b, const std::string& c) {
  auto show = [](const std::string& s) { return s.empty() ? std::string("*") : s; };
  return "(" + show(a) + ", " + show(b) + ", " + show(c) + ")";
}

// 0 = agrees or not pinned, 1 = computed inconclusive, 2 = contradiction.
int compare_part(const std::string& expected, const std::string& computed) {
  if (expected.empty() || expected == computed) return 0;
  return computed == "inconclusive" ? 1 : 2;
}

DemoRow run_nonalgebra(const DemoSpec& d) {
  DemoRow row;
  auto g = build_family(d.graph);
  auto r = nonalgebra_counterexample(measure_from_spec(g, d.measure), 3000);
  const auto near_half = [](const AverageTrace& t) {
    return std::fabs(t.inf_estimate - 0.5) <= 0.02 && std::fabs(t.sup_estimate - 0.5) <= 0.02;
  };
  const bool a_ok = near_half(r.trace_A), b_ok = near_half(r.trace_B);
  const bool ab_ok = r.separation >= 0.05;
  row.expected = "(A ~ 1/2, B ~ 1/2, A and B non-measurable)";
  row.computed = "(A in [" + std::to_string(r.trace_A.inf_estimate) + ", " + std::to_string(r.trace_A.sup_estimate) +
                 "], B in [" + std::to_string(r.trace_B.inf_estimate) + ", " + std::to_string(r.trace_B.sup_estimate) +
                 "], separation " + std::to_string(r.separation) + ")";
  row.match = a_ok && b_ok && ab_ok;
  row.detail = json{{"k", r.k},
                    {"A", {r.trace_A.inf_estimate, r.trace_A.sup_estimate}},
                    {"B", {r.trace_B.inf_estimate, r.trace_B.sup_estimate}},
                    {"AB_at_A_block_ends", r.ab_at_a_ends},
                    {"AB_at_C_block_ends", r.ab_at_c_ends},
                    {"separation", r.separation},
                    {"verdicts", {r.verdict_A.verdict, r.verdict_B.verdict, r.verdict_AB.verdict}}};
  return row;
}

}  // namespace

std::vector<DemoSpec> demo_catalog() {
  return {
      {"z2", fam("zd", {{"d", 2}}), "balls", "Recurrent", "ROA", "ROA_t", "", "simple walk on the plane"},
      {"z3", fam("zd", {{"d", 3}}), "balls", "Transient", "TOA", "TOA_t", "", "simple walk on Z^3"},
      {"trt", fam("trt", {{"alpha", 0.25}}), "balls", "Transient", "ROA", "TOA_t", "",
       "transient spine with recurrent cycles"},
      {"cubes_union", fam("cubes"), "cube_union", "Recurrent", "ROA", "TOA_t", "", "growing cubes on a spine, union of cubes"},
      {"ntd", fam("ntd", {{"alpha", 3}, {"beta", 2}}), "balls", "Transient", "ROA", "ROA_t", "",
       "tree with sparse ramification levels"},
      {"bihom", fam("bihomogeneous_tree", {{"m", 2}, {"n", 3}}), "balls", "Transient", "TOA", "unclassifiable", "",
       "bihomogeneous tree of degrees 2 and 3"},
      {"hair_balls", fam("hair"), "balls", "", "TOA", "", "growth", "half-space with hairs, balls"},
      {"hair_skewed", fam("hair"), "hair_skewed", "", "", "ROA_t", "", "half-space with hairs, hair-heavy exhaustion"},
      {"cubes_balls", fam("cubes"), "balls", "Recurrent", "ROA", "", "", "growing cubes on a spine, balls"},
      {"nonalgebra", fam("zd", {{"d", 1}}), "balls", "", "", "", "nonalgebra", "measurable sets not closed under intersection"},
  };
}

const DemoSpec& find_demo(const std::string& name) {
  static const auto catalog = demo_catalog();
  for (auto& d : catalog)
    if (d.name == name) return d;
  throw std::invalid_argument("unknown demo '" + name + "'");
}

DemoRow run_demo(const DemoSpec& d, const ClassifierParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  DemoRow row;
  if (d.extra == "nonalgebra") {
    row = run_nonalgebra(d);
  } else {
    auto ctx = make_context(d.graph, d.measure, params);
    auto v = classify(ctx, true);
    const auto lc = to_string(v.local.cls), ac = to_string(v.average.cls), tc = to_string(v.thermo.cls);
    row.expected = triple(d.expect_local, d.expect_average, d.expect_thermo);
    row.computed = triple(lc, ac, tc);
    const int worst = std::max({compare_part(d.expect_local, lc), compare_part(d.expect_average, ac),
                                compare_part(d.expect_thermo, tc)});
    row.match = worst == 0 && v.lattice_ok();
    row.inconclusive = worst == 1 && v.lattice_ok();
    row.detail = v.to_json();
    if (!v.lattice_ok()) row.note = "implication lattice violated";
    if (row.inconclusive) row.note = "a pinned part is inconclusive at delta = " + std::to_string(params.delta);
    if (d.extra == "growth") {
      auto gr = averaged_G_growth(*ctx.kernel, ctx.lambda, {0.9, 0.99, 1.0}, params.N, {2, 4, 6, 8}, params.resolution);
      row.detail["growth"] = json{{"zs", gr.zs}, {"ns", gr.ns}, {"avg_G", gr.avg_G}, {"grows", gr.grows}};
      row.computed += gr.grows ? " + averaged G grows" : " + averaged G flat";
      row.expected += " + averaged G grows";
      if (!gr.grows) {
        row.match = false;
        row.note = gr.message;
      }
    }
  }
  row.name = d.name;
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

int demo_exit_code(const std::vector<DemoRow>& rows) {
  int code = 0;
  for (auto& r : rows) {
    if (r.match) continue;
    if (r.inconclusive) {
      code = std::max(code, 2);
    } else {
      return 1;
    }
  }
  return code;
}

std::vector<json> random_doubleprime_specs(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> k(3, 5), n(1, 4);
  std::uniform_int_distribution<int> s(1, 1 << 30);
  std::vector<json> out;
  for (int i = 0; i < count; ++i) {
    const int kk = k(rng), nn = n(rng), ss = s(rng);
    out.push_back(fam("tree_doubleprime", {{"k", kk}, {"n", nn}, {"seed", ss}}));
  }
  return out;
}

LatticeSweep lattice_sweep(const std::vector<json>& graphs, const ClassifierParams& params) {
  LatticeSweep sw;
  for (auto& g : graphs) {
    auto ctx = make_context(g, "balls", params);
    auto v = classify(ctx, true);
    sw.graphs.push_back(g);
    sw.violations.push_back(v.lattice_violations);
    sw.verdicts.push_back(triple(to_string(v.local.cls), to_string(v.average.cls), to_string(v.thermo.cls)));
    sw.ok = sw.ok && v.lattice_ok();
  }
  return sw;
}

}  // namespace rwavg
