// Acceptance driver: one PASS/FAIL line per criterion. With an argument k (1..8) only that
// criterion runs; the exit code is 0 when every criterion that ran passed.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "rwavg/classifier.hpp"
#include "rwavg/demo.hpp"
#include "rwavg/genfun.hpp"
#include "rwavg/montecarlo.hpp"
#include "rwavg/network.hpp"
#include "rwavg/series.hpp"

using namespace rwavg;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream note;
  void fail(const std::string& why) {
    pass = false;
    note << (note.tellp() > 0 ? "; " : "") << why;
  }
};

json spec(const std::string& tag, json params = json::object()) { return json{{"family", tag}, {"params", params}}; }

KernelPtr exact_kernel(GraphPtr g) {
  // the default transient-spine schedule has irrational rows
  if (g->family() == "trt") return kernel_for(g, "custom", json{{"schedule", "rational_cubic"}});
  return default_kernel(g);
}

// Brute-force path enumeration of p^(n)(x,x) and f^(n)(x,x).
std::pair<std::vector<Rational>, std::vector<Rational>> enumerate_paths(const WalkKernel& k, const VertexId& x,
                                                                        int depth) {
  std::vector<Rational> p(depth + 1, 0), f(depth + 1, 0);
  p[0] = 1;
  std::function<void(const VertexId&, int, const Rational&, bool)> rec = [&](const VertexId& v, int n,
                                                                             const Rational& w, bool back) {
    if (n == depth) return;
    for (auto& [y, q] : k.row_exact(v)) {
      const Rational w2 = w * q;
      if (y == x) {
        p[n + 1] += w2;
        if (!back) f[n + 1] += w2;
      }
      rec(y, n + 1, w2, back || y == x);
    }
  };
  rec(x, 0, Rational(1), false);
  return {p, f};
}

void renewal(Outcome& o) {
  long checked = 0;
  for (auto& sp : fixtures::all_family_specs()) {
    auto g = build_family(sp);
    auto ke = exact_kernel(g);
    auto kf = default_kernel(g);
    for (auto& x : fixtures::sample_vertices(*g)) {
      const std::string where = g->family() + " " + to_string(x);
      try {
        auto c = renewal_check(return_series(*ke, x, 40, Arithmetic::Exact));
        if (!(c.ok && c.exact)) o.fail(where + " exact N=40 fails at n=" + std::to_string(c.worst_n));
      } catch (const std::exception& e) {
        o.fail(where + " exact: " + e.what());
      }
      try {
        auto c = renewal_check(return_series(*kf, x, 2000, Arithmetic::Float), 1e-9);
        if (!c.ok) o.fail(where + " float N=2000 residual " + std::to_string(c.max_residual));
      } catch (const SeriesError& e) {
        // report the failure, then show the identity at the largest horizon that fits
        std::string fallback;
        try {
          auto c = renewal_check(return_series(*kf, x, 200, Arithmetic::Float), 1e-9);
          fallback = c.ok ? "; holds at N=200" : "; fails at N=200 too";
        } catch (const SeriesError&) {
        }
        o.fail(where + " float N=2000 infeasible (" + e.what() + ")" + fallback);
      }
      ++checked;
    }
  }
  o.note << (o.note.tellp() > 0 ? "; " : "") << checked << " vertices checked";
}

void known_values(Outcome& o) {
  auto check = [&](const std::string& name, const json& sp, bool use_f, Rational want) {
    auto g = build_family(sp);
    auto k = default_kernel(g);
    auto [p, f] = enumerate_paths(*k, g->root(), 2);
    auto s = return_series(*k, g->root(), 4, Arithmetic::Exact);
    const Rational oracle = use_f ? f[2] : p[2];
    const Rational got = use_f ? s.f_exact[2] : s.p_exact[2];
    if (oracle != want || got != want) o.fail(name + " mismatch");
  };
  check("f2 on Z", spec("zd", {{"d", 1}}), true, Rational(1, 2));
  check("f2 on T_3", spec("homogeneous_tree", {{"q", 3}}), true, Rational(1, 3));
  check("p2 on Z^2", spec("zd", {{"d", 2}}), false, Rational(1, 4));
  if (reference_f("Z", 4)[2] != 0.5) o.fail("reference f2 on Z");

  auto t = default_kernel(build_family(spec("homogeneous_tree", {{"q", 3}})));
  const double sum = return_series(*t, VertexId{0}, 200, Arithmetic::Float).f_sum();
  if (std::fabs(sum - 0.5) > 0.01) o.fail("T_3 sum " + std::to_string(sum));

  auto z3 = build_family(spec("zd", {{"d", 3}}));
  auto mc = monte_carlo_returns(*default_kernel(z3), z3->root(), {10000}, 1'000'000, 2024);
  const double est = mc.back().estimate;
  if (est < 0.33 || est > 0.35) o.fail("Z^3 MC " + std::to_string(est));
  o.note << "T_3 sum " << sum << ", Z^3 MC " << est << " +- " << mc.back().std_error << " (horizon 10000, 1e6 walks)";
}

const std::vector<std::string> kMatrix{"z2", "z3", "trt", "cubes_union", "ntd", "bihom", "hair_balls", "hair_skewed"};
std::map<std::string, DemoRow> g_rows;  // shared with the lattice criterion

const DemoRow& demo_row(const std::string& name) {
  auto it = g_rows.find(name);
  if (it == g_rows.end()) it = g_rows.emplace(name, run_demo(find_demo(name), ClassifierParams{})).first;
  return it->second;
}

void demo_matrix(Outcome& o) {
  int inconclusive = 0;
  for (auto& name : kMatrix) {
    const auto& r = demo_row(name);
    std::cout << "    " << name << ": " << r.computed << (r.match ? "" : "  expected " + r.expected) << "  ["
              << r.seconds << " s]\n";
    if (r.match) continue;
    if (r.inconclusive) {
      ++inconclusive;
      o.note << name << " inconclusive (" << r.note << "); ";
    } else {
      o.fail(name + " computed " + r.computed);
    }
  }
  o.note << kMatrix.size() - inconclusive << "/" << kMatrix.size() << " match";
}

void nonalgebra(Outcome& o) {
  auto r = run_demo(find_demo("nonalgebra"), ClassifierParams{});
  if (!r.match) o.fail(r.computed);
  o.note << r.computed;
}

void electrical(Outcome& o) {
  auto z = default_kernel(build_family(spec("zd", {{"d", 1}})));
  double worst = 0.0;
  for (long R = 1; R <= 64; ++R) worst = std::max(worst, std::fabs(solve_flow(*z, VertexId{0}, R).effective_resistance - R / 2.0));
  if (worst > 1e-10) o.fail("Z R/2 error " + std::to_string(worst));
  auto t = default_kernel(build_family(spec("homogeneous_tree", {{"q", 3}})));
  const double rt = solve_flow(*t, VertexId{0}, 30).effective_resistance;
  if (std::fabs(rt - 2.0 / 3.0) > 1e-6) o.fail("T_3 R_eff " + std::to_string(rt));

  long families = 0;
  std::string skipped;
  for (auto& sp : fixtures::all_family_specs()) {
    auto g = build_family(sp);
    auto k = default_kernel(g);
    if (!k->reversible()) {
      skipped += (skipped.empty() ? "" : " ") + g->family();
      continue;
    }
    ++families;
    for (auto& x : fixtures::sample_vertices(*g)) {
      auto ray = rayleigh_check(*k, x, {2, 3, 4, 5, 6});
      if (!ray.ok) o.fail("Rayleigh " + g->family() + " " + to_string(x) + ": " + ray.message);
      auto th = thomson_check(effective_resistance(build_network(*k, x, 6), x), 20, 3);
      if (!th.ok) o.fail("Thomson " + g->family() + " " + to_string(x) + ": " + th.message);
    }
  }

  double drift = 0.0;
  auto hg = build_family(spec("hair"));
  auto half = solve_flow(*default_kernel(hg), hg->root(), 10, [](const VertexId& v) { return v[2] <= 0; });
  for (auto tgt : {VertexId{3, -2, 0}, VertexId{0, 0, -7}, VertexId{-5, 1, -1}})
    drift = std::max(drift, std::fabs(translate_flow(half, embedding_for(*hg, "lower_half", tgt), *hg).energy - half.energy));
  auto bg = build_family(spec("bihomogeneous_tree", {{"m", 2}, {"n", 3}}));
  auto bk = default_kernel(bg);
  for (auto& rep : bg->orbit_representatives()) {
    auto base = effective_resistance(build_network(*bk, rep, 6), rep);
    VertexId far = rep;
    for (int s = 0; s < 2; ++s) bg->step_uniform(far, 1);
    drift = std::max(drift, std::fabs(translate_flow(base, embedding_for(*bg, "automorphism", far, 6), *bg).energy - base.energy));
  }
  if (drift > 1e-9) o.fail("translated energy drift " + std::to_string(drift));
  o.note << "Rayleigh/Thomson on " << families << " reversible families";
  if (!skipped.empty()) o.note << " (no network for non-reversible " << skipped << ")";
  o.note << ", energy drift " << drift;
}

void exchange_identity(Outcome& o) {
  auto z2 = build_family(spec("zd", {{"d", 2}}));
  auto k = default_kernel(z2);
  auto lam = measure_balls(z2, z2->root());
  const double z = 0.5;
  const long N = 60, n = 30;
  std::map<VertexId, ReturnSeries> cache;
  auto series = [&](const VertexId& x) -> const ReturnSeries& {
    auto it = cache.find(x);
    if (it == cache.end()) it = cache.emplace(x, return_series(*k, x, N, Arithmetic::Float)).first;
    return it->second;
  };
  const auto lhs =
      average_trace([&](const VertexId& x) { return evaluate_F_G(series(x), z).F_partial; }, lam, {n}, Resolution::Vertices)
          .values.back();
  std::vector<double> alpha(N + 1, 0.0);
  for (long m = 1; m <= N; ++m)
    alpha[m] = average_trace([&](const VertexId& x) { return series(x).f[m]; }, lam, {n}, Resolution::Vertices).values.back();
  const double rhs = avg_power_series(alpha, z, N).partial;
  if (std::fabs(lhs - rhs) > 1e-6) o.fail("exchange gap " + std::to_string(std::fabs(lhs - rhs)));
  o.note << "exchange gap " << std::fabs(lhs - rhs);

  const long horizon = 16;
  auto identity = [&](const json& gs, const std::string& measure, const std::string& L) {
    auto ctx = make_context(gs, measure, ClassifierParams{});
    const LazyGraph* gp = &ctx.graph();
    std::map<VertexId, std::vector<double>> fc;
    auto a1 = [&](const VertexId& x, long m) {
      auto it = fc.find(x);
      if (it == fc.end()) it = fc.emplace(x, return_series(*ctx.kernel, x, horizon, Arithmetic::Float).f).first;
      return it->second[m];
    };
    const auto fL = reference_f(L, horizon);
    auto a2 = [&fL](const VertexId&, long m) { return fL[m]; };
    auto exc = [gp, L](const VertexId& x, long m) { return gp->reference_radius(x, L) <= m / 2; };
    auto rep = identity_on_average_check(a1, a2, exc, ctx.lambda, ctx.window(), 0.99, horizon, ctx.params.resolution,
                                         16, 1e-9);
    if (!rep.ok) o.fail(measure + " vs " + L + ": " + rep.message);
    o.note << "; " << measure << " vs " << L << " offset diff " << rep.max_offset_diff << ", exceptional bound "
           << rep.exceptional_bound.front() << " -> " << rep.exceptional_bound.back();
  };
  identity(spec("cubes"), "cube_union", "Z3");
  identity(spec("hair"), "hair_skewed", "Z");
}

void lattice(Outcome& o) {
  for (auto& name : kMatrix) {
    const auto& r = demo_row(name);
    if (!r.detail.contains("lattice_violations") || !r.detail["lattice_violations"].empty())
      o.fail(name + " lattice " + r.detail.value("lattice_violations", json::array()).dump());
  }
  auto sw = lattice_sweep(random_doubleprime_specs(20, 20261015), ClassifierParams{});
  for (std::size_t i = 0; i < sw.graphs.size(); ++i)
    if (!sw.violations[i].empty()) o.fail(sw.graphs[i].dump() + " " + sw.verdicts[i]);
  o.note << kMatrix.size() << " demos and " << sw.graphs.size() << " random T'' instances";
}

void jensen(Outcome& o) {
  const std::vector<double> zs{0.5, 0.9, 0.99};
  double min_slack = 1e300;
  for (auto [name, gs, ns] : {std::tuple{"Z", spec("zd", {{"d", 1}}), std::vector<long>{2, 4, 8}},
                              std::tuple{"Z^2", spec("zd", {{"d", 2}}), std::vector<long>{2, 4, 8}},
                              std::tuple{"hair", spec("hair"), std::vector<long>{2, 4}}}) {
    auto ctx = make_context(gs, "balls", ClassifierParams{});
    auto rep = jensen_bound_check(*ctx.kernel, ctx.lambda, zs, 2000, ns);
    for (auto& pt : rep.points) {
      min_slack = std::min(min_slack, pt.slack);
      // the slack is nonnegative in exact arithmetic; allow rounding at z = 0.5
      if (pt.slack < -1e-12) o.fail(std::string(name) + " z=" + std::to_string(pt.z) + " slack " + std::to_string(pt.slack));
    }
  }
  o.note << "min slack " << min_slack;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"renewal identity (exact N=40, float N=2000)", renewal},
      {"known values against path enumeration", known_values},
      {"demo matrix", demo_matrix},
      {"non-algebra counterexample on Z balls", nonalgebra},
      {"electrical checks", electrical},
      {"exchange of sum and average, identity on average", exchange_identity},
      {"implication lattice", lattice},
      {"Jensen bound", jensen},
  };
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::cerr << "usage: acceptance [criterion 1.." << criteria.size() << "]\n";
    return 1;
  }
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.fail(std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && o.pass;
    std::printf("%s criterion %zu: %s [%.1f s] %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.note.str().c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
