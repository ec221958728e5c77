#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "rwavg/classifier.hpp"
#include "rwavg/demo.hpp"
#include "rwavg/io.hpp"

using namespace rwavg;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> sets;
  std::string format = "json";
  std::string out;
};

void add_common(CLI::App* sub, Common& c, const std::vector<std::string>& formats) {
  sub->add_option("--config", c.config_path, "JSON file with classifier parameters");
  sub->add_option("--set", c.sets, "parameter override key=value (repeatable)");
  sub->add_option("--format", c.format, "output format")->check(CLI::IsMember(formats));
  sub->add_option("--out", c.out, "output file (stdout when omitted)");
}

json resolved_config(const Common& c) {
  json cfg = c.config_path.empty() ? json::object() : load_json_file(c.config_path);
  apply_overrides(cfg, c.sets);
  // Round-trip through the parameter struct so the header lists every resolved value.
  return ClassifierParams::from_json(cfg).to_json();
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

void emit(const Common& c, const std::string& kind, const json& cfg, const json& result, const CsvTable& table) {
  if (c.format == "csv") {
    std::ostringstream os;
    write_csv(os, kind, cfg, table);
    write_text(c.out, os.str());
  } else {
    write_text(c.out, envelope(kind, cfg, result).dump(2) + "\n");
  }
}

int verdict_exit(const Verdict& v, bool with_thermo) {
  if (!v.lattice_ok()) return 1;
  const bool inconclusive = v.local.cls == LocalClass::Inconclusive || v.average.cls == AverageClass::Inconclusive ||
                            (with_thermo && v.thermo.cls == ThermoClass::Inconclusive);
  return inconclusive ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrence and transience on average for random walks on infinite graphs"};
  app.require_subcommand(1);

  Common common;
  std::string graph_arg, measure_arg = "balls", vertex_arg;
  bool no_thermo = false, nonalgebra = false;
  long radius = 16;
  std::vector<long> radii{4, 8, 16, 32};
  std::string function = "F";
  double z = 1.0;
  std::vector<std::string> demo_names;
  int lattice_random = 0;
  std::uint64_t lattice_seed = 2024;

  auto* cls = app.add_subcommand("classify", "local, on-average and thermodynamic verdicts");
  cls->add_option("--graph", graph_arg, "graph spec: inline JSON or a JSON file")->required();
  cls->add_option("--measure", measure_arg, "measure spec: balls, hair_skewed, cube_union or JSON");
  cls->add_flag("--no-thermo", no_thermo, "skip the thermodynamic classification");
  add_common(cls, common, {"json", "csv"});

  auto* thermo = app.add_subcommand("thermo", "thermodynamic classification with its coefficient trace");
  thermo->add_option("--graph", graph_arg, "graph spec: inline JSON or a JSON file")->required();
  thermo->add_option("--measure", measure_arg, "measure spec");
  add_common(thermo, common, {"json", "csv"});

  auto* flow = app.add_subcommand("flow", "unit flow to the sphere, capacity estimate, Rayleigh and Thomson checks");
  flow->add_option("--graph", graph_arg, "graph spec: inline JSON or a JSON file")->required();
  flow->add_option("--vertex", vertex_arg, "source vertex as a JSON array (default: root)");
  flow->add_option("--radius", radius, "radius of the grounded sphere")->check(CLI::Range(1L, 4096L));
  flow->add_option("--radii", radii, "radii for the capacity estimate");
  add_common(flow, common, {"json", "csv"});

  auto* avg = app.add_subcommand("average", "averaged trace of F, G or the degree along the measure window");
  avg->add_option("--graph", graph_arg, "graph spec: inline JSON or a JSON file")->required();
  avg->add_option("--measure", measure_arg, "measure spec");
  avg->add_option("--function", function, "F, G or degree")->check(CLI::IsMember({"F", "G", "degree"}));
  avg->add_option("--z", z, "generating-function argument")->check(CLI::Range(0.0, 1.0));
  avg->add_flag("--nonalgebra", nonalgebra, "build the intersection counterexample on the measure instead");
  add_common(avg, common, {"json", "csv"});

  auto* demo = app.add_subcommand("demo", "expected versus computed verdicts on the demo catalog");
  demo->add_option("names", demo_names, "demo names (default: all)");
  demo->add_option("--lattice-random", lattice_random, "also check the lattice on this many random T'' trees");
  demo->add_option("--lattice-seed", lattice_seed, "seed for the random trees");
  add_common(demo, common, {"table", "json", "csv"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*demo && demo->get_option("--format")->count() == 0) common.format = "table";
    const json cfg = resolved_config(common);
    const ClassifierParams params = ClassifierParams::from_json(cfg);

    if (*cls || *thermo) {
      json run_cfg = cfg;
      run_cfg["graph"] = json_arg(graph_arg);
      run_cfg["measure"] = json_arg(measure_arg);
      auto ctx = make_context(run_cfg["graph"], run_cfg["measure"], params);
      run_cfg["window"] = ctx.window();
      if (*cls) {
        auto v = classify(ctx, !no_thermo);
        CsvTable t{{"part", "class", "detail"},
                   {{"local", to_string(v.local.cls), v.local.evidence.empty() ? "" : v.local.evidence.back().detail},
                    {"average", to_string(v.average.cls), v.average.qualifier},
                    {"sup", to_string(v.average.sup), ""},
                    {"thermo", no_thermo ? "skipped" : to_string(v.thermo.cls), v.thermo.trace.route}}};
        emit(common, "classify", run_cfg, v.to_json(), t);
        return verdict_exit(v, !no_thermo);
      }
      auto lv = classify_local(*ctx.kernel, ctx.graph().root(), params);
      auto tv = classify_thermo(ctx, lv);
      CsvTable t{{"n", "alpha", "partial_sum", "oscillation"}, {}};
      const auto& tr = tv.trace;
      for (std::size_t n = 1; n < tr.alpha.size(); ++n)
        t.rows.push_back({std::to_string(n), fmt(tr.alpha[n]), fmt(tr.partial_sum[n]), fmt(tr.alpha_osc[n])});
      Verdict v;
      v.local = lv;
      v.thermo = tv;
      json res = v.to_json()["thermo"];
      res["alpha"] = tr.alpha;
      emit(common, "thermo", run_cfg, res, t);
      return tv.cls == ThermoClass::Inconclusive ? 2 : 0;
    }

    if (*flow) {
      json run_cfg = cfg;
      run_cfg["graph"] = json_arg(graph_arg);
      auto g = build_family(run_cfg["graph"]);
      auto k = kernel_for(g, run_cfg["graph"].value("kernel", std::string("simple")));
      const VertexId x = vertex_arg.empty() ? g->root() : VertexId(json::parse(vertex_arg).get<std::vector<std::int64_t>>());
      g->require_valid(x);
      run_cfg["vertex"] = x.c;
      run_cfg["radius"] = radius;
      run_cfg["radii"] = radii;
      auto f = solve_flow(*k, x, radius);
      auto cap = capacity_estimate(*k, x, radii);
      auto ray = rayleigh_check(*k, x, radii);
      auto th = thomson_check(f, 20, params.seed);
      json res{{"effective_resistance", f.effective_resistance},
               {"energy", f.energy},
               {"kirchhoff_residual", f.kirchhoff_residual},
               {"solver", f.solver},
               {"network", f.network->kind},
               {"capacity", {{"r_eff", cap.r_eff}, {"divergent", cap.divergent}, {"r_inf", cap.r_inf},
                             {"cap_estimate", cap.cap_estimate}, {"note", cap.note}}},
               {"rayleigh_ok", ray.ok},
               {"thomson_ok", th.ok},
               {"thomson_max_inner", th.max_inner}};
      CsvTable t{{"radius", "r_eff"}, {}};
      for (std::size_t i = 0; i < cap.radii.size(); ++i)
        t.rows.push_back({std::to_string(cap.radii[i]), fmt(cap.r_eff[i])});
      emit(common, "flow", run_cfg, res, t);
      return ray.ok && th.ok ? 0 : 1;
    }

    if (*avg) {
      json run_cfg = cfg;
      run_cfg["graph"] = json_arg(graph_arg);
      run_cfg["measure"] = json_arg(measure_arg);
      auto ctx = make_context(run_cfg["graph"], run_cfg["measure"], params);
      const auto ns = ctx.window();
      run_cfg["window"] = ns;
      if (nonalgebra) {
        auto r = nonalgebra_counterexample(ctx.lambda, 3000);
        json res{{"k", r.k},
                 {"A", r.verdict_A.verdict},
                 {"B", r.verdict_B.verdict},
                 {"AB", r.verdict_AB.verdict},
                 {"separation", r.separation},
                 {"trace_AB", r.trace_AB.values},
                 {"ns", r.trace_AB.ns}};
        CsvTable t{{"n", "A", "B", "AB"}, {}};
        for (std::size_t i = 0; i < r.trace_AB.ns.size(); ++i)
          t.rows.push_back({std::to_string(r.trace_AB.ns[i]), fmt(r.trace_A.values[i]), fmt(r.trace_B.values[i]),
                            fmt(r.trace_AB.values[i])});
        emit(common, "nonalgebra", run_cfg, res, t);
        return r.verdict_AB.verdict == "non-measurable" ? 0 : 2;
      }
      run_cfg["function"] = function;
      run_cfg["z"] = z;
      const auto& kern = *ctx.kernel;
      const long N = params.N;
      VertexFn f;
      if (function == "degree") {
        f = [&kern](const VertexId& x) { return static_cast<double>(kern.graph().degree(x)); };
      } else {
        const bool want_F = function == "F";
        f = memoize([&kern, N, z, want_F](const VertexId& x) {
          auto e = evaluate_F_G(return_series(kern, x, N, Arithmetic::Float), z);
          return want_F ? e.F_partial : e.G_partial;
        });
      }
      auto tr = average_trace(f, ctx.lambda, ns, params.resolution);
      json res{{"ns", tr.ns}, {"values", tr.values}, {"inf_estimate", tr.inf_estimate},
               {"sup_estimate", tr.sup_estimate}, {"oscillation", tr.oscillation}, {"note", tr.note}};
      CsvTable t{{"n", "average", "support"}, {}};
      for (std::size_t i = 0; i < tr.ns.size(); ++i)
        t.rows.push_back({std::to_string(tr.ns[i]), fmt(tr.values[i]), fmt(tr.support[i])});
      emit(common, "average", run_cfg, res, t);
      return 0;
    }

    if (*demo) {
      std::vector<DemoSpec> specs;
      if (demo_names.empty()) {
        specs = demo_catalog();
      } else {
        for (auto& n : demo_names) specs.push_back(find_demo(n));
      }
      json run_cfg = cfg;
      std::vector<DemoRow> rows;
      for (auto& s : specs) {
        rows.push_back(run_demo(s, params));
        std::fprintf(stderr, "%s: %s (%.1fs)\n", s.name.c_str(),
                     rows.back().match ? "match" : (rows.back().inconclusive ? "inconclusive" : "MISMATCH"),
                     rows.back().seconds);
      }
      int code = demo_exit_code(rows);
      json lattice = nullptr;
      if (lattice_random > 0) {
        run_cfg["lattice_random"] = lattice_random;
        run_cfg["lattice_seed"] = lattice_seed;
        auto sw = lattice_sweep(random_doubleprime_specs(lattice_random, lattice_seed), params);
        lattice = json{{"ok", sw.ok}, {"graphs", sw.graphs}, {"verdicts", sw.verdicts}, {"violations", sw.violations}};
        if (!sw.ok) code = 1;
      }
      CsvTable t{{"demo", "expected", "computed", "status", "seconds", "note"}, {}};
      json res = json::array();
      for (auto& r : rows) {
        const std::string status = r.match ? "match" : (r.inconclusive ? "inconclusive" : "mismatch");
        t.rows.push_back({r.name, r.expected, r.computed, status, fmt(r.seconds), r.note});
        res.push_back(json{{"demo", r.name}, {"expected", r.expected}, {"computed", r.computed}, {"status", status},
                           {"seconds", r.seconds}, {"note", r.note}, {"detail", r.detail}});
      }
      if (common.format == "table") {
        std::ostringstream os;
        os << "# schema=" << kSchemaTag << " kind=demo\n# config=" << run_cfg.dump() << "\n";
        for (auto& row : t.rows)
          os << std::left << std::setw(12) << row[0] << " expected " << std::setw(40) << row[1] << " computed "
             << std::setw(46) << row[2] << " " << row[3] << (row[5].empty() ? "" : "  [" + row[5] + "]") << "\n";
        if (!lattice.is_null()) os << "lattice on " << lattice_random << " random T'' trees: "
                                   << (lattice["ok"].get<bool>() ? "ok" : "VIOLATED") << "\n";
        write_text(common.out, os.str());
      } else {
        emit(common, "demo", run_cfg, json{{"rows", res}, {"lattice", lattice}, {"exit_code", code}}, t);
      }
      return code;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
