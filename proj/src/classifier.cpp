#include "rwavg/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "rwavg/ball.hpp"
#include "rwavg/montecarlo.hpp"
#include "rwavg/series.hpp"

namespace rwavg {

using nlohmann::json;

std::string to_string(LocalClass c) {
  switch (c) {
    case LocalClass::Recurrent: return "Recurrent";
    case LocalClass::Transient: return "Transient";
    default: return "inconclusive";
  }
}
std::string to_string(AverageClass c) {
  switch (c) {
    case AverageClass::ROA: return "ROA";
    case AverageClass::TOA: return "TOA";
    default: return "inconclusive";
  }
}
std::string to_string(SupClass c) {
  switch (c) {
    case SupClass::Suprecurrent: return "Suprecurrent";
    case SupClass::Suptransient: return "Suptransient";
    default: return "inconclusive";
  }
}
std::string to_string(ThermoClass c) {
  switch (c) {
    case ThermoClass::ROA_t: return "ROA_t";
    case ThermoClass::TOA_t: return "TOA_t";
    case ThermoClass::Unclassifiable: return "unclassifiable";
    default: return "inconclusive";
  }
}

json ClassifierParams::to_json() const {
  return json{{"N", N},
              {"delta", delta},
              {"radii", radii},
              {"mc_trials", mc_trials},
              {"mc_horizon", mc_horizon},
              {"seed", seed},
              {"cap_floor", cap_floor},
              {"thermo_gap", thermo_gap},
              {"thermo_nmax", thermo_nmax},
              {"window", window},
              {"resolution", resolution == Resolution::Classes ? "classes" : "vertices"}};
}

ClassifierParams ClassifierParams::from_json(const json& j) {
  ClassifierParams p;
  p.N = j.value("N", p.N);
  p.delta = j.value("delta", p.delta);
  p.radii = j.value("radii", p.radii);
  p.mc_trials = j.value("mc_trials", p.mc_trials);
  p.mc_horizon = j.value("mc_horizon", p.mc_horizon);
  p.seed = j.value("seed", p.seed);
  p.cap_floor = j.value("cap_floor", p.cap_floor);
  p.thermo_gap = j.value("thermo_gap", p.thermo_gap);
  p.thermo_nmax = j.value("thermo_nmax", p.thermo_nmax);
  p.window = j.value("window", p.window);
  const std::string res = j.value("resolution", std::string("classes"));
  if (res != "classes" && res != "vertices") throw std::invalid_argument("resolution must be 'classes' or 'vertices'");
  p.resolution = res == "classes" ? Resolution::Classes : Resolution::Vertices;
  if (p.N < 8 || p.delta <= 0 || p.delta >= 0.3 || p.mc_trials < 1 || p.mc_horizon < 1 || p.thermo_nmax < 2 ||
      p.radii.size() < 3)
    throw std::invalid_argument("classifier parameters out of range (N >= 8, 0 < delta < 0.3, at least three radii)");
  return p;
}

namespace {

// F(1) of the reference lattices; Z3 from the Watson constant G(0,0) = 1.516386...
constexpr double kWatsonG = 1.516386059151978;
double reference_F1(const std::string& L) { return L == "Z3" ? 1.0 - 1.0 / kWatsonG : 1.0; }

// Horizon at which sampled coefficients are compared with the reference lattice.
constexpr long kIdentityHorizon = 16;

json evidence_json(const std::vector<Evidence>& ev) {
  json a = json::array();
  for (auto& e : ev)
    a.push_back(json{{"criterion", e.criterion}, {"detail", e.detail}, {"numbers", e.numbers}, {"heuristic", e.heuristic}});
  return a;
}

const RadialTree* as_tree(const LazyGraph& g) { return dynamic_cast<const RadialTree*>(&g); }

// s_j = beta + ... + beta^j.
std::vector<long> ntd_levels(const LazyGraph& g, int count) {
  const long beta = g.params().value("beta", 2L);
  std::vector<long> s;
  long acc = 0, pw = 1;
  for (int j = 0; j < count; ++j) {
    pw *= beta;
    acc += pw;
    s.push_back(acc);
  }
  return s;
}

// How far a sequence swings back at its local extrema: zero for monotone traces, the
// alternation amplitude for period-two ones.
double reversal_amplitude(const std::vector<double>& v, std::size_t from) {
  double amp = 0.0;
  for (std::size_t i = std::max<std::size_t>(from, 1); i + 1 < v.size(); ++i) {
    const double l = v[i] - v[i - 1], r = v[i + 1] - v[i];
    if (l * r < 0) amp = std::max(amp, std::min(std::fabs(l), std::fabs(r)));
  }
  return amp;
}

class SeriesCache {
 public:
  SeriesCache(const WalkKernel& k, long N) : k_(k), N_(N) {}
  const ReturnSeries& at(const VertexId& x) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(x, return_series(k_, x, N_, Arithmetic::Float)).first->second;
  }

 private:
  const WalkKernel& k_;
  long N_;
  std::mutex mu_;
  std::map<VertexId, ReturnSeries> cache_;
};

// Vertices whose balls of radius `reach` look alike share this key. Cube coordinates are
// clipped at the faces; near the spine corner the full vertex is kept.
VertexId local_signature(const LazyGraph& g, const VertexId& x, long reach) {
  if (g.family() != "cubes") return x;
  const auto& cg = static_cast<const CubesGraph&>(g);
  if (x[1] + x[2] + x[3] <= reach + 1) return x;
  const auto s = cg.side(x[0]);
  VertexId key{-1};
  for (int k = 1; k < 4; ++k) {
    key.c.push_back(std::min<std::int64_t>(x[k], reach + 1));
    key.c.push_back(std::min<std::int64_t>(s - x[k], reach + 1));
  }
  return key;
}

// f^(n)(x,x) for n <= nmax: the reference coefficient when no defect is reachable by time n,
// otherwise the series of a vertex with the same local picture.
class CoefficientTable {
 public:
  CoefficientTable(const WalkKernel& k, long nmax) : k_(k), nmax_(nmax), cache_(k, nmax) {}
  double operator()(const VertexId& x, long n) {
    const auto& g = k_.graph();
    if (k_.simple()) {
      for (auto& L : g.reference_lattices())
        if (n / 2 < g.reference_radius(x, L)) return reference_f(L, nmax_)[n];
    }
    const VertexId key = local_signature(g, x, nmax_ / 2);
    auto it = rep_.find(key);
    if (it == rep_.end()) it = rep_.emplace(key, x).first;
    return cache_.at(it->second).f[n];
  }

 private:
  const WalkKernel& k_;
  long nmax_;
  SeriesCache cache_;
  std::map<VertexId, VertexId> rep_;
};

struct RoaWitness {
  std::string set;
  VertexPred member;
  VertexFn F_lower;
  std::string justification;
  bool vertex_resolution = false;
};

struct ToaWitness {
  std::string set;
  VertexPred member;
  double sup_bound = 1.0;  // sup over the set of an upper bound on F(x,x|1)
  bool heuristic = false;
  std::string justification;
  json numbers = json::object();
};

// Upper bounds on the resistance from a level-l vertex to infinity inside its descendant
// subtree. Branching into two or more children at least every g levels keeps the subtree
// resistance below 2g, which seeds the backward recursion R(l) = (1 + R(l+1)) / c(l).
std::optional<std::vector<double>> descendant_resistance(const RadialTree& t, long levels) {
  long g = 0;
  if (t.family() == "tree_doubleprime" || t.family() == "tree_prime") g = t.params().value("n", 0L);
  if (g < 1) return std::nullopt;
  const long top = levels + 4 * g;
  std::vector<double> R(top + 2, 0.0);
  R[top + 1] = 2.0 * static_cast<double>(g);
  for (long l = top; l >= 0; --l) R[l] = (1.0 + R[l + 1]) / static_cast<double>(t.children(l));
  R.resize(levels + 1);
  return R;
}

std::optional<RoaWitness> roa_witness(const ClassifierContext& ctx) {
  const auto& g = ctx.graph();
  if (g.family() == "trt") {
    auto trt = std::dynamic_pointer_cast<const TrtKernel>(ctx.kernel);
    if (!trt) return std::nullopt;
    RoaWitness w;
    w.set = "C_{n>=10}";
    w.member = [](const VertexId& v) { return v[0] >= 10; };
    w.F_lower = [trt](const VertexId& v) { return std::pow(trt->p(v[0]), static_cast<double>(v[0] + 1)); };
    w.justification = "one turn around the cycle C_n returns with probability p_n^(n+1) -> 1";
    w.vertex_resolution = true;
    return w;
  }
  if (!ctx.kernel->simple() || g.family() == "zd") return std::nullopt;
  const auto refs = g.reference_lattices();
  if (std::find(refs.begin(), refs.end(), "Z") == refs.end()) return std::nullopt;
  const LazyGraph* gp = &g;
  RoaWitness w;
  w.set = "{x : rho_Z(x) >= 2}";
  w.member = [gp](const VertexId& v) { return gp->reference_radius(v, "Z") >= 2; };
  w.F_lower = [gp](const VertexId& v) {
    const long r = gp->reference_radius(v, "Z");
    return r >= 1 ? 1.0 - 1.0 / static_cast<double>(r) : 0.0;
  };
  w.justification = "on a defect-free path of half-length rho the walk escapes with probability <= 1/rho";
  return w;
}

std::vector<VertexId> witness_sample(const LazyGraph& g) {
  std::vector<VertexId> out = g.orbit_representatives();
  const Ball b = ball(g, g.root(), 4);
  for (long d : {1L, 3L, 4L})
    for (auto& m : b.members)
      if (m.distance == d) {
        out.push_back(m.id);
        break;
      }
  return out;
}

std::optional<ToaWitness> toa_witness(const ClassifierContext& ctx, const LocalVerdict& local) {
  const auto& g = ctx.graph();
  const auto& k = *ctx.kernel;
  const auto& P = ctx.params;
  if (!k.reversible()) return std::nullopt;

  if (g.family() == "hair") {
    // A = lower half-space; each x there carries a translate of the half-space flow from o.
    auto half = [](const VertexId& v) { return v[2] <= 0; };
    auto cap = capacity_estimate(k, g.root(), P.radii, half);
    if (cap.divergent) return std::nullopt;
    auto base = solve_flow(k, g.root(), 8, half);
    double worst = 0.0;
    for (auto t : {VertexId{5, -3, 0}, VertexId{0, 0, -6}, VertexId{-2, 7, -3}}) {
      auto moved = translate_flow(base, embedding_for(g, "lower_half", t), g);
      worst = std::max(worst, std::fabs(moved.energy - base.energy));
    }
    ToaWitness w;
    w.set = "X_- (height <= 0)";
    w.member = half;
    w.sup_bound = 1.0 - 1.0 / (6.0 * cap.r_inf);
    w.heuristic = true;
    w.justification = "G(x,x) <= m(x) E(u_x) with u_x a translate of the half-space unit flow";
    w.numbers = json{{"half_space_r_eff", cap.r_eff}, {"r_inf", cap.r_inf}, {"translation_energy_error", worst}};
    return w;
  }

  const auto* t = as_tree(g);
  if (t && (g.family() == "homogeneous_tree" || g.family() == "bihomogeneous_tree")) {
    const std::vector<long> radii{8, 16, 32, 64};
    double b = 0.0;
    json per = json::array();
    std::map<int, double> energy;
    for (auto& rep : g.orbit_representatives()) {
      auto cap = capacity_estimate(k, rep, radii);
      if (cap.divergent) return std::nullopt;
      energy[g.orbit_of(rep)] = cap.r_inf;
      b = std::max(b, 1.0 - 1.0 / (k.measure(rep).value() * cap.r_inf));
      per.push_back(json{{"rep", rep.c}, {"r_inf", cap.r_inf}});
    }
    // Every vertex is an automorphic image of a representative, so its flow has the same energy.
    auto wit = toa_flow_witness(k, witness_sample(g), radii, 1e6,
                                [&](const VertexId& x) -> std::optional<double> { return energy.at(g.orbit_of(x)); });
    ToaWitness w;
    w.set = "X";
    w.member = [](const VertexId&) { return true; };
    w.sup_bound = b;
    w.heuristic = true;
    w.justification = "finitely many orbits; flows moved by automorphisms keep their energy";
    w.numbers = json{{"orbits", per}, {"flow_witness", wit.witness}, {"flow_message", wit.message}};
    return w;
  }
  if (t) {
    const auto ns = ctx.window();
    const long levels = *std::max_element(ns.begin(), ns.end()) + 2;
    auto R = descendant_resistance(*t, levels);
    if (!R) return std::nullopt;
    auto Rp = std::make_shared<std::vector<double>>(std::move(*R));
    VertexFn bound = [t, Rp](const VertexId& v) {
      const auto l = v[0];
      if (l >= static_cast<long>(Rp->size())) return 1.0;
      return 1.0 - 1.0 / (static_cast<double>(t->level_degree(l)) * (*Rp)[l]);
    };
    const double cut = 1.0 - 3.0 * P.delta;
    ToaWitness w;
    w.set = "{x : descendant bound <= 1 - 3 delta}";
    w.member = [bound, cut](const VertexId& v) { return bound(v) <= cut; };
    w.sup_bound = cut;
    w.justification = "the descendant subtree carries a unit flow to infinity, so G <= m R_desc (Rayleigh)";
    double worst = 0.0;
    for (long l = 0; l < levels; ++l)
      worst = std::max(worst, 1.0 - 1.0 / (static_cast<double>(t->level_degree(l)) * (*Rp)[l]));
    w.numbers = json{{"uniform_bound", worst}, {"levels", levels}};
    return w;
  }
  if (g.orbit_count() && *g.orbit_count() == 1 && local.cls == LocalClass::Transient && local.F_upper) {
    ToaWitness w;
    w.set = "X";
    w.member = [](const VertexId&) { return true; };
    w.sup_bound = *local.F_upper;
    w.heuristic = true;
    w.justification = "vertex-transitive: F(x,x) is constant and bounded by the flow estimate at o";
    if (local.capacity) w.numbers = json{{"r_inf", local.capacity->r_inf}};
    return w;
  }
  return std::nullopt;
}

double trt_ratio(const TrtKernel& k) { return k.alpha() / (1.0 - 2.0 * k.alpha()); }

// First-return frequencies at horizons H and 4H from one batch of walks.
struct McCertificate {
  ReturnEstimate short_run, long_run;
  double increment = 0.0;
};
McCertificate mc_certificate(const WalkKernel& k, const VertexId& x, const ClassifierParams& P) {
  auto est = monte_carlo_returns(k, x, {P.mc_horizon, 4 * P.mc_horizon}, P.mc_trials, P.seed);
  return {est[0], est[1], est[1].estimate - est[0].estimate};
}

json mc_json(const McCertificate& c) {
  return json{{"horizons", {c.short_run.horizon, c.long_run.horizon}},
              {"estimates", {c.short_run.estimate, c.long_run.estimate}},
              {"ci_low", c.long_run.ci_low},
              {"ci_high", c.long_run.ci_high},
              {"increment", c.increment},
              {"trials", c.long_run.trials}};
}

void fill_z_grid(ThermoTrace& tr) {
  for (double z : {0.5, 0.9, 0.99, 0.999}) {
    double s = 0.0, zn = 1.0;
    for (std::size_t n = 1; n < tr.alpha.size(); ++n) {
      zn *= z;
      s += tr.alpha[n] * zn;
    }
    tr.z_grid.emplace_back(z, s);
  }
}

void fill_partial(ThermoTrace& tr) {
  tr.partial_sum.assign(tr.alpha.size(), 0.0);
  double s = 0.0;
  for (std::size_t n = 0; n < tr.alpha.size(); ++n) tr.partial_sum[n] = (s += tr.alpha[n]);
  if (tr.alpha_osc.size() != tr.alpha.size()) tr.alpha_osc.assign(tr.alpha.size(), 0.0);
}

}  // namespace

std::vector<long> ClassifierContext::window() const {
  return params.window.empty() ? default_window(graph(), measure_tag) : params.window;
}

std::vector<long> default_window(const LazyGraph& g, const std::string& tag) {
  const auto fam = g.family();
  if (tag == "hair_skewed") return window(10, 16);
  if (tag == "cube_union") return window(16, 48, 16);
  if (tag != "balls") return window(4, 12, 2);
  if (fam == "trt") return window(128, 256, 16);
  if (fam == "ntd") {
    // Midpoints between consecutive special levels, where the sphere profile repeats.
    const auto s = ntd_levels(g, 17);
    std::vector<long> ns;
    for (int j = 11; j < 16; ++j) ns.push_back((s[j] + s[j + 1]) / 2);
    return ns;
  }
  if (fam == "hair") return window(8, 32, 8);
  if (fam == "cubes") return window(8, 24, 8);
  if (as_tree(g)) return window(8, 24);
  return window(4, 12, 2);
}

ClassifierContext make_context(const json& graph_spec, const json& measure_spec, const ClassifierParams& params) {
  GraphPtr g = build_family(graph_spec);
  const std::string kind = graph_spec.value("kernel", std::string(g->family() == "trt" ? "custom" : "simple"));
  const json kp = graph_spec.value("kernel_params", json::object());
  KernelPtr k = kernel_for(g, kind, kp);
  std::string tag;
  if (measure_spec.is_string()) {
    tag = measure_spec.get<std::string>();
  } else if (measure_spec.is_object()) {
    const auto kd = measure_spec.value("kind", std::string());
    tag = kd == "icf" ? measure_spec.value("generator", std::string()) : kd;
  }
  return ClassifierContext{k, measure_from_spec(g, measure_spec), params, tag};
}

LocalVerdict classify_local(const WalkKernel& k, const VertexId& x, const ClassifierParams& P) {
  LocalVerdict v;
  v.vertex = x;
  const double d = P.delta;

  if (auto trt = dynamic_cast<const TrtKernel*>(&k)) {
    // With cycle excursions collapsed the spine is a birth-death chain whose back/forward
    // ratio is alpha/(1-2 alpha); F(o,o) equals that ratio.
    const double r = trt_ratio(*trt);
    auto mc = mc_certificate(k, k.graph().root(), P);
    const bool consistent = mc.long_run.ci_low <= r + 1e-12;
    v.evidence.push_back({"spine birth-death quotient", "F(o,o) = alpha/(1-2 alpha); transience is a class property",
                          json{{"ratio", r}, {"mc", mc_json(mc)}, {"mc_consistent", consistent}}});
    if (r <= 1.0 - 3.0 * d && consistent) {
      v.cls = LocalClass::Transient;
      if (x == k.graph().root()) v.F_upper = r;
    }
    return v;
  }

  if (k.reversible()) {
    std::optional<CapacityEstimate> cap;
    try {
      cap = capacity_estimate(k, x, P.radii);
    } catch (const FlowError& e) {
      v.evidence.push_back({"capacity", std::string("flow solve failed: ") + e.what()});
    }
    if (cap) {
      v.capacity = cap;
      v.evidence.push_back({"effective resistance to distance R",
                            cap->divergent ? "resistance increments do not decay geometrically" : "resistance converges",
                            json{{"radii", cap->radii}, {"r_eff", cap->r_eff}, {"r_inf", cap->r_inf},
                                 {"capacity", cap->cap_estimate}},
                            true});
      if (!cap->divergent && cap->cap_estimate > P.cap_floor) {
        v.cls = LocalClass::Transient;
        v.F_upper = 1.0 - 1.0 / (k.measure(x).value() * cap->r_inf);
        return v;
      }
      if (cap->divergent) {
        auto mc = mc_certificate(k, x, P);
        const bool compatible = mc.increment >= d / 2 || mc.long_run.ci_high >= 1.0 - d;
        v.evidence.push_back({"first-return frequency", compatible ? "still rising or close to 1" : "stalled below 1",
                              mc_json(mc), true});
        if (compatible) v.cls = LocalClass::Recurrent;
        return v;
      }
    }
  }

  auto mc = mc_certificate(k, x, P);
  const bool stalled = mc.increment < d / 2 && mc.long_run.ci_high <= 1.0 - 3.0 * d;
  v.evidence.push_back(
      {"first-return frequency", stalled ? "stalled below 1 - 3 delta" : "no certificate", mc_json(mc), true});
  if (stalled) {
    v.cls = LocalClass::Transient;
    v.F_upper = mc.long_run.ci_high;
  }
  return v;
}

AverageVerdict classify_on_average(const ClassifierContext& ctx, const LocalVerdict& local) {
  AverageVerdict av;
  const double d = ctx.params.delta;
  const auto ns = ctx.window();
  if (local.cls == LocalClass::Recurrent) {
    av.cls = AverageClass::ROA;
    av.sup = SupClass::Suprecurrent;
    av.infL_estimate = av.supL_estimate = 1.0;
    av.qualifier = "F = 1 everywhere on an irreducible recurrent walk";
    av.evidence.push_back({"local recurrence", "F(x,x) = 1 for every x"});
    return av;
  }

  bool roa = false, toa = false;
  if (auto w = roa_witness(ctx)) {
    const VertexPred S = w->member;
    const VertexFn Fl = w->F_lower;
    auto tr = average_trace([S, Fl](const VertexId& x) { return S(x) ? Fl(x) : 0.0; }, ctx.lambda, ns,
                            w->vertex_resolution ? Resolution::Vertices : ctx.params.resolution);
    av.infL_estimate = std::max(av.infL_estimate, tr.inf_estimate);
    roa = tr.inf_estimate >= 1.0 - d;
    av.evidence.push_back({"ROA witness " + w->set, w->justification,
                           json{{"ns", tr.ns}, {"trace", tr.values}, {"tail_inf", tr.inf_estimate}}});
  }
  if (auto w = toa_witness(ctx, local)) {
    auto tr = average_trace(indicator(w->member), ctx.lambda, ns, ctx.params.resolution);
    toa = tr.sup_estimate >= d && w->sup_bound <= 1.0 - 3.0 * d;
    if (toa) {
      av.supL_estimate = 1.0 - tr.inf_estimate * (1.0 - w->sup_bound);
      if (tr.inf_estimate >= d) av.sup = SupClass::Suptransient;
    }
    auto numbers = w->numbers;
    numbers["ns"] = tr.ns;
    numbers["measure_of_set"] = tr.values;
    numbers["sup_bound"] = w->sup_bound;
    av.evidence.push_back({"TOA witness " + w->set, w->justification, numbers, w->heuristic});
  }
  if (roa && toa) {
    av.qualifier = "conflicting witnesses";
    av.sup = SupClass::Inconclusive;
    av.infL_estimate = 0.0;
    av.supL_estimate = 1.0;
    return av;
  }
  if (roa) {
    av.cls = AverageClass::ROA;
    av.supL_estimate = 1.0;
    av.qualifier = "averaged F tends to 1 on the window";
  } else if (toa) {
    av.cls = AverageClass::TOA;
    av.qualifier = "a set of positive averaged measure has F bounded below 1";
  } else {
    av.qualifier = "insufficient evidence";
  }
  return av;
}

ThermoVerdict classify_thermo(const ClassifierContext& ctx, const LocalVerdict& local) {
  ThermoVerdict tv;
  auto& tr = tv.trace;
  const auto& g = ctx.graph();
  const auto& P = ctx.params;
  const double d = P.delta;
  const auto ns = ctx.window();

  // Single orbit: alpha_n = f^(n)(o,o) for every measure.
  if (g.orbit_count() && *g.orbit_count() == 1 && ctx.kernel->simple()) {
    const auto s = return_series(*ctx.kernel, g.root(), P.N, Arithmetic::Float);
    tr.alpha = s.f;
    tr.route = "single orbit";
    fill_partial(tr);
    fill_z_grid(tr);
    tr.tail_bound = 1.0 - tr.partial_sum.back();
    if (local.cls == LocalClass::Recurrent) {
      tv.cls = ThermoClass::ROA_t;
      tv.evidence.push_back({"single orbit", "sum of alpha_n = F(o,o) = 1", json{{"partial", tr.partial_sum.back()}}});
    } else if (local.cls == LocalClass::Transient && local.F_upper && *local.F_upper <= 1.0 - 3.0 * d) {
      tv.cls = ThermoClass::TOA_t;
      tr.tail_bound = std::max(0.0, *local.F_upper - tr.partial_sum.back());
      tv.evidence.push_back({"single orbit", "sum of alpha_n = F(o,o) below 1",
                             json{{"partial", tr.partial_sum.back()}, {"F_upper", *local.F_upper}}, true});
    }
    return tv;
  }

  // TRT: f^(k)(x) <= 1 - p_m^(m+1) off C_{k-1}, and both bounds average to 0.
  if (auto trt = std::dynamic_pointer_cast<const TrtKernel>(ctx.kernel)) {
    const long K = 16;
    tr.alpha.assign(K + 1, 0.0);
    json traces = json::array();
    double total_last = 0.0;
    for (long kk = 1; kk <= K; ++kk) {
      auto b = [trt, kk](const VertexId& x) {
        const auto m = x[0];
        if (m == kk - 1) return 1.0;
        return 1.0 - std::pow(trt->p(m), static_cast<double>(m + 1));
      };
      auto t = average_trace(b, ctx.lambda, ns, Resolution::Vertices);
      tr.alpha[kk] = t.values.back();
      total_last += t.values.back();
      traces.push_back(t.values);
    }
    tr.route = "vanishing coefficient bound";
    tr.note = "alpha values are upper bounds at the last window index; each tends to 0";
    fill_partial(tr);
    fill_z_grid(tr);
    tv.cls = ThermoClass::TOA_t;
    tv.evidence.push_back({"coefficient bound",
                           "alpha_k <= lambda(C_{k-1}) + avg(1 - p_m^(m+1)); both vanish, so the sum of alpha_k is 0",
                           json{{"ns", ns}, {"bounds", traces}, {"sum_at_last", total_last}}});
    return tv;
  }

  // Coefficients averaged one at a time: an oscillating trace means alpha_n has no limit.
  CoefficientTable coef(*ctx.kernel, P.thermo_nmax);
  tr.alpha.assign(P.thermo_nmax + 1, 0.0);
  tr.alpha_osc.assign(P.thermo_nmax + 1, 0.0);
  json coef_traces = json::array();
  for (long n = 1; n <= P.thermo_nmax; ++n) {
    auto t = average_trace([&coef, n](const VertexId& x) { return coef(x, n); }, ctx.lambda, ns, P.resolution);
    tr.alpha[n] = t.values.back();
    tr.alpha_osc[n] = reversal_amplitude(t.values, t.tail_start);
    coef_traces.push_back(t.values);
    if (!tv.witness_n && tr.alpha_osc[n] > P.thermo_gap) tv.witness_n = n;
  }
  if (tv.witness_n) {
    tr.route = "coefficient oscillation";
    fill_partial(tr);
    fill_z_grid(tr);
    tv.cls = ThermoClass::Unclassifiable;
    tv.evidence.push_back({"coefficient oscillation", "the averaged f^(n) trace keeps reversing by more than the gap",
                           json{{"n", *tv.witness_n},
                                {"ns", ns},
                                {"trace", coef_traces[*tv.witness_n - 1]},
                                {"amplitude", tr.alpha_osc[*tv.witness_n]},
                                {"gap", P.thermo_gap}}});
    return tv;
  }

  // Reference lattice: off the sets {rho_L <= n/2} the coefficients are those of L.
  if (ctx.kernel->simple()) {
    SeriesCache truth(*ctx.kernel, kIdentityHorizon);
    for (auto& L : g.reference_lattices()) {
      const LazyGraph* gp = &g;
      const std::string Lc = L;
      const auto fL = reference_f(L, std::max(P.N, kIdentityHorizon));
      auto exc = [gp, Lc](const VertexId& x, long n) { return gp->reference_radius(x, Lc) <= n / 2; };
      auto a1 = [&truth](const VertexId& x, long n) { return truth.at(x).f[n]; };
      auto a2 = [&fL](const VertexId&, long n) { return fL[n]; };
      auto rep = identity_on_average_check(a1, a2, exc, ctx.lambda, ns, 0.99, kIdentityHorizon, P.resolution, 16, 1e-9);
      const bool accepted = rep.max_offset_diff <= 1e-9 && (rep.ok || rep.exceptional_bound.back() <= 1e-3);
      tv.evidence.push_back({"reference lattice " + L, rep.message,
                             json{{"ns", rep.ns},
                                  {"exceptional_bound", rep.exceptional_bound},
                                  {"max_offset_diff", rep.max_offset_diff},
                                  {"samples", rep.samples},
                                  {"accepted", accepted}},
                             true});
      if (!accepted) continue;
      tr.alpha.assign(fL.begin(), fL.begin() + P.N + 1);
      tr.alpha_osc.assign(tr.alpha.size(), 0.0);
      tr.route = "reference lattice " + L;
      fill_partial(tr);
      fill_z_grid(tr);
      const double total = reference_F1(L);
      tr.tail_bound = std::max(0.0, total - tr.partial_sum.back());
      if (tr.partial_sum.back() >= 1.0 - d) {
        tv.cls = ThermoClass::ROA_t;
      } else if (total <= 1.0 - 3.0 * d) {
        tv.cls = ThermoClass::TOA_t;
      }
      tv.evidence.push_back({"thermodynamic sum", "alpha_n equals the " + L + " coefficient",
                             json{{"partial", tr.partial_sum.back()}, {"total", total}}});
      if (tv.cls != ThermoClass::Inconclusive) return tv;
    }
  }

  // Uniform descendant bound: sum alpha_n <= liminf avg F <= limsup avg b (Fatou).
  if (auto t = as_tree(g)) {
    const long levels = *std::max_element(ns.begin(), ns.end()) + 2;
    if (auto R = descendant_resistance(*t, levels)) {
      auto Rp = std::make_shared<std::vector<double>>(std::move(*R));
      auto b = [t, Rp](const VertexId& v) {
        return 1.0 - 1.0 / (static_cast<double>(t->level_degree(v[0])) * (*Rp)[v[0]]);
      };
      auto tb = average_trace(b, ctx.lambda, ns, P.resolution);
      tr.route = "descendant bound";
      fill_partial(tr);
      fill_z_grid(tr);
      tr.tail_bound = tb.sup_estimate;
      tv.evidence.push_back({"descendant bound", "sum of alpha_n <= limsup of the averaged bound",
                             json{{"ns", ns}, {"trace", tb.values}, {"sup", tb.sup_estimate}}});
      if (tb.sup_estimate <= 1.0 - 3.0 * d) tv.cls = ThermoClass::TOA_t;
      return tv;
    }
  }
  if (tr.route.empty()) tr.route = "none";
  fill_partial(tr);
  fill_z_grid(tr);
  tv.evidence.push_back({"no route", "no thermodynamic certificate applies to this graph and measure"});
  return tv;
}

std::vector<std::string> lattice_violations(const Verdict& v) {
  std::vector<std::string> out;
  if (v.local.cls == LocalClass::Recurrent && v.average.cls == AverageClass::TOA) out.push_back("Recurrent with TOA");
  if (v.thermo.cls == ThermoClass::ROA_t && v.average.cls == AverageClass::TOA) out.push_back("ROA_t with TOA");
  if (v.average.cls == AverageClass::ROA && v.average.sup == SupClass::Suptransient)
    out.push_back("ROA with Suptransient");
  if (v.local.cls == LocalClass::Recurrent && v.average.sup == SupClass::Suptransient)
    out.push_back("Recurrent with Suptransient");
  if (v.average.infL_estimate > v.average.supL_estimate + 1e-12) out.push_back("infL > supL");
  return out;
}

Verdict classify(const ClassifierContext& ctx, bool with_thermo) {
  Verdict v;
  v.graph = ctx.graph().family();
  v.measure = ctx.lambda.name();
  v.local = classify_local(*ctx.kernel, ctx.graph().root(), ctx.params);
  v.average = classify_on_average(ctx, v.local);
  if (with_thermo) {
    v.thermo = classify_thermo(ctx, v.local);
    // ROA_t forces ROA: the sum of alpha_n is at most liminf avg F (Fatou).
    if (v.thermo.cls == ThermoClass::ROA_t && v.average.cls == AverageClass::Inconclusive &&
        v.average.qualifier == "insufficient evidence") {
      v.average.cls = AverageClass::ROA;
      v.average.infL_estimate = std::max(v.average.infL_estimate, 1.0 - ctx.params.delta);
      v.average.supL_estimate = 1.0;
      v.average.qualifier = "inferred from ROA_t";
      v.average.evidence.push_back({"inference", "sum of alpha_n <= liminf of the averaged F"});
    }
  }
  v.lattice_violations = lattice_violations(v);
  return v;
}

json Verdict::to_json() const {
  json j;
  j["graph"] = graph;
  j["measure"] = measure;
  j["local"] = json{{"class", to_string(local.cls)},
                    {"vertex", local.vertex.c},
                    {"F_upper", local.F_upper ? json(*local.F_upper) : json(nullptr)},
                    {"evidence", evidence_json(local.evidence)}};
  j["average"] = json{{"class", to_string(average.cls)},
                      {"sup_class", to_string(average.sup)},
                      {"infL_estimate", average.infL_estimate},
                      {"supL_estimate", average.supL_estimate},
                      {"qualifier", average.qualifier},
                      {"evidence", evidence_json(average.evidence)}};
  json zg = json::array();
  for (auto& [z, s] : thermo.trace.z_grid) zg.push_back(json{{"z", z}, {"sum", s}});
  const auto& ps = thermo.trace.partial_sum;
  j["thermo"] = json{{"class", to_string(thermo.cls)},
                     {"witness_n", thermo.witness_n ? json(*thermo.witness_n) : json(nullptr)},
                     {"route", thermo.trace.route},
                     {"partial_sum", ps.empty() ? 0.0 : ps.back()},
                     {"tail_bound", thermo.trace.tail_bound},
                     {"z_grid", zg},
                     {"note", thermo.trace.note},
                     {"evidence", evidence_json(thermo.evidence)}};
  j["lattice_violations"] = lattice_violations;
  j["lattice_ok"] = lattice_ok();
  return j;
}

JensenReport jensen_bound_check(const WalkKernel& k, const MeasureSequence& lambda, const std::vector<double>& zs,
                                long N, const std::vector<long>& ns, Resolution res) {
  SeriesCache cache(k, N);
  JensenReport rep;
  rep.ok = true;
  for (double z : zs) {
    if (!(z > 0.0 && z < 1.0)) throw std::invalid_argument("jensen check needs 0 < z < 1");
    JensenPoint pt;
    pt.z = z;
    pt.slack = pt.point_slack = std::numeric_limits<double>::infinity();
    for (long m : ns) {
      const auto lvl = lambda.at(m, res);
      double aF = 0.0, aG = 0.0, aPhi = 0.0;
      for (auto& a : lvl.atoms) {
        auto e = evaluate_F_G(cache.at(a.rep), z);
        aF += a.mass * e.F_partial;
        aG += a.mass * e.G_partial;
        aPhi += a.mass / (1.0 - e.F_partial);
      }
      const double tail = std::pow(z, static_cast<double>(N + 1)) / (1.0 - z);
      const double phi = 1.0 / (1.0 - aF);
      const double slack = aG + tail - phi;
      if (slack < pt.slack) {
        pt.slack = slack;
        pt.avg_F = aF;
        pt.phi_avg_F = phi;
        pt.avg_G = aG;
        pt.G_tail = tail;
      }
      pt.point_slack = std::min(pt.point_slack, aPhi - phi);
    }
    pt.ok = pt.slack >= -1e-12 && pt.point_slack >= -1e-12;
    rep.ok = rep.ok && pt.ok;
    rep.points.push_back(pt);
  }
  return rep;
}

GrowthReport averaged_G_growth(const WalkKernel& k, const MeasureSequence& lambda, const std::vector<double>& zs,
                               long N, const std::vector<long>& ns, Resolution res) {
  if (zs.empty() || ns.empty()) throw std::invalid_argument("growth report needs a z grid and a window");
  SeriesCache cache(k, N);
  GrowthReport r;
  r.zs = zs;
  r.ns = ns;
  for (double z : zs) {
    std::vector<double> row;
    for (long m : ns) {
      const auto lvl = lambda.at(m, res);
      double aG = 0.0;
      for (auto& a : lvl.atoms) aG += a.mass * evaluate_F_G(cache.at(a.rep), z).G_partial;
      row.push_back(aG);
    }
    r.avg_G.push_back(std::move(row));
  }
  const auto& top = r.avg_G.back();
  bool increasing = true;
  for (std::size_t i = 1; i < top.size(); ++i) increasing = increasing && top[i] > top[i - 1];
  r.grows = top.size() >= 2 && increasing && top.back() >= 1.2 * top.front();
  r.message = r.grows ? "averaged G increases along the window at z = " + std::to_string(zs.back())
                      : "no growth of the averaged G along the window";
  return r;
}

SubgraphInference subgraph_inference(const SubgraphEvidence& e, double delta) {
  SubgraphInference r;
  if (e.measure_of_S && e.rescaled_F_upper) {
    if (*e.measure_of_S < delta) {
      r.refusal = "lambda(S) is not bounded away from 0";
      return r;
    }
    if (*e.rescaled_F_upper <= 1.0 - 3.0 * delta) {
      r.cls = AverageClass::TOA;
      r.rule = "L(S) > 0 and the S-rescaled average of F stays below 1";
      return r;
    }
  }
  if (e.rescaled_F_lower && e.complement_F_lower) {
    if (!e.boundary_null) {
      r.refusal = "missing hypothesis: boundary of S is lambda-null";
      return r;
    }
    if (*e.boundary_null && *e.rescaled_F_lower >= 1.0 - delta && *e.complement_F_lower >= 1.0 - delta) {
      r.cls = AverageClass::ROA;
      r.rule = "both rescaled averages of F tend to 1 and the boundary is null";
      return r;
    }
  }
  if (e.measure_of_S && e.rescaled_F_lower && *e.measure_of_S >= 1.0 - 1e-9 && *e.rescaled_F_lower >= 1.0 - delta) {
    r.cls = AverageClass::ROA;
    r.rule = "S carries the full averaged measure and F averages to 1 on S";
    return r;
  }
  if (!e.measure_of_S) {
    r.refusal = "missing hypothesis: lambda(S)";
  } else if (!e.rescaled_F_upper && !e.rescaled_F_lower) {
    r.refusal = "missing hypothesis: rescaled average of F on S";
  } else {
    r.refusal = "hypotheses hold but no rule concludes";
  }
  return r;
}

}  // namespace rwavg
