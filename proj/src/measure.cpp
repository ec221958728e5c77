#include "rwavg/measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <unordered_map>

#include "rwavg/ball.hpp"

namespace rwavg {

std::string to_string(Regularity r) {
  switch (r) {
    case Regularity::Yes: return "yes";
    case Regularity::No: return "no";
    default: return "unknown";
  }
}

MeasureSequence::MeasureSequence(std::string kind, std::string name, GraphPtr g, Regularity reg, bool nested,
                                 Generator gen, nlohmann::json spec)
    : kind_(std::move(kind)), name_(std::move(name)), graph_(std::move(g)), reg_(reg), nested_(nested),
      gen_(std::move(gen)), spec_(std::move(spec)) {}

MeasureLevel MeasureSequence::at(long n, Resolution res) const {
  if (n < 0) throw AverageError("measure index must be >= 0");
  MeasureLevel lvl = gen_(n, res);
  lvl.n = n;
  CompensatedSum s;
  for (auto& a : lvl.atoms) {
    if (!(a.mass >= 0.0)) throw AverageError(name_ + ": negative weight at " + rwavg::to_string(a.rep));
    s.add(a.mass);
  }
  if (std::fabs(s.value() - 1.0) > 1e-12)
    throw AverageError(name_ + ": weights at n=" + std::to_string(n) + " sum to " + std::to_string(s.value()));
  return lvl;
}

namespace {

MeasureLevel uniform_over(std::vector<VertexId> vs) {
  MeasureLevel lvl;
  const double w = 1.0 / static_cast<double>(vs.size());
  lvl.atoms.reserve(vs.size());
  for (auto& v : vs) lvl.atoms.push_back(Atom{std::move(v), 1.0, w});
  lvl.support_size = static_cast<double>(lvl.atoms.size());
  return lvl;
}

// Atoms with counts; masses proportional to counts.
MeasureLevel uniform_classes(std::vector<Atom> atoms) {
  MeasureLevel lvl;
  double total = 0.0;
  for (auto& a : atoms) total += a.count;
  for (auto& a : atoms) a.mass = a.count / total;
  lvl.atoms = std::move(atoms);
  lvl.support_size = total;
  lvl.lumped = true;
  return lvl;
}

double diamond_count(long r) { return r < 0 ? 0.0 : 2.0 * r * r + 2.0 * r + 1.0; }

// |{x in Z^d : |x|_1 <= n}|
double lattice_ball_count(int d, long n) {
  std::vector<double> cur(n + 1, 1.0);  // d = 0
  for (int k = 1; k <= d; ++k) {
    std::vector<double> nxt(n + 1, 0.0);
    for (long r = 0; r <= n; ++r) {
      double s = cur[r];
      for (long j = 1; j <= r; ++j) s += 2.0 * cur[r - j];
      nxt[r] = s;
    }
    cur.swap(nxt);
  }
  return cur[n];
}

double permutations_of(std::int64_t a, std::int64_t b, std::int64_t c) {
  if (a == b && b == c) return 1.0;
  if (a == b || b == c || a == c) return 3.0;
  return 6.0;
}

// First-child descent reps of a spherically symmetric tree, extended on demand.
struct LevelReps {
  std::mutex mu;
  std::vector<VertexId> reps;
  std::vector<double> counts;
};

void extend_levels(const RadialTree& t, LevelReps& L, long upto) {
  if (L.reps.empty()) {
    L.reps.push_back(t.root());
    L.counts.push_back(1.0);
  }
  while (static_cast<long>(L.reps.size()) <= upto) {
    const VertexId& v = L.reps.back();
    const auto lev = v[0];
    VertexId child;
    for (auto& w : t.neighbors(v)) {
      if (w[0] == lev + 1) {
        child = w;
        break;
      }
    }
    L.counts.push_back(L.counts.back() * static_cast<double>(t.children(lev)));
    L.reps.push_back(std::move(child));
  }
}

std::vector<VertexId> exact_ball(const LazyGraph& g, const VertexId& o, long n) {
  try {
    Ball b = ball(g, o, n, kMaxMeasureVertices);
    std::vector<VertexId> vs;
    vs.reserve(b.size());
    for (auto& m : b.members) vs.push_back(std::move(m.id));
    return vs;
  } catch (const GraphError& e) {
    throw AverageError(std::string("measure support too large at vertex resolution: ") + e.what());
  }
}

void guard_count(double c, const std::string& what) {
  if (c > static_cast<double>(kMaxMeasureVertices))
    throw AverageError(what + ": support of " + std::to_string(static_cast<long long>(c)) +
                       " vertices is too large at vertex resolution; use class resolution");
}

}  // namespace

MeasureSequence measure_balls(GraphPtr g, const VertexId& origin) {
  g->require_valid(origin);
  const std::string fam = g->family();
  nlohmann::json spec{{"kind", "balls"}, {"origin", origin.c}};
  auto levels = std::make_shared<LevelReps>();
  auto gen = [g, origin, fam, levels](long n, Resolution res) -> MeasureLevel {
    if (res == Resolution::Classes) {
      if (fam == "zd") {
        const int d = static_cast<int>(origin.size());
        return uniform_classes({Atom{origin, lattice_ball_count(d, n), 0.0}});
      }
      if (auto* t = dynamic_cast<const RadialTree*>(g.get()); t && origin[0] == 0) {
        std::lock_guard<std::mutex> lock(levels->mu);
        extend_levels(*t, *levels, n);
        std::vector<Atom> atoms;
        atoms.reserve(n + 1);
        for (long l = 0; l <= n; ++l) atoms.push_back(Atom{levels->reps[l], levels->counts[l], 0.0});
        return uniform_classes(std::move(atoms));
      }
      if (fam == "hair" && origin[2] == 0) {
        std::vector<Atom> atoms;
        for (long y = -n; y <= n; ++y)
          atoms.push_back(Atom{VertexId{origin[0], origin[1], y}, diamond_count(n - std::labs(y)), 0.0});
        return uniform_classes(std::move(atoms));
      }
      if (auto* cg = dynamic_cast<const CubesGraph*>(g.get()); cg && origin == g->root()) {
        std::vector<Atom> atoms;
        for (std::int64_t i = 0; i <= n; ++i) {
          const std::int64_t s = cg->side(i), budget = n - i;
          for (std::int64_t a = 0; a <= std::min(s, budget); ++a)
            for (std::int64_t b = a; b <= std::min(s, budget - a); ++b)
              for (std::int64_t c = b; c <= std::min(s, budget - a - b); ++c)
                atoms.push_back(Atom{VertexId{i, a, b, c}, permutations_of(a, b, c), 0.0});
        }
        return uniform_classes(std::move(atoms));
      }
    }
    return uniform_over(exact_ball(*g, origin, n));
  };
  return MeasureSequence("balls", "balls(" + to_string(origin) + ")", g, Regularity::Yes, true, gen, spec);
}

MeasureSequence measure_icf(GraphPtr g, const std::string& generator) {
  nlohmann::json spec{{"kind", "icf"}, {"generator", generator}};
  if (generator == "balls") return measure_balls(g, g->root());
  if (generator == "hair_skewed") {
    if (g->family() != "hair") throw AverageError("icf 'hair_skewed' needs the hair family");
    // B_n = (B(o,2^n) with height > 0) union (B(o,n) with height <= 0)
    auto gen = [](long n, Resolution res) -> MeasureLevel {
      if (n > 40) throw AverageError("hair_skewed: index too large (2^n overflows the desk scale)");
      const long up = 1L << n;
      if (res == Resolution::Classes) {
        std::vector<Atom> atoms;
        for (long y = -n; y <= 0; ++y) atoms.push_back(Atom{VertexId{0, 0, y}, diamond_count(n + y), 0.0});
        for (long y = 1; y <= up; ++y) atoms.push_back(Atom{VertexId{0, 0, y}, diamond_count(up - y), 0.0});
        return uniform_classes(std::move(atoms));
      }
      double total = 0.0;
      for (long y = -n; y <= 0; ++y) total += diamond_count(n + y);
      for (long y = 1; y <= up; ++y) total += diamond_count(up - y);
      guard_count(total, "hair_skewed");
      std::vector<VertexId> vs;
      vs.reserve(static_cast<std::size_t>(total));
      auto plane = [&](long y, long r) {
        for (long a = -r; a <= r; ++a) {
          const long rb = r - std::labs(a);
          for (long b = -rb; b <= rb; ++b) vs.push_back(VertexId{a, b, y});
        }
      };
      for (long y = -n; y <= 0; ++y) plane(y, n + y);
      for (long y = 1; y <= up; ++y) plane(y, up - y);
      std::sort(vs.begin(), vs.end());
      return uniform_over(std::move(vs));
    };
    return MeasureSequence("icf", "hair_skewed", g, Regularity::Yes, true, gen, spec);
  }
  if (generator == "cube_union") {
    auto cg = std::dynamic_pointer_cast<const CubesGraph>(g);
    if (!cg) throw AverageError("icf 'cube_union' needs the cubes family");
    // B_n = union of the cubes attached at spine vertices 0..n
    auto gen = [cg](long n, Resolution res) -> MeasureLevel {
      if (res == Resolution::Classes) {
        std::vector<Atom> atoms;
        for (std::int64_t i = 0; i <= n; ++i) {
          const auto s = cg->side(i);
          for (std::int64_t a = 0; a <= s; ++a)
            for (std::int64_t b = a; b <= s; ++b)
              for (std::int64_t c = b; c <= s; ++c) atoms.push_back(Atom{VertexId{i, a, b, c}, permutations_of(a, b, c), 0.0});
        }
        return uniform_classes(std::move(atoms));
      }
      double total = 0.0;
      for (std::int64_t i = 0; i <= n; ++i) total += std::pow(static_cast<double>(cg->side(i) + 1), 3);
      guard_count(total, "cube_union");
      std::vector<VertexId> vs;
      for (std::int64_t i = 0; i <= n; ++i) {
        const auto s = cg->side(i);
        for (std::int64_t a = 0; a <= s; ++a)
          for (std::int64_t b = 0; b <= s; ++b)
            for (std::int64_t c = 0; c <= s; ++c) vs.push_back(VertexId{i, a, b, c});
      }
      return uniform_over(std::move(vs));
    };
    return MeasureSequence("icf", "cube_union", g, Regularity::Yes, true, gen, spec);
  }
  throw AverageError("unknown icf generator '" + generator + "' (expected hair_skewed or cube_union)");
}

MeasureSequence measure_custom(GraphPtr g, const std::string& name,
                               std::function<std::vector<std::pair<VertexId, double>>(long)> weights, Regularity reg) {
  auto gen = [weights](long n, Resolution) {
    MeasureLevel lvl;
    for (auto& [v, w] : weights(n)) lvl.atoms.push_back(Atom{v, 1.0, w});
    lvl.support_size = static_cast<double>(lvl.atoms.size());
    return lvl;
  };
  return MeasureSequence("custom", name, g, reg, false, gen, nlohmann::json{{"kind", "custom"}, {"name", name}});
}

MeasureSequence measure_from_spec(GraphPtr g, const nlohmann::json& spec) {
  if (spec.is_string()) {
    const auto s = spec.get<std::string>();
    if (s == "balls") return measure_balls(g, g->root());
    return measure_icf(g, s);
  }
  if (!spec.is_object() || !spec.contains("kind")) throw AverageError("measure spec: expected an object with 'kind'");
  const auto kind = spec.at("kind").get<std::string>();
  if (kind == "balls") {
    VertexId o = g->root();
    if (spec.contains("origin")) o = VertexId(spec.at("origin").get<std::vector<std::int64_t>>());
    return measure_balls(g, o);
  }
  if (kind == "icf") {
    if (!spec.contains("generator")) throw AverageError("measure spec: icf needs 'generator'");
    return measure_icf(g, spec.at("generator").get<std::string>());
  }
  throw AverageError("measure spec: unsupported kind '" + kind + "' (custom measures are built in code)");
}

MeasureSequence rescale(const MeasureSequence& lambda, VertexPred S, const std::string& label) {
  auto base = std::make_shared<MeasureSequence>(lambda);
  auto gen = [base, S](long n, Resolution res) {
    MeasureLevel in = base->at(n, res), out;
    out.lumped = in.lumped;
    double mass = 0.0;
    for (auto& a : in.atoms) {
      if (S(a.rep)) {
        mass += a.mass;
        out.support_size += a.count;
        out.atoms.push_back(a);
      }
    }
    if (mass <= 0.0) throw AverageError("rescale: lambda_" + std::to_string(n) + "(S) = 0");
    for (auto& a : out.atoms) a.mass /= mass;
    return out;
  };
  auto spec = lambda.spec();
  spec["rescaled_to"] = label;
  return MeasureSequence(lambda.kind(), lambda.name() + "|" + label, lambda.graph_ptr(), lambda.regularity(),
                         lambda.nested(), gen, spec);
}

std::vector<long> window(long lo, long hi, long step) {
  if (lo > hi || step < 1) throw AverageError("window: need lo <= hi and step >= 1");
  std::vector<long> ns;
  for (long n = lo; n <= hi; n += step) ns.push_back(n);
  return ns;
}

void finalize_trace(AverageTrace& t) {
  if (t.values.empty()) throw AverageError("empty trace window");
  const std::size_t w = t.values.size();
  t.n_lo = t.ns.front();
  t.n_hi = t.ns.back();
  t.tail_start = w - (w + 1) / 2;
  t.inf_estimate = *std::min_element(t.values.begin() + static_cast<long>(t.tail_start), t.values.end());
  t.sup_estimate = *std::max_element(t.values.begin() + static_cast<long>(t.tail_start), t.values.end());
  t.oscillation = t.sup_estimate - t.inf_estimate;
  t.last_increment = w >= 2 ? std::fabs(t.values[w - 1] - t.values[w - 2]) : 0.0;
  for (double v : t.values)
    if (v < t.f_min - 1e-12 || v > t.f_max + 1e-12) t.sandwich_ok = false;
}

AverageTrace average_trace(const VertexFn& f, const MeasureSequence& lambda, const std::vector<long>& ns,
                           Resolution res) {
  AverageTrace t;
  t.f_min = INFINITY;
  t.f_max = -INFINITY;
  for (long n : ns) {
    const MeasureLevel lvl = lambda.at(n, res);
    CompensatedSum s;
    for (auto& a : lvl.atoms) {
      double v;
      try {
        v = f(a.rep);
      } catch (const std::exception& e) {
        throw AverageError("function not evaluable at " + to_string(a.rep) + ": " + e.what());
      }
      if (!std::isfinite(v)) throw AverageError("function not finite at " + to_string(a.rep));
      t.f_min = std::min(t.f_min, v);
      t.f_max = std::max(t.f_max, v);
      s.add(a.mass * v);
    }
    t.ns.push_back(n);
    t.values.push_back(s.value());
    t.support.push_back(lvl.support_size);
  }
  finalize_trace(t);
  return t;
}

VertexFn indicator(VertexPred S) {
  return [S = std::move(S)](const VertexId& v) { return S(v) ? 1.0 : 0.0; };
}

VertexFn memoize(VertexFn f) {
  auto cache = std::make_shared<std::unordered_map<VertexId, double, VertexHash>>();
  return [f = std::move(f), cache](const VertexId& v) {
    auto it = cache->find(v);
    if (it != cache->end()) return it->second;
    const double y = f(v);
    cache->emplace(v, y);
    return y;
  };
}

MeasurableVerdict measurable_verdict(const std::string& label, const AverageTrace& t, double gap, double stable_tol) {
  MeasurableVerdict m;
  m.set = label;
  m.trace = t;
  if (t.oscillation <= stable_tol) {
    m.verdict = "measurable";
    m.value = 0.5 * (t.inf_estimate + t.sup_estimate);
  } else if (t.oscillation >= gap) {
    m.verdict = "non-measurable";
    m.value = t.oscillation;
  } else {
    m.verdict = "inconclusive";
    m.value = t.oscillation;
  }
  return m;
}

NonAlgebraResult nonalgebra_counterexample(const MeasureSequence& icf, long horizon, bool swap, long min_points) {
  if (!icf.nested()) throw AverageError("nonalgebra: needs a nested (icf or balls) sequence");
  // Shells S_k = B_k \ B_{k-1}, each sorted by vertex order.
  std::vector<std::vector<VertexId>> shells;
  std::vector<double> m;
  std::unordered_map<VertexId, char, VertexHash> seen;
  for (long n = 0; n <= horizon; ++n) {
    const MeasureLevel lvl = icf.at(n, Resolution::Vertices);
    std::vector<VertexId> shell;
    for (auto& a : lvl.atoms)
      if (seen.emplace(a.rep, 0).second) shell.push_back(a.rep);
    if (seen.size() != lvl.atoms.size()) throw AverageError("nonalgebra: supports are not nested");
    std::sort(shell.begin(), shell.end());
    m.push_back(static_cast<double>(seen.size()));
    if (n > 0 && m[n] <= m[n - 1]) throw AverageError("nonalgebra: cardinalities must increase strictly");
    shells.push_back(std::move(shell));
  }
  NonAlgebraResult r;
  r.k.push_back(0);
  for (long n = 1; n <= horizon; ++n)
    if (m[n] >= 4.0 * m[r.k.back()]) r.k.push_back(n);
  if (static_cast<long>(r.k.size()) < min_points)
    throw AverageError("nonalgebra: only " + std::to_string(r.k.size()) +
                       " subsequence points within the horizon; increase it");

  // Membership bits: 1 = A, 2 = B.
  auto bits = std::make_shared<std::unordered_map<VertexId, unsigned char, VertexHash>>();
  long cumA = 0, cumC = 0;
  std::size_t block = 0;  // block j spans (k_j, k_{j+1}]; shell 0 belongs to block 0
  std::vector<double> cA(horizon + 1), cB(horizon + 1), cAB(horizon + 1);
  double nA = 0, nB = 0, nAB = 0;
  for (long n = 0; n <= horizon; ++n) {
    while (block + 1 < r.k.size() && n > r.k[block + 1]) ++block;
    const bool a_block = block % 2 == 0;
    bool toA = cumA <= cumC;
    for (auto& v : shells[n]) {
      const bool inA_half = toA;
      toA = !toA;
      (inA_half ? cumA : cumC)++;
      const bool inA = swap ? !inA_half : inA_half;
      const bool inB = a_block ? inA : !inA;
      unsigned char b = (inA ? 1 : 0) | (inB ? 2 : 0);
      (*bits)[v] = b;
      nA += inA;
      nB += inB;
      nAB += inA && inB;
    }
    cA[n] = nA / m[n];
    cB[n] = nB / m[n];
    cAB[n] = nAB / m[n];
  }
  auto pred = [bits](unsigned char mask) {
    return [bits, mask](const VertexId& v) {
      auto it = bits->find(v);
      return it != bits->end() && (it->second & mask) == mask;
    };
  };
  r.A = pred(1);
  r.B = pred(2);
  r.AB = pred(3);
  auto make = [&](const std::vector<double>& vals) {
    AverageTrace t;
    for (long n = 0; n <= horizon; ++n) {
      t.ns.push_back(n);
      t.values.push_back(vals[n]);
      t.support.push_back(m[n]);
    }
    t.f_min = 0.0;
    t.f_max = 1.0;
    finalize_trace(t);
    return t;
  };
  r.trace_A = make(cA);
  r.trace_B = make(cB);
  r.trace_AB = make(cAB);
  for (std::size_t j = 1; j < r.k.size(); ++j) {
    // k_j closes block j-1: an A-block when j-1 is even.
    if ((j - 1) % 2 == 0) {
      r.a_block_ends.push_back(r.k[j]);
      r.ab_at_a_ends.push_back(cAB[r.k[j]]);
    } else {
      r.c_block_ends.push_back(r.k[j]);
      r.ab_at_c_ends.push_back(cAB[r.k[j]]);
    }
  }
  if (r.ab_at_a_ends.empty() || r.ab_at_c_ends.empty()) throw AverageError("nonalgebra: too few blocks");
  r.separation = *std::min_element(r.ab_at_a_ends.begin(), r.ab_at_a_ends.end()) -
                 *std::max_element(r.ab_at_c_ends.begin(), r.ab_at_c_ends.end());
  r.verdict_A = measurable_verdict("A", r.trace_A);
  r.verdict_B = measurable_verdict("B", r.trace_B);
  r.verdict_AB = measurable_verdict("A∩B", r.trace_AB);
  if (r.separation >= 0.05) {
    r.verdict_AB.verdict = "non-measurable";
    r.verdict_AB.value = r.separation;
  }
  return r;
}

CompareReport measure_compare(const MeasureSequence& lambda, const MeasureSequence& eta, long horizon, long search_limit,
                              double budget) {
  if (search_limit < 0) search_limit = 4 * horizon + 4;
  using WMap = std::unordered_map<VertexId, double, VertexHash>;
  std::map<std::pair<int, long>, std::shared_ptr<WMap>> cache;
  auto level = [&](int which, long n) {
    auto key = std::make_pair(which, n);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto lvl = (which == 0 ? lambda : eta).at(n, Resolution::Vertices);
    auto mp = std::make_shared<WMap>();
    for (auto& a : lvl.atoms) (*mp)[a.rep] += a.mass;
    cache[key] = mp;
    return mp;
  };
  // Smallest i <= search_limit with supp(target_n) inside supp(source_i); ratio max target/source.
  auto search = [&](int source, int target, long n, long start, long& idx, double& ratio) {
    auto tn = level(target, n);
    for (long i = start; i <= search_limit; ++i) {
      auto si = level(source, i);
      if (si->size() < tn->size()) continue;
      double c = 0.0;
      bool ok = true;
      for (auto& [v, w] : *tn) {
        auto f = si->find(v);
        if (f == si->end()) {
          ok = false;
          break;
        }
        c = std::max(c, w / f->second);
      }
      if (ok) {
        idx = i;
        ratio = c;
        return true;
      }
    }
    return false;
  };
  CompareReport rep;
  long si = 0, sj = 0;
  try {
    for (long n = 0; n <= horizon; ++n) {
      long i = -1, j = -1;
      double C = 0, K = 0;
      if (!search(0, 1, n, lambda.nested() ? si : 0, i, C)) {
        rep.message = "no witness found <= horizon: eta_" + std::to_string(n) + " not dominated by lambda_i, i <= " +
                      std::to_string(search_limit);
        return rep;
      }
      if (!search(1, 0, n, eta.nested() ? sj : 0, j, K)) {
        rep.message = "no witness found <= horizon: lambda_" + std::to_string(n) + " not dominated by eta_j, j <= " +
                      std::to_string(search_limit);
        return rep;
      }
      si = i;
      sj = j;
      rep.i_n.push_back(i);
      rep.j_n.push_back(j);
      rep.C_n.push_back(C);
      rep.K_n.push_back(K);
    }
  } catch (const AverageError& e) {
    rep.message = std::string("no witness found <= horizon: ") + e.what();
    return rep;
  }
  rep.C = *std::max_element(rep.C_n.begin(), rep.C_n.end());
  rep.K = *std::max_element(rep.K_n.begin(), rep.K_n.end());
  const std::size_t mid = rep.C_n.size() / 2, last = rep.C_n.size() - 1;
  const bool growing = rep.C_n[last] > 2.0 * rep.C_n[mid] + 1e-12 || rep.K_n[last] > 2.0 * rep.K_n[mid] + 1e-12;
  if (rep.C > budget || rep.K > budget || growing) {
    rep.message = "no witness found <= horizon: ratio constants grow (C=" + std::to_string(rep.C) +
                  ", K=" + std::to_string(rep.K) + ")";
    return rep;
  }
  rep.comparable = true;
  rep.message = "comparable (C=" + std::to_string(rep.C) + ", K=" + std::to_string(rep.K) + ")";
  return rep;
}

AlexandroffReport alexandroff_bounds(const VertexFn& f, const MeasureSequence& lambda, const std::vector<long>& ns,
                                     Resolution res, std::function<long(long)> inner) {
  if (lambda.regularity() != Regularity::Yes) throw AverageError("alexandroff_bounds: lambda must be regular");
  if (!inner) inner = [](long n) { return n / 2; };
  AlexandroffReport r;
  r.trace = average_trace(f, lambda, ns, res);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const long n = ns[i];
    const MeasureLevel lvl = lambda.at(n, res), in = lambda.at(inner(n), res);
    std::unordered_map<VertexId, double, VertexHash> in_count;
    for (auto& a : in.atoms) in_count[a.rep] += a.count;
    double lo = INFINITY, hi = -INFINITY, lo_in = INFINITY, hi_in = -INFINITY, mu = 0.0;
    for (auto& a : lvl.atoms) {
      const double fv = f(a.rep);
      auto it = in_count.find(a.rep);
      const double c_in = it == in_count.end() ? 0.0 : std::min(it->second, a.count);
      if (c_in > 0) {
        mu += a.mass * c_in / a.count;
        lo_in = std::min(lo_in, fv);
        hi_in = std::max(hi_in, fv);
      }
      if (a.count - c_in > 0) {
        lo = std::min(lo, fv);
        hi = std::max(hi, fv);
      }
    }
    if (!std::isfinite(lo)) lo = hi = lo_in;
    if (!std::isfinite(lo_in)) lo_in = hi_in = lo;
    r.spatial_lower.push_back(lo);
    r.spatial_upper.push_back(hi);
    r.inner_mass.push_back(mu);
    const double A = r.trace.values[i];
    const double lower = (1 - mu) * lo + mu * std::min(lo, lo_in), upper = (1 - mu) * hi + mu * std::max(hi, hi_in);
    if (A < lower - 1e-9 || A > upper + 1e-9) r.sandwich_ok = false;
  }
  r.liminf_estimate = r.spatial_lower.back();
  r.limsup_estimate = r.spatial_upper.back();
  const double span = r.trace.f_max - r.trace.f_min, slack = r.inner_mass.back() * span + 1e-9;
  r.tail_sandwich = r.liminf_estimate <= r.trace.inf_estimate + slack &&
                    r.trace.sup_estimate <= r.limsup_estimate + slack;
  return r;
}

PowerSeriesEval avg_power_series(const std::vector<double>& alpha, double z, long N, const std::vector<double>* k) {
  if (!(z >= 0.0 && z < 1.0)) throw AverageError("avg_power_series: z must lie in [0,1)");
  if (static_cast<long>(alpha.size()) < N + 1) throw AverageError("avg_power_series: alpha shorter than N+1");
  PowerSeriesEval e;
  CompensatedSum s;
  double zn = 1.0;
  for (long n = 0; n <= N; ++n) {
    s.add(alpha[n] * zn);
    zn *= z;
  }
  e.partial = s.value();
  if (k) {
    CompensatedSum t;
    double zm = std::pow(z, static_cast<double>(N + 1));
    const long K = static_cast<long>(k->size()) - 1;
    for (long n = N + 1; n <= K; ++n) {
      t.add((*k)[n] * zm);
      zm *= z;
    }
    t.add(std::pow(z, static_cast<double>(std::max(K, N) + 1)) / (1.0 - z));
    e.tail_bound = t.value();
  }
  return e;
}

IdentityReport identity_on_average_check(const CoefficientFn& a1, const CoefficientFn& a2,
                                         const ExceptionalFn& exceptional, const MeasureSequence& lambda,
                                         const std::vector<long>& ns, double z, long n_max, Resolution res,
                                         long samples_per_level, double tol) {
  IdentityReport r;
  r.ns = ns;
  for (long m : ns) {
    const MeasureLevel lvl = lambda.at(m, res);
    double bound = 0.0, zn = 1.0;
    for (long n = 1; n <= n_max; ++n) {
      zn *= z;
      double e = 0.0;
      for (auto& a : lvl.atoms)
        if (exceptional(a.rep, n)) e += a.mass;
      bound += e * zn;
    }
    r.exceptional_bound.push_back(bound);
    const std::size_t A = lvl.atoms.size();
    const std::size_t S = std::min<std::size_t>(A, static_cast<std::size_t>(samples_per_level));
    for (std::size_t s = 0; s < S; ++s) {
      const auto& rep = lvl.atoms[(s * A) / S + (A / S) / 2].rep;
      for (long n = 1; n <= n_max; ++n) {
        if (exceptional(rep, n)) continue;
        r.max_offset_diff = std::max(r.max_offset_diff, std::fabs(a1(rep, n) - a2(rep, n)));
        ++r.samples;
      }
    }
  }
  const double first = r.exceptional_bound.front(), last = r.exceptional_bound.back();
  const bool decays = last == 0.0 || last <= 0.75 * first;
  bool monotone = true;
  for (std::size_t i = 1; i < r.exceptional_bound.size(); ++i)
    if (r.exceptional_bound[i] > r.exceptional_bound[i - 1] + 1e-12) monotone = false;
  r.ok = r.max_offset_diff <= tol && decays && monotone;
  if (r.max_offset_diff > tol) {
    r.message = "coefficients differ off the exceptional sets by " + std::to_string(r.max_offset_diff);
  } else if (!decays || !monotone) {
    r.message = "exceptional-set trace does not vanish within the window";
  } else {
    r.message = "averaged series agree up to the exceptional-mass bound " + std::to_string(last);
  }
  return r;
}

PartitionReport partition_split_average(const VertexFn& f, const std::vector<PartSpec>& parts,
                                        const MeasureSequence& lambda, const std::vector<long>& ns, Resolution res,
                                        double tol) {
  if (parts.empty()) throw AverageError("partition: no parts");
  PartitionReport r;
  for (auto& p : parts) r.part_traces.push_back(average_trace(indicator(p.member), lambda, ns, res));
  for (std::size_t i = 0; i < ns.size(); ++i) {
    double s = 0.0;
    for (auto& t : r.part_traces) s += t.values[i];
    if (std::fabs(s - 1.0) > tol)
      throw AverageError("partition: part measures sum to " + std::to_string(s) + " at n=" + std::to_string(ns[i]));
  }
  const MeasureLevel last = lambda.at(ns.back(), res);
  for (auto& p : parts) {
    if (p.limit) {
      r.limits.push_back(*p.limit);
      continue;
    }
    double mass = 0.0, acc = 0.0;
    for (auto& a : last.atoms) {
      if (!p.member(a.rep)) continue;
      mass += a.mass;
      acc += a.mass * f(a.rep);
    }
    r.limits.push_back(mass > 0 ? acc / mass : 0.0);
  }
  r.direct = average_trace(f, lambda, ns, res);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    double w = 0.0;
    for (std::size_t j = 0; j < parts.size(); ++j) w += r.part_traces[j].values[i] * r.limits[j];
    r.weighted.push_back(w);
    r.max_gap = std::max(r.max_gap, std::fabs(w - r.direct.values[i]));
  }
  return r;
}

}  // namespace rwavg
