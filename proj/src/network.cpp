#include "rwavg/network.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace rwavg {

std::size_t Network::interior_count() const {
  return static_cast<std::size_t>(std::count(ground.begin(), ground.end(), false));
}

namespace {

constexpr std::size_t kDirectSolveLimit = 200'000;

double conductance_of(const WalkKernel& k, const VertexId& x, double px, const VertexId& y, double py) {
  const auto mx = k.measure(x), my = k.measure(y);
  if (!mx || !my) throw FlowError("network: no reversibility measure at edge (" + to_string(x) + "," + to_string(y) + ")");
  const double cx = *mx * px, cy = *my * py;
  if (std::fabs(cx - cy) > 1e-12 * std::max(1.0, std::fabs(cx)))
    throw FlowError("network: detailed balance fails on edge (" + to_string(x) + "," + to_string(y) +
                    "): m(x)p(x,y) = " + std::to_string(cx) + ", m(y)p(y,x) = " + std::to_string(cy));
  return k.simple() ? 1.0 : cx;
}

std::map<VertexId, double> merged_row(const WalkKernel& k, const VertexId& x) {
  std::map<VertexId, double> r;
  for (auto& [y, p] : k.row(x)) r[y] += p;
  return r;
}

}  // namespace

Network build_network(const WalkKernel& k, const VertexId& center, long R,
                      const std::function<bool(const VertexId&)>& domain) {
  if (R < 1) throw FlowError("network: radius must be >= 1");
  if (!k.reversible()) {
    auto v = detailed_balance_violation(k, center, std::min<long>(R, 3));
    throw FlowError("network: kernel '" + k.kind() + "' is not reversible" + (v ? ": " + *v : std::string()));
  }
  auto within = domain ? domain : [](const VertexId&) { return true; };
  if (!within(center)) throw FlowError("network: centre outside the domain");
  const Ball b = ball_where(k.graph(), center, R, within);
  Network net;
  net.center = center;
  net.radius = R;
  net.kind = "ball";
  net.nodes.reserve(b.size());
  for (auto& mem : b.members) {
    net.index.emplace(mem.id, net.nodes.size());
    net.nodes.push_back(mem.id);
    net.ground.push_back(mem.distance == R);
    net.m.push_back(k.measure(mem.id).value_or(0.0));
  }
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    if (net.ground[i]) continue;
    const VertexId& x = net.nodes[i];
    for (auto& [y, p] : merged_row(k, x)) {
      if (y == x) continue;
      auto it = net.index.find(y);
      if (it == net.index.end()) continue;  // outside the domain
      const std::size_t j = it->second;
      if (!net.ground[j] && j < i) continue;  // counted from the other end
      const double py = merged_row(k, y)[x];
      net.edges.push_back(NetworkEdge{i, j, conductance_of(k, x, p, y, py), 1.0});
    }
  }
  return net;
}

std::optional<Network> build_radial_network(const WalkKernel& k, const VertexId& center, long R) {
  if (!k.simple() || R < 1) return std::nullopt;
  auto* t = dynamic_cast<const RadialTree*>(&k.graph());
  if (!t) return std::nullopt;
  const auto deg = t->radial_degrees_about(center, R);
  if (deg.empty()) return std::nullopt;
  Network net;
  net.center = center;
  net.radius = R;
  net.kind = "radial";
  double count = 1.0;
  for (long d = 0; d <= R; ++d) {
    net.nodes.push_back(VertexId{d});
    net.index.emplace(VertexId{d}, static_cast<std::size_t>(d));
    net.ground.push_back(d == R);
    net.m.push_back(static_cast<double>(deg[d]) * count);
    if (d < R) {
      const double next = count * static_cast<double>(deg[d] - (d > 0 ? 1 : 0));
      if (next <= 0) throw FlowError("radial network: tree is finite within radius " + std::to_string(R));
      net.edges.push_back(NetworkEdge{static_cast<std::size_t>(d), static_cast<std::size_t>(d + 1), 1.0, next});
      count = next;
    }
  }
  return net;
}

double flow_energy(const Network& net, const std::vector<double>& u) {
  CompensatedSum s;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto& ed = net.edges[e];
    s.add(u[e] * u[e] * ed.resistance() / ed.multiplicity);
  }
  return s.value();
}

double kirchhoff_residual(const Network& net, const std::vector<double>& u, std::size_t source, double input) {
  std::vector<double> net_out(net.nodes.size(), 0.0);
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    net_out[net.edges[e].a] += u[e];
    net_out[net.edges[e].b] -= u[e];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    if (net.ground[i]) continue;
    worst = std::max(worst, std::fabs(net_out[i] - (i == source ? input : 0.0)));
  }
  return worst;
}

FlowSolution effective_resistance(std::shared_ptr<const Network> netp, const VertexId& source) {
  const Network& net = *netp;
  auto it = net.index.find(source);
  if (it == net.index.end() || net.ground[it->second]) throw FlowError("flow: source must be interior to the truncation");
  const std::size_t s = it->second;
  std::vector<long> interior(net.nodes.size(), -1);
  long n = 0;
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (!net.ground[i]) interior[i] = n++;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(net.edges.size() * 4);
  for (auto& e : net.edges) {
    const double c = e.conductance * e.multiplicity;
    const long ia = interior[e.a], ib = interior[e.b];
    if (ia >= 0) trip.emplace_back(ia, ia, c);
    if (ib >= 0) trip.emplace_back(ib, ib, c);
    if (ia >= 0 && ib >= 0) {
      trip.emplace_back(ia, ib, -c);
      trip.emplace_back(ib, ia, -c);
    }
  }
  Eigen::SparseMatrix<double> L(n, n);
  L.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n), phi;
  rhs(interior[s]) = 1.0;

  FlowSolution f;
  if (static_cast<std::size_t>(n) <= kDirectSolveLimit) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(L);
    if (ldlt.info() != Eigen::Success) throw FlowError("flow: singular system (disconnected truncation?)");
    phi = ldlt.solve(rhs);
    f.solver = "ldlt";
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(L);
    cg.setTolerance(1e-12);
    cg.setMaxIterations(20 * n);
    phi = cg.solve(rhs);
    if (cg.info() != Eigen::Success) throw FlowError("flow: conjugate gradient did not converge");
    f.solver = "cg";
  }
  if (!phi.allFinite()) throw FlowError("flow: singular system (disconnected truncation?)");

  f.network = netp;
  f.source = source;
  f.radius = net.radius;
  f.potential.assign(net.nodes.size(), 0.0);
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (interior[i] >= 0) f.potential[i] = phi(interior[i]);
  f.u.resize(net.edges.size());
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto& ed = net.edges[e];
    f.u[e] = ed.conductance * ed.multiplicity * (f.potential[ed.a] - f.potential[ed.b]);
  }
  f.energy = flow_energy(net, f.u);
  f.effective_resistance = f.energy;
  f.kirchhoff_residual = kirchhoff_residual(net, f.u, s, 1.0);
  if (f.kirchhoff_residual > 1e-10)
    throw FlowError("flow: Kirchhoff residual " + std::to_string(f.kirchhoff_residual) + " exceeds 1e-10");
  return f;
}

FlowSolution effective_resistance(const Network& net, const VertexId& source) {
  return effective_resistance(std::make_shared<const Network>(net), source);
}

FlowSolution solve_flow(const WalkKernel& k, const VertexId& x, long R,
                        const std::function<bool(const VertexId&)>& domain) {
  if (!domain) {
    if (auto rn = build_radial_network(k, x, R)) return effective_resistance(std::make_shared<const Network>(std::move(*rn)), VertexId{0});
  }
  return effective_resistance(std::make_shared<const Network>(build_network(k, x, R, domain)), x);
}

CapacityEstimate capacity_estimate(const WalkKernel& k, const VertexId& x, const std::vector<long>& radii,
                                   const std::function<bool(const VertexId&)>& domain) {
  if (radii.empty()) throw FlowError("capacity: empty radii schedule");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (radii[i] <= radii[i - 1]) throw FlowError("capacity: radii must increase");
  CapacityEstimate c;
  c.vertex = x;
  c.radii = radii;
  for (long R : radii) {
    auto f = solve_flow(k, x, R, domain);
    c.method = f.network->kind;
    c.r_eff.push_back(f.effective_resistance);
  }
  for (std::size_t i = 1; i < c.r_eff.size(); ++i) {
    c.increments.push_back(c.r_eff[i] - c.r_eff[i - 1]);
    if (c.increments.back() < -1e-12) c.monotone = false;
  }
  const std::size_t m = c.increments.size();
  if (m < 3) {
    c.divergent = false;
    c.r_inf = c.r_eff.back();
    c.note = "fewer than three increments: no divergence test, r_inf is the last value";
  } else {
    const double d1 = c.increments[m - 3], d2 = c.increments[m - 2], d3 = c.increments[m - 1];
    const bool decays = d3 <= 1e-15 || (d1 >= 1.1 * d2 && d2 >= 1.1 * d3);
    c.divergent = !decays;
    if (!c.divergent) {
      const double rho = d3 > 1e-15 ? d2 / d3 : INFINITY;
      c.r_inf = c.r_eff.back() + (std::isfinite(rho) ? d3 / (rho - 1.0) : 0.0);
    }
  }
  if (!c.divergent && c.r_inf > 0) {
    c.cap_estimate = 1.0 / c.r_inf;
    c.green_bound = k.measure(x).value_or(0.0) * c.r_inf;
  }
  return c;
}

RayleighReport rayleigh_check(const WalkKernel& k, const VertexId& x, const std::vector<long>& radii,
                              long edge_samples, double tol) {
  RayleighReport r;
  for (long R : radii) r.r_eff.push_back(solve_flow(k, x, R).effective_resistance);
  for (std::size_t i = 1; i < r.r_eff.size(); ++i) {
    if (r.r_eff[i] < r.r_eff[i - 1] - tol) {
      r.ok = false;
      r.message = "R_eff decreases from radius " + std::to_string(radii[i - 1]) + " to " + std::to_string(radii[i]);
      return r;
    }
  }
  const Network base = build_network(k, x, radii.back());
  const double r0 = effective_resistance(base, x).effective_resistance;
  const std::size_t E = base.edges.size();
  for (long s = 0; s < edge_samples && E > 0; ++s) {
    Network weak = base;
    weak.edges[(static_cast<std::size_t>(s) * E) / static_cast<std::size_t>(edge_samples)].conductance *= 0.5;
    const double r1 = effective_resistance(weak, x).effective_resistance;
    ++r.edges_weakened;
    if (r1 < r0 - tol) {
      r.ok = false;
      r.message = "weakening an edge lowered R_eff";
      return r;
    }
  }
  r.message = "monotone in radius and under conductance reduction";
  return r;
}

ThomsonReport thomson_check(const FlowSolution& f, long samples, std::uint64_t seed) {
  const Network& net = *f.network;
  ThomsonReport rep;
  // Merge ground into node G; BFS spanning tree from the source.
  const std::size_t N = net.nodes.size(), G = N;
  auto node = [&](std::size_t i) { return net.ground[i] ? G : i; };
  std::vector<std::vector<std::size_t>> adj(N + 1);
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const std::size_t a = node(net.edges[e].a), b = node(net.edges[e].b);
    if (a == b) continue;
    adj[a].push_back(e);
    adj[b].push_back(e);
  }
  const std::size_t src = net.index.at(f.source);
  std::vector<long> parent_edge(N + 1, -1), depth(N + 1, -1);
  std::vector<bool> tree(net.edges.size(), false);
  std::vector<std::size_t> q{src};
  depth[src] = 0;
  for (std::size_t h = 0; h < q.size(); ++h) {
    const std::size_t v = q[h];
    for (auto e : adj[v]) {
      const std::size_t a = node(net.edges[e].a), b = node(net.edges[e].b), w = a == v ? b : a;
      if (depth[w] >= 0) continue;
      depth[w] = depth[v] + 1;
      parent_edge[w] = static_cast<long>(e);
      tree[e] = true;
      q.push_back(w);
    }
  }
  std::vector<std::size_t> non_tree;
  for (std::size_t e = 0; e < net.edges.size(); ++e)
    if (!tree[e] && node(net.edges[e].a) != node(net.edges[e].b)) non_tree.push_back(e);
  if (non_tree.empty()) {
    rep.message = "no cycles in the truncation: nothing to perturb";
    return rep;
  }
  std::mt19937_64 rng(seed);
  rep.min_energy_gain = INFINITY;
  const double E0 = f.energy;
  for (long s = 0; s < samples; ++s) {
    const std::size_t e0 = non_tree[rng() % non_tree.size()];
    // Cycle: e0 from a to b, then tree path b -> a.
    std::map<std::size_t, double> c;
    c[e0] += 1.0;
    std::size_t x = node(net.edges[e0].b), y = node(net.edges[e0].a);
    auto climb = [&](std::size_t& v, bool forward) {
      const auto e = static_cast<std::size_t>(parent_edge[v]);
      const std::size_t a = node(net.edges[e].a);
      const std::size_t up = a == v ? node(net.edges[e].b) : a;
      // Walking v -> up along the cycle when forward, up -> v otherwise.
      const bool along = (node(net.edges[e].a) == v) == forward;
      c[e] += along ? 1.0 : -1.0;
      v = up;
    };
    while (x != y) {
      if (depth[x] >= depth[y]) {
        climb(x, true);
      } else {
        climb(y, false);
      }
    }
    double inner = 0.0, cc = 0.0;
    for (auto& [e, val] : c) {
      const double r = net.edges[e].resistance() / net.edges[e].multiplicity;
      inner += f.u[e] * val * r;
      cc += val * val * r;
    }
    rep.max_inner = std::max(rep.max_inner, std::fabs(inner));
    const double eps = 0.1 * std::sqrt(std::max(E0, 1e-300) / cc);
    for (double sgn : {1.0, -1.0}) {
      const double gain = 2.0 * sgn * eps * inner + eps * eps * cc;
      rep.min_energy_gain = std::min(rep.min_energy_gain, gain);
      if (gain < -1e-12 * std::max(1.0, E0)) rep.ok = false;
    }
    ++rep.cycles;
  }
  rep.message = rep.ok ? "every sampled cycle perturbation increases the energy"
                       : "a cycle perturbation lowered the energy: flow is not minimal";
  return rep;
}

FlowSolution translate_flow(const FlowSolution& f, const GraphEmbedding& emb, const LazyGraph& g) {
  if (!emb.verified) throw FlowError("translate_flow: embedding is not verified");
  const Network& src = *f.network;
  if (src.kind != "ball") throw FlowError("translate_flow: needs a vertex-level flow, not a radial quotient");
  for (auto& e : src.edges)
    if (e.conductance != 1.0 || e.multiplicity != 1.0)
      throw FlowError("translate_flow: needs simple-walk conductances");
  auto out = std::make_shared<Network>();
  out->radius = src.radius;
  out->kind = "ball";
  for (std::size_t i = 0; i < src.nodes.size(); ++i) {
    if (!emb.domain(src.nodes[i])) throw FlowError("translate_flow: flow leaves the embedding domain at " + to_string(src.nodes[i]));
    VertexId w;
    try {
      w = emb.map(src.nodes[i]);
    } catch (const GraphError& e) {
      throw FlowError(std::string("translate_flow: ") + e.what());
    }
    if (!out->index.emplace(w, i).second) throw FlowError("translate_flow: embedding not injective at " + to_string(src.nodes[i]));
    out->nodes.push_back(w);
    out->ground.push_back(src.ground[i]);
    out->m.push_back(static_cast<double>(g.degree(w)));
  }
  out->edges = src.edges;
  for (auto& e : out->edges) {
    auto nb = g.neighbors(out->nodes[e.a]);
    if (!std::binary_search(nb.begin(), nb.end(), out->nodes[e.b]))
      throw FlowError("translate_flow: image of edge (" + to_string(src.nodes[e.a]) + "," + to_string(src.nodes[e.b]) +
                      ") is not an edge");
  }
  out->center = emb.map(src.center);
  FlowSolution t = f;
  t.network = out;
  t.source = emb.map(f.source);
  t.energy = flow_energy(*out, t.u);
  t.effective_resistance = t.energy;
  t.kirchhoff_residual = kirchhoff_residual(*out, t.u, out->index.at(t.source), f.input);
  t.solver = "translated";
  if (t.kirchhoff_residual > 1e-10) throw FlowError("translate_flow: Kirchhoff law fails after translation");
  if (std::fabs(t.energy - f.energy) > 1e-9) throw FlowError("translate_flow: energy changed under translation");
  return t;
}

FlowWitnessReport toa_flow_witness(const WalkKernel& k, const std::vector<VertexId>& sample,
                                   const std::vector<long>& radii, double energy_budget,
                                   const EnergyBoundFn& template_energy) {
  FlowWitnessReport r;
  if (sample.empty()) {
    r.message = "empty sample";
    return r;
  }
  r.inf_m = INFINITY;
  r.sup_m = 0.0;
  r.min_cap = INFINITY;
  for (auto& x : sample) {
    const double m = k.measure(x).value_or(0.0);
    r.inf_m = std::min(r.inf_m, m);
    r.sup_m = std::max(r.sup_m, m);
    std::optional<double> E;
    if (template_energy) E = template_energy(x);
    if (!E) {
      auto c = capacity_estimate(k, x, radii);
      if (!c.divergent) E = c.r_inf;
    }
    if (!E || !(*E <= energy_budget)) {
      r.failing = x;
      r.message = "no bounded-energy flow found from " + to_string(x);
      return r;
    }
    r.energies.emplace_back(x, *E);
    r.max_energy = std::max(r.max_energy, *E);
    r.min_cap = std::min(r.min_cap, 1.0 / *E);
  }
  if (!(r.inf_m > 0.0)) {
    r.message = "reversibility measure not bounded below on the sample";
    return r;
  }
  r.witness = true;
  r.message = "TOA witness (finite sample): energies <= " + std::to_string(r.max_energy);
  return r;
}

}  // namespace rwavg
