#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rwavg/embedding.hpp"
#include "rwavg/kernel.hpp"

namespace rwavg {

struct FlowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Undirected edge oriented a -> b. A lumped edge stands for `multiplicity` parallel edges
// of the same conductance; its flow value is the total over the class.
struct NetworkEdge {
  std::size_t a = 0, b = 0;
  double conductance = 1.0;
  double multiplicity = 1.0;
  double resistance() const { return 1.0 / conductance; }
};

struct Network {
  VertexId center;
  long radius = 0;
  std::string kind;  // "ball" or "radial" (one node per distance from the centre)
  std::vector<VertexId> nodes;
  std::vector<double> m;
  std::vector<bool> ground;  // the sphere S(center, radius)
  std::vector<NetworkEdge> edges;
  std::unordered_map<VertexId, std::size_t, VertexHash> index;

  std::size_t interior_count() const;
};

// Network on B(center, R), optionally within an induced subgraph. Throws FlowError with
// the offending edge when detailed balance fails.
Network build_network(const WalkKernel& k, const VertexId& center, long R,
                      const std::function<bool(const VertexId&)>& domain = nullptr);
// Quotient chain for a simple walk on a tree that is spherically symmetric about center;
// std::nullopt when no radial structure is known.
std::optional<Network> build_radial_network(const WalkKernel& k, const VertexId& center, long R);

struct FlowSolution {
  std::shared_ptr<const Network> network;
  VertexId source;
  long radius = 0;
  std::vector<double> u;          // per edge, oriented a -> b
  std::vector<double> potential;  // per node, ground = 0
  double input = 1.0;
  double energy = 0.0;
  double effective_resistance = 0.0;
  double kirchhoff_residual = 0.0;
  std::string solver;
};

// Unit-current Dirichlet solve with the sphere grounded.
FlowSolution effective_resistance(const Network& net, const VertexId& source);
FlowSolution effective_resistance(std::shared_ptr<const Network> net, const VertexId& source);
// Radial quotient when available, full ball otherwise.
FlowSolution solve_flow(const WalkKernel& k, const VertexId& x, long R,
                        const std::function<bool(const VertexId&)>& domain = nullptr);

double flow_energy(const Network& net, const std::vector<double>& u);
// Max node-law violation over non-ground nodes, including the source injection.
double kirchhoff_residual(const Network& net, const std::vector<double>& u, std::size_t source, double input);

struct CapacityEstimate {
  VertexId vertex;
  std::vector<long> radii;
  std::vector<double> r_eff, increments;
  bool monotone = true;
  bool divergent = false;      // heuristic: last three increments fail to decay by 1.1
  double r_inf = 0.0;          // geometric extrapolation when convergent (heuristic)
  double cap_estimate = 0.0;   // 1 / r_inf, 0 when divergent
  double green_bound = 0.0;    // m(x) * r_inf >= G(x,x) when the extrapolation is an upper bound
  std::string method;
  std::string note = "heuristic extrapolation from finite radii";
};
CapacityEstimate capacity_estimate(const WalkKernel& k, const VertexId& x, const std::vector<long>& radii,
                                   const std::function<bool(const VertexId&)>& domain = nullptr);

struct RayleighReport {
  bool ok = true;
  std::vector<double> r_eff;  // by radius
  long edges_weakened = 0;
  std::string message;
};
// R_eff nondecreasing in the radius, and nondecreasing when sampled conductances are halved.
RayleighReport rayleigh_check(const WalkKernel& k, const VertexId& x, const std::vector<long>& radii,
                              long edge_samples = 5, double tol = 1e-12);

struct ThomsonReport {
  bool ok = true;
  long cycles = 0;
  double min_energy_gain = 0.0;  // min over perturbations of E(u + eps c) - E(u)
  double max_inner = 0.0;        // max |<u, c>_r|, zero for the harmonic flow
  std::string message;
};
// Perturbs the flow by fundamental-cycle flows (ground merged into one node).
ThomsonReport thomson_check(const FlowSolution& f, long samples = 20, std::uint64_t seed = 1);

// Transports a simple-walk flow along an embedding; verifies adjacency, Kirchhoff and energy.
FlowSolution translate_flow(const FlowSolution& f, const GraphEmbedding& emb, const LazyGraph& g);

struct FlowWitnessReport {
  bool witness = false;
  double max_energy = 0.0;
  double min_cap = 0.0;
  double inf_m = 0.0, sup_m = 0.0;
  std::vector<std::pair<VertexId, double>> energies;
  std::optional<VertexId> failing;
  std::string message;
};
using EnergyBoundFn = std::function<std::optional<double>(const VertexId&)>;
// For each sampled x: an energy bound from `template_energy` when it returns one, otherwise
// the extrapolated capacity estimate. Witness when every bound is within budget.
FlowWitnessReport toa_flow_witness(const WalkKernel& k, const std::vector<VertexId>& sample,
                                   const std::vector<long>& radii, double energy_budget,
                                   const EnergyBoundFn& template_energy = nullptr);

}  // namespace rwavg
