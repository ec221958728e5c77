#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwavg/genfun.hpp"
#include "rwavg/measure.hpp"
#include "rwavg/network.hpp"

namespace rwavg {

enum class LocalClass { Recurrent, Transient, Inconclusive };
enum class AverageClass { ROA, TOA, Inconclusive };
enum class SupClass { Suprecurrent, Suptransient, Inconclusive };
enum class ThermoClass { ROA_t, TOA_t, Unclassifiable, Inconclusive };

std::string to_string(LocalClass c);
std::string to_string(AverageClass c);
std::string to_string(SupClass c);
std::string to_string(ThermoClass c);

struct Evidence {
  std::string criterion;
  std::string detail;
  nlohmann::json numbers = nlohmann::json::object();
  bool heuristic = false;
};

struct ClassifierParams {
  long N = 2000;                       // series horizon
  double delta = 0.02;                 // "compatible with 1" means >= 1 - delta; "below 1" means <= 1 - 3 delta
  std::vector<long> radii{4, 8, 16, 32};
  long mc_trials = 40000;
  long mc_horizon = 500;               // certificate compares horizons H and 4H
  std::uint64_t seed = 1;
  double cap_floor = 1e-3;
  double thermo_gap = 0.01;            // coefficient-trace oscillation that makes thermo unclassifiable
  long thermo_nmax = 8;                // coefficients checked individually
  std::vector<long> window;            // measure indices; empty = family default
  Resolution resolution = Resolution::Classes;

  nlohmann::json to_json() const;
  static ClassifierParams from_json(const nlohmann::json& j);
};

struct LocalVerdict {
  LocalClass cls = LocalClass::Inconclusive;
  VertexId vertex;
  std::optional<CapacityEstimate> capacity;
  std::optional<double> F_upper;  // certified upper bound on F(x,x|1) when one is available
  std::vector<Evidence> evidence;
};

struct AverageVerdict {
  AverageClass cls = AverageClass::Inconclusive;
  SupClass sup = SupClass::Inconclusive;
  double infL_estimate = 0.0;  // windowed lower estimate of the averaged F
  double supL_estimate = 1.0;  // windowed upper estimate
  std::string qualifier;
  std::vector<Evidence> evidence;
};

struct ThermoTrace {
  std::vector<double> alpha;      // alpha[n], n = 0..len-1 (alpha[0] = 0)
  std::vector<double> alpha_osc;  // windowed oscillation per coefficient (0 when derived analytically)
  std::vector<double> partial_sum;
  double tail_bound = 0.0;        // bound on sum_{n >= len} alpha_n
  std::vector<std::pair<double, double>> z_grid;  // (z, sum alpha_n z^n)
  std::string route;
  std::string note = "nonnegative coefficients: the z -> 1- limit equals the coefficient sum";
};

struct ThermoVerdict {
  ThermoClass cls = ThermoClass::Inconclusive;
  std::optional<long> witness_n;
  ThermoTrace trace;
  std::vector<Evidence> evidence;
};

struct Verdict {
  std::string graph, measure;
  LocalVerdict local;
  AverageVerdict average;
  ThermoVerdict thermo;
  std::vector<std::string> lattice_violations;
  bool lattice_ok() const { return lattice_violations.empty(); }
  nlohmann::json to_json() const;
};

// Everything a classification run shares: kernel, measure sequence and parameters.
struct ClassifierContext {
  KernelPtr kernel;
  MeasureSequence lambda;
  ClassifierParams params;
  std::string measure_tag;  // "balls", "hair_skewed", "cube_union", ...

  const LazyGraph& graph() const { return kernel->graph(); }
  std::vector<long> window() const;
};

ClassifierContext make_context(const nlohmann::json& graph_spec, const nlohmann::json& measure_spec,
                               const ClassifierParams& params);
// Measure-index window used when the parameters leave it empty.
std::vector<long> default_window(const LazyGraph& g, const std::string& measure_tag);

LocalVerdict classify_local(const WalkKernel& k, const VertexId& x, const ClassifierParams& params);
AverageVerdict classify_on_average(const ClassifierContext& ctx, const LocalVerdict& local);
ThermoVerdict classify_thermo(const ClassifierContext& ctx, const LocalVerdict& local);
Verdict classify(const ClassifierContext& ctx, bool with_thermo = true);

// Forbidden combinations: (recurrent, TOA), (ROA_t, TOA), (ROA, Suptransient); also checks
// that infL <= supL. Returns the violated rules.
std::vector<std::string> lattice_violations(const Verdict& v);

struct JensenPoint {
  double z = 0.0;
  double avg_F = 0.0, phi_avg_F = 0.0, avg_G = 0.0, G_tail = 0.0;
  double slack = 0.0;        // min over the window of avg G + tail - phi(avg F)
  double point_slack = 0.0;  // min over the window of avg phi(F) - phi(avg F) (Jensen gap)
  bool ok = false;
};
struct JensenReport {
  std::vector<JensenPoint> points;
  bool ok = false;
};
// phi(t) = 1/(1-t). Both sides use partial series at N; the G tail z^(N+1)/(1-z) keeps the
// comparison one-sided.
JensenReport jensen_bound_check(const WalkKernel& k, const MeasureSequence& lambda, const std::vector<double>& zs,
                                long N, const std::vector<long>& ns, Resolution res = Resolution::Classes);

// Averaged G along a z grid and along the measure window; used to exhibit L(G) = infinity.
struct GrowthReport {
  std::vector<double> zs;
  std::vector<long> ns;
  std::vector<std::vector<double>> avg_G;  // [z][n]
  bool grows = false;
  std::string message;
};
GrowthReport averaged_G_growth(const WalkKernel& k, const MeasureSequence& lambda, const std::vector<double>& zs,
                               long N, const std::vector<long>& ns, Resolution res = Resolution::Classes);

// Inference from a subgraph S: given L(S) > 0 and the rescaled F average on S bounded below
// 1, the walk is TOA. Refuses when a hypothesis flag is missing or false.
struct SubgraphEvidence {
  std::string set;
  std::optional<double> measure_of_S;        // liminf of lambda_n(S)
  std::optional<double> rescaled_F_upper;    // limsup of the S-rescaled F average (upper evidence)
  std::optional<double> rescaled_F_lower;    // liminf of the S-rescaled F average (lower evidence)
  std::optional<double> complement_F_lower;  // liminf of the F average on X \ S rescaled
  std::optional<bool> boundary_null;         // lambda_n(boundary of S) -> 0
};
struct SubgraphInference {
  AverageClass cls = AverageClass::Inconclusive;
  std::string rule;
  std::string refusal;
};
SubgraphInference subgraph_inference(const SubgraphEvidence& e, double delta = 0.02);

}  // namespace rwavg
