#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwavg/families.hpp"

namespace rwavg {

struct AverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using VertexFn = std::function<double(const VertexId&)>;
using VertexPred = std::function<bool(const VertexId&)>;

enum class Regularity { Yes, No, Unknown };
std::string to_string(Regularity r);

// Vertices: one atom per vertex. Classes: one atom per automorphism class met by the
// support (count vertices sharing `rep`'s orbit); only automorphism-invariant functions
// and predicates may be evaluated at that resolution.
enum class Resolution { Vertices, Classes };

struct Atom {
  VertexId rep;
  double count = 1.0;
  double mass = 0.0;  // total weight of the atom
};

struct MeasureLevel {
  long n = 0;
  std::vector<Atom> atoms;
  double support_size = 0.0;
  bool lumped = false;
};

class MeasureSequence {
 public:
  using Generator = std::function<MeasureLevel(long, Resolution)>;

  MeasureSequence(std::string kind, std::string name, GraphPtr g, Regularity reg, bool nested, Generator gen,
                  nlohmann::json spec);

  const std::string& kind() const { return kind_; }
  const std::string& name() const { return name_; }
  Regularity regularity() const { return reg_; }
  bool nested() const { return nested_; }
  const nlohmann::json& spec() const { return spec_; }
  const LazyGraph& graph() const { return *graph_; }
  GraphPtr graph_ptr() const { return graph_; }

  // Validated: nonnegative weights summing to 1 within 1e-12.
  MeasureLevel at(long n, Resolution res = Resolution::Vertices) const;

 private:
  std::string kind_, name_;
  GraphPtr graph_;
  Regularity reg_;
  bool nested_;
  Generator gen_;
  nlohmann::json spec_;
};

// Largest exact support enumerated at vertex resolution.
inline constexpr std::size_t kMaxMeasureVertices = 4'000'000;

MeasureSequence measure_balls(GraphPtr g, const VertexId& origin);
// Named increasing covering families: "hair_skewed", "cube_union".
MeasureSequence measure_icf(GraphPtr g, const std::string& generator);
MeasureSequence measure_custom(GraphPtr g, const std::string& name,
                               std::function<std::vector<std::pair<VertexId, double>>(long)> weights,
                               Regularity reg = Regularity::Unknown);
// {"kind": "balls", "origin": [...]} or {"kind": "icf", "generator": "..."}; a bare string
// "balls" / "hair_skewed" / "cube_union" is accepted too.
MeasureSequence measure_from_spec(GraphPtr g, const nlohmann::json& spec);

// lambda_n restricted to S and renormalised.
MeasureSequence rescale(const MeasureSequence& lambda, VertexPred S, const std::string& label = "S");

struct AverageTrace {
  std::vector<long> ns;
  std::vector<double> values;
  std::vector<double> support;
  long n_lo = 0, n_hi = 0;
  double inf_estimate = 0.0, sup_estimate = 0.0, oscillation = 0.0;
  std::size_t tail_start = 0;   // index of the first tail entry
  double last_increment = 0.0;  // |A_n - A_{n-1}| at the end of the window
  double f_min = 0.0, f_max = 0.0;
  bool sandwich_ok = true;      // f_min <= A_n <= f_max throughout
  std::string note = "finite-window estimate";
};

// Window helper: lo, lo+step, ..., hi.
std::vector<long> window(long lo, long hi, long step = 1);

AverageTrace average_trace(const VertexFn& f, const MeasureSequence& lambda, const std::vector<long>& ns,
                           Resolution res = Resolution::Vertices);
// Tail statistics over the last ceil(w/2) entries; used by every trace builder.
void finalize_trace(AverageTrace& t);

VertexFn indicator(VertexPred S);
// Caches f by vertex; the returned function is not thread-safe.
VertexFn memoize(VertexFn f);

struct MeasurableVerdict {
  std::string set;
  AverageTrace trace;
  std::string verdict;  // "measurable", "non-measurable", "inconclusive"
  double value = 0.0;
};
MeasurableVerdict measurable_verdict(const std::string& label, const AverageTrace& t, double gap = 0.05,
                                     double stable_tol = 0.01);

struct NonAlgebraResult {
  std::vector<long> k;  // greedy subsequence with m_{k_{j+1}} >= 4 m_{k_j}
  VertexPred A, B, AB;
  AverageTrace trace_A, trace_B, trace_AB;
  std::vector<long> a_block_ends, c_block_ends;
  std::vector<double> ab_at_a_ends, ab_at_c_ends;
  double separation = 0.0;  // min over A-block ends minus max over C-block ends (tail)
  MeasurableVerdict verdict_A, verdict_B, verdict_AB;
};

// Deterministic construction: shells split alternately in vertex order, blocks alternate
// between the A-halves and the C-halves of consecutive shells. swap exchanges A and C.
NonAlgebraResult nonalgebra_counterexample(const MeasureSequence& icf, long horizon, bool swap = false,
                                           long min_points = 4);

struct CompareReport {
  bool comparable = false;
  double C = 0.0, K = 0.0;
  std::vector<long> i_n, j_n;
  std::vector<double> C_n, K_n;
  std::string message;
};
// Searches i_n, j_n <= search_limit with C lambda_{i_n} >= eta_n and K eta_{j_n} >= lambda_n.
CompareReport measure_compare(const MeasureSequence& lambda, const MeasureSequence& eta, long horizon,
                              long search_limit = -1, double budget = 64.0);

struct AlexandroffReport {
  AverageTrace trace;
  std::vector<double> spatial_lower, spatial_upper, inner_mass;
  double liminf_estimate = 0.0, limsup_estimate = 0.0;
  bool sandwich_ok = true;   // finite identity, bug sentinel
  bool tail_sandwich = true; // liminf_x f <= infL <= supL <= limsup_x f within the inner-mass slack
};
// Exhaustion K_n := support of lambda at inner(n) (default n/2).
AlexandroffReport alexandroff_bounds(const VertexFn& f, const MeasureSequence& lambda, const std::vector<long>& ns,
                                     Resolution res = Resolution::Vertices,
                                     std::function<long(long)> inner = nullptr);

struct PowerSeriesEval {
  double partial = 0.0;
  std::optional<double> tail_bound;
};
// sum_{n<=N} alpha_n z^n; tail from k (sum_{n>N} k_n z^n, then z^(len)/(1-z)) when supplied.
PowerSeriesEval avg_power_series(const std::vector<double>& alpha, double z, long N,
                                 const std::vector<double>* k = nullptr);

struct IdentityReport {
  bool ok = false;
  std::vector<long> ns;                 // measure indices
  std::vector<double> exceptional_bound; // sum_n lambda_m(X_n) z^n per measure index
  double max_offset_diff = 0.0;          // max |a1 - a2| off the exceptional sets (sampled)
  long samples = 0;
  std::string message;
};
using CoefficientFn = std::function<double(const VertexId&, long)>;
using ExceptionalFn = std::function<bool(const VertexId&, long)>;
IdentityReport identity_on_average_check(const CoefficientFn& a1, const CoefficientFn& a2,
                                         const ExceptionalFn& exceptional, const MeasureSequence& lambda,
                                         const std::vector<long>& ns, double z, long n_max,
                                         Resolution res = Resolution::Classes, long samples_per_level = 16,
                                         double tol = 1e-12);

struct PartSpec {
  std::string name;
  VertexPred member;
  std::optional<double> limit;  // spatial limit of f on the part, estimated when absent
};
struct PartitionReport {
  std::vector<AverageTrace> part_traces;
  std::vector<double> limits;
  std::vector<double> weighted;  // sum_i lambda_n(A_i) alpha_i
  AverageTrace direct;
  double max_gap = 0.0;          // max_n |weighted_n - direct_n|
};
PartitionReport partition_split_average(const VertexFn& f, const std::vector<PartSpec>& parts,
                                        const MeasureSequence& lambda, const std::vector<long>& ns,
                                        Resolution res = Resolution::Vertices, double tol = 1e-9);

}  // namespace rwavg
