#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rwavg/classifier.hpp"

namespace rwavg {

// A named graph/measure pair with its expected verdict. Empty expectations are not pinned.
struct DemoSpec {
  std::string name;
  nlohmann::json graph;
  nlohmann::json measure;
  std::string expect_local, expect_average, expect_thermo;
  std::string extra;  // "growth": averaged G must grow; "nonalgebra": trace separation check
  std::string description;
};

std::vector<DemoSpec> demo_catalog();
const DemoSpec& find_demo(const std::string& name);

struct DemoRow {
  std::string name;
  std::string expected, computed;  // "(local, average, thermo)"
  bool match = false;
  bool inconclusive = false;  // no contradiction, but some pinned part came out inconclusive
  std::string note;
  double seconds = 0.0;
  nlohmann::json detail;
};

DemoRow run_demo(const DemoSpec& d, const ClassifierParams& params);

// 0 when every row matches, 2 when the only failures are inconclusive parts, 1 otherwise.
int demo_exit_code(const std::vector<DemoRow>& rows);

// Graph specs of randomised T''_{k,n} instances (k in 3..5, n in 1..4).
std::vector<nlohmann::json> random_doubleprime_specs(int count, std::uint64_t seed);

struct LatticeSweep {
  std::vector<nlohmann::json> graphs;
  std::vector<std::vector<std::string>> violations;
  std::vector<std::string> verdicts;
  bool ok = true;
};
// Classifies each graph with its ball measure and collects implication-lattice violations.
LatticeSweep lattice_sweep(const std::vector<nlohmann::json>& graphs, const ClassifierParams& params);

}  // namespace rwavg
