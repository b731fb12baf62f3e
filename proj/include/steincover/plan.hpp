#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace steincover::plan {

enum class Engine { mc, quadrature, both };

// One batch experiment: a procedure, its parameters, a sweep grid and the
// replication budget. theta_grid holds |theta| values for coverage plans,
// prior variances for bayes-interval plans and mean-to-sigma ratios for
// variance plans; selection plans list ranks instead.
struct SimulationPlan {
  std::string id;
  std::string procedure;
  int p = 0;
  double alpha = 0.0;
  std::map<std::string, double> params;
  std::vector<double> theta_grid;
  std::vector<int> ranks;
  bool bonferroni = true;
  std::uint64_t n_rep = 0;
  std::uint64_t base_seed = 0;
  Engine engine = Engine::mc;
  std::string csv_path;
  std::string svg_path;

  bool operator==(const SimulationPlan&) const = default;
};

struct ParseError {
  int line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<SimulationPlan> plans;
  std::vector<ParseError> errors;
};

// Parses the line-oriented plan format: `[plan <id>]` section headers,
// `key = value` pairs, `#` comment lines. Sections with errors are dropped;
// every problem is reported with its line number.
ParseResult parse_plan_text(const std::string& text);

// Inverse of parse_plan_text for valid plans; numbers keep 17 significant
// digits so the round trip is exact.
std::string serialize_plans(const std::vector<SimulationPlan>& plans);

// Recognized procedure ids, in documentation order.
const std::vector<std::string>& procedure_ids();

}  // namespace steincover::plan
