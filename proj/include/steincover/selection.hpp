#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "steincover/evaluate.hpp"
#include "steincover/numkit.hpp"

namespace steincover::selection {

// A selected-means experiment: p populations with conjugate normal means,
// interval targets chosen by rank after observing the data.
struct SelectionScenario {
  int p = 0;
  double mu = 0.0;
  double tau2 = 0.0;
  std::vector<int> ranks;
  double alpha = 0.05;
  bool bonferroni = true;
};

struct RankCoverage {
  int rank = 0;
  evaluate::McEstimate coverage;
};

struct ScenarioResult {
  std::vector<RankCoverage> per_rank;
  evaluate::McEstimate simultaneous;
  double per_rank_alpha = 0.0;
};

// Throws invalid_argument unless p >= 1, tau2 >= 0, alpha in (0, 1), and
// ranks is a nonempty list of distinct values in [1, p].
void validate(const SelectionScenario& sc);

// Coverage indicators for one replication: one entry per rank followed by
// the simultaneous (all covered) entry. Exposed so the relabeling and
// sign-flip invariances can be checked draw by draw.
std::vector<unsigned char> rep_indicators(std::span<const double> theta,
                                          std::span<const double> x,
                                          std::span<const int> ranks,
                                          evaluate::SelectionRule rule,
                                          double per_rank_alpha);

// Estimates the marginal coverage of each selected rank and the probability
// that every selected mean is covered at once. When bonferroni is set each
// coordinate interval runs at level 1 - alpha/k. Deterministic for a given
// seed regardless of worker count.
ScenarioResult run_scenario(const SelectionScenario& sc,
                            evaluate::SelectionRule rule, std::uint64_t n_rep,
                            const numkit::SeedSpec& seed, int workers = 0);

}  // namespace steincover::selection
