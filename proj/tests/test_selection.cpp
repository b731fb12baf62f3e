#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "steincover/evaluate.hpp"
#include "steincover/numkit.hpp"
#include "steincover/regions.hpp"
#include "steincover/selection.hpp"

using namespace steincover;
using evaluate::SelectionRule;

namespace {

std::vector<double> random_vec(numkit::Rng& rng, int p, double mu,
                               double tau) {
  std::vector<double> v(p);
  for (auto& vi : v) vi = mu + tau * rng.normal();
  return v;
}

std::int64_t hit_count(const evaluate::McEstimate& e) {
  return std::llround(e.estimate * static_cast<double>(e.n_rep));
}

}  // namespace

TEST_CASE("rep_indicators: simultaneous entry is the AND of the per-rank ones") {
  numkit::Rng rng({3101, 0}, 0);
  std::vector<int> ranks{1, 4, 7};
  for (int trial = 0; trial < 200; ++trial) {
    auto theta = random_vec(rng, 7, 0.2, 1.0);
    std::vector<double> x(7);
    for (int i = 0; i < 7; ++i) x[i] = theta[i] + rng.normal();
    for (auto rule : {SelectionRule::naive, SelectionRule::he_selected}) {
      auto ind = selection::rep_indicators(theta, x, ranks, rule, 0.05);
      REQUIRE(ind.size() == 4);
      unsigned char all = 1;
      for (int i = 0; i < 3; ++i) all &= ind[i];
      CHECK(ind[3] == all);
    }
  }
}

TEST_CASE("rep_indicators: naive indicator matches a direct order-statistic check") {
  numkit::Rng rng({3102, 0}, 0);
  for (int trial = 0; trial < 200; ++trial) {
    auto theta = random_vec(rng, 6, 0.0, 1.5);
    std::vector<double> x(6);
    for (int i = 0; i < 6; ++i) x[i] = theta[i] + rng.normal();
    int jmax = static_cast<int>(
        std::max_element(x.begin(), x.end()) - x.begin());
    double c = numkit::normal_two_sided_cutoff(0.05);
    bool covered = std::fabs(x[jmax] - theta[jmax]) <= c;
    std::vector<int> ranks{6};
    auto ind =
        selection::rep_indicators(theta, x, ranks, SelectionRule::naive, 0.05);
    CHECK(ind[0] == static_cast<unsigned char>(covered));
  }
}

TEST_CASE("rep_indicators: invariant under joint relabeling of the population") {
  numkit::Rng rng({3103, 0}, 0);
  const int p = 9;
  std::vector<int> ranks{1, 5, 9};
  std::vector<int> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 200; ++trial) {
    auto theta = random_vec(rng, p, 0.3, 1.0);
    std::vector<double> x(p);
    for (int i = 0; i < p; ++i) x[i] = theta[i] + rng.normal();
    // Fisher-Yates driven by the same stream
    for (int i = p - 1; i > 0; --i) {
      int j = static_cast<int>(rng.uniform() * (i + 1));
      std::swap(perm[i], perm[j]);
    }
    std::vector<double> theta_p(p), x_p(p);
    for (int i = 0; i < p; ++i) {
      theta_p[i] = theta[perm[i]];
      x_p[i] = x[perm[i]];
    }
    for (auto rule : {SelectionRule::naive, SelectionRule::he_selected}) {
      CHECK(selection::rep_indicators(theta, x, ranks, rule, 0.02) ==
            selection::rep_indicators(theta_p, x_p, ranks, rule, 0.02));
    }
  }
}

TEST_CASE("rep_indicators: rank r mirrors rank p+1-r under sign flip") {
  numkit::Rng rng({3104, 0}, 0);
  const int p = 8;
  for (int trial = 0; trial < 200; ++trial) {
    auto theta = random_vec(rng, p, 0.4, 1.2);
    std::vector<double> x(p), theta_m(p), x_m(p);
    for (int i = 0; i < p; ++i) {
      x[i] = theta[i] + rng.normal();
      theta_m[i] = -theta[i];
      x_m[i] = -x[i];
    }
    for (int r : {1, 3, p}) {
      std::vector<int> lo{r}, hi{p + 1 - r};
      for (auto rule : {SelectionRule::naive, SelectionRule::he_selected}) {
        CHECK(selection::rep_indicators(theta, x, lo, rule, 0.05) ==
              selection::rep_indicators(theta_m, x_m, hi, rule, 0.05));
      }
    }
  }
}

TEST_CASE("rep_indicators: he rule in dimension below three is the naive rule") {
  numkit::Rng rng({3105, 0}, 0);
  std::vector<int> ranks{1, 2};
  for (int trial = 0; trial < 100; ++trial) {
    auto theta = random_vec(rng, 2, 0.0, 2.0);
    std::vector<double> x(2);
    for (int i = 0; i < 2; ++i) x[i] = theta[i] + rng.normal();
    CHECK(selection::rep_indicators(theta, x, ranks,
                                    SelectionRule::he_selected, 0.05) ==
          selection::rep_indicators(theta, x, ranks, SelectionRule::naive,
                                    0.05));
  }
}

TEST_CASE("rep_indicators: argument validation") {
  std::vector<double> theta{0.0, 0.0, 0.0};
  std::vector<double> x{0.1, -0.2, 0.3};
  std::vector<double> short_x{0.1, -0.2};
  std::vector<int> ranks{1};
  std::vector<int> bad_rank{4};
  CHECK_THROWS_AS(selection::rep_indicators(theta, short_x, ranks,
                                            SelectionRule::naive, 0.05),
                  std::invalid_argument);
  CHECK_THROWS_AS(selection::rep_indicators(theta, x, bad_rank,
                                            SelectionRule::naive, 0.05),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      selection::rep_indicators(theta, x, ranks, SelectionRule::naive, 0.0),
      std::invalid_argument);
  CHECK_THROWS_AS(
      selection::rep_indicators(theta, x, ranks, SelectionRule::naive, 1.0),
      std::invalid_argument);
}

TEST_CASE("run_scenario: scenario validation") {
  selection::SelectionScenario sc;
  sc.p = 5;
  sc.ranks = {1, 3};
  sc.alpha = 0.05;
  sc.tau2 = 1.0;

  auto bad = sc;
  bad.p = 0;
  CHECK_THROWS_AS(
      selection::run_scenario(bad, SelectionRule::naive, 100, {1, 0}),
      std::invalid_argument);
  bad = sc;
  bad.ranks = {};
  CHECK_THROWS_AS(
      selection::run_scenario(bad, SelectionRule::naive, 100, {1, 0}),
      std::invalid_argument);
  bad = sc;
  bad.ranks = {2, 2};
  CHECK_THROWS_AS(
      selection::run_scenario(bad, SelectionRule::naive, 100, {1, 0}),
      std::invalid_argument);
  bad = sc;
  bad.ranks = {0, 3};
  CHECK_THROWS_AS(
      selection::run_scenario(bad, SelectionRule::naive, 100, {1, 0}),
      std::invalid_argument);
  bad = sc;
  bad.ranks = {1, 6};
  CHECK_THROWS_AS(
      selection::run_scenario(bad, SelectionRule::naive, 100, {1, 0}),
      std::invalid_argument);
  bad = sc;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(
      selection::run_scenario(bad, SelectionRule::naive, 100, {1, 0}),
      std::invalid_argument);
  bad = sc;
  bad.tau2 = -1.0;
  CHECK_THROWS_AS(
      selection::run_scenario(bad, SelectionRule::naive, 100, {1, 0}),
      std::invalid_argument);
  CHECK_THROWS_AS(selection::run_scenario(sc, SelectionRule::naive, 0, {1, 0}),
                  std::invalid_argument);
}

TEST_CASE("run_scenario: single rank reproduces the evaluate kernel exactly") {
  selection::SelectionScenario sc;
  sc.p = 8;
  sc.mu = 0.3;
  sc.tau2 = 2.0;
  sc.ranks = {6};
  sc.alpha = 0.05;
  sc.bonferroni = true;  // k = 1, so the split changes nothing
  for (auto rule : {SelectionRule::naive, SelectionRule::he_selected}) {
    auto res = selection::run_scenario(sc, rule, 30000, {913, 4});
    auto ref = evaluate::selection_coverage(8, 0.3, 2.0, 6, rule, 0.05, 30000,
                                            {913, 4});
    REQUIRE(res.per_rank.size() == 1);
    CHECK(res.per_rank[0].rank == 6);
    CHECK(res.per_rank_alpha == 0.05);
    CHECK(res.per_rank[0].coverage.estimate == ref.estimate);
    CHECK(res.per_rank[0].coverage.std_error == ref.std_error);
    CHECK(res.simultaneous.estimate == res.per_rank[0].coverage.estimate);
  }
}

TEST_CASE("run_scenario: no selection in dimension one gives the nominal level") {
  selection::SelectionScenario sc;
  sc.p = 1;
  sc.mu = 0.7;
  sc.tau2 = 3.0;
  sc.ranks = {1};
  sc.alpha = 0.05;
  auto res = selection::run_scenario(sc, SelectionRule::naive, 100000, {31, 5});
  CHECK(std::fabs(res.per_rank[0].coverage.estimate - 0.95) <=
        3.0 * res.per_rank[0].coverage.std_error);
}

TEST_CASE("run_scenario: naive interval for the largest of 100 equal means") {
  selection::SelectionScenario sc;
  sc.p = 100;
  sc.mu = 0.0;
  sc.tau2 = 0.0;
  sc.ranks = {100};
  sc.alpha = 0.05;
  auto naive =
      selection::run_scenario(sc, SelectionRule::naive, 20000, {907, 2});
  const auto& cov = naive.per_rank[0].coverage;
  // severe undercoverage, far below the nominal band
  CHECK(cov.estimate < 0.95 - 3.0 * cov.std_error);
  // order-statistic value Phi(c)^100 for equal means
  CHECK(std::fabs(cov.estimate - 0.07951728986183142) <=
        5.0 * cov.std_error);

  auto he = selection::run_scenario(sc, SelectionRule::he_selected, 20000,
                                    {907, 2});
  CHECK(he.per_rank[0].coverage.estimate > cov.estimate + 0.5);
}

TEST_CASE("run_scenario: bonferroni rectangle bookkeeping for three ranks") {
  selection::SelectionScenario sc;
  sc.p = 10;
  sc.mu = 0.5;
  sc.tau2 = 1.0;
  sc.ranks = {1, 5, 10};
  sc.alpha = 0.05;
  sc.bonferroni = true;
  const std::uint64_t n = 50000;
  for (auto rule : {SelectionRule::naive, SelectionRule::he_selected}) {
    auto res = selection::run_scenario(sc, rule, n, {911, 3});
    REQUIRE(res.per_rank.size() == 3);
    CHECK(res.per_rank_alpha == 0.05 / 3.0);
    std::int64_t miss_total = 0;
    std::int64_t sim = hit_count(res.simultaneous);
    for (const auto& rc : res.per_rank) {
      std::int64_t hits = hit_count(rc.coverage);
      // the joint event is contained in each marginal event
      CHECK(sim <= hits);
      miss_total += static_cast<std::int64_t>(n) - hits;
    }
    // union bound, exact on shared replications
    CHECK(sim >= static_cast<std::int64_t>(n) - miss_total);
  }
}

TEST_CASE("run_scenario: bonferroni split lifts the per-coordinate level") {
  selection::SelectionScenario sc;
  sc.p = 1;
  sc.mu = 0.0;
  sc.tau2 = 1.0;
  sc.ranks = {1};
  sc.alpha = 0.10;
  sc.bonferroni = false;
  auto plain = selection::run_scenario(sc, SelectionRule::naive, 60000, {21, 9});
  CHECK(std::fabs(plain.per_rank[0].coverage.estimate - 0.90) <=
        3.0 * plain.per_rank[0].coverage.std_error);
  CHECK(plain.per_rank_alpha == 0.10);
}

TEST_CASE("shrunk rectangle is narrower than the naive one at split levels") {
  // halfwidth comparison: the shrunk interval radius stays below the
  // two-sided cutoff whenever that cutoff exceeds one
  for (double alpha : {0.05, 0.05 / 3.0, 0.01}) {
    double c = numkit::normal_two_sided_cutoff(alpha);
    REQUIRE(c > 1.0);
    for (double s : {0.5, 1.0, 3.0, 10.0, 30.0, 100.0, 1e4, 1e8}) {
      CHECK(regions::he_radius2(s, 10, alpha) < c * c);
    }
  }
}

TEST_CASE("run_scenario: rank-pair coverages mirror under sign flips") {
  selection::SelectionScenario lo;
  lo.p = 7;
  lo.mu = 0.6;
  lo.tau2 = 1.0;
  lo.ranks = {1};
  lo.alpha = 0.05;
  auto hi = lo;
  hi.mu = -0.6;
  hi.ranks = {7};
  for (auto rule : {SelectionRule::naive, SelectionRule::he_selected}) {
    auto a = selection::run_scenario(lo, rule, 40000, {57, 1});
    auto b = selection::run_scenario(hi, rule, 40000, {58, 2});
    double gap = std::fabs(a.per_rank[0].coverage.estimate -
                           b.per_rank[0].coverage.estimate);
    double se = std::hypot(a.per_rank[0].coverage.std_error,
                           b.per_rank[0].coverage.std_error);
    CHECK(gap <= 4.0 * se);
  }
}

TEST_CASE("run_scenario: worker count does not change any output") {
  selection::SelectionScenario sc;
  sc.p = 12;
  sc.mu = 0.2;
  sc.tau2 = 4.0;
  sc.ranks = {2, 7, 12};
  sc.alpha = 0.05;
  auto one = selection::run_scenario(sc, SelectionRule::he_selected, 40000,
                                     {909, 6}, 1);
  auto five = selection::run_scenario(sc, SelectionRule::he_selected, 40000,
                                      {909, 6}, 5);
  REQUIRE(one.per_rank.size() == five.per_rank.size());
  for (std::size_t i = 0; i < one.per_rank.size(); ++i) {
    CHECK(one.per_rank[i].rank == five.per_rank[i].rank);
    CHECK(one.per_rank[i].coverage.estimate ==
          five.per_rank[i].coverage.estimate);
  }
  CHECK(one.simultaneous.estimate == five.simultaneous.estimate);
  CHECK(one.per_rank_alpha == five.per_rank_alpha);
}
