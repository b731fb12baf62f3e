#include "steincover/selection.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_set>

#include "parallel.hpp"
#include "steincover/shrinkers.hpp"

namespace steincover::selection {

namespace {

struct IntervalSpec {
  double c = 0.0;     // two-sided cutoff at the per-coordinate level
  bool shrink = false;
  int p = 0;
};

IntervalSpec make_spec(int p, evaluate::SelectionRule rule,
                       double per_rank_alpha) {
  if (!(per_rank_alpha > 0.0 && per_rank_alpha < 1.0))
    throw std::invalid_argument("per-rank alpha must lie in (0, 1)");
  IntervalSpec spec;
  spec.p = p;
  spec.c = numkit::normal_two_sided_cutoff(per_rank_alpha);
  spec.shrink = rule == evaluate::SelectionRule::he_selected && p >= 3;
  if (spec.shrink && spec.c <= 1.0)
    throw std::invalid_argument(
        "shrinkage z-interval needs a two-sided cutoff above 1");
  return spec;
}

void indicators_into(std::span<const double> theta, std::span<const double> x,
                     std::span<const int> ranks, const IntervalSpec& spec,
                     unsigned char* out) {
  double s = 0.0;
  for (double xi : x) s += xi * xi;
  double center_factor = 1.0;
  double nu = spec.c * spec.c;
  if (spec.shrink) {
    double a = spec.p - 2.0;
    center_factor = s > a ? 1.0 - a / s : 0.0;
    double m = shrinkers::he_shrink_factor_M(s, spec.p);
    nu = m * (spec.c * spec.c - std::log(m));
  }
  unsigned char all = 1;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    int j = evaluate::rank_index(x, ranks[i]);
    double d = theta[j] - center_factor * x[j];
    out[i] = d * d <= nu ? 1 : 0;
    all &= out[i];
  }
  out[ranks.size()] = all;
}

}  // namespace

void validate(const SelectionScenario& sc) {
  if (sc.p < 1) throw std::invalid_argument("population count must be >= 1");
  if (sc.tau2 < 0.0)
    throw std::invalid_argument("prior variance must be nonnegative");
  if (!(sc.alpha > 0.0 && sc.alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1)");
  if (sc.ranks.empty())
    throw std::invalid_argument("at least one rank must be selected");
  std::unordered_set<int> seen;
  for (int r : sc.ranks) {
    if (r < 1 || r > sc.p)
      throw std::invalid_argument("ranks must lie in [1, p]");
    if (!seen.insert(r).second)
      throw std::invalid_argument("ranks must be distinct");
  }
}

std::vector<unsigned char> rep_indicators(std::span<const double> theta,
                                          std::span<const double> x,
                                          std::span<const int> ranks,
                                          evaluate::SelectionRule rule,
                                          double per_rank_alpha) {
  if (theta.size() != x.size())
    throw std::invalid_argument("theta and x must have the same length");
  if (x.empty()) throw std::invalid_argument("empty observation");
  auto spec = make_spec(static_cast<int>(x.size()), rule, per_rank_alpha);
  std::vector<unsigned char> out(ranks.size() + 1);
  indicators_into(theta, x, ranks, spec, out.data());
  return out;
}

ScenarioResult run_scenario(const SelectionScenario& sc,
                            evaluate::SelectionRule rule, std::uint64_t n_rep,
                            const numkit::SeedSpec& seed, int workers) {
  validate(sc);
  if (n_rep == 0) throw std::invalid_argument("n_rep must be positive");
  const std::size_t k = sc.ranks.size();
  const double per_rank_alpha =
      sc.bonferroni ? sc.alpha / static_cast<double>(k) : sc.alpha;
  const auto spec = make_spec(sc.p, rule, per_rank_alpha);
  const double tau = std::sqrt(sc.tau2);
  const int p = sc.p;
  const double mu = sc.mu;
  const auto& ranks = sc.ranks;

  struct Acc {
    std::vector<std::uint64_t> counts;
  };
  auto accs = detail::run_blocked<Acc>(
      n_rep, evaluate::resolve_worker_count(workers),
      [&](std::uint64_t rep, Acc& acc) {
        thread_local std::vector<double> theta, x;
        thread_local std::vector<unsigned char> ind;
        theta.resize(p);
        x.resize(p);
        ind.resize(k + 1);
        numkit::Rng rng(seed, rep);
        for (int i = 0; i < p; ++i) theta[i] = mu + tau * rng.normal();
        for (int i = 0; i < p; ++i) x[i] = theta[i] + rng.normal();
        indicators_into(theta, x, ranks, spec, ind.data());
        if (acc.counts.empty()) acc.counts.resize(k + 1, 0);
        for (std::size_t i = 0; i <= k; ++i) acc.counts[i] += ind[i];
      });

  std::vector<std::uint64_t> totals(k + 1, 0);
  for (const auto& a : accs)
    for (std::size_t i = 0; i <= k; ++i) totals[i] += a.counts[i];

  auto as_estimate = [n_rep](std::uint64_t hits) {
    double est = static_cast<double>(hits) / static_cast<double>(n_rep);
    double se = std::sqrt(std::max(0.0, est * (1.0 - est)) /
                          static_cast<double>(n_rep));
    return evaluate::McEstimate{est, se, n_rep};
  };

  ScenarioResult result;
  result.per_rank.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    result.per_rank.push_back({ranks[i], as_estimate(totals[i])});
  result.simultaneous = as_estimate(totals[k]);
  result.per_rank_alpha = per_rank_alpha;
  return result;
}

}  // namespace steincover::selection
