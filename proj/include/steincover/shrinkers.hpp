// Point estimators used as centers of the confidence procedures:
// James-Stein and its positive-part and Brown-Joshi variants, the
// empirical-Bayes shrink factors, the hierarchical posterior-mean
// (Strawderman) estimator for p >= 5, and Stein's variance estimator.

#pragma once

#include <vector>

namespace steincover::shrinkers {

struct Observation {
  std::vector<double> x;
  int dim() const { return static_cast<int>(x.size()); }
};

enum class ShrinkTarget {
  origin,       // shrink toward 0
  fixed_point,  // shrink toward shrink_target
  grand_mean,   // shrink toward the equal-coordinate point (x-bar)*1
};

struct ShrinkConfig {
  double a = 0.0;  // shrink constant, > 0
  double b = 0.0;  // quadratic offset in the denominator; 0 disables it
  ShrinkTarget target = ShrinkTarget::origin;
  std::vector<double> shrink_target;  // used when target == fixed_point
};

// x-bar and S^2 = sum (x_i - x-bar)^2 from a univariate normal sample.
struct UnivariateSample {
  int n = 0;
  double mean = 0.0;
  double ss = 0.0;
};

// (1 - a/|x-t|^2)(x-t) + t.  Throws std::domain_error at x == t, where
// the factor is singular.
std::vector<double> james_stein(const Observation& obs,
                                const ShrinkConfig& cfg);

// max(0, 1 - a/|x-t|^2)(x-t) + t; defined everywhere and never maps a
// point farther from the target than x itself.
std::vector<double> positive_part(const Observation& obs,
                                  const ShrinkConfig& cfg);

// (1 - a/(b + |x-t|^2))(x-t) + t; b > 0 removes the singularity.
std::vector<double> brown_joshi(const Observation& obs,
                                const ShrinkConfig& cfg);

// Posterior mean E(lambda | x) under the hierarchy
//   X | theta ~ N_p(theta, I),  theta | lambda ~ N_p(0, (1-lambda)/lambda I),
//   lambda ~ (1-a) lambda^{-a} on (0,1],  0 <= a < 1,
// where t = |x|^2.  Evaluated through the lower-incomplete-gamma
// identity for the moments of lambda, with a polynomial expansion for
// tiny t.  The value lies strictly in (0,1) and decreases in t; the
// tests pin that direction numerically.
double strawderman_shrink_factor(double t, int p, double a);

// The corresponding mean estimate [1 - E(lambda|x)] x.
std::vector<double> strawderman_estimate(const Observation& obs, double a);

// min{1/(n+1), (1 + n xbar^2/S^2)/(n+2)} * S^2; never exceeds S^2/(n+1).
double stein_variance(const UnivariateSample& s);

// M-hat = 1 - (p-2)/max(t, c2) with t = |x|^2.  Requires c2 > p - 2.
double eb_shrink_factor_M(double t, int p, double c2);

// M-hat = max{(1 - (p-2)/t)^+, 1/(p-1)} with t = |X|^2.
double he_shrink_factor_M(double t, int p);

}  // namespace steincover::shrinkers
