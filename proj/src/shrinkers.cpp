#include "steincover/shrinkers.hpp"

#include <cmath>
#include <stdexcept>

#include "steincover/numkit.hpp"

namespace steincover::shrinkers {

namespace {

std::vector<double> resolve_target(const Observation& obs,
                                   const ShrinkConfig& cfg) {
  const int p = obs.dim();
  switch (cfg.target) {
    case ShrinkTarget::origin:
      return std::vector<double>(p, 0.0);
    case ShrinkTarget::fixed_point: {
      if (static_cast<int>(cfg.shrink_target.size()) != p)
        throw std::invalid_argument(
            "shrink_target dimension does not match the observation");
      return cfg.shrink_target;
    }
    case ShrinkTarget::grand_mean: {
      double xbar = 0.0;
      for (double v : obs.x) xbar += v;
      xbar /= p;
      return std::vector<double>(p, xbar);
    }
  }
  throw std::logic_error("unreachable shrink target");
}

// Applies factor(r2) to the residual x - t, where r2 = |x - t|^2.
template <typename FactorFn>
std::vector<double> shrink_residual(const Observation& obs,
                                    const ShrinkConfig& cfg, FactorFn factor) {
  if (obs.dim() < 1) throw std::invalid_argument("empty observation");
  if (!(cfg.a > 0.0)) throw std::invalid_argument("shrink constant a must be > 0");
  auto t = resolve_target(obs, cfg);
  double r2 = 0.0;
  for (int i = 0; i < obs.dim(); ++i) {
    double d = obs.x[i] - t[i];
    r2 += d * d;
  }
  double f = factor(r2);
  std::vector<double> out(obs.dim());
  for (int i = 0; i < obs.dim(); ++i) out[i] = t[i] + f * (obs.x[i] - t[i]);
  return out;
}

}  // namespace

std::vector<double> james_stein(const Observation& obs,
                                const ShrinkConfig& cfg) {
  return shrink_residual(obs, cfg, [&](double r2) {
    if (r2 == 0.0)
      throw std::domain_error(
          "james_stein: observation coincides with the shrink target");
    return 1.0 - cfg.a / r2;
  });
}

std::vector<double> positive_part(const Observation& obs,
                                  const ShrinkConfig& cfg) {
  return shrink_residual(obs, cfg, [&](double r2) {
    return r2 > cfg.a ? 1.0 - cfg.a / r2 : 0.0;
  });
}

std::vector<double> brown_joshi(const Observation& obs,
                                const ShrinkConfig& cfg) {
  if (cfg.b < 0.0) throw std::invalid_argument("offset b must be >= 0");
  return shrink_residual(obs, cfg, [&](double r2) {
    double denom = cfg.b + r2;
    if (denom == 0.0)
      throw std::domain_error(
          "brown_joshi: zero denominator (b = 0 and x at the target)");
    return 1.0 - cfg.a / denom;
  });
}

double strawderman_shrink_factor(double t, int p, double a) {
  if (!(t >= 0.0))
    throw std::domain_error("strawderman_shrink_factor: t must be >= 0");
  if (p < 1) throw std::domain_error("strawderman_shrink_factor: p must be >= 1");
  if (!(a >= 0.0 && a < 1.0))
    throw std::domain_error("strawderman_shrink_factor: a must lie in [0,1)");

  const double s = 0.5 * p - a;  // exponent in the denominator integral

  // E(lambda|x) is a ratio of truncated gamma-type moments
  //   m_k = integral_0^1 lambda^{s+k} exp(-lambda t / 2) d lambda.
  // For t large enough, m_k = (2/t)^{s+k+1} gamma(s+k+1, t/2); near
  // t = 0 that identity loses all its digits, so expand the exponential
  // instead (lambda <= 1 makes the series converge immediately).
  if (t < 1e-8) {
    auto moment = [&](double sk) {
      double half = 0.5 * t;
      return 1.0 / (sk + 1.0) - half / (sk + 2.0) +
             half * half / (2.0 * (sk + 3.0)) -
             half * half * half / (6.0 * (sk + 4.0));
    };
    return moment(s + 1.0) / moment(s);
  }

  double half = 0.5 * t;
  // ratio = (2/t) * gamma(s+2, t/2) / gamma(s+1, t/2) with
  // gamma(s, y) = P(s, y) Gamma(s)
  double num = numkit::gamma_p(s + 2.0, half) * std::exp(std::lgamma(s + 2.0));
  double den = numkit::gamma_p(s + 1.0, half) * std::exp(std::lgamma(s + 1.0));
  return (2.0 / t) * num / den;
}

std::vector<double> strawderman_estimate(const Observation& obs, double a) {
  double t = 0.0;
  for (double v : obs.x) t += v * v;
  double factor = 1.0 - strawderman_shrink_factor(t, obs.dim(), a);
  std::vector<double> out(obs.x);
  for (double& v : out) v *= factor;
  return out;
}

double stein_variance(const UnivariateSample& s) {
  if (s.n < 2) throw std::invalid_argument("stein_variance: need n >= 2");
  if (!(s.ss > 0.0)) throw std::invalid_argument("stein_variance: ss must be > 0");
  // Saturated branch returns ss/(n+1) verbatim so that it is bitwise
  // identical to the usual estimator it clamps to.
  double branch = (1.0 + s.n * s.mean * s.mean / s.ss) / (s.n + 2.0);
  double usual = 1.0 / (s.n + 1.0);
  if (branch >= usual) return s.ss / (s.n + 1.0);
  return branch * s.ss;
}

double eb_shrink_factor_M(double t, int p, double c2) {
  if (p < 3) throw std::invalid_argument("eb_shrink_factor_M: p must be >= 3");
  if (!(t >= 0.0)) throw std::domain_error("eb_shrink_factor_M: t must be >= 0");
  if (!(c2 > static_cast<double>(p - 2)))
    throw std::invalid_argument("eb_shrink_factor_M: requires c2 > p - 2");
  return 1.0 - static_cast<double>(p - 2) / std::max(t, c2);
}

double he_shrink_factor_M(double t, int p) {
  if (p < 3) throw std::invalid_argument("he_shrink_factor_M: p must be >= 3");
  if (!(t >= 0.0)) throw std::domain_error("he_shrink_factor_M: t must be >= 0");
  double pospart = t > static_cast<double>(p - 2)
                       ? 1.0 - static_cast<double>(p - 2) / t
                       : 0.0;
  return std::max(pospart, 1.0 / static_cast<double>(p - 1));
}

}  // namespace steincover::shrinkers
