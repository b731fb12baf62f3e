#include "steincover/numkit.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace steincover::numkit {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 output mixer (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

[[noreturn]] void fail(const char* what) { throw std::domain_error(what); }

}  // namespace

Rng::Rng(const SeedSpec& seed, std::uint64_t replication) {
  // Hash the three key components through the mixer so that nearby
  // keys land in unrelated states.
  std::uint64_t h = mix64(seed.base_seed + kGamma);
  h = mix64(h ^ (seed.stream_id + 0xbf58476d1ce4e5b9ULL));
  h = mix64(h ^ (replication + 0x94d049bb133111ebULL));
  state_ = h;
}

std::uint64_t Rng::next_u64() {
  state_ += kGamma;
  return mix64(state_);
}

double Rng::uniform() {
  // 53 random bits shifted into (0,1); the +0.5 keeps both endpoints out.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = uniform();
  double v = uniform();
  double r = std::sqrt(-2.0 * std::log(u));
  double t = 2.0 * std::numbers::pi * v;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

void Rng::normal_fill(std::span<double> out) {
  for (double& x : out) x = normal();
}

std::vector<double> std_normal_sample(const SeedSpec& seed, std::size_t n) {
  Rng rng(seed, 0);
  std::vector<double> out(n);
  rng.normal_fill(out);
  return out;
}

double gamma_p(double a, double x) {
  if (!(a > 0.0)) fail("gamma_p: shape must be positive");
  if (!(x >= 0.0)) fail("gamma_p: argument must be nonnegative");
  if (x == 0.0) return 0.0;

  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  constexpr int kMaxIter = 2000;
  constexpr double kEps = 1e-16;

  if (x < a + 1.0) {
    // lower series: P(a,x) = x^a e^-x / Gamma(a) * sum x^n / (a)_{n+1}
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int n = 0; n < kMaxIter; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(log_prefactor);
  }

  // upper continued fraction via modified Lentz
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  double q = std::exp(log_prefactor) * h;
  return 1.0 - q;
}

double chi2_pdf(double x, double df) {
  if (!(df > 0.0)) fail("chi2_pdf: df must be positive");
  if (!(x >= 0.0)) fail("chi2_pdf: x must be nonnegative");
  if (x == 0.0) {
    if (df < 2.0) return std::numeric_limits<double>::infinity();
    if (df == 2.0) return 0.5;
    return 0.0;
  }
  double h = 0.5 * df;
  return std::exp((h - 1.0) * std::log(x) - 0.5 * x - h * std::log(2.0) -
                  std::lgamma(h));
}

double chi2_cdf(double x, double df) {
  if (!(df > 0.0)) fail("chi2_cdf: df must be positive");
  if (!(x >= 0.0)) fail("chi2_cdf: x must be nonnegative");
  return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_quantile(double q, double df) {
  if (!(df > 0.0)) fail("chi2_quantile: df must be positive");
  if (!(q > 0.0 && q < 1.0)) fail("chi2_quantile: q must lie in (0,1)");

  // Wilson-Hilferty approximation locates the root; bisection pins it.
  double z = normal_quantile(q);
  double f = 2.0 / (9.0 * df);
  double cube = 1.0 - f + z * std::sqrt(f);
  double guess = df * cube * cube * cube;
  if (!(guess > 0.0)) guess = 0.5 * df;

  double lo = 0.0;
  double hi = std::max(guess * 2.0, df + 10.0 * std::sqrt(2.0 * df) + 10.0);
  for (int i = 0; i < 200 && chi2_cdf(hi, df) < q; ++i) hi *= 2.0;

  for (int i = 0; i < 300 && (hi - lo) > 1e-15 * (1.0 + hi); ++i) {
    double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, df) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double noncentral_chi2_cdf(double x, double df, double lambda) {
  if (!(df > 0.0)) fail("noncentral_chi2_cdf: df must be positive");
  if (!(x >= 0.0)) fail("noncentral_chi2_cdf: x must be nonnegative");
  if (!(lambda >= 0.0)) fail("noncentral_chi2_cdf: lambda must be >= 0");
  if (lambda == 0.0) return chi2_cdf(x, df);
  if (x == 0.0) return 0.0;

  // Poisson(lambda/2) mixture of central chi-square cdfs.  Work outward
  // from the modal index so large noncentralities stay cheap, stopping
  // once the unexplored Poisson mass cannot move the answer by 1e-13.
  const double half = 0.5 * lambda;
  const long j0 = static_cast<long>(half);
  const double w0 =
      std::exp(-half + static_cast<double>(j0) * std::log(half) -
               std::lgamma(static_cast<double>(j0) + 1.0));

  double sum = w0 * chi2_cdf(x, df + 2.0 * static_cast<double>(j0));
  double mass = w0;

  double w_up = w0;
  long j_up = j0;
  double w_down = w0;
  long j_down = j0;
  bool more_up = true;
  bool more_down = j0 > 0;
  constexpr double kTailTol = 1e-13;

  while ((more_up || more_down) && 1.0 - mass > kTailTol) {
    if (more_up) {
      ++j_up;
      w_up *= half / static_cast<double>(j_up);
      sum += w_up * chi2_cdf(x, df + 2.0 * static_cast<double>(j_up));
      mass += w_up;
      if (w_up < kTailTol * 1e-3 && static_cast<double>(j_up) > half)
        more_up = false;
    }
    if (more_down && 1.0 - mass > kTailTol) {
      w_down *= static_cast<double>(j_down) / half;
      --j_down;
      sum += w_down * chi2_cdf(x, df + 2.0 * static_cast<double>(j_down));
      mass += w_down;
      if (j_down == 0) more_down = false;
    }
  }
  return std::min(sum, 1.0);
}

double noncentral_chi2_quantile(double q, double df, double lambda) {
  if (!(q > 0.0 && q < 1.0))
    fail("noncentral_chi2_quantile: q must lie in (0,1)");
  if (!(lambda >= 0.0)) fail("noncentral_chi2_quantile: lambda must be >= 0");
  if (lambda == 0.0) return chi2_quantile(q, df);

  double lo = 0.0;
  double hi = df + lambda + 10.0 * std::sqrt(2.0 * (df + 2.0 * lambda)) + 10.0;
  for (int i = 0; i < 200 && noncentral_chi2_cdf(hi, df, lambda) < q; ++i)
    hi *= 2.0;

  for (int i = 0; i < 300 && (hi - lo) > 1e-15 * (1.0 + hi); ++i) {
    double mid = 0.5 * (lo + hi);
    if (noncentral_chi2_cdf(mid, df, lambda) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail("normal_quantile: p must lie in (0,1)");

  // Acklam's rational approximation, then two Newton corrections
  // against erfc bring the result to full double accuracy.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};

  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double u = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (p <= 1.0 - plow) {
    double u = p - 0.5;
    double r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double u = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u +
          c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }

  const double inv_sqrt2pi = 0.3989422804014327;
  for (int i = 0; i < 2; ++i) {
    double err = normal_cdf(x) - p;
    double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
    if (pdf > 0.0) x -= err / pdf;
  }
  return x;
}

double normal_two_sided_cutoff(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    fail("normal_two_sided_cutoff: alpha must lie in (0,1)");
  return normal_quantile(1.0 - 0.5 * alpha);
}

}  // namespace steincover::numkit
