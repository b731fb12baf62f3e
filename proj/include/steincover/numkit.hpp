// Deterministic sampling and the gamma-family special functions used by
// the confidence-set machinery: chi-square and noncentral chi-square
// cdfs/quantiles plus standard-normal helpers.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace steincover::numkit {

// Identifies a virtual random stream.  Every replication of an
// experiment derives its own generator from (base_seed, stream_id,
// replication), so results never depend on how replications are split
// across workers.
struct SeedSpec {
  std::uint64_t base_seed = 0;
  std::uint64_t stream_id = 0;
};

// SplitMix64 generator keyed by a SeedSpec and a replication index.
// Normal variates come from the basic Box-Muller transform, so the
// sequence is identical on every platform that rounds IEEE doubles the
// same way (no library distribution objects are involved).
class Rng {
 public:
  Rng(const SeedSpec& seed, std::uint64_t replication);

  std::uint64_t next_u64();
  double uniform();  // open interval (0,1)
  double normal();   // standard normal
  void normal_fill(std::span<double> out);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// n standard-normal draws from replication 0 of the given stream.
std::vector<double> std_normal_sample(const SeedSpec& seed, std::size_t n);

// Regularized lower incomplete gamma P(a, x): series expansion for
// x < a + 1, Lentz continued fraction otherwise.
double gamma_p(double a, double x);

double chi2_pdf(double x, double df);
double chi2_cdf(double x, double df);
// Inverse cdf via a Wilson-Hilferty starting point and bisection.
double chi2_quantile(double q, double df);

// Noncentral chi-square cdf as a Poisson mixture of central cdfs,
// summed outward from the modal mixture index until the unaccounted
// Poisson mass drops below 1e-13.
double noncentral_chi2_cdf(double x, double df, double lambda);
double noncentral_chi2_quantile(double q, double df, double lambda);

double normal_cdf(double x);
double normal_quantile(double p);
// z such that P(|Z| <= z) = 1 - alpha for standard normal Z.
double normal_two_sided_cutoff(double alpha);

}  // namespace steincover::numkit
