#include "steincover/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

#include "parallel.hpp"
#include "steincover/shrinkers.hpp"

namespace steincover::evaluate {

namespace {

using detail::run_blocked;

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// 12-point Gauss-Legendre rule on [-1, 1] (positive abscissas; the rule is
// symmetric).
constexpr double kGlNode[6] = {0.1252334085114689, 0.3678314989981802,
                               0.5873179542866175, 0.7699026741943047,
                               0.9041172563704749, 0.9815606342467192};
constexpr double kGlWeight[6] = {0.2491470458134028, 0.2334925365383548,
                                 0.2031674267230659, 0.1600783285433462,
                                 0.1069393259953184, 0.0471753363865118};

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1)");
}

void check_reps(std::uint64_t n_rep) {
  if (n_rep == 0) throw std::invalid_argument("n_rep must be positive");
}

double pospart_factor(double s, double a) {
  if (s <= a) return 0.0;
  return 1.0 - a / s;
}

struct HitAcc {
  std::uint64_t hits = 0;
};

struct SumAcc {
  double sum = 0.0;
  double sum_sq = 0.0;
};

struct DiffAcc {
  std::int64_t sum = 0;
  std::uint64_t nonzero = 0;
};

McEstimate proportion_estimate(const std::vector<HitAcc>& accs,
                               std::uint64_t n_rep) {
  std::uint64_t hits = 0;
  for (const auto& a : accs) hits += a.hits;
  double p = static_cast<double>(hits) / static_cast<double>(n_rep);
  double se = std::sqrt(std::max(0.0, p * (1.0 - p)) /
                        static_cast<double>(n_rep));
  return {p, se, n_rep};
}

McEstimate mean_estimate(const std::vector<SumAcc>& accs,
                         std::uint64_t n_rep) {
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& a : accs) {
    sum += a.sum;
    sum_sq += a.sum_sq;
  }
  double n = static_cast<double>(n_rep);
  double mean = sum / n;
  double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n), n_rep};
}

std::vector<double> axis_theta(double theta_norm, int p) {
  if (!(theta_norm >= 0.0))
    throw std::invalid_argument("theta_norm must be nonnegative");
  std::vector<double> theta(p, 0.0);
  theta[0] = theta_norm;
  return theta;
}

void check_spec(const QuadratureSpec& spec) {
  if (spec.n_z < 16)
    throw std::invalid_argument("need at least 16 quadrature panels");
  if (spec.n_w < 16)
    throw std::invalid_argument("need at least 16 scan panels");
  if (spec.z_cut < 6.0)
    throw std::invalid_argument("integration range must reach 6 sigma");
  if (!(spec.target_abs_err > 0.0))
    throw std::invalid_argument("target error must be positive");
}

// Probability mass of {w >= 0 : rule covers} under chi2 with df degrees of
// freedom, at fixed first coordinate x1 of the observation.
double member_mass(const SphereRule& rule, double t, double x1, double df,
                   double w_hi, int n_w) {
  auto margin = [&](double w) {
    double s = x1 * x1 + w;
    double gam = rule.center_factor(s);
    double d2 = t * t - 2.0 * gam * t * x1 + gam * gam * s;
    return rule.radius2(s) - d2;
  };

  // the sets are closed, so zero margin counts as covered
  double cuts[64];
  int n_cuts = 0;
  bool inside = margin(0.0) >= 0.0;
  if (inside) cuts[n_cuts++] = 0.0;
  double prev_w = 0.0;
  for (int i = 1; i <= n_w; ++i) {
    double w = w_hi * static_cast<double>(i) / n_w;
    bool cur = margin(w) >= 0.0;
    if (cur != inside) {
      double lo = prev_w, hi = w;
      for (int it = 0; it < 90; ++it) {
        double mid = 0.5 * (lo + hi);
        ((margin(mid) >= 0.0) == inside ? lo : hi) = mid;
      }
      if (n_cuts >= 63) throw std::runtime_error("membership set too ragged");
      cuts[n_cuts++] = 0.5 * (lo + hi);
      inside = cur;
    }
    prev_w = w;
  }
  if (inside) cuts[n_cuts++] = w_hi;

  double mass = 0.0;
  for (int j = 0; j + 1 < n_cuts; j += 2)
    mass += numkit::chi2_cdf(cuts[j + 1], df) - numkit::chi2_cdf(cuts[j], df);
  return mass;
}

double quad_coverage_1d(const SphereRule& rule, double t,
                        const QuadratureSpec& spec) {
  auto margin = [&](double z) {
    double x = t + z;
    double s = x * x;
    double gam = rule.center_factor(s);
    double d = t - gam * x;
    return rule.radius2(s) - d * d;
  };
  int n = spec.n_z * 12;
  double z_lo = -spec.z_cut;
  double total = 0.0;
  bool inside = margin(z_lo) >= 0.0;
  double entry = z_lo;
  double prev = z_lo;
  for (int i = 1; i <= n; ++i) {
    double z = -spec.z_cut + 2.0 * spec.z_cut * static_cast<double>(i) / n;
    bool cur = margin(z) >= 0.0;
    if (cur != inside) {
      double lo = prev, hi = z;
      for (int it = 0; it < 90; ++it) {
        double mid = 0.5 * (lo + hi);
        ((margin(mid) >= 0.0) == inside ? lo : hi) = mid;
      }
      double cut = 0.5 * (lo + hi);
      if (inside)
        total += numkit::normal_cdf(cut) - numkit::normal_cdf(entry);
      else
        entry = cut;
      inside = cur;
    }
    prev = z;
  }
  if (inside)
    total += numkit::normal_cdf(spec.z_cut) - numkit::normal_cdf(entry);
  return total;
}

}  // namespace

int resolve_worker_count(int requested) {
  if (const char* env = std::getenv("SS_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 4096)
      return static_cast<int>(v);
  }
  if (requested >= 1) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

McEstimate mc_coverage(const regions::RegionProcedure& proc, double theta_norm,
                       std::uint64_t n_rep, const numkit::SeedSpec& seed,
                       int workers) {
  check_reps(n_rep);
  int p = proc.dim();
  auto theta = axis_theta(theta_norm, p);
  auto test = proc.acceptance_test(theta);
  auto accs = run_blocked<HitAcc>(
      n_rep, resolve_worker_count(workers),
      [&](std::uint64_t rep, HitAcc& acc) {
        thread_local std::vector<double> x;
        x.resize(theta.size());
        numkit::Rng rng(seed, rep);
        for (std::size_t i = 0; i < x.size(); ++i)
          x[i] = theta[i] + rng.normal();
        if (test(x)) ++acc.hits;
      });
  return proportion_estimate(accs, n_rep);
}

McEstimate mc_coverage_diff(const regions::RegionProcedure& lhs,
                            const regions::RegionProcedure& rhs,
                            double theta_norm, std::uint64_t n_rep,
                            const numkit::SeedSpec& seed, int workers) {
  check_reps(n_rep);
  if (lhs.dim() != rhs.dim())
    throw std::invalid_argument("procedures must share a dimension");
  auto theta = axis_theta(theta_norm, lhs.dim());
  auto test_l = lhs.acceptance_test(theta);
  auto test_r = rhs.acceptance_test(theta);
  auto accs = run_blocked<DiffAcc>(
      n_rep, resolve_worker_count(workers),
      [&](std::uint64_t rep, DiffAcc& acc) {
        thread_local std::vector<double> x;
        x.resize(theta.size());
        numkit::Rng rng(seed, rep);
        for (std::size_t i = 0; i < x.size(); ++i)
          x[i] = theta[i] + rng.normal();
        int d = static_cast<int>(test_l(x)) - static_cast<int>(test_r(x));
        acc.sum += d;
        acc.nonzero += d != 0;
      });
  std::int64_t sum = 0;
  std::uint64_t nonzero = 0;
  for (const auto& a : accs) {
    sum += a.sum;
    nonzero += a.nonzero;
  }
  double n = static_cast<double>(n_rep);
  double mean = static_cast<double>(sum) / n;
  double var = std::max(0.0, static_cast<double>(nonzero) / n - mean * mean);
  return {mean, std::sqrt(var / n), n_rep};
}

SphereRule sphere_rule_of(const regions::RegionProcedure& proc) {
  if (!proc.is_recentered_sphere())
    throw std::logic_error(proc.id() + " has no recentered-sphere form");
  SphereRule rule;
  rule.center_factor = [&proc](double s) { return proc.center_factor(s); };
  rule.radius2 = [&proc](double s) { return proc.radius2_at(s); };
  return rule;
}

double quad_coverage(const SphereRule& rule, double theta_norm, int p,
                     const QuadratureSpec& spec) {
  if (p < 1) throw std::invalid_argument("dimension must be at least 1");
  if (!(theta_norm >= 0.0))
    throw std::invalid_argument("theta_norm must be nonnegative");
  check_spec(spec);
  if (p == 1) return quad_coverage_1d(rule, theta_norm, spec);

  double t = theta_norm;
  double df = p - 1.0;
  double w_hi = numkit::chi2_quantile(1.0 - 1e-14, df);
  double h = 2.0 * spec.z_cut / spec.n_z;
  double total = 0.0;
  for (int k = 0; k < spec.n_z; ++k) {
    double zc = -spec.z_cut + (k + 0.5) * h;
    for (int j = 0; j < 6; ++j) {
      for (double sign : {-1.0, 1.0}) {
        double z = zc + sign * 0.5 * h * kGlNode[j];
        double mass = member_mass(rule, t, t + z, df, w_hi, spec.n_w);
        total += 0.5 * h * kGlWeight[j] * mass * std::exp(-0.5 * z * z) *
                 kInvSqrt2Pi;
      }
    }
  }
  return total;
}

double quad_coverage(const regions::RegionProcedure& proc, double theta_norm,
                     const QuadratureSpec& spec) {
  return quad_coverage(sphere_rule_of(proc), theta_norm, proc.dim(), spec);
}

double astar_solve(int p, double alpha) {
  if (p < 3) throw std::invalid_argument("dimension must be at least 3");
  check_alpha(alpha);
  double c2 = numkit::chi2_quantile(1.0 - alpha, p);
  double c = std::sqrt(c2);
  auto g = [&](double a) {
    return (p - 2) * std::log((c2 + std::sqrt(c2 + a)) / a) - c * std::sqrt(a);
  };
  double lo = 1e-8;
  double hi = 8.0 * (p - 2);
  if (!(g(lo) > 0.0) || !(g(hi) < 0.0))
    throw std::runtime_error("shrink-constant bracket failed");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  double a = 0.5 * (lo + hi);
  if (std::fabs(g(a)) > 1e-12)
    throw std::runtime_error("shrink-constant solve did not converge");
  return a;
}

DerivativeScan coverage_derivative_scan(int p, double alpha,
                                        std::vector<double> a_grid,
                                        std::vector<double> t_grid,
                                        double step,
                                        const QuadratureSpec& spec) {
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  check_alpha(alpha);
  double c2 = numkit::chi2_quantile(1.0 - alpha, p);
  DerivativeScan scan;
  scan.a_grid = std::move(a_grid);
  scan.t_grid = std::move(t_grid);
  scan.d_coverage_da.assign(scan.a_grid.size(),
                            std::vector<double>(scan.t_grid.size(), 0.0));
  for (std::size_t i = 0; i < scan.a_grid.size(); ++i) {
    double a = scan.a_grid[i];
    if (!(a > 0.0))
      throw std::invalid_argument("shrink constants must be positive");
    double h = std::min(step, 0.49 * a);
    auto rule_at = [&](double av) {
      SphereRule rule;
      rule.center_factor = [av](double s) { return pospart_factor(s, av); };
      rule.radius2 = [c2](double) { return c2; };
      return rule;
    };
    auto up = rule_at(a + h);
    auto down = rule_at(a - h);
    for (std::size_t j = 0; j < scan.t_grid.size(); ++j) {
      double t = scan.t_grid[j];
      scan.d_coverage_da[i][j] =
          (quad_coverage(up, t, p, spec) - quad_coverage(down, t, p, spec)) /
          (2.0 * h);
    }
  }
  return scan;
}

double w_alpha_solve(double theta_norm, int p, double alpha, double a,
                     const QuadratureSpec& spec) {
  if (p < 3) throw std::invalid_argument("dimension must be at least 3");
  check_alpha(alpha);
  if (!(a > 0.0)) throw std::invalid_argument("shrink constant must be > 0");
  double target = 1.0 - alpha;
  double c2 = numkit::chi2_quantile(target, p);
  auto coverage_at = [&](double w) {
    SphereRule rule;
    rule.center_factor = [a](double s) { return pospart_factor(s, a); };
    rule.radius2 = [w](double) { return w; };
    return quad_coverage(rule, theta_norm, p, spec);
  };
  double lo = 1e-6 * c2;
  double hi = 4.0 * c2;
  if (!(coverage_at(lo) < target) || !(coverage_at(hi) > target))
    throw std::runtime_error("exact-coverage radius bracket failed");
  while (hi - lo > 1e-10 * c2) {
    double mid = 0.5 * (lo + hi);
    (coverage_at(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SamworthCoefficients samworth_coefficients(int p, double alpha, double a,
                                           const QuadratureSpec& spec) {
  const double h = 0.1;
  double w0 = w_alpha_solve(0.0, p, alpha, a, spec);
  double w_h = w_alpha_solve(h, p, alpha, a, spec);
  double w_half = w_alpha_solve(0.5 * h, p, alpha, a, spec);
  double diff_h = 2.0 * (w_h - w0) / (h * h);
  double diff_half = 2.0 * (w_half - w0) / (0.25 * h * h);
  return {w0, (4.0 * diff_half - diff_h) / 3.0, diff_h, diff_half};
}

McEstimate eb_bayes_coverage(IntervalRule rule, int p, double alpha,
                             double tau2, double mu, std::uint64_t n_rep,
                             const numkit::SeedSpec& seed, int workers) {
  check_reps(n_rep);
  check_alpha(alpha);
  if (p < 1) throw std::invalid_argument("dimension must be at least 1");
  if (rule == IntervalRule::he && p < 3)
    throw std::invalid_argument("shrinkage interval needs p >= 3");
  if (tau2 < 0.0) throw std::invalid_argument("tau2 must be nonnegative");
  double c = numkit::normal_two_sided_cutoff(alpha);
  if (rule == IntervalRule::he && c <= 1.0)
    throw std::invalid_argument(
        "shrinkage z-interval needs a two-sided cutoff above 1");
  double tau = std::sqrt(tau2);
  double a = p - 2.0;
  auto accs = run_blocked<HitAcc>(
      n_rep, resolve_worker_count(workers),
      [&](std::uint64_t rep, HitAcc& acc) {
        thread_local std::vector<double> theta;
        theta.resize(p);
        numkit::Rng rng(seed, rep);
        for (int i = 0; i < p; ++i) theta[i] = mu + tau * rng.normal();
        double s = 0.0;
        double x0 = 0.0;
        for (int i = 0; i < p; ++i) {
          double xi = theta[i] + rng.normal();
          if (i == 0) x0 = xi;
          s += xi * xi;
        }
        bool hit;
        if (rule == IntervalRule::naive) {
          hit = std::fabs(x0 - theta[0]) <= c;
        } else {
          double m = shrinkers::he_shrink_factor_M(s, p);
          double nu = m * (c * c - std::log(m));
          double center = pospart_factor(s, a) * x0;
          double d = theta[0] - center;
          hit = d * d <= nu;
        }
        if (hit) ++acc.hits;
      });
  return proportion_estimate(accs, n_rep);
}

double volume_sphere(double radius2, int p) {
  if (p < 1) throw std::invalid_argument("dimension must be at least 1");
  if (radius2 < 0.0) throw std::invalid_argument("squared radius must be >= 0");
  if (radius2 == 0.0) return 0.0;
  return std::exp(0.5 * p * std::log(M_PI * radius2) -
                  std::lgamma(0.5 * p + 1.0));
}

McEstimate volume_mc(const regions::RegionProcedure& proc,
                     const shrinkers::Observation& x, std::uint64_t n_rep,
                     const numkit::SeedSpec& seed, int workers) {
  check_reps(n_rep);
  int p = proc.dim();
  if (x.dim() != p) throw std::invalid_argument("dimension mismatch");
  auto center = proc.nominal_center(x.x);
  if (!proc.member(center, x.x))
    throw std::runtime_error("nominal center is not covered by the region");
  double cap = 10.0 * std::sqrt(numkit::chi2_quantile(1.0 - proc.alpha(), p));

  std::vector<std::vector<double>> dirs;
  for (int i = 0; i < p; ++i) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> u(p, 0.0);
      u[i] = sign;
      dirs.push_back(std::move(u));
    }
  }
  numkit::Rng aux({seed.base_seed, seed.stream_id ^ 0xa0761d6478bd642fULL}, 0);
  for (int extra = 0; extra < 10; ++extra) {
    std::vector<double> u(p);
    double nrm = 0.0;
    do {
      nrm = 0.0;
      for (double& v : u) {
        v = aux.normal();
        nrm += v * v;
      }
      nrm = std::sqrt(nrm);
    } while (nrm < 1e-12);
    for (double& v : u) v /= nrm;
    dirs.push_back(std::move(u));
  }

  std::vector<double> point(p);
  double r_max = 0.0;
  for (const auto& u : dirs) {
    for (int i = 0; i < p; ++i) point[i] = center[i] + cap * u[i];
    if (proc.member(point, x.x))
      throw std::runtime_error(
          "region is not bounded within ten usual radii of its center");
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (lo + hi);
      for (int i = 0; i < p; ++i) point[i] = center[i] + mid * u[i];
      (proc.member(point, x.x) ? lo : hi) = mid;
    }
    r_max = std::max(r_max, hi);
  }
  // inflate the bounding ball so unprobed directions stay inside it
  double radius = 1.05 * r_max;
  double ball = volume_sphere(radius * radius, p);

  auto accs = run_blocked<HitAcc>(
      n_rep, resolve_worker_count(workers),
      [&](std::uint64_t rep, HitAcc& acc) {
        thread_local std::vector<double> u;
        u.resize(p);
        numkit::Rng rng(seed, rep);
        double nrm = 0.0;
        for (double& v : u) {
          v = rng.normal();
          nrm += v * v;
        }
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) return;
        double r = radius * std::pow(rng.uniform(), 1.0 / p);
        thread_local std::vector<double> pt;
        pt.resize(p);
        for (int i = 0; i < p; ++i) pt[i] = center[i] + r * u[i] / nrm;
        if (proc.member(pt, x.x)) ++acc.hits;
      });
  auto prop = proportion_estimate(accs, n_rep);
  return {ball * prop.estimate, ball * prop.std_error, n_rep};
}

McEstimate expected_volume(const regions::RegionProcedure& proc,
                           double theta_norm, std::uint64_t n_rep,
                           const numkit::SeedSpec& seed, int workers,
                           std::uint64_t inner_rep) {
  check_reps(n_rep);
  check_reps(inner_rep);
  int p = proc.dim();
  auto theta = axis_theta(theta_norm, p);
  bool explicit_sphere = proc.is_recentered_sphere();
  auto accs = run_blocked<SumAcc>(
      n_rep, resolve_worker_count(workers),
      [&](std::uint64_t rep, SumAcc& acc) {
        thread_local std::vector<double> x;
        x.resize(p);
        numkit::Rng rng(seed, rep);
        double s = 0.0;
        for (int i = 0; i < p; ++i) {
          x[i] = theta[i] + rng.normal();
          s += x[i] * x[i];
        }
        double v;
        if (explicit_sphere) {
          v = volume_sphere(proc.radius2_at(s), p);
        } else {
          numkit::SeedSpec inner{
              seed.base_seed ^ 0x8ebc6af09c88c6e3ULL,
              seed.stream_id ^ (rep * 0x9e3779b97f4a7c15ULL +
                                0x2545f4914f6cdd1dULL)};
          v = volume_mc(proc, {x}, inner_rep, inner, 1).estimate;
        }
        acc.sum += v;
        acc.sum_sq += v * v;
      });
  return mean_estimate(accs, n_rep);
}

McEstimate expected_volume_diff(const regions::RegionProcedure& lhs,
                                const regions::RegionProcedure& rhs,
                                double theta_norm, std::uint64_t n_rep,
                                const numkit::SeedSpec& seed, int workers) {
  check_reps(n_rep);
  if (!lhs.is_recentered_sphere() || !rhs.is_recentered_sphere())
    throw std::invalid_argument(
        "volume comparison needs explicit spheres on both sides");
  if (lhs.dim() != rhs.dim())
    throw std::invalid_argument("procedures must share a dimension");
  int p = lhs.dim();
  auto theta = axis_theta(theta_norm, p);
  auto accs = run_blocked<SumAcc>(
      n_rep, resolve_worker_count(workers),
      [&](std::uint64_t rep, SumAcc& acc) {
        numkit::Rng rng(seed, rep);
        double s = 0.0;
        for (int i = 0; i < p; ++i) {
          double xi = theta[i] + rng.normal();
          s += xi * xi;
        }
        double v = volume_sphere(lhs.radius2_at(s), p) -
                   volume_sphere(rhs.radius2_at(s), p);
        acc.sum += v;
        acc.sum_sq += v * v;
      });
  return mean_estimate(accs, n_rep);
}

McEstimate cohen_coverage(int n, double mu_over_sigma, double alpha, double k,
                          double a_prime, std::uint64_t n_rep,
                          const numkit::SeedSpec& seed, int workers) {
  check_reps(n_rep);
  check_alpha(alpha);
  if (n < 2) throw std::invalid_argument("need n >= 2 observations");
  if (!(k > 0.0)) throw std::invalid_argument("threshold k must be positive");
  auto cut = regions::tate_klett_cut(n, alpha);
  if (a_prime < cut.a)
    throw std::invalid_argument("a_prime must be at least the lower cut point");
  double inv_b_prime = 1.0 / a_prime - (1.0 / cut.a - 1.0 / cut.b);
  if (inv_b_prime <= 0.0)
    throw std::invalid_argument("a_prime too large: shifted piece degenerates");
  auto accs = run_blocked<HitAcc>(
      n_rep, resolve_worker_count(workers),
      [&](std::uint64_t rep, HitAcc& acc) {
        thread_local std::vector<double> obs;
        obs.resize(n);
        numkit::Rng rng(seed, rep);
        double mean = 0.0;
        for (auto& o : obs) {
          o = mu_over_sigma + rng.normal();
          mean += o;
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double o : obs) ss += (o - mean) * (o - mean);
        double stat = n * mean * mean / ss;
        bool hit;
        if (stat > k)
          hit = ss / cut.b <= 1.0 && 1.0 <= ss / cut.a;
        else
          hit = ss * inv_b_prime <= 1.0 && 1.0 <= ss / a_prime;
        if (hit) ++acc.hits;
      });
  return proportion_estimate(accs, n_rep);
}

int rank_index(std::span<const double> x, int rank) {
  int p = static_cast<int>(x.size());
  if (rank < 1 || rank > p)
    throw std::invalid_argument("rank must lie in [1, p]");
  thread_local std::vector<int> idx;
  idx.resize(p);
  std::iota(idx.begin(), idx.end(), 0);
  std::nth_element(idx.begin(), idx.begin() + (rank - 1), idx.end(),
                   [&x](int i, int j) {
                     if (x[i] != x[j]) return x[i] < x[j];
                     return i < j;
                   });
  return idx[rank - 1];
}

McEstimate selection_coverage(int p, double mu, double tau2, int rank,
                              SelectionRule rule, double alpha,
                              std::uint64_t n_rep,
                              const numkit::SeedSpec& seed, int workers) {
  check_reps(n_rep);
  check_alpha(alpha);
  if (p < 1) throw std::invalid_argument("dimension must be at least 1");
  if (rank < 1 || rank > p)
    throw std::invalid_argument("rank must lie in [1, p]");
  if (tau2 < 0.0) throw std::invalid_argument("tau2 must be nonnegative");
  double c = numkit::normal_two_sided_cutoff(alpha);
  bool shrink = rule == SelectionRule::he_selected && p >= 3;
  if (shrink && c <= 1.0)
    throw std::invalid_argument(
        "shrinkage z-interval needs a two-sided cutoff above 1");
  double tau = std::sqrt(tau2);
  double a = p - 2.0;
  auto accs = run_blocked<HitAcc>(
      n_rep, resolve_worker_count(workers),
      [&](std::uint64_t rep, HitAcc& acc) {
        thread_local std::vector<double> theta, x;
        theta.resize(p);
        x.resize(p);
        numkit::Rng rng(seed, rep);
        for (int i = 0; i < p; ++i) theta[i] = mu + tau * rng.normal();
        double s = 0.0;
        for (int i = 0; i < p; ++i) {
          x[i] = theta[i] + rng.normal();
          s += x[i] * x[i];
        }
        int j = rank_index(x, rank);
        bool hit;
        if (!shrink) {
          hit = std::fabs(x[j] - theta[j]) <= c;
        } else {
          double m = shrinkers::he_shrink_factor_M(s, p);
          double nu = m * (c * c - std::log(m));
          double center = pospart_factor(s, a) * x[j];
          double d = theta[j] - center;
          hit = d * d <= nu;
        }
        if (hit) ++acc.hits;
      });
  return proportion_estimate(accs, n_rep);
}

}  // namespace steincover::evaluate
