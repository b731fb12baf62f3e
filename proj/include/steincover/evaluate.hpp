#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "steincover/numkit.hpp"
#include "steincover/regions.hpp"

namespace steincover::evaluate {

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t n_rep = 0;
};

// Controls for the deterministic coverage quadrature. The defaults hit
// absolute errors far below target_abs_err for every recentered-sphere rule
// shipped here.
struct QuadratureSpec {
  int n_z = 96;        // panels for the first error coordinate
  int n_w = 96;        // scan panels for the residual chi-square coordinate
  double z_cut = 8.0;  // integration range in standard deviations
  double target_abs_err = 1e-5;
};

// Recentered-sphere rule as plain callables of s = |x|^2, for quadrature on
// rules that are not wrapped in a RegionProcedure.
struct SphereRule {
  std::function<double(double)> center_factor;
  std::function<double(double)> radius2;
};

// Worker-count policy: the SS_WORKERS environment variable wins, then the
// explicit request, then hardware concurrency. Results never depend on it.
int resolve_worker_count(int requested = 0);

// Monte Carlo coverage of proc at |theta| = theta_norm. Replication r uses
// Rng(seed, r), so estimates are identical for every worker split.
McEstimate mc_coverage(const regions::RegionProcedure& proc, double theta_norm,
                       std::uint64_t n_rep, const numkit::SeedSpec& seed,
                       int workers = 0);

// Paired coverage difference lhs - rhs with common random numbers.
McEstimate mc_coverage_diff(const regions::RegionProcedure& lhs,
                            const regions::RegionProcedure& rhs,
                            double theta_norm, std::uint64_t n_rep,
                            const numkit::SeedSpec& seed, int workers = 0);

SphereRule sphere_rule_of(const regions::RegionProcedure& proc);

// Deterministic coverage of a recentered-sphere rule: one-dimensional normal
// quadrature along theta, with the residual chi-square mass of the membership
// set accumulated exactly between bisected interval endpoints.
double quad_coverage(const SphereRule& rule, double theta_norm, int p,
                     const QuadratureSpec& spec = {});
double quad_coverage(const regions::RegionProcedure& proc, double theta_norm,
                     const QuadratureSpec& spec = {});

// Largest shrink constant whose recentered sphere still dominates: solves
// (p - 2) log((c^2 + sqrt(c^2 + a)) / a) = c sqrt(a) for a > 0.
double astar_solve(int p, double alpha);

struct DerivativeScan {
  std::vector<double> a_grid;
  std::vector<double> t_grid;
  std::vector<std::vector<double>> d_coverage_da;  // indexed [a][t]
};

// Central-difference derivative of quadrature coverage in the shrink
// constant, tabulated over a_grid x t_grid.
DerivativeScan coverage_derivative_scan(int p, double alpha,
                                        std::vector<double> a_grid,
                                        std::vector<double> t_grid,
                                        double step = 1e-3,
                                        const QuadratureSpec& spec = {});

// Squared radius w such that the sphere centered at the positive-part
// estimator with shrink constant a covers |theta| = theta_norm at exactly
// 1 - alpha.
double w_alpha_solve(double theta_norm, int p, double alpha, double a,
                     const QuadratureSpec& spec = {});

struct SamworthCoefficients {
  double w0 = 0.0;        // w_alpha(0)
  double w2 = 0.0;        // extrapolated second derivative at 0
  double diff_h = 0.0;    // difference quotient at step h
  double diff_half = 0.0; // difference quotient at step h/2
};

// Taylor coefficients of the exact-coverage radius function near the origin,
// from quadrature solves at 0, h/2 and h with one Richardson step (h = 0.1).
SamworthCoefficients samworth_coefficients(int p, double alpha, double a,
                                           const QuadratureSpec& spec = {});

enum class IntervalRule { naive, he };

// Coverage of a per-coordinate interval for theta_1 when theta_i are drawn
// from N(mu, tau2) and X | theta ~ N(theta, I).
McEstimate eb_bayes_coverage(IntervalRule rule, int p, double alpha,
                             double tau2, double mu, std::uint64_t n_rep,
                             const numkit::SeedSpec& seed, int workers = 0);

// Volume of the p-ball with the given squared radius.
double volume_sphere(double radius2, int p);

// Hit-or-miss volume of proc's region at a fixed observation: radial probes
// from the nominal center bound the region, then uniform sampling in that
// ball counts membership. Raises a diagnostic if a probe never exits the
// region within ten usual radii.
McEstimate volume_mc(const regions::RegionProcedure& proc,
                     const shrinkers::Observation& x, std::uint64_t n_rep,
                     const numkit::SeedSpec& seed, int workers = 0);

// Expected region volume at |theta| = theta_norm. Recentered spheres use the
// exact ball volume per draw; other procedures nest a hit-or-miss estimate
// with inner_rep samples per draw.
McEstimate expected_volume(const regions::RegionProcedure& proc,
                           double theta_norm, std::uint64_t n_rep,
                           const numkit::SeedSpec& seed, int workers = 0,
                           std::uint64_t inner_rep = 4096);

// Paired volume difference lhs - rhs with common draws; requires recentered
// spheres of equal dimension.
McEstimate expected_volume_diff(const regions::RegionProcedure& lhs,
                                const regions::RegionProcedure& rhs,
                                double theta_norm, std::uint64_t n_rep,
                                const numkit::SeedSpec& seed, int workers = 0);

// Coverage of sigma^2 by the two-piece variance interval when n observations
// are drawn from N(mu_over_sigma, 1) per replication; the cut points are
// solved once and reused across replications.
McEstimate cohen_coverage(int n, double mu_over_sigma, double alpha, double k,
                          double a_prime, std::uint64_t n_rep,
                          const numkit::SeedSpec& seed, int workers = 0);

enum class SelectionRule { naive, he_selected };

// Index of the rank-th smallest entry (rank 1 = minimum, rank p = maximum);
// ties resolve to the lowest index.
int rank_index(std::span<const double> x, int rank);

// Coverage of the selected coordinate theta_J where J is the rank-th order
// statistic of X, after theta ~ N(mu, tau2 I) and X | theta ~ N(theta, I).
// he_selected recenters with the shrinkage z-interval (p >= 3; otherwise it
// equals naive).
McEstimate selection_coverage(int p, double mu, double tau2, int rank,
                              SelectionRule rule, double alpha,
                              std::uint64_t n_rep,
                              const numkit::SeedSpec& seed, int workers = 0);

}  // namespace steincover::evaluate
