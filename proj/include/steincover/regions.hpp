#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "steincover/shrinkers.hpp"

namespace steincover::regions {

// Closed Euclidean ball written as center and squared radius.
struct SphericalRegion {
  std::vector<double> center;
  double radius2 = 0.0;

  bool contains(std::span<const double> theta) const;
};

// Interval for a scale parameter; both ends are nonnegative multiples of a
// sufficient statistic unless stated otherwise.
struct VarianceInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Membership predicate specialised to one parameter point, cheap enough for
// tight Monte Carlo loops over x.
using AcceptanceTest = std::function<bool(std::span<const double>)>;

// A confidence procedure for a p-variate normal mean, defined through its
// membership predicate. Procedures whose sets are spheres recentered along x
// also expose the center factor gamma(s) and squared radius rho2(s) as
// functions of s = |x|^2.
class RegionProcedure {
 public:
  virtual ~RegionProcedure() = default;

  const std::string& id() const { return id_; }
  int dim() const { return p_; }
  double alpha() const { return alpha_; }
  const std::vector<std::pair<std::string, double>>& params() const {
    return params_;
  }

  virtual bool member(std::span<const double> theta,
                      std::span<const double> x) const = 0;

  virtual bool is_recentered_sphere() const { return false; }
  virtual double center_factor(double s) const;
  virtual double radius2_at(double s) const;
  SphericalRegion sphere(std::span<const double> x) const;

  // A covered point suitable as the base point of radial scans.
  virtual std::vector<double> nominal_center(std::span<const double> x) const;

  // Membership test with all theta-dependent quantities precomputed.
  virtual AcceptanceTest acceptance_test(std::span<const double> theta) const;

 protected:
  RegionProcedure(std::string id, int p, double alpha,
                  std::vector<std::pair<std::string, double>> params);

  std::string id_;
  int p_;
  double alpha_;
  std::vector<std::pair<std::string, double>> params_;
};

enum class HpdForm { hpd, linear_loss };

struct TsengBrownB {
  double tau2 = 0.0;
};

struct TsengBrownTB {
  double a = 0.0;
  double b = 0.0;
};

std::unique_ptr<RegionProcedure> make_usual(int p, double alpha);
std::unique_ptr<RegionProcedure> make_pospart(int p, double alpha, double a);
std::unique_ptr<RegionProcedure> make_eb(int p, double alpha);
std::unique_ptr<RegionProcedure> make_samworth(int p, double alpha, double w0,
                                               double w2);
std::unique_ptr<RegionProcedure> make_hpd(int p, double alpha, double tau2,
                                          HpdForm form = HpdForm::hpd);
std::unique_ptr<RegionProcedure> make_faith(int p, double alpha, double a,
                                            double b);
std::unique_ptr<RegionProcedure> make_tseng_brown_B(int p, double alpha,
                                                    double tau2);
std::unique_ptr<RegionProcedure> make_tseng_brown_TB(int p, double alpha,
                                                     double a, double b);

// Squared radius of the empirical-Bayes sphere at s = |x|^2.
double eb_radius2(double s, int p, double alpha);

// Squared half-width of the shrinkage z-interval at s = |X|^2.
double he_radius2(double s, int p, double alpha);

SphericalRegion usual_region(const shrinkers::Observation& x, double alpha);
SphericalRegion pospart_region(const shrinkers::Observation& x, double alpha,
                               double a);
SphericalRegion eb_region(const shrinkers::Observation& x, double alpha);

// One-dimensional sphere around coordinate i of the positive-part estimator.
SphericalRegion he_interval(const shrinkers::Observation& x, int i,
                            double alpha);

SphericalRegion samworth_region(const shrinkers::Observation& x, double alpha,
                                double w0, double w2);
SphericalRegion hpd_oracle_region(const shrinkers::Observation& x, double tau2,
                                  double alpha, HpdForm form = HpdForm::hpd);

bool faith_member(std::span<const double> theta,
                  const shrinkers::Observation& x, double a, double b,
                  double alpha);
bool tseng_brown_member(std::span<const double> theta,
                        const shrinkers::Observation& x, const TsengBrownB& v,
                        double alpha);
bool tseng_brown_member(std::span<const double> theta,
                        const shrinkers::Observation& x, const TsengBrownTB& v,
                        double alpha);

// Chi-square cut points (a, b) of the shortest scale-interval rule: the
// interval covers with probability 1 - alpha and a^2 f(a) = b^2 f(b).
struct TateKlettCut {
  double a = 0.0;
  double b = 0.0;
};

TateKlettCut tate_klett_cut(int n, double alpha);

// The interval as multiples of the residual sum of squares: (1/b, 1/a).
VarianceInterval tate_klett_interval(int n, double alpha);

// Two-piece interval: the shortest interval when n*mean^2/ss > k, otherwise
// a same-length interval shifted toward zero via the cut point a_prime >= a.
VarianceInterval cohen_interval(const shrinkers::UnivariateSample& s,
                                double alpha, double k, double a_prime);

}  // namespace steincover::regions
