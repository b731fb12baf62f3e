#include "steincover/regions.hpp"

#include <cmath>
#include <stdexcept>

#include "steincover/numkit.hpp"

namespace steincover::regions {

namespace {

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double sq_dist(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double d = u[i] - v[i];
    s += d * d;
  }
  return s;
}

void check_dim(int p) {
  if (p < 1) throw std::invalid_argument("dimension must be at least 1");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1)");
}

double pospart_factor(double s, double a) {
  if (s <= a) return 0.0;
  return 1.0 - a / s;
}

double eb_radius2_at(double s, int p, double c2) {
  double m = shrinkers::eb_shrink_factor_M(s, p, c2);
  return m * (c2 - p * std::log(m));
}

double he_radius2_at(double s, int p, double c) {
  double m = shrinkers::he_shrink_factor_M(s, p);
  return m * (c * c - std::log(m));
}

}  // namespace

bool SphericalRegion::contains(std::span<const double> theta) const {
  if (theta.size() != center.size())
    throw std::invalid_argument("dimension mismatch");
  return sq_dist(theta, center) <= radius2;
}

RegionProcedure::RegionProcedure(
    std::string id, int p, double alpha,
    std::vector<std::pair<std::string, double>> params)
    : id_(std::move(id)), p_(p), alpha_(alpha), params_(std::move(params)) {
  check_dim(p);
  check_alpha(alpha);
}

double RegionProcedure::center_factor(double) const {
  throw std::logic_error(id_ + " has no recentered-sphere form");
}

double RegionProcedure::radius2_at(double) const {
  throw std::logic_error(id_ + " has no recentered-sphere form");
}

SphericalRegion RegionProcedure::sphere(std::span<const double> x) const {
  if (!is_recentered_sphere())
    throw std::logic_error(id_ + " has no recentered-sphere form");
  if (static_cast<int>(x.size()) != p_)
    throw std::invalid_argument("dimension mismatch");
  double s = sq_norm(x);
  double g = center_factor(s);
  SphericalRegion region;
  region.center.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) region.center[i] = g * x[i];
  region.radius2 = radius2_at(s);
  return region;
}

std::vector<double> RegionProcedure::nominal_center(
    std::span<const double> x) const {
  return sphere(x).center;
}

AcceptanceTest RegionProcedure::acceptance_test(
    std::span<const double> theta) const {
  std::vector<double> copy(theta.begin(), theta.end());
  return [this, copy = std::move(copy)](std::span<const double> x) {
    return member(copy, x);
  };
}

namespace {

// Sphere recentered along x: center gamma(s) x, squared radius rho2(s).
class RecenteredSphere final : public RegionProcedure {
 public:
  RecenteredSphere(std::string id, int p, double alpha,
                   std::vector<std::pair<std::string, double>> params,
                   std::function<double(double)> gamma,
                   std::function<double(double)> rho2)
      : RegionProcedure(std::move(id), p, alpha, std::move(params)),
        gamma_(std::move(gamma)),
        rho2_(std::move(rho2)) {}

  bool member(std::span<const double> theta,
              std::span<const double> x) const override {
    double s = sq_norm(x);
    double g = gamma_(s);
    double r2 = rho2_(s);
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = theta[i] - g * x[i];
      d2 += d * d;
    }
    return d2 <= r2;
  }

  bool is_recentered_sphere() const override { return true; }
  double center_factor(double s) const override { return gamma_(s); }
  double radius2_at(double s) const override { return rho2_(s); }

 private:
  std::function<double(double)> gamma_;
  std::function<double(double)> rho2_;
};

class FaithProcedure final : public RegionProcedure {
 public:
  FaithProcedure(int p, double alpha, double a, double b)
      : RegionProcedure("faith", p, alpha, {{"a", a}, {"b", b}}),
        a_(a),
        b_(b),
        c2_(numkit::chi2_quantile(1.0 - alpha, p)) {
    if (p + 2.0 * a <= 0.0)
      throw std::invalid_argument("faith set needs p + 2a > 0");
    if (b <= 0.0) throw std::invalid_argument("faith set needs b > 0");
  }

  bool member(std::span<const double> theta,
              std::span<const double> x) const override {
    double lhs = (c2_ - sq_dist(x, theta)) / (p_ + 2.0 * a_);
    double rhs =
        std::log(2.0 * b_ + sq_norm(theta)) - std::log(2.0 * b_ + sq_norm(x));
    return lhs >= rhs;
  }

  std::vector<double> nominal_center(std::span<const double> x) const override {
    return {x.begin(), x.end()};
  }

  AcceptanceTest acceptance_test(std::span<const double> theta) const override {
    std::vector<double> th(theta.begin(), theta.end());
    double log_theta_term = std::log(2.0 * b_ + sq_norm(theta));
    double denom = p_ + 2.0 * a_;
    double c2 = c2_;
    double b = b_;
    return [th = std::move(th), log_theta_term, denom, c2,
            b](std::span<const double> x) {
      double lhs = (c2 - sq_dist(x, th)) / denom;
      return lhs >= log_theta_term - std::log(2.0 * b + sq_norm(x));
    };
  }

 private:
  double a_;
  double b_;
  double c2_;
};

// Recentered noncentral chi-square sets: theta is covered when
// |x - m theta|^2 <= q(1 - alpha; p, lambda) with variant-specific shift
// multiplier m and noncentrality lambda, both functions of |theta|.
class TsengBrownProcedure final : public RegionProcedure {
 public:
  TsengBrownProcedure(int p, double alpha, double tau2)
      : RegionProcedure("tseng_brown_B", p, alpha, {{"tau2", tau2}}),
        variant_b_(true),
        tau2_(tau2) {
    if (tau2 <= 0.0) throw std::invalid_argument("tau2 must be positive");
  }

  TsengBrownProcedure(int p, double alpha, double a, double b)
      : RegionProcedure("tseng_brown_TB", p, alpha, {{"A", a}, {"B", b}}),
        variant_b_(false),
        shift_a_(a),
        shift_b_(b) {
    if (a < 0.0) throw std::invalid_argument("shift parameter A must be >= 0");
    if (b <= 0.0) throw std::invalid_argument("shift parameter B must be > 0");
  }

  bool member(std::span<const double> theta,
              std::span<const double> x) const override {
    auto [m, lambda] = shift(sq_norm(theta));
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = x[i] - m * theta[i];
      d2 += d * d;
    }
    // d2 <= quantile(1 - alpha) exactly when cdf(d2) <= 1 - alpha, and the
    // cdf is far cheaper than the quantile inside theta scans
    return numkit::noncentral_chi2_cdf(d2, p_, lambda) <= 1.0 - alpha_;
  }

  std::vector<double> nominal_center(std::span<const double> x) const override {
    double s = sq_norm(x);
    std::vector<double> center(x.size(), 0.0);
    if (s == 0.0) return center;
    double m;
    if (variant_b_) {
      m = tau2_ / (1.0 + tau2_);
    } else {
      m = 0.5;
      for (int it = 0; it < 200; ++it) {
        double g = shift_a_ + shift_b_ * m * m * s;
        m = g / (1.0 + g);
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) center[i] = m * x[i];
    return center;
  }

  AcceptanceTest acceptance_test(std::span<const double> theta) const override {
    auto [m, lambda] = shift(sq_norm(theta));
    double cut = numkit::noncentral_chi2_quantile(1.0 - alpha_, p_, lambda);
    std::vector<double> shifted(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) shifted[i] = m * theta[i];
    return [shifted = std::move(shifted), cut](std::span<const double> x) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - shifted[i];
        d2 += d * d;
      }
      return d2 <= cut;
    };
  }

 private:
  std::pair<double, double> shift(double theta_norm2) const {
    if (variant_b_) {
      double m = (1.0 + tau2_) / tau2_;
      return {m, theta_norm2 / (tau2_ * tau2_)};
    }
    if (theta_norm2 == 0.0) return {1.0, 0.0};
    double g = shift_a_ + shift_b_ * theta_norm2;
    if (g <= 0.0) throw std::domain_error("degenerate shift at this theta");
    return {1.0 + 1.0 / g, theta_norm2 / (g * g)};
  }

  bool variant_b_;
  double tau2_ = 0.0;
  double shift_a_ = 0.0;
  double shift_b_ = 0.0;
};

}  // namespace

std::unique_ptr<RegionProcedure> make_usual(int p, double alpha) {
  check_dim(p);
  check_alpha(alpha);
  double c2 = numkit::chi2_quantile(1.0 - alpha, p);
  return std::make_unique<RecenteredSphere>(
      "usual", p, alpha, std::vector<std::pair<std::string, double>>{},
      [](double) { return 1.0; }, [c2](double) { return c2; });
}

std::unique_ptr<RegionProcedure> make_pospart(int p, double alpha, double a) {
  check_dim(p);
  check_alpha(alpha);
  if (!(a > 0.0)) throw std::invalid_argument("shrink constant must be > 0");
  double c2 = numkit::chi2_quantile(1.0 - alpha, p);
  return std::make_unique<RecenteredSphere>(
      "pospart", p, alpha,
      std::vector<std::pair<std::string, double>>{{"a", a}},
      [a](double s) { return pospart_factor(s, a); },
      [c2](double) { return c2; });
}

std::unique_ptr<RegionProcedure> make_eb(int p, double alpha) {
  check_dim(p);
  check_alpha(alpha);
  if (p < 3) throw std::invalid_argument("dimension must be at least 3");
  double c2 = numkit::chi2_quantile(1.0 - alpha, p);
  if (c2 <= p)
    throw std::invalid_argument(
        "empirical-Bayes radius needs chi2_quantile(1 - alpha, p) > p");
  double a = p - 2.0;
  return std::make_unique<RecenteredSphere>(
      "eb", p, alpha, std::vector<std::pair<std::string, double>>{},
      [a](double s) { return pospart_factor(s, a); },
      [p, c2](double s) { return eb_radius2_at(s, p, c2); });
}

std::unique_ptr<RegionProcedure> make_samworth(int p, double alpha, double w0,
                                               double w2) {
  check_dim(p);
  check_alpha(alpha);
  if (p < 3) throw std::invalid_argument("dimension must be at least 3");
  if (!(w0 > 0.0)) throw std::invalid_argument("w0 must be positive");
  if (w2 < 0.0) throw std::invalid_argument("w2 must be nonnegative");
  double c2 = numkit::chi2_quantile(1.0 - alpha, p);
  double a = p - 2.0;
  return std::make_unique<RecenteredSphere>(
      "samworth", p, alpha,
      std::vector<std::pair<std::string, double>>{{"w0", w0}, {"w2", w2}},
      [a](double s) { return pospart_factor(s, a); },
      [w0, w2, c2](double s) { return std::min(w0 + 0.5 * w2 * s, c2); });
}

std::unique_ptr<RegionProcedure> make_hpd(int p, double alpha, double tau2,
                                          HpdForm form) {
  check_dim(p);
  check_alpha(alpha);
  if (!(tau2 > 0.0)) throw std::invalid_argument("tau2 must be positive");
  double c2 = numkit::chi2_quantile(1.0 - alpha, p);
  double m = tau2 / (1.0 + tau2);
  double r2 =
      form == HpdForm::hpd ? c2 * m : m * (c2 - p * std::log(m));
  return std::make_unique<RecenteredSphere>(
      form == HpdForm::hpd ? "hpd" : "hpd_linear", p, alpha,
      std::vector<std::pair<std::string, double>>{{"tau2", tau2}},
      [m](double) { return m; }, [r2](double) { return r2; });
}

std::unique_ptr<RegionProcedure> make_faith(int p, double alpha, double a,
                                            double b) {
  return std::make_unique<FaithProcedure>(p, alpha, a, b);
}

std::unique_ptr<RegionProcedure> make_tseng_brown_B(int p, double alpha,
                                                    double tau2) {
  return std::make_unique<TsengBrownProcedure>(p, alpha, tau2);
}

std::unique_ptr<RegionProcedure> make_tseng_brown_TB(int p, double alpha,
                                                     double a, double b) {
  return std::make_unique<TsengBrownProcedure>(p, alpha, a, b);
}

double eb_radius2(double s, int p, double alpha) {
  check_alpha(alpha);
  if (p < 3) throw std::invalid_argument("dimension must be at least 3");
  double c2 = numkit::chi2_quantile(1.0 - alpha, p);
  if (c2 <= p)
    throw std::invalid_argument(
        "empirical-Bayes radius needs chi2_quantile(1 - alpha, p) > p");
  return eb_radius2_at(s, p, c2);
}

double he_radius2(double s, int p, double alpha) {
  check_alpha(alpha);
  if (p < 3) throw std::invalid_argument("dimension must be at least 3");
  double c = numkit::normal_two_sided_cutoff(alpha);
  if (c <= 1.0)
    throw std::invalid_argument(
        "shrinkage z-interval needs a two-sided cutoff above 1");
  return he_radius2_at(s, p, c);
}

SphericalRegion usual_region(const shrinkers::Observation& x, double alpha) {
  return make_usual(x.dim(), alpha)->sphere(x.x);
}

SphericalRegion pospart_region(const shrinkers::Observation& x, double alpha,
                               double a) {
  return make_pospart(x.dim(), alpha, a)->sphere(x.x);
}

SphericalRegion eb_region(const shrinkers::Observation& x, double alpha) {
  return make_eb(x.dim(), alpha)->sphere(x.x);
}

SphericalRegion he_interval(const shrinkers::Observation& x, int i,
                            double alpha) {
  int p = x.dim();
  if (i < 0 || i >= p) throw std::invalid_argument("coordinate out of range");
  double s = 0.0;
  for (double v : x.x) s += v * v;
  SphericalRegion region;
  region.center = {pospart_factor(s, p - 2.0) * x.x[i]};
  region.radius2 = he_radius2(s, p, alpha);
  return region;
}

SphericalRegion samworth_region(const shrinkers::Observation& x, double alpha,
                                double w0, double w2) {
  return make_samworth(x.dim(), alpha, w0, w2)->sphere(x.x);
}

SphericalRegion hpd_oracle_region(const shrinkers::Observation& x, double tau2,
                                  double alpha, HpdForm form) {
  return make_hpd(x.dim(), alpha, tau2, form)->sphere(x.x);
}

bool faith_member(std::span<const double> theta,
                  const shrinkers::Observation& x, double a, double b,
                  double alpha) {
  return FaithProcedure(x.dim(), alpha, a, b).member(theta, x.x);
}

bool tseng_brown_member(std::span<const double> theta,
                        const shrinkers::Observation& x, const TsengBrownB& v,
                        double alpha) {
  return TsengBrownProcedure(x.dim(), alpha, v.tau2).member(theta, x.x);
}

bool tseng_brown_member(std::span<const double> theta,
                        const shrinkers::Observation& x, const TsengBrownTB& v,
                        double alpha) {
  return TsengBrownProcedure(x.dim(), alpha, v.a, v.b).member(theta, x.x);
}

TateKlettCut tate_klett_cut(int n, double alpha) {
  if (n < 2) throw std::invalid_argument("need n >= 2 observations");
  check_alpha(alpha);
  double nu = n - 1.0;

  auto upper = [&](double a) {
    return numkit::chi2_quantile(numkit::chi2_cdf(a, nu) + 1.0 - alpha, nu);
  };
  // side(a) > 0 when a lies above the solution of a^2 f(a) = b^2 f(b)
  auto side = [&](double a) {
    double q = numkit::chi2_cdf(a, nu) + 1.0 - alpha;
    if (q >= 1.0) return 1.0;
    double b = numkit::chi2_quantile(q, nu);
    return a * a * numkit::chi2_pdf(a, nu) - b * b * numkit::chi2_pdf(b, nu);
  };

  double amax = numkit::chi2_quantile(alpha, nu);
  double lo = 0.0;
  double hi = amax;
  if (!(side(hi * (1.0 - 1e-12)) > 0.0))
    throw std::runtime_error("cut-point bracket failed");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (side(mid) > 0.0 ? hi : lo) = mid;
  }
  double a = 0.5 * (lo + hi);
  double b = upper(a);
  if (std::fabs(a * a * numkit::chi2_pdf(a, nu) -
                b * b * numkit::chi2_pdf(b, nu)) > 1e-10)
    throw std::runtime_error("cut-point solve did not converge");
  return {a, b};
}

VarianceInterval tate_klett_interval(int n, double alpha) {
  auto cut = tate_klett_cut(n, alpha);
  return {1.0 / cut.b, 1.0 / cut.a};
}

VarianceInterval cohen_interval(const shrinkers::UnivariateSample& s,
                                double alpha, double k, double a_prime) {
  if (s.n < 2) throw std::invalid_argument("need n >= 2 observations");
  if (!(s.ss > 0.0))
    throw std::invalid_argument("sum of squares must be positive");
  if (!(k > 0.0)) throw std::invalid_argument("threshold k must be positive");
  auto cut = tate_klett_cut(s.n, alpha);
  if (a_prime < cut.a)
    throw std::invalid_argument("a_prime must be at least the lower cut point");
  double inv_b_prime = 1.0 / a_prime - (1.0 / cut.a - 1.0 / cut.b);
  if (inv_b_prime <= 0.0)
    throw std::invalid_argument("a_prime too large: shifted piece degenerates");
  double stat = s.n * s.mean * s.mean / s.ss;
  if (stat > k) return {s.ss / cut.b, s.ss / cut.a};
  return {s.ss * inv_b_prime, s.ss / a_prime};
}

}  // namespace steincover::regions
