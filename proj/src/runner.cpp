#include "steincover/runner.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "steincover/evaluate.hpp"
#include "steincover/numkit.hpp"
#include "steincover/regions.hpp"
#include "steincover/selection.hpp"
#include "steincover/svg.hpp"

namespace steincover::runner {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kHeader =
    "plan_id,procedure,p,alpha,param_json,theta_norm,method,coverage,"
    "std_error,n_rep,seed,volume_ratio";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += "\"";
  return out;
}

double param_or(const plan::SimulationPlan& pl, const char* key,
                double fallback) {
  auto it = pl.params.find(key);
  return it == pl.params.end() ? fallback : it->second;
}

// Everything a finished plan produces; files are written only after the
// whole plan has run so a failure leaves nothing behind.
struct PlanArtifacts {
  std::string csv_text;
  std::vector<svg::CoverageCurve> curves;
  std::string x_label;
  double reference = 0.0;
};

struct RowWriter {
  std::ostringstream out;
  std::string prefix;  // plan_id,procedure,p,alpha,"param_json"

  void begin(const plan::SimulationPlan& pl, const std::string& p_cell,
             const json& params) {
    out << kHeader << "\n";
    prefix = pl.id + "," + pl.procedure + "," + p_cell + "," +
             fmt17(pl.alpha) + "," + csv_quote(params.dump());
  }

  void row(const std::string& theta_norm, const std::string& method,
           const std::string& coverage, const std::string& std_error,
           const std::string& n_rep, const std::string& seed,
           const std::string& volume_ratio) {
    out << prefix << "," << theta_norm << "," << method << "," << coverage
        << "," << std_error << "," << n_rep << "," << seed << ","
        << volume_ratio << "\n";
  }
};

std::unique_ptr<regions::RegionProcedure> make_region(
    const plan::SimulationPlan& pl, json& params) {
  const auto& proc = pl.procedure;
  if (proc == "usual") return regions::make_usual(pl.p, pl.alpha);
  if (proc == "pospart") {
    double a = param_or(pl, "a", pl.p - 2.0);
    params["a"] = a;
    return regions::make_pospart(pl.p, pl.alpha, a);
  }
  if (proc == "eb") return regions::make_eb(pl.p, pl.alpha);
  if (proc == "samworth") {
    double a = param_or(pl, "a", pl.p - 2.0);
    auto co = evaluate::samworth_coefficients(pl.p, pl.alpha, a);
    params["a"] = a;
    params["w0"] = co.w0;
    params["w2"] = co.w2;
    return regions::make_samworth(pl.p, pl.alpha, co.w0, co.w2);
  }
  if (proc == "faith") {
    double a = pl.params.at("a"), b = pl.params.at("b");
    params["a"] = a;
    params["b"] = b;
    return regions::make_faith(pl.p, pl.alpha, a, b);
  }
  if (proc == "tseng_brown_B") {
    double tau2 = pl.params.at("tau2");
    params["tau2"] = tau2;
    return regions::make_tseng_brown_B(pl.p, pl.alpha, tau2);
  }
  if (proc == "tseng_brown_TB") {
    double a = pl.params.at("A"), b = pl.params.at("B");
    params["A"] = a;
    params["B"] = b;
    return regions::make_tseng_brown_TB(pl.p, pl.alpha, a, b);
  }
  if (proc == "hpd" || proc == "hpd_linear") {
    double tau2 = pl.params.at("tau2");
    params["tau2"] = tau2;
    return regions::make_hpd(pl.p, pl.alpha, tau2,
                             proc == "hpd" ? regions::HpdForm::hpd
                                           : regions::HpdForm::linear_loss);
  }
  throw std::logic_error("no region constructor for '" + proc + "'");
}

struct CoverAcc {
  std::uint64_t hits = 0;
  double ratio_sum = 0.0;
};

struct CoverCell {
  evaluate::McEstimate est;
  bool has_ratio = false;
  double ratio = 0.0;
};

// Same draw order and estimate arithmetic as evaluate::mc_coverage, plus the
// per-draw relative sphere volume (radius2 / chi2 cutoff)^(p/2) when the rule
// is a recentered sphere.
CoverCell coverage_cell(const regions::RegionProcedure& proc,
                        double theta_norm, std::uint64_t n_rep,
                        const numkit::SeedSpec& seed, int workers) {
  int p = proc.dim();
  std::vector<double> theta(p, 0.0);
  theta[0] = theta_norm;
  auto test = proc.acceptance_test(theta);
  bool sphere = proc.is_recentered_sphere();
  double c2 = numkit::chi2_quantile(1.0 - proc.alpha(), p);
  double half_p = 0.5 * p;
  auto accs = detail::run_blocked<CoverAcc>(
      n_rep, evaluate::resolve_worker_count(workers),
      [&](std::uint64_t rep, CoverAcc& acc) {
        thread_local std::vector<double> x;
        x.resize(theta.size());
        numkit::Rng rng(seed, rep);
        for (std::size_t i = 0; i < x.size(); ++i)
          x[i] = theta[i] + rng.normal();
        if (test(x)) ++acc.hits;
        if (sphere) {
          double s = 0.0;
          for (double v : x) s += v * v;
          acc.ratio_sum += std::pow(proc.radius2_at(s) / c2, half_p);
        }
      });
  std::uint64_t hits = 0;
  double ratio_sum = 0.0;
  for (const auto& a : accs) {
    hits += a.hits;
    ratio_sum += a.ratio_sum;
  }
  double n = static_cast<double>(n_rep);
  double est = static_cast<double>(hits) / n;
  CoverCell cell;
  cell.est = {est, std::sqrt(std::max(0.0, est * (1.0 - est)) / n), n_rep};
  cell.has_ratio = sphere;
  cell.ratio = ratio_sum / n;
  return cell;
}

std::string seed_cell(std::uint64_t base, std::uint64_t stream) {
  return std::to_string(base) + ":" + std::to_string(stream);
}

PlanArtifacts run_region_plan(const plan::SimulationPlan& pl, int workers) {
  json params = json::object();
  auto proc = make_region(pl, params);
  bool want_mc = pl.engine != plan::Engine::quadrature;
  bool want_quad = pl.engine != plan::Engine::mc;

  PlanArtifacts art;
  art.x_label = "|theta|";
  art.reference = 1.0 - pl.alpha;
  svg::CoverageCurve mc_curve{"mc", {}};
  svg::CoverageCurve quad_curve{"quadrature", {}};

  RowWriter w;
  w.begin(pl, std::to_string(pl.p), params);
  for (std::size_t i = 0; i < pl.theta_grid.size(); ++i) {
    double t = pl.theta_grid[i];
    if (want_mc) {
      auto cell = coverage_cell(*proc, t, pl.n_rep,
                                {pl.base_seed, static_cast<std::uint64_t>(i)},
                                workers);
      w.row(fmt17(t), "mc", fmt17(cell.est.estimate),
            fmt17(cell.est.std_error), std::to_string(pl.n_rep),
            seed_cell(pl.base_seed, i),
            cell.has_ratio ? fmt17(cell.ratio) : "");
      mc_curve.points.push_back(
          {t, cell.est.estimate, 3.0 * cell.est.std_error});
    }
    if (want_quad) {
      double cov = evaluate::quad_coverage(*proc, t);
      w.row(fmt17(t), "quadrature", fmt17(cov), "", "", "", "");
      quad_curve.points.push_back({t, cov, 0.0});
    }
  }
  art.csv_text = w.out.str();
  if (want_mc) art.curves.push_back(std::move(mc_curve));
  if (want_quad) art.curves.push_back(std::move(quad_curve));
  return art;
}

PlanArtifacts run_he_plan(const plan::SimulationPlan& pl, int workers) {
  double mu = param_or(pl, "mu", 0.0);
  json params = json::object();
  params["mu"] = mu;

  PlanArtifacts art;
  art.x_label = "tau2";
  art.reference = 1.0 - pl.alpha;
  svg::CoverageCurve curve{"mc", {}};

  RowWriter w;
  w.begin(pl, std::to_string(pl.p), params);
  for (std::size_t i = 0; i < pl.theta_grid.size(); ++i) {
    double tau2 = pl.theta_grid[i];
    auto est = evaluate::eb_bayes_coverage(
        evaluate::IntervalRule::he, pl.p, pl.alpha, tau2, mu, pl.n_rep,
        {pl.base_seed, static_cast<std::uint64_t>(i)}, workers);
    w.row(fmt17(tau2), "mc", fmt17(est.estimate), fmt17(est.std_error),
          std::to_string(pl.n_rep), seed_cell(pl.base_seed, i), "");
    curve.points.push_back({tau2, est.estimate, 3.0 * est.std_error});
  }
  art.csv_text = w.out.str();
  art.curves.push_back(std::move(curve));
  return art;
}

PlanArtifacts run_cohen_plan(const plan::SimulationPlan& pl, int workers) {
  int n = static_cast<int>(pl.params.at("n"));
  double k = pl.params.at("k");
  double a_prime =
      param_or(pl, "a_prime", 1.1 * regions::tate_klett_cut(n, pl.alpha).a);
  json params = json::object();
  params["a_prime"] = a_prime;
  params["k"] = k;
  params["n"] = n;

  PlanArtifacts art;
  art.x_label = "mu/sigma";
  art.reference = 1.0 - pl.alpha;
  svg::CoverageCurve curve{"mc", {}};

  RowWriter w;
  w.begin(pl, "1", params);
  for (std::size_t i = 0; i < pl.theta_grid.size(); ++i) {
    double ratio = pl.theta_grid[i];
    auto est = evaluate::cohen_coverage(
        n, ratio, pl.alpha, k, a_prime, pl.n_rep,
        {pl.base_seed, static_cast<std::uint64_t>(i)}, workers);
    w.row(fmt17(ratio), "mc", fmt17(est.estimate), fmt17(est.std_error),
          std::to_string(pl.n_rep), seed_cell(pl.base_seed, i), "");
    curve.points.push_back({ratio, est.estimate, 3.0 * est.std_error});
  }
  art.csv_text = w.out.str();
  art.curves.push_back(std::move(curve));
  return art;
}

PlanArtifacts run_selection_plan(const plan::SimulationPlan& pl, int workers) {
  selection::SelectionScenario sc;
  sc.p = pl.p;
  sc.mu = param_or(pl, "mu", 0.0);
  sc.tau2 = pl.params.at("tau2");
  sc.ranks = pl.ranks;
  sc.alpha = pl.alpha;
  sc.bonferroni = pl.bonferroni;
  auto rule = pl.procedure == "selection_he"
                  ? evaluate::SelectionRule::he_selected
                  : evaluate::SelectionRule::naive;
  auto res = selection::run_scenario(sc, rule, pl.n_rep, {pl.base_seed, 0},
                                     workers);

  json params = json::object();
  params["bonferroni"] = sc.bonferroni;
  params["mu"] = sc.mu;
  params["per_rank_alpha"] = res.per_rank_alpha;
  params["tau2"] = sc.tau2;

  PlanArtifacts art;
  art.x_label = "rank";
  art.reference = 1.0 - pl.alpha;
  svg::CoverageCurve rank_curve{"rank", {}};
  svg::CoverageCurve rect_curve{"rectangle", {}};

  RowWriter w;
  w.begin(pl, std::to_string(pl.p), params);
  for (const auto& rc : res.per_rank) {
    w.row(std::to_string(rc.rank), "rank", fmt17(rc.coverage.estimate),
          fmt17(rc.coverage.std_error), std::to_string(pl.n_rep),
          seed_cell(pl.base_seed, 0), "");
    rank_curve.points.push_back(
        {static_cast<double>(rc.rank), rc.coverage.estimate,
         3.0 * rc.coverage.std_error});
  }
  w.row("0", "rectangle", fmt17(res.simultaneous.estimate),
        fmt17(res.simultaneous.std_error), std::to_string(pl.n_rep),
        seed_cell(pl.base_seed, 0), "");
  rect_curve.points.push_back(
      {0.0, res.simultaneous.estimate, 3.0 * res.simultaneous.std_error});

  art.csv_text = w.out.str();
  art.curves.push_back(std::move(rank_curve));
  art.curves.push_back(std::move(rect_curve));
  return art;
}

PlanArtifacts execute(const plan::SimulationPlan& pl, int workers) {
  if (pl.procedure == "he") return run_he_plan(pl, workers);
  if (pl.procedure == "cohen") return run_cohen_plan(pl, workers);
  if (pl.procedure == "selection_naive" || pl.procedure == "selection_he")
    return run_selection_plan(pl, workers);
  return run_region_plan(pl, workers);
}

void write_file(const std::string& path, const std::string& text) {
  fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

}  // namespace

int run_plans(const std::vector<plan::SimulationPlan>& plans, int workers) {
  int status = 0;
  for (const auto& pl : plans) {
    try {
      PlanArtifacts art = execute(pl, workers);
      write_file(pl.csv_path, art.csv_text);
      if (!pl.svg_path.empty()) {
        fs::path parent = fs::path(pl.svg_path).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
        svg::render_svg(art.curves, art.reference, art.x_label, "coverage",
                        pl.svg_path);
      }
    } catch (const std::exception& e) {
      std::fprintf(stderr, "plan '%s' failed: %s\n", pl.id.c_str(), e.what());
      std::error_code ec;
      if (!pl.csv_path.empty()) fs::remove(pl.csv_path, ec);
      if (!pl.svg_path.empty()) fs::remove(pl.svg_path, ec);
      status = 1;
    }
  }
  return status;
}

}  // namespace steincover::runner
