#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "steincover/evaluate.hpp"
#include "steincover/numkit.hpp"
#include "steincover/plan.hpp"
#include "steincover/regions.hpp"
#include "steincover/runner.hpp"

namespace {

void print_kv(const char* key, double value) {
  std::printf("%s = %.17g\n", key, value);
}

int cmd_run(const std::string& path, int workers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "cannot read '%s'\n", path.c_str());
    return 2;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  auto res = steincover::plan::parse_plan_text(ss.str());
  for (const auto& e : res.errors)
    std::fprintf(stderr, "%s:%d: %s\n", path.c_str(), e.line,
                 e.message.c_str());
  if (!res.errors.empty()) return 2;
  if (res.plans.empty()) {
    std::fprintf(stderr, "%s: no plans found\n", path.c_str());
    return 2;
  }
  return steincover::runner::run_plans(res.plans, workers);
}

int cmd_astar(int p, double alpha) {
  double a = steincover::evaluate::astar_solve(p, alpha);
  double c2 = steincover::numkit::chi2_quantile(1.0 - alpha, p);
  double c = std::sqrt(c2);
  double residual =
      (p - 2) * std::log((c2 + std::sqrt(c2 + a)) / a) - c * std::sqrt(a);
  print_kv("a_star", a);
  print_kv("residual", residual);
  print_kv("a_star_over_p_minus_2", a / (p - 2));
  return 0;
}

int cmd_walpha(int p, double alpha, double a, double t, bool coeffs) {
  print_kv("w_alpha", steincover::evaluate::w_alpha_solve(t, p, alpha, a));
  if (coeffs) {
    auto co = steincover::evaluate::samworth_coefficients(p, alpha, a);
    print_kv("w0", co.w0);
    print_kv("w2", co.w2);
    print_kv("diff_h", co.diff_h);
    print_kv("diff_half", co.diff_half);
  }
  return 0;
}

int cmd_tateklett(int n, double alpha) {
  auto cut = steincover::regions::tate_klett_cut(n, alpha);
  print_kv("a", cut.a);
  print_kv("b", cut.b);
  print_kv("lo_multiplier", 1.0 / cut.b);
  print_kv("hi_multiplier", 1.0 / cut.a);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coverage experiments for recentered confidence sets"};
  app.require_subcommand(1);

  std::string plan_path;
  int workers = 0;
  auto* run = app.add_subcommand("run", "execute every plan in a plan file");
  run->add_option("planfile", plan_path, "plan file to execute")->required();
  run->add_option("--workers", workers,
                  "worker threads (0 = SS_WORKERS or hardware)");

  int astar_p = 0;
  double astar_alpha = 0.0;
  auto* astar =
      app.add_subcommand("astar", "largest shrink constant that dominates");
  astar->add_option("--p", astar_p, "dimension")->required();
  astar->add_option("--alpha", astar_alpha, "level")->required();

  int w_p = 0;
  double w_alpha = 0.0, w_a = 0.0, w_t = 0.0;
  bool w_coeffs = false;
  auto* walpha = app.add_subcommand(
      "walpha", "squared radius with exact coverage at |theta| = t");
  walpha->add_option("--p", w_p, "dimension")->required();
  walpha->add_option("--alpha", w_alpha, "level")->required();
  walpha->add_option("--a", w_a, "shrink constant")->required();
  walpha->add_option("--t", w_t, "center norm")->required();
  walpha->add_flag("--coeffs", w_coeffs,
                   "also print the Taylor coefficients at the origin");

  int tk_n = 0;
  double tk_alpha = 0.0;
  auto* tk = app.add_subcommand(
      "tateklett", "cut points of the shortest variance interval");
  tk->add_option("--n", tk_n, "sample size")->required();
  tk->add_option("--alpha", tk_alpha, "level")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(plan_path, workers);
    if (*astar) return cmd_astar(astar_p, astar_alpha);
    if (*walpha) return cmd_walpha(w_p, w_alpha, w_a, w_t, w_coeffs);
    if (*tk) return cmd_tateklett(tk_n, tk_alpha);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
