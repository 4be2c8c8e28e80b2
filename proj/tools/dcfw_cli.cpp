// dcfw: solve synthetic or MovieLens-format problems, generate data, run verification suites.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcfw/checks.hpp"
#include "dcfw/experiment.hpp"

namespace {

struct SolveFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string variant;
  std::string trace;
  std::string summary;
  std::optional<double> time_budget;
  std::optional<int> max_iter;
  std::optional<double> sigma;
  std::optional<double> mu;
  std::string data;
  bool no_timing = false;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& f, bool with_data) {
  cmd->add_option("--config", f.config, "key=value config file (flags override it)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "seed for data generation and the train/test split");
  cmd->add_option("--variant", f.variant, "fw or afw")->check(CLI::IsMember({"fw", "afw"}));
  cmd->add_option("--trace", f.trace, "write the per-iteration trace CSV here");
  cmd->add_option("--summary", f.summary, "also write the key=value summary here");
  cmd->add_option("--time-budget", f.time_budget, "wall-clock budget in seconds");
  cmd->add_option("--max-iter", f.max_iter, "iteration cap (default 40000)");
  cmd->add_option("--sigma", f.sigma, "level sigma of the constraint");
  cmd->add_option("--mu", f.mu, "weight mu of the subtracted norm (default 0.5)");
  if (with_data) cmd->add_option("--data", f.data, "ratings file (UserID::MovieID::Rating::Timestamp)");
  cmd->add_flag("--no-timing", f.no_timing, "write zero timings so reruns produce identical files");
}

int run_solve(dcfw::ProblemKind kind, const SolveFlags& f) {
  dcfw::ExperimentConfig cfg;
  cfg.problem = kind;
  if (!f.config.empty()) cfg = dcfw::load_experiment_config(f.config, cfg);
  cfg.problem = kind;
  if (f.seed) cfg.seed = *f.seed;
  if (!f.variant.empty()) cfg.solver.variant = dcfw::parse_variant(f.variant);
  if (!f.trace.empty()) cfg.trace_path = f.trace;
  if (!f.summary.empty()) cfg.summary_path = f.summary;
  if (f.time_budget) cfg.solver.time_budget_s = *f.time_budget;
  if (f.max_iter) cfg.solver.max_iter = *f.max_iter;
  if (f.sigma) cfg.sigma = *f.sigma;
  if (f.mu) cfg.mu = *f.mu;
  if (!f.data.empty()) cfg.data_file = f.data;
  if (f.no_timing) cfg.timing = false;

  const dcfw::ExperimentResult r = dcfw::run_experiment(cfg);
  std::cout << dcfw::format_summary(r.summary);
  return 0;
}

int run_verify(const std::string& suite, const std::string& summary_path) {
  const auto start = std::chrono::steady_clock::now();
  const auto results = dcfw::verify::run_suite(suite);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  bool all = true;
  nlohmann::json report;
  report["suite"] = suite;
  for (const auto& r : results) {
    all = all && r.passed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " [" << r.seconds << " s]\n";
    report["checks"].push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
  }
  report["passed"] = all;
  report["seconds"] = total;
  std::cout << (all ? "all checks passed" : "some checks FAILED") << " (" << total << " s)\n";
  if (total > 300.0) std::cerr << "warning: verification took longer than 5 minutes\n";

  if (!summary_path.empty()) {
    std::ofstream out(summary_path);
    if (!out) throw dcfw::Error("cannot open summary file '" + summary_path + "'");
    out << report.dump(2) << '\n';
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frank-Wolfe solvers for smooth objectives over DC level sets"};
  app.require_subcommand(1);

  SolveFlags cs_flags, gl_flags, mc_flags;
  auto* cs = app.add_subcommand("solve-cs", "least squares over ||x||_1 - mu||x|| <= sigma (synthetic data)");
  add_solve_flags(cs, cs_flags, false);
  auto* gl = app.add_subcommand("solve-gl", "least squares over a group-l1 minus mu||x|| level set (synthetic data)");
  add_solve_flags(gl, gl_flags, false);
  auto* mc = app.add_subcommand("solve-mc",
                                "matrix completion over ||X||_* - mu||X||_F <= sigma; ratings are split "
                                "floor(train_fraction * count) for training, the rest for testing");
  add_solve_flags(mc, mc_flags, true);

  std::string gen_out;
  dcfw::Index rows = 200, cols = 150, rank = 5;
  double fraction = 0.3, noise = 0.01;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen-data", "write a synthetic low-rank ratings file");
  gen->add_option("--out", gen_out, "output path")->required();
  gen->add_option("--rows", rows, "users (default 200)");
  gen->add_option("--cols", cols, "items (default 150)");
  gen->add_option("--rank", rank, "rank of the ground truth (default 5)");
  gen->add_option("--obs-fraction", fraction, "fraction of entries observed (default 0.3)");
  gen->add_option("--noise", noise, "standard deviation of the added noise (default 0.01)");
  gen->add_option("--seed", gen_seed, "seed (default 1)");

  std::string suite = "all";
  std::string verify_summary = "verify_summary.json";
  auto* ver = app.add_subcommand("verify", "run the verification suites");
  ver->add_option("suite", suite, "oracles, solver or all")->check(CLI::IsMember({"oracles", "solver", "all"}));
  ver->add_option("--summary", verify_summary, "JSON summary path (empty to skip)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cs) return run_solve(dcfw::ProblemKind::CS, cs_flags);
    if (*gl) return run_solve(dcfw::ProblemKind::GL, gl_flags);
    if (*mc) return run_solve(dcfw::ProblemKind::MC, mc_flags);
    if (*gen) {
      const dcfw::SyntheticMC s = dcfw::gen_synthetic_mc(rows, cols, rank, fraction, noise, gen_seed);
      std::ofstream out(gen_out, std::ios::binary);
      if (!out) throw dcfw::Error("cannot open '" + gen_out + "'");
      dcfw::write_ratings(out, s.data);
      std::cout << "ratings=" << s.data.size() << "\nrows=" << rows << "\ncols=" << cols
                << "\ntruth_nuclear_norm=" << dcfw::format_number(s.truth_nuclear) << '\n';
      return 0;
    }
    if (*ver) return run_verify(suite, verify_summary);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
