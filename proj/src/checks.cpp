#include "dcfw/checks.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

namespace dcfw::verify {

namespace {

using Clock = std::chrono::steady_clock;
using Eigen::MatrixXd;
using Eigen::VectorXd;

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  Clock::time_point start_ = Clock::now();
};

CheckResult finish(std::string name, bool passed, const std::string& detail, const Timer& t) {
  return CheckResult{std::move(name), passed, detail, t.seconds()};
}

Index vector_dim(QueryFamily f, Rng& rng) {
  if (f == QueryFamily::Group) return 2 + static_cast<Index>(rng.below(2));
  return 1 + static_cast<Index>(rng.below(3));
}

NuclearOracleOptions certified_nuclear() {
  NuclearOracleOptions o;
  o.eig.method = linalg::EigenMethod::Dense;
  o.want_certificate = true;
  return o;
}

LOQuery query_for(QueryFamily f, Rng& rng, Index max_vector_dim) {
  if (f == QueryFamily::Nuclear) {
    const Index m = 1 + static_cast<Index>(rng.below(8));
    const Index n = 1 + static_cast<Index>(rng.below(8));
    return random_query(f, m, rng, n);
  }
  const Index lo = f == QueryFamily::Group ? 2 : 1;
  const Index n = lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_vector_dim - lo + 1)));
  return random_query(f, n, rng);
}

}  // namespace

CheckResult check_oracle_grid(QueryFamily family, int queries, std::size_t resolution, double tol,
                              std::uint64_t seed) {
  Timer t;
  Rng rng(seed);
  double worst = 0.0;
  int failures = 0;
  for (int k = 0; k < queries; ++k) {
    const LOQuery q = random_query(family, vector_dim(family, rng), rng);
    const LOOutput out = linear_oracle(q);
    const LOReference ref = grid_lo_reference(q, resolution);
    const double err = std::abs(out.objective_value - ref.value);
    worst = std::max(worst, err);
    if (!(err <= tol)) ++failures;
  }
  std::ostringstream os;
  os << queries << " queries, resolution " << resolution << ", max |closed - grid| = " << worst
     << " (tol " << tol << "), failures " << failures;
  return finish("oracle-grid-" + family_name(family), failures == 0, os.str(), t);
}

CheckResult check_oracle_nuclear(int queries, Index max_dim, double rel_tol, std::uint64_t seed) {
  Timer t;
  Rng rng(seed);
  double worst = 0.0;
  int failures = 0;
  for (int k = 0; k < queries; ++k) {
    const Index m = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_dim)));
    const Index n = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_dim)));
    const LOQuery q = random_query(QueryFamily::Nuclear, m, rng, n);
    const LOOutput out = linear_oracle(q);
    const LOReference ref = nuclear_lo_reference(q);
    const double err = std::abs(out.objective_value - ref.value) / std::max(std::abs(ref.value), 1e-300);
    worst = std::max(worst, err);
    if (!(err <= rel_tol)) ++failures;
  }
  std::ostringstream os;
  os << queries << " queries, m,n <= " << max_dim << ", max relative error " << worst << " (tol " << rel_tol
     << "), failures " << failures;
  return finish("oracle-dense-pencil-nuclear", failures == 0, os.str(), t);
}

CheckResult check_oracle_sampled(QueryFamily family, int queries, std::size_t samples, double band,
                                 std::uint64_t seed) {
  Timer t;
  Rng rng(seed);
  int failures = 0;
  double worst_band = 0.0;
  for (int k = 0; k < queries; ++k) {
    const LOQuery q = query_for(family, rng, 12);
    const LOOutput out = linear_oracle(q);
    const double sampled = sampled_lo_reference(q, samples, seed + static_cast<std::uint64_t>(k));
    const double scale = std::max(1.0, std::abs(out.objective_value));
    const bool below = out.objective_value <= sampled + 1e-9 * scale;
    worst_band = std::max(worst_band, (sampled - out.objective_value) / scale);
    if (!below) ++failures;
  }
  std::ostringstream os;
  os << queries << " queries, " << samples << " samples each; closed form never above the samples: "
     << (failures == 0 ? "yes" : "no") << "; largest relative band " << worst_band;
  const bool ok = failures == 0 && worst_band <= band;
  return finish("oracle-sampled-" + family_name(family), ok, os.str(), t);
}

CheckResult check_kkt(QueryFamily family, int queries, double tol, double perturbation, std::uint64_t seed) {
  Timer t;
  Rng rng(seed);
  int failed = 0, undetected = 0;
  std::string first;
  for (int k = 0; k < queries; ++k) {
    const LOQuery q = query_for(family, rng, 6);
    const LOOutput out = linear_oracle(q, certified_nuclear());
    const CertificateReport r = kkt_check(q, out, tol);
    if (!r.passed) {
      if (first.empty()) first = r.detail;
      ++failed;
    }
    if (kkt_check(q, perturbed(out, perturbation, rng), tol).passed) ++undetected;
  }
  std::ostringstream os;
  os << queries << " queries at tol " << tol << ": " << failed << " certificate failures, " << undetected
     << " undetected perturbations of size " << perturbation;
  if (!first.empty()) os << "; first failure " << first;
  return finish("kkt-" + family_name(family), failed == 0 && undetected == 0, os.str(), t);
}

CheckResult check_feasibility_descent(ProblemKind family, int instances, int max_iter, std::uint64_t seed) {
  Timer t;
  int violations = 0, runs = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  std::string first;
  for (int k = 0; k < instances; ++k) {
    ExperimentConfig cfg;
    cfg.problem = family;
    cfg.seed = seed + static_cast<std::uint64_t>(k);
    if (family == ProblemKind::CS) {
      cfg.n = 100;
      cfg.measurements = 50;
    } else if (family == ProblemKind::GL) {
      cfg.n = 120;
      cfg.measurements = 60;
      cfg.groups = 10;
    } else {
      cfg.rows = 60;
      cfg.cols = 40;
      cfg.rank = 3;
    }
    const BuiltExperiment b = build_experiment(cfg);
    for (Variant v : {Variant::FW, Variant::AFW}) {
      SolverConfig sc;
      sc.variant = v;
      sc.max_iter = max_iter;
      const SolveResult r = solve(b.problem, sc);
      ++runs;
      const double sigma = b.problem.constraint.sigma;
      auto flag = [&](const std::string& what, int iter) {
        ++violations;
        if (first.empty())
          first = problem_name(family) + " instance " + std::to_string(k) + " " + variant_name(v) + ": " + what +
                  " at iter " + std::to_string(iter);
      };
      for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const TraceRecord& rec = r.trace[i];
        worst_excess = std::max(worst_excess, rec.constraint_value - sigma);
        if (rec.constraint_value > sigma + 1e-9) flag("infeasible iterate", rec.iter);
        if (i > 0 && rec.f > r.trace[i - 1].f + 1e-12 * std::max(1.0, std::abs(r.trace[i - 1].f)))
          flag("f increased", rec.iter);
        if (rec.fw_slope > 1e-10) flag("positive FW slope", rec.iter);
        if (rec.step_type == StepType::AW &&
            !(rec.fw_slope > rec.aw_slope && sc.eps_aw < rec.alpha_aw && rec.alpha_aw <= sc.zeta &&
              rec.alpha > 0 && rec.alpha <= rec.alpha_aw))
          flag("away-step gate violated", rec.iter);
      }
    }
  }
  std::ostringstream os;
  os << runs << " runs of up to " << max_iter << " iterations; max P1-P2-sigma = " << worst_excess << "; "
     << violations << " violations";
  if (!first.empty()) os << "; first: " << first;
  return finish("feasibility-descent-" + problem_name(family), violations == 0, os.str(), t);
}

CheckResult check_stationarity(Variant variant, int max_iter, std::size_t grid_points) {
  Timer t;
  ProblemInstance p;
  p.objective = std::make_shared<ShiftedQuadratic>(Eigen::Vector2d(3.0, 0.0));
  p.constraint = l1_minus_l2(0.5, 1.0);
  p.initial_point = Point(VectorXd(VectorXd::Zero(2)));
  SolverConfig cfg;
  cfg.variant = variant;
  cfg.max_iter = max_iter;
  const SolveResult r = solve(p, cfg);
  const TraceRecord& last = r.trace.back();
  const VectorXd x = r.x_final.vector();

  // Feasible points satisfy ‖x‖∞ ≤ 2, so the box [−2, 2]² covers the set; an odd side keeps 0 and ±2 on the grid.
  const auto side = 2 * static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(grid_points)) / 2.0)) + 1;
  double grid_best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d grid_arg(0, 0);
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      const Eigen::Vector2d z(-2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(side - 1),
                              -2.0 + 4.0 * static_cast<double>(j) / static_cast<double>(side - 1));
      if (z.lpNorm<1>() - 0.5 * z.norm() > 1.0 + 1e-12) continue;
      const double f = 0.5 * (z - Eigen::Vector2d(3.0, 0.0)).squaredNorm();
      if (f < grid_best) {
        grid_best = f;
        grid_arg = z;
      }
    }
  }
  const double rel = relative_gap(last.f, last.fw_gap);
  const double dist = (x - Eigen::Vector2d(2.0, 0.0)).norm();
  const bool converged = r.termination == Termination::GapConverged || r.termination == Termination::StationaryExact;
  const bool grid_ok = (grid_arg - Eigen::Vector2d(2.0, 0.0)).norm() <= 1e-12 &&
                       last.f <= grid_best + 1e-9;
  std::ostringstream os;
  os << variant_name(variant) << ": " << termination_name(r.termination) << " after " << last.iter
     << " iterations, relative gap " << rel << ", |x - (2,0)| = " << dist << ", f = " << last.f
     << ", grid min " << grid_best << " at (" << grid_arg(0) << ", " << grid_arg(1) << ")";
  const bool ok = converged && last.iter <= max_iter && rel < 1e-6 && dist <= 1e-3 && grid_ok;
  return finish("stationarity-2d-" + variant_name(variant), ok, os.str(), t);
}

CheckResult check_classic_reduction(int iterations, std::uint64_t seed) {
  Timer t;
  const SyntheticRegression s = gen_synthetic_cs(50, 30, 5, 0.01, seed);
  ProblemInstance p;
  p.objective = std::make_shared<LeastSquares>(s.A, s.b);
  p.constraint = l1_minus_l2(0.0, 0.5 * s.truth.lpNorm<1>());
  p.initial_point = Point(VectorXd(VectorXd::Zero(50)));

  SolverConfig cfg;
  cfg.max_iter = iterations;
  cfg.rel_gap_tol = 0.0;
  cfg.step_rule = StepRule::ConstantOne;
  cfg.boundary_boost = false;
  cfg.record_iterates = true;
  const SolveResult a = solve(p, cfg);
  const SolveResult b = classic_fw_reference(p, cfg);

  std::size_t mismatch = a.iterates.size() == b.iterates.size() ? a.iterates.size() : 0;
  for (std::size_t k = 0; k < std::min(a.iterates.size(), b.iterates.size()); ++k) {
    if (a.iterates[k].vector() != b.iterates[k].vector() || a.trace[k].alpha != b.trace[k].alpha) {
      mismatch = k;
      break;
    }
  }
  const bool ok = a.iterates.size() == b.iterates.size() && mismatch == a.iterates.size() &&
                  static_cast<int>(a.iterates.size()) == iterations + 1;
  std::ostringstream os;
  os << "solver " << a.iterates.size() << " iterates, reference " << b.iterates.size() << "; ";
  if (ok)
    os << "bitwise identical";
  else
    os << "first difference at iterate " << mismatch;
  return finish("classic-fw-reduction", ok, os.str(), t);
}

CheckResult check_complexity_trend(int k_early, int k_late, double ratio, std::uint64_t seed) {
  Timer t;
  constexpr Index n = 50;
  Rng rng(seed);
  const MatrixXd A = rng.normal_matrix(80, n) / std::sqrt(80.0);
  // The unconstrained minimiser lies far outside the set, so ∇f does not vanish on it.
  const VectorXd target = VectorXd::Constant(n, 1.0) + rng.normal_vector(n);
  ProblemInstance p;
  p.objective = std::make_shared<LeastSquares>(A, A * target);
  p.constraint = elastic_net_minus_l2(1.0, 0.5, 1.0);
  p.initial_point = Point(VectorXd(VectorXd::Zero(n)));
  SolverConfig cfg;
  cfg.max_iter = k_late;
  cfg.rel_gap_tol = 0.0;
  const SolveResult r = solve(p, cfg);

  // The gap bounds a nonnegative measure from above; negative values are roundoff.
  double running = std::numeric_limits<double>::infinity();
  double early = 0.0, late = 0.0;
  for (const TraceRecord& rec : r.trace) {
    running = std::min(running, std::max(rec.fw_gap, 0.0));
    if (rec.iter == k_early) early = k_early * running;
    if (rec.iter == k_late) late = k_late * running;
  }
  const bool reached = r.trace.back().iter >= k_late || r.termination == Termination::StationaryExact;
  if (r.termination == Termination::StationaryExact && r.trace.back().iter < k_late) late = 0.0;
  std::ostringstream os;
  os << "k*min gap: " << early << " at k=" << k_early << ", " << late << " at k=" << k_late << " (ratio "
     << (early > 0 ? late / early : 0.0) << ", need <= " << ratio << ")";
  if (early == 0.0) os << "; numerically stationary before k=" << k_early;
  return finish("complexity-trend", reached && late <= ratio * early, os.str(), t);
}

CheckResult check_finite_differences(std::uint64_t seed) {
  Timer t;
  Rng rng(seed);
  const MatrixXd A = rng.normal_matrix(20, 12);
  const LeastSquares ls(A, rng.normal_vector(20));
  std::vector<Point> vpoints;
  for (int k = 0; k < 5; ++k) vpoints.emplace_back(rng.normal_vector(12));
  const FiniteDifferenceReport r1 = finite_difference_check(ls, vpoints, 1e-6);

  const SyntheticMC s = gen_synthetic_mc(15, 10, 2, 0.5, 0.1, seed);
  Observations obs;
  obs.rows = 15;
  obs.cols = 10;
  obs.row = s.data.user;
  obs.col = s.data.item;
  obs.value = Eigen::Map<const VectorXd>(s.data.rating.data(), static_cast<Index>(s.data.size()));
  const MatrixCompletionObjective mc(obs);
  std::vector<Point> mpoints;
  for (int k = 0; k < 3; ++k) mpoints.emplace_back(rng.normal_matrix(15, 10));
  mpoints.emplace_back(FactoredMatrix::rank_one(2.0, rng.normal_vector(15).normalized(),
                                                rng.normal_vector(10).normalized()));
  const FiniteDifferenceReport r2 = finite_difference_check(mc, mpoints, 1e-5);

  const FunctionObjective wrong([&](const Point& x) { return ls.value(x); },
                                [&](const Point& x) { return scaled(ls.gradient(x), 1.01); });
  const FiniteDifferenceReport r3 = finite_difference_check(wrong, vpoints, 1e-6);

  std::ostringstream os;
  os << "least squares " << r1.max_error << ", matrix completion " << r2.max_error
     << ", scaled-wrong gradient rejected: " << (r3.passed ? "no" : "yes");
  return finish("finite-differences", r1.passed && r2.passed && !r3.passed, os.str(), t);
}

CheckResult check_default_constants() {
  Timer t;
  const SolverConfig s;
  const ExperimentConfig e;
  std::ostringstream os;
  bool ok = true;
  auto expect = [&](const char* name, double got, double want) {
    if (got != want) {
      ok = false;
      os << name << "=" << got << " (want " << want << ") ";
    }
  };
  expect("c", s.c, 1e-4);
  expect("eta", s.eta, 0.5);
  expect("mu", e.mu, 0.5);
  expect("eps_aw", s.eps_aw, 1e-5);
  expect("zeta", s.zeta, 1e5);
  expect("eig_tol", s.eig.tol, 1e-6);
  expect("max_iter", s.max_iter, 40000);
  expect("rel_gap_tol", s.rel_gap_tol, 1e-6);
  expect("rank_threshold", kRankThreshold, 1e-6);
  if (ok) os << "c=1e-4 eta=0.5 mu=0.5 eps=1e-5 zeta=1e5 eig_tol=1e-6 max_iter=40000 rel_gap=1e-6 rank_thr=1e-6";
  return finish("default-constants", ok, os.str(), t);
}

CheckResult check_svd_accumulation(int updates, double tol, std::uint64_t seed) {
  Timer t;
  Rng rng(seed);
  constexpr Index m = 40, n = 30;
  FactoredMatrix x = FactoredMatrix::zero(m, n);
  MatrixXd dense = MatrixXd::Zero(m, n);
  for (int k = 0; k < updates; ++k) {
    const double a = rng.uniform(0.5, 1.0);
    const double b = rng.uniform(-1.0, 1.0);
    const VectorXd u = rng.normal_vector(m).normalized();
    const VectorXd v = rng.normal_vector(n).normalized();
    x = linalg::svd_rank_one_update(x, a, b, u, v);
    dense = a * dense + b * u * v.transpose();
  }
  const double err = (x.dense() - dense).norm() / dense.norm();
  std::ostringstream os;
  os << updates << " updates on " << m << "x" << n << ": relative Frobenius error " << err << " (tol " << tol
     << "), orthonormality defects " << orthonormality_defect(x.U) << ", " << orthonormality_defect(x.W);
  return finish("svd-rank-one-accumulation", err <= tol, os.str(), t);
}

CheckResult check_eigensolver(int pencils, Index max_dim, double tol, std::uint64_t seed) {
  Timer t;
  Rng rng(seed);
  double worst = 0.0;
  int failures = 0;
  for (int k = 0; k < pencils; ++k) {
    const Index m = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_dim - 1)));
    const Index n = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(max_dim - m)));
    const MatrixXd a = rng.normal_matrix(m, n);
    MatrixXd xi = rng.normal_matrix(m, n);
    xi *= rng.uniform(0.0, 0.95) / Eigen::JacobiSVD<MatrixXd>(xi).singularValues()(0);
    linalg::EigenOptions opts;
    opts.method = linalg::EigenMethod::Krylov;
    const linalg::EigenPair got =
        linalg::gen_eig_smallest(linalg::make_pencil(Point(a), Point(xi)), VectorXd::Ones(m + n), opts);
    const PencilReference ref = dense_pencil_reference(a, xi);
    const double err = std::abs(got.lambda - ref.lambda) / std::max(1.0, std::abs(ref.lambda));
    worst = std::max(worst, err);
    if (!(err <= tol)) ++failures;
  }
  std::ostringstream os;
  os << pencils << " pencils with m+n <= " << max_dim << ": max eigenvalue error " << worst << " (tol " << tol
     << "), failures " << failures;
  return finish("eigensolver-vs-dense", failures == 0, os.str(), t);
}

DeskMCReport check_desk_matrix_completion(int max_iter, double gap_tol, double seconds_budget) {
  Timer t;
  DeskMCReport rep;
  ExperimentConfig cfg;  // 200 × 150, rank 5, 30 % observed, noise 0.01
  cfg.solver.max_iter = max_iter;
  cfg.solver.rel_gap_tol = gap_tol;
  const double noise = cfg.noise;
  std::ostringstream os;
  bool ok = true;
  for (Variant v : {Variant::FW, Variant::AFW}) {
    cfg.solver.variant = v;
    const ExperimentResult r = run_experiment(cfg);
    const auto& trace = r.solve.trace;
    bool monotone = true;
    for (std::size_t i = 1; i < trace.size(); ++i)
      if (trace[i].f > trace[i - 1].f + 1e-12 * std::max(1.0, std::abs(trace[i - 1].f))) monotone = false;
    double best_rel = std::numeric_limits<double>::infinity();
    for (const TraceRecord& rec : trace) best_rel = std::min(best_rel, relative_gap(rec.f, rec.fw_gap));
    const bool converged = r.solve.termination == Termination::GapConverged ||
                           r.solve.termination == Termination::StationaryExact;
    const bool rmse_ok = *r.test_rmse <= 2.0 * noise;
    ok = ok && monotone && converged && rmse_ok;
    (v == Variant::FW ? rep.fw_test_rmse : rep.afw_test_rmse) = *r.test_rmse;
    (v == Variant::FW ? rep.fw_rank : rep.afw_rank) = r.rank;
    os << variant_name(v) << ": " << termination_name(r.solve.termination) << " at iter " << trace.back().iter
       << ", best relative gap " << best_rel << ", monotone " << (monotone ? "yes" : "no") << ", train RMSE "
       << *r.train_rmse << ", test RMSE " << *r.test_rmse << ", rank " << r.rank << "; ";
  }
  const double secs = t.seconds();
  os << "afw rank <= fw rank: " << (rep.afw_rank <= rep.fw_rank ? "yes" : "no") << " (reported); " << secs
     << " s";
  ok = ok && secs <= seconds_budget;
  rep.check = CheckResult{"desk-matrix-completion", ok, os.str(), secs};
  return rep;
}

std::vector<CheckResult> run_suite(const std::string& suite) {
  const bool oracles = suite == "oracles" || suite == "all";
  const bool solver = suite == "solver" || suite == "all";
  if (!oracles && !solver) throw PreconditionViolation("unknown suite '" + suite + "' (oracles, solver or all)");
  std::vector<CheckResult> out;
  if (oracles) {
    for (QueryFamily f : {QueryFamily::Elementwise, QueryFamily::Group, QueryFamily::StronglyConvex})
      out.push_back(check_oracle_grid(f, 40, 100'000, f == QueryFamily::StronglyConvex ? 1e-5 : 1e-4, 11));
    out.push_back(check_oracle_nuclear(100, 8, 1e-6, 12));
    for (QueryFamily f : {QueryFamily::Elementwise, QueryFamily::Group, QueryFamily::Nuclear})
      out.push_back(check_oracle_sampled(f, 10, 20'000, 1.0, 13));
    for (QueryFamily f :
         {QueryFamily::Elementwise, QueryFamily::Group, QueryFamily::Nuclear, QueryFamily::StronglyConvex})
      out.push_back(check_kkt(f, 200, 1e-8, 1e-3, 14));
  }
  if (solver) {
    out.push_back(check_default_constants());
    out.push_back(check_svd_accumulation(50, 1e-7, 21));
    out.push_back(check_eigensolver(30, 14, 1e-8, 22));
    out.push_back(check_finite_differences(23));
    out.push_back(check_stationarity(Variant::FW, 5000, 1'000'000));
    out.push_back(check_stationarity(Variant::AFW, 5000, 1'000'000));
    out.push_back(check_classic_reduction(50, 24));
    out.push_back(check_complexity_trend(10, 1000, 0.1, 25));
    for (ProblemKind p : {ProblemKind::CS, ProblemKind::GL, ProblemKind::MC})
      out.push_back(check_feasibility_descent(p, 3, 100, 26));
  }
  return out;
}

}  // namespace dcfw::verify
