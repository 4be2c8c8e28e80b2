#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dcfw/experiment.hpp"
#include "dcfw/verify.hpp"

namespace py = pybind11;
using namespace dcfw;

namespace {

DCConstraint make_constraint(const std::string& kind, double mu, double sigma, const Partition& blocks,
                             double rho) {
  if (kind == "l1") return l1_minus_l2(mu, sigma);
  if (kind == "group") return group_minus_l2(blocks, mu, sigma);
  if (kind == "nuclear") return nuclear_minus_frobenius(mu, sigma);
  if (kind == "elastic_net") return elastic_net_minus_l2(rho, mu, sigma);
  throw PreconditionViolation("unknown constraint kind '" + kind + "' (l1, group, nuclear, elastic_net)");
}

py::dict oracle_dict(const LOOutput& o) {
  py::dict d;
  if (o.u.is_vector())
    d["u"] = o.u.vector();
  else
    d["u"] = o.u.to_dense();
  d["multiplier"] = o.multiplier;
  d["value"] = o.objective_value;
  return d;
}

py::dict solve_dict(const SolveResult& r) {
  py::dict d;
  if (r.x_final.is_vector())
    d["x"] = r.x_final.vector();
  else
    d["x"] = r.x_final.to_dense();
  d["termination"] = termination_name(r.termination);
  py::list trace;
  for (const TraceRecord& t : r.trace) {
    py::dict row;
    row["iter"] = t.iter;
    row["f"] = t.f;
    row["fw_gap"] = t.fw_gap;
    row["step_type"] = step_type_name(t.step_type);
    row["alpha"] = t.alpha;
    row["backtracks"] = t.backtracks;
    row["rank"] = t.rank;
    row["constraint_value"] = t.constraint_value;
    trace.append(row);
  }
  d["trace"] = trace;
  return d;
}

SolverConfig solver_config(const std::string& variant, int max_iter, double rel_gap_tol) {
  SolverConfig c;
  c.variant = parse_variant(variant);
  c.max_iter = max_iter;
  c.rel_gap_tol = rel_gap_tol;
  return c;
}

}  // namespace

PYBIND11_MODULE(_dcfw, m) {
  m.doc() = "Frank-Wolfe solvers over difference-of-convex level sets";

  // Translators are tried newest first, so the base class goes in first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<PreconditionViolation>(m, "PreconditionViolation", PyExc_ValueError);
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def(
      "constraint_value",
      [](const std::string& kind, const Eigen::MatrixXd& x, double mu, const Partition& blocks, double rho) {
        const DCConstraint c = make_constraint(kind, mu, 1.0, blocks, rho);
        if (kind == "nuclear") return constraint_value(c, Point(x));
        return constraint_value(c, Point(Eigen::VectorXd(x.reshaped())));
      },
      py::arg("kind"), py::arg("x"), py::arg("mu") = 0.5, py::arg("blocks") = Partition{}, py::arg("rho") = 1.0,
      "P1(x) - P2(x) for the named constraint family.");

  m.def(
      "lo_elementwise",
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& xi, double sigma) {
        return oracle_dict(lo_elementwise(a, xi, sigma));
      },
      py::arg("a"), py::arg("xi"), py::arg("sigma"));

  m.def(
      "lo_group",
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& xi, double sigma, const Partition& blocks) {
        validate_partition(blocks, a.size());
        return oracle_dict(lo_group(a, xi, sigma, blocks));
      },
      py::arg("a"), py::arg("xi"), py::arg("sigma"), py::arg("blocks"));

  m.def(
      "lo_nuclear",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& xi, double sigma) {
        NuclearOracleOptions opt;
        opt.eig.tol = 1e-10;
        return oracle_dict(lo_nuclear(Point(a), Point(xi), sigma, opt));
      },
      py::arg("a"), py::arg("xi"), py::arg("sigma"));

  m.def(
      "lo_strongly_convex",
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& xi, double rho, double mu,
         double sigma) { return oracle_dict(lo_strongly_convex(a, y, xi, elastic_net_minus_l2(rho, mu, sigma))); },
      py::arg("a"), py::arg("y"), py::arg("xi"), py::arg("rho"), py::arg("mu"), py::arg("sigma"),
      "Oracle for ||x||_1 + (rho/2)||x||^2 - mu||x|| <= sigma at the point y.");

  m.def(
      "solve_least_squares",
      [](const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const std::string& kind, double mu, double sigma,
         const Partition& blocks, double rho, const std::string& variant, int max_iter, double rel_gap_tol) {
        ProblemInstance p{std::make_shared<LeastSquares>(A, b), make_constraint(kind, mu, sigma, blocks, rho),
                          Point(Eigen::VectorXd(Eigen::VectorXd::Zero(A.cols())))};
        py::gil_scoped_release release;
        SolveResult r = solve(p, solver_config(variant, max_iter, rel_gap_tol));
        py::gil_scoped_acquire acquire;
        return solve_dict(r);
      },
      py::arg("A"), py::arg("b"), py::arg("kind") = "l1", py::arg("mu") = 0.5, py::arg("sigma") = 1.0,
      py::arg("blocks") = Partition{}, py::arg("rho") = 1.0, py::arg("variant") = "fw",
      py::arg("max_iter") = 40000, py::arg("rel_gap_tol") = 1e-6,
      "Minimise 0.5||Ax - b||^2 over a DC level set, starting from 0.");

  m.def(
      "solve_matrix_completion",
      [](Index rows, Index cols, const std::vector<Index>& row, const std::vector<Index>& col,
         const Eigen::VectorXd& value, double mu, double sigma, const std::string& variant, int max_iter,
         double rel_gap_tol) {
        Observations obs;
        obs.rows = rows;
        obs.cols = cols;
        obs.row = row;
        obs.col = col;
        obs.value = value;
        if (row.size() != col.size() || static_cast<Index>(row.size()) != value.size())
          throw DimensionMismatch("row, col and value must have the same length");
        ProblemInstance p{std::make_shared<MatrixCompletionObjective>(std::move(obs)),
                          nuclear_minus_frobenius(mu, sigma), Point(FactoredMatrix::zero(rows, cols))};
        py::gil_scoped_release release;
        SolveResult r = solve(p, solver_config(variant, max_iter, rel_gap_tol));
        py::gil_scoped_acquire acquire;
        py::dict d = solve_dict(r);
        d["rank"] = reported_rank(r.x_final);
        return d;
      },
      py::arg("rows"), py::arg("cols"), py::arg("row"), py::arg("col"), py::arg("value"), py::arg("mu") = 0.5,
      py::arg("sigma") = 1.0, py::arg("variant") = "fw", py::arg("max_iter") = 40000,
      py::arg("rel_gap_tol") = 1e-6,
      "Minimise 0.5 sum (X_ij - value)^2 over observed entries subject to ||X||_* - mu||X||_F <= sigma.");

  m.def(
      "gen_synthetic_mc",
      [](Index rows, Index cols, Index rank, double obs_fraction, double noise, std::uint64_t seed) {
        const SyntheticMC s = gen_synthetic_mc(rows, cols, rank, obs_fraction, noise, seed);
        py::dict d;
        d["row"] = s.data.user;
        d["col"] = s.data.item;
        d["value"] = s.data.rating;
        d["truth"] = s.truth();
        d["truth_nuclear_norm"] = s.truth_nuclear;
        return d;
      },
      py::arg("rows") = 200, py::arg("cols") = 150, py::arg("rank") = 5, py::arg("obs_fraction") = 0.3,
      py::arg("noise") = 0.01, py::arg("seed") = 1);

  m.def(
      "run_experiment",
      [](const std::string& config_text) {
        std::istringstream in(config_text);
        const ExperimentConfig cfg = parse_experiment_config(in);
        py::gil_scoped_release release;
        ExperimentResult r = run_experiment(cfg);
        py::gil_scoped_acquire acquire;
        py::dict summary;
        for (const auto& [k, v] : r.summary) summary[py::str(k)] = v;
        return summary;
      },
      py::arg("config_text"), "Run one experiment from key = value configuration text; returns the summary.");

  m.def(
      "kkt_check_elementwise",
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& y, double mu, double sigma, double tol) {
        const DCConstraint c = l1_minus_l2(mu, sigma);
        const Point yp(y);
        const LOQuery q{Point(a), yp, min_norm_subgradient_P2(c, yp), c};
        const verify::CertificateReport r = verify::kkt_check(q, linear_oracle(q), tol);
        py::dict d;
        d["passed"] = r.passed;
        d["kkt_residual"] = r.kkt_residual;
        d["complementarity"] = r.complementarity;
        d["feasibility_slack"] = r.feasibility_slack;
        return d;
      },
      py::arg("a"), py::arg("y"), py::arg("mu"), py::arg("sigma"), py::arg("tol") = 1e-8,
      "Solve the l1 - mu*l2 oracle at y and check its optimality certificate.");
}
