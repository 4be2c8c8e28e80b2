#include "dcfw/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace dcfw::verify {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Heap-free vectors for the grid search (length ≤ 3).
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

double frob_inner(const MatrixXd& x, const MatrixXd& y) { return x.cwiseProduct(y).sum(); }

double nuclear_value(const MatrixXd& x) {
  if (x.size() == 0) return 0.0;
  return Eigen::JacobiSVD<MatrixXd>(x).singularValues().sum();
}

// P₁ by local formulas where the type is known; falls back to the oracle.
double p1_value(const DCConstraint& c, const Point& x) {
  const ConvexFunctionOracle* p = c.p1.get();
  if (dynamic_cast<const L1Norm*>(p)) return x.vector().lpNorm<1>();
  if (const auto* g = dynamic_cast<const GroupL1Norm*>(p)) {
    double total = 0.0;
    for (const auto& block : g->blocks()) {
      double sq = 0.0;
      for (Index i : block) sq += x.vector()(i) * x.vector()(i);
      total += std::sqrt(sq);
    }
    return total;
  }
  if (dynamic_cast<const NuclearNorm*>(p)) return nuclear_value(x.to_dense());
  if (const auto* e = dynamic_cast<const ElasticNet*>(p))
    return x.vector().lpNorm<1>() + 0.5 * e->rho() * x.vector().squaredNorm();
  return p->value(x);
}

double p2_value(const DCConstraint& c, const Point& x) {
  const ConvexFunctionOracle* p = c.p2.get();
  if (dynamic_cast<const ZeroFunction*>(p)) return 0.0;
  if (const auto* s = dynamic_cast<const ScaledEuclideanNorm*>(p)) return s->scale() * x.to_dense().norm();
  return p->value(x);
}

double level_of(const LOQuery& q) {
  return q.constraint.sigma + p2_value(q.constraint, q.y) - frob_inner(q.xi.to_dense(), q.y.to_dense());
}

double l1_defect(const VectorXd& u, const VectorXd& w) {
  double worst = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    const double d = u(i) != 0.0 ? std::abs(w(i) - (u(i) > 0 ? 1.0 : -1.0)) : std::max(0.0, std::abs(w(i)) - 1.0);
    worst = std::max(worst, d);
  }
  return worst;
}

double group_defect(const VectorXd& u, const VectorXd& w, const Partition& blocks) {
  double worst = 0.0;
  for (const auto& block : blocks) {
    VectorXd ub(block.size()), wb(block.size());
    for (std::size_t k = 0; k < block.size(); ++k) {
      ub(k) = u(block[k]);
      wb(k) = w(block[k]);
    }
    const double nu = ub.norm();
    worst = std::max(worst, nu > 0.0 ? (wb - ub / nu).norm() : std::max(0.0, wb.norm() - 1.0));
  }
  return worst;
}

// w ∈ ∂‖u‖_* iff w = PQᵀ + R with PᵀR = 0, RQ = 0 and ‖R‖₂ ≤ 1, where u = PΣQᵀ.
double nuclear_defect(const MatrixXd& u, const MatrixXd& w) {
  Eigen::JacobiSVD<MatrixXd> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double cut = 1e-9 * std::max(1.0, s.size() ? s(0) : 0.0);
  Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  const MatrixXd P = svd.matrixU().leftCols(r);
  const MatrixXd Q = svd.matrixV().leftCols(r);
  double defect = 0.0;
  if (r > 0) {
    defect = std::max((w * Q - P).norm(), (w.transpose() * P - Q).norm());
  }
  const MatrixXd Pp = MatrixXd::Identity(u.rows(), u.rows()) - P * P.transpose();
  const MatrixXd Qp = MatrixXd::Identity(u.cols(), u.cols()) - Q * Q.transpose();
  const MatrixXd R = Pp * w * Qp;
  const double spectral = R.size() ? Eigen::JacobiSVD<MatrixXd>(R).singularValues()(0) : 0.0;
  return std::max(defect, std::max(0.0, spectral - 1.0));
}

// q ∈ ∂P̃(u) iff u = prox_{P̃}(u + q).
double strongly_convex_defect(const VectorXd& u, const VectorXd& w, const structure::StronglyConvex& sc) {
  const VectorXd q = w - sc.rho * u;
  return (sc.prox(u + q, 1.0) - u).norm();
}

Point random_like(const Point& p, Rng& rng) {
  if (p.is_vector()) return Point(rng.normal_vector(p.rows()));
  return Point(rng.normal_matrix(p.rows(), p.cols()));
}

// Scale t > 0 with P₁(t·w) − ⟨ξ, t·w⟩ = level along a unit direction w.
class RayBoundary {
 public:
  RayBoundary(const LOQuery& q, double level) : q_(q), level_(level), xi_(q.xi.vector()) {
    const ConvexFunctionOracle* p = q.constraint.p1.get();
    if (dynamic_cast<const L1Norm*>(p)) {
      kind_ = Kind::L1;
    } else if (const auto* g = dynamic_cast<const GroupL1Norm*>(p)) {
      kind_ = Kind::Group;
      blocks_ = g->blocks();
    } else if (const auto* e = dynamic_cast<const ElasticNet*>(p)) {
      kind_ = Kind::ElasticNet;
      rho_ = e->rho();
    } else {
      kind_ = Kind::Other;
    }
  }

  double scale(const SmallVec& w) const {
    switch (kind_) {
      case Kind::L1: return level_ / (w.lpNorm<1>() - xi_.dot(w));
      case Kind::Group: {
        double total = 0.0;
        for (const auto& block : blocks_) {
          double sq = 0.0;
          for (Index i : block) sq += w(i) * w(i);
          total += std::sqrt(sq);
        }
        return level_ / (total - xi_.dot(w));
      }
      case Kind::ElasticNet: {
        // (ρ/2)t² + b·t − level = 0 with ‖w‖ = 1.
        const double b = w.lpNorm<1>() - xi_.dot(w);
        const double s = std::sqrt(b * b + 2.0 * rho_ * level_);
        return b >= 0 ? 2.0 * level_ / (b + s) : (s - b) / rho_;
      }
      case Kind::Other: break;
    }
    return bisect(w);
  }

 private:
  enum class Kind { L1, Group, ElasticNet, Other };

  double excess(const SmallVec& w, double t) const {
    const VectorXd x = t * VectorXd(w);
    return q_.constraint.p1->value(Point(x)) - xi_.dot(x) - level_;
  }

  double bisect(const SmallVec& w) const {
    if (!(excess(w, 0.0) < 0)) throw PreconditionViolation("grid_lo_reference: origin is not strictly feasible");
    double lo = 0.0, hi = 1.0;
    while (excess(w, hi) <= 0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) throw PreconditionViolation("grid_lo_reference: unbounded feasible ray");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (excess(w, mid) <= 0 ? lo : hi) = mid;
    }
    return lo;
  }

  const LOQuery& q_;
  double level_;
  VectorXd xi_;
  Kind kind_ = Kind::Other;
  Partition blocks_;
  double rho_ = 0.0;
};

struct GridBest {
  double value = std::numeric_limits<double>::infinity();
  SmallVec w;
  double t = 0.0;
};

}  // namespace

CertificateReport kkt_check(const LOQuery& q, const LOOutput& out, double tol) {
  if (!out.active_subgradient) throw PreconditionViolation("kkt_check: output carries no active subgradient");
  if (!(out.multiplier >= 0.0)) throw PreconditionViolation("kkt_check: negative multiplier");
  require_compatible(q.a, out.u);
  require_compatible(q.a, *out.active_subgradient);

  const DCConstraint& c = q.constraint;
  const double lambda = out.multiplier;
  const MatrixXd A = q.a.to_dense();
  const MatrixXd Xi = q.xi.to_dense();
  const MatrixXd U = out.u.to_dense();
  const MatrixXd W = out.active_subgradient->to_dense();
  const double level = level_of(q);
  const double excess = p1_value(c, out.u) - frob_inner(Xi, U) - level;

  CertificateReport r;
  r.kkt_residual = (A + lambda * (W - Xi)).norm();
  r.complementarity = std::abs(lambda * excess);
  r.feasibility_slack = std::max(0.0, excess);

  if (std::holds_alternative<structure::ElementwiseL1>(c.structure))
    r.subgradient_defect = l1_defect(U.col(0), W.col(0));
  else if (const auto* g = std::get_if<structure::GroupL1>(&c.structure))
    r.subgradient_defect = group_defect(U.col(0), W.col(0), g->blocks);
  else if (std::holds_alternative<structure::Nuclear>(c.structure))
    r.subgradient_defect = nuclear_defect(U, W);
  else if (const auto* sc = std::get_if<structure::StronglyConvex>(&c.structure))
    r.subgradient_defect = strongly_convex_defect(U.col(0), W.col(0), *sc);
  else
    throw PreconditionViolation("kkt_check: no subgradient test for a generic constraint");

  const bool kkt_ok = r.kkt_residual <= tol * std::max(1.0, A.norm());
  const bool comp_ok = r.complementarity <= tol * std::max(1.0, lambda * std::abs(level));
  const bool feas_ok = r.feasibility_slack <= tol * std::max(1.0, std::abs(level));
  const bool sub_ok = r.subgradient_defect <= tol;
  r.passed = kkt_ok && comp_ok && feas_ok && sub_ok;

  std::ostringstream os;
  os << "kkt=" << r.kkt_residual << " comp=" << r.complementarity << " feas=" << r.feasibility_slack
     << " subgrad=" << r.subgradient_defect;
  r.detail = os.str();
  return r;
}

double sampled_lo_reference(const LOQuery& q, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) return std::numeric_limits<double>::infinity();
  Rng rng(seed);
  const DCConstraint& c = q.constraint;
  const double level = level_of(q);
  const MatrixXd A = q.a.to_dense();
  const MatrixXd Xi = q.xi.to_dense();
  const std::size_t max_proposals = std::max<std::size_t>(10'000'000, 100 * n_samples);

  double best = std::numeric_limits<double>::infinity();
  std::size_t accepted = 0;

  if (c.positively_homogeneous) {
    for (std::size_t k = 0; k < max_proposals && accepted < n_samples; ++k) {
      const Point d = random_like(q.a, rng);
      const MatrixXd D = d.to_dense();
      const double h = p1_value(c, d) - frob_inner(Xi, D);
      if (!(h > 0.0)) continue;
      ++accepted;
      best = std::min(best, level / h * frob_inner(A, D));
    }
  } else {
    const auto* sc = std::get_if<structure::StronglyConvex>(&c.structure);
    if (!sc) throw PreconditionViolation("sampled_lo_reference: unsupported structure");
    if (!q.a.is_vector()) throw DimensionMismatch("sampled_lo_reference: strongly convex queries are vectors");
    // (ρ/2)‖x‖² − ‖ξ‖‖x‖ ≤ level bounds ‖x‖ when P₁ − (ρ/2)‖·‖² ≥ 0.
    const double xn = Xi.norm();
    const double radius = (xn + std::sqrt(xn * xn + 2.0 * sc->rho * level)) / sc->rho;
    const Index n = q.a.rows();
    const VectorXd xi = q.xi.vector();
    const VectorXd a = q.a.vector();
    for (std::size_t k = 0; k < max_proposals && accepted < n_samples; ++k) {
      VectorXd d = rng.normal_vector(n);
      const double dn = d.norm();
      if (dn == 0.0) continue;
      const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
      const VectorXd p = (r / dn) * d;
      if (p1_value(c, Point(p)) - xi.dot(p) > level) continue;
      ++accepted;
      best = std::min(best, a.dot(p));
    }
  }
  if (accepted == 0)
    throw NonConvergence("sampled_lo_reference: no proposal accepted");
  return best;
}

PencilReference dense_pencil_reference(const MatrixXd& a, const MatrixXd& xi) {
  if (a.rows() != xi.rows() || a.cols() != xi.cols())
    throw DimensionMismatch("dense_pencil_reference: a and xi differ in shape");
  const Index m = a.rows(), n = a.cols(), d = m + n;
  if (d > 64) throw PreconditionViolation("dense_pencil_reference: m + n must be at most 64");

  MatrixXd At = MatrixXd::Zero(d, d);
  At.topRightCorner(m, n) = a;
  At.bottomLeftCorner(n, m) = a.transpose();
  MatrixXd B = MatrixXd::Identity(d, d);
  B.topRightCorner(m, n) -= xi;
  B.bottomLeftCorner(n, m) -= xi.transpose();

  Eigen::LLT<MatrixXd> llt(B);
  if (llt.info() != Eigen::Success)
    throw PreconditionViolation("dense_pencil_reference: I - Xi is not positive definite");
  const MatrixXd L = llt.matrixL();
  // C = L⁻¹ Ã L⁻ᵀ
  const MatrixXd left = L.triangularView<Eigen::Lower>().solve(At);
  MatrixXd C = L.triangularView<Eigen::Lower>().solve(left.transpose());
  C = 0.5 * (C + C.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(C);
  if (es.info() != Eigen::Success) throw NonConvergence("dense_pencil_reference: eigensolver failed");

  PencilReference ref;
  ref.lambda = es.eigenvalues()(0);
  ref.z = L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors().col(0));
  return ref;
}

LOReference nuclear_lo_reference(const LOQuery& q) {
  if (!q.a.is_matrix()) throw DimensionMismatch("nuclear_lo_reference: a must be a matrix");
  const MatrixXd A = q.a.to_dense();
  const double level = level_of(q);
  LOReference out;
  if (A.isZero(0.0)) {
    out.value = 0.0;
    out.point = q.y;
    return out;
  }
  const PencilReference ref = dense_pencil_reference(A, q.xi.to_dense());
  const MatrixXd X = 2.0 * level * ref.z.head(A.rows()) * ref.z.tail(A.cols()).transpose();
  out.value = frob_inner(A, X);
  out.point = Point(X);
  return out;
}

LOReference grid_lo_reference(const LOQuery& q, std::size_t resolution) {
  if (!q.a.is_vector()) throw DimensionMismatch("grid_lo_reference: needs a vector query");
  const Index n = q.a.rows();
  if (n < 1 || n > 3) throw PreconditionViolation("grid_lo_reference: dimension must be 1, 2 or 3");
  if (resolution < 4) throw PreconditionViolation("grid_lo_reference: resolution must be at least 4");
  const VectorXd a = q.a.vector();
  LOReference out;
  if (a.isZero(0.0)) {
    out.value = 0.0;
    out.point = q.y;
    return out;
  }

  const double level = level_of(q);
  const RayBoundary ray(q, level);
  GridBest best;
  auto consider = [&](const SmallVec& w) {
    const double t = ray.scale(w);
    const double v = t * a.dot(w);
    if (v < best.value) {
      best.value = v;
      best.w = w;
      best.t = t;
    }
  };

  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  constexpr int kRounds = 5;
  constexpr int kHalfWidth = 20;  // refinement grid has 2·20 + 1 points per axis spanning ±2 steps

  if (n == 1) {
    consider(SmallVec::Constant(1, 1.0));
    consider(SmallVec::Constant(1, -1.0));
  } else if (n == 2) {
    const std::size_t count = (resolution + 3) / 4 * 4;  // keeps the axes on the grid
    SmallVec w(2);
    double best_theta = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double theta = kTwoPi * static_cast<double>(k) / static_cast<double>(count);
      w << std::cos(theta), std::sin(theta);
      const double before = best.value;
      consider(w);
      if (best.value < before) best_theta = theta;
    }
    double step = kTwoPi / static_cast<double>(count);
    for (int round = 0; round < kRounds; ++round) {
      step /= 10.0;
      const double center = best_theta;
      for (int j = -kHalfWidth; j <= kHalfWidth; ++j) {
        const double theta = center + j * step;
        w << std::cos(theta), std::sin(theta);
        const double before = best.value;
        consider(w);
        if (best.value < before) best_theta = theta;
      }
    }
  } else {
    const auto n_phi = static_cast<std::size_t>(4 * std::ceil(std::sqrt(2.0 * resolution) / 4.0));
    const std::size_t n_theta = n_phi / 2 + 1;
    std::vector<double> st(n_theta), ct(n_theta), sp(n_phi), cp(n_phi);
    for (std::size_t i = 0; i < n_theta; ++i) {
      const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_theta - 1);
      st[i] = std::sin(theta);
      ct[i] = std::cos(theta);
    }
    for (std::size_t j = 0; j < n_phi; ++j) {
      const double phi = kTwoPi * static_cast<double>(j) / static_cast<double>(n_phi);
      sp[j] = std::sin(phi);
      cp[j] = std::cos(phi);
    }
    SmallVec w(3);
    double best_theta = 0.0, best_phi = 0.0;
    for (std::size_t i = 0; i < n_theta; ++i) {
      const bool pole = i == 0 || i + 1 == n_theta;
      for (std::size_t j = 0; j < (pole ? 1 : n_phi); ++j) {
        w << st[i] * cp[j], st[i] * sp[j], ct[i];
        const double before = best.value;
        consider(w);
        if (best.value < before) {
          best_theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_theta - 1);
          best_phi = kTwoPi * static_cast<double>(j) / static_cast<double>(n_phi);
        }
      }
    }
    double d_theta = std::numbers::pi / static_cast<double>(n_theta - 1);
    double d_phi = kTwoPi / static_cast<double>(n_phi);
    for (int round = 0; round < kRounds; ++round) {
      d_theta /= 10.0;
      d_phi /= 10.0;
      const double c_theta = best_theta, c_phi = best_phi;
      for (int i = -kHalfWidth; i <= kHalfWidth; ++i) {
        const double theta = c_theta + i * d_theta;
        for (int j = -kHalfWidth; j <= kHalfWidth; ++j) {
          const double phi = c_phi + j * d_phi;
          w << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
          const double before = best.value;
          consider(w);
          if (best.value < before) {
            best_theta = theta;
            best_phi = phi;
          }
        }
      }
    }
  }

  out.value = best.value;
  out.point = Point(VectorXd(best.t * VectorXd(best.w)));
  return out;
}

FiniteDifferenceReport finite_difference_check(const SmoothObjective& f, const std::vector<Point>& points,
                                               double rel_tol) {
  FiniteDifferenceReport rep;
  Rng rng(7);
  std::ostringstream os;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Point& x = points[p];
    const double h = 1e-6 * (1.0 + norm(x));
    const Point g = f.gradient(x);
    double err = 0.0;
    if (x.is_vector()) {
      const VectorXd& xv = x.vector();
      const VectorXd gv = g.vector();
      VectorXd fd(xv.size());
      for (Index i = 0; i < xv.size(); ++i) {
        VectorXd plus = xv, minus = xv;
        plus(i) += h;
        minus(i) -= h;
        fd(i) = (f.value(Point(plus)) - f.value(Point(minus))) / (2.0 * h);
      }
      err = (fd - gv).norm() / std::max(1.0, gv.norm());
    } else {
      const MatrixXd X = x.to_dense();
      const MatrixXd G = g.to_dense();
      const double gn = G.norm();
      for (int k = 0; k < 8; ++k) {
        MatrixXd D = (k == 0 && gn > 0) ? MatrixXd(G / gn) : rng.normal_matrix(X.rows(), X.cols());
        D /= D.norm();
        const double fd = (f.value(Point(MatrixXd(X + h * D))) - f.value(Point(MatrixXd(X - h * D)))) / (2.0 * h);
        err = std::max(err, std::abs(fd - frob_inner(G, D)) / std::max(1.0, gn));
      }
    }
    if (err > rep.max_error) {
      rep.max_error = err;
      os.str("");
      os << "worst point " << p << ": relative error " << err;
    }
  }
  rep.passed = rep.max_error <= rel_tol;
  rep.detail = points.empty() ? "no points" : os.str();
  return rep;
}

SolveResult classic_fw_reference(const ProblemInstance& problem, const SolverConfig& config) {
  const DCConstraint& c = problem.constraint;
  const auto* p2 = c.p2.get();
  const auto* scaled_p2 = dynamic_cast<const ScaledEuclideanNorm*>(p2);
  if (!(dynamic_cast<const ZeroFunction*>(p2) || (scaled_p2 && scaled_p2->scale() == 0.0)))
    throw PreconditionViolation("classic_fw_reference: P2 must vanish identically");
  if (!dynamic_cast<const L1Norm*>(c.p1.get()))
    throw PreconditionViolation("classic_fw_reference: P1 must be the l1 norm");
  if (!problem.initial_point.is_vector())
    throw DimensionMismatch("classic_fw_reference: needs a vector problem");

  const SmoothObjective& f = *problem.objective;
  const double sigma = c.sigma;
  VectorXd x = problem.initial_point.vector();
  SolveResult result;
  result.termination = Termination::MaxIter;

  for (int k = 0;; ++k) {
    const Point xp(x);
    const double fx = f.value(xp);
    const VectorXd g = f.gradient(xp).vector();
    result.iterates.push_back(xp);

    TraceRecord rec;
    rec.iter = k;
    rec.f = fx;
    rec.rank = static_cast<int>((x.array().abs() > 1e-6).count());
    rec.constraint_value = x.lpNorm<1>();

    // Vertex −σ·sign(g_i)e_i of the ℓ₁ ball at the first largest |g_i|.
    Index i0 = 0;
    for (Index i = 1; i < g.size(); ++i)
      if (std::abs(g(i)) > std::abs(g(i0))) i0 = i;
    VectorXd u = VectorXd::Zero(x.size());
    u(i0) = g(i0) < 0 ? sigma : -sigma;

    const double slope = g.dot(u - x);
    rec.fw_slope = slope;
    rec.fw_gap = -slope;
    if (!(slope < 0.0) || k >= config.max_iter) {
      rec.step_type = StepType::Terminal;
      result.termination = slope < 0.0 ? Termination::MaxIter : Termination::StationaryExact;
      result.trace.push_back(rec);
      break;
    }

    double alpha = 1.0;
    int j = 0;
    VectorXd trial = x + alpha * (u - x);
    while (f.value(Point(trial)) > fx + config.c * alpha * slope) {
      if (++j > config.max_backtracks) throw LineSearchStalled("classic_fw_reference: backtracking cap reached");
      alpha *= config.eta;
      trial = x + alpha * (u - x);
    }
    rec.step_type = StepType::FW;
    rec.alpha = alpha;
    rec.backtracks = j;
    rec.alpha0 = 1.0;
    result.trace.push_back(rec);
    x = std::move(trial);
  }
  result.x_final = Point(x);
  return result;
}

std::string family_name(QueryFamily f) {
  switch (f) {
    case QueryFamily::Elementwise: return "elementwise";
    case QueryFamily::Group: return "group";
    case QueryFamily::Nuclear: return "nuclear";
    case QueryFamily::StronglyConvex: return "strongly-convex";
  }
  return "?";
}

LOQuery random_query(QueryFamily family, Index n, Rng& rng, Index cols) {
  const double mu = rng.uniform(0.0, 0.9);
  const double sigma = rng.uniform(0.5, 2.0);
  const double fraction = rng.uniform(0.05, 1.0);
  LOQuery q;
  switch (family) {
    case QueryFamily::Elementwise:
    case QueryFamily::Group: {
      if (family == QueryFamily::Group && n < 2) throw PreconditionViolation("random_query: group needs n >= 2");
      q.constraint = family == QueryFamily::Elementwise ? l1_minus_l2(mu, sigma)
                                                        : group_minus_l2(contiguous_partition(n, 2), mu, sigma);
      const VectorXd d = rng.normal_vector(n);
      const double h = p1_value(q.constraint, Point(d)) - mu * d.norm();
      q.y = Point(VectorXd(fraction * sigma / h * d));
      q.a = Point(rng.normal_vector(n));
      break;
    }
    case QueryFamily::Nuclear: {
      if (cols < 1) throw PreconditionViolation("random_query: nuclear queries need cols >= 1");
      q.constraint = nuclear_minus_frobenius(mu, sigma);
      const MatrixXd d = rng.normal_matrix(n, cols);
      const double h = nuclear_value(d) - mu * d.norm();
      q.y = Point(MatrixXd(fraction * sigma / h * d));
      q.a = Point(rng.normal_matrix(n, cols));
      break;
    }
    case QueryFamily::StronglyConvex: {
      const double rho = rng.uniform(0.5, 2.0);
      q.constraint = elastic_net_minus_l2(rho, mu, sigma);
      const VectorXd d = rng.normal_vector(n);
      // Largest t with (ρ/2)t²‖d‖² + (‖d‖₁ − μ‖d‖)t ≤ σ.
      const double qa = 0.5 * rho * d.squaredNorm();
      const double qb = d.lpNorm<1>() - mu * d.norm();
      const double t_max = 2.0 * sigma / (qb + std::sqrt(qb * qb + 4.0 * qa * sigma));
      q.y = Point(VectorXd(fraction * t_max * d));
      q.a = Point(rng.normal_vector(n));
      break;
    }
  }
  q.xi = min_norm_subgradient_P2(q.constraint, q.y);
  return q;
}

LOOutput perturbed(const LOOutput& out, double scale, Rng& rng) {
  LOOutput p = out;
  const Point d = random_like(out.u, rng);
  const double dn = norm(d);
  if (out.u.is_vector())
    p.u = Point(VectorXd(out.u.vector() + (scale / dn) * d.vector()));
  else
    p.u = Point(MatrixXd(out.u.to_dense() + (scale / dn) * d.to_dense()));
  return p;
}

}  // namespace dcfw::verify
