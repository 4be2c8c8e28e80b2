#include "dcfw/oracles.hpp"

#include <cmath>
#include <limits>

namespace dcfw {

double effective_level(const DCConstraint& c, const Point& y, const Point& xi) {
  return c.sigma + c.p2->value(y) - inner(xi, y);
}

Eigen::VectorXd unit_sign(const Eigen::VectorXd& x) {
  const double nrm = x.norm();
  if (nrm == 0.0) return Eigen::VectorXd::Constant(x.size(), 1.0 / std::sqrt(double(x.size())));
  return x / nrm;
}

namespace {

Eigen::VectorXd or_zero(const Eigen::VectorXd& y, Index n) {
  return y.size() == 0 ? Eigen::VectorXd(Eigen::VectorXd::Zero(n)) : y;
}

LOOutput stay_put(Point y, const ConvexFunctionOracle* p1) {
  LOOutput out;
  if (p1) out.active_subgradient = p1->subgradient(y);
  out.u = std::move(y);
  out.multiplier = 0.0;
  out.objective_value = 0.0;
  return out;
}

void require_same_length(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const char* who) {
  if (a.size() != b.size()) throw DimensionMismatch(std::string(who) + ": a and xi lengths differ");
}

}  // namespace

LOOutput lo_elementwise(const Eigen::VectorXd& a, const Eigen::VectorXd& xi, double sigma,
                        const Eigen::VectorXd& y) {
  require_same_length(a, xi, "lo_elementwise");
  if (!(sigma > 0)) throw PreconditionViolation("lo_elementwise: sigma must be positive");
  const Index n = a.size();
  if (a.isZero(0.0)) {
    L1Norm l1;
    return stay_put(Point(or_zero(y, n)), &l1);
  }

  Index best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const double sgn = a(i) < 0 ? -1.0 : 1.0;
    const double denom = 1.0 + xi(i) * sgn;
    if (!(denom > 0)) throw PreconditionViolation("lo_elementwise: |xi_i| must be below 1");
    const double score = -std::abs(a(i)) / denom;
    if (score < best_score) {
      best_score = score;
      best = i;
    }
  }
  const double sgn = a(best) < 0 ? -1.0 : 1.0;
  const double denom = 1.0 + xi(best) * sgn;

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  u(best) = -sigma * sgn / denom;
  const double lambda = std::abs(a(best)) / denom;
  Eigen::VectorXd w = xi - a / lambda;
  w(best) = -sgn;

  LOOutput out;
  out.objective_value = a(best) * u(best);
  out.u = Point(std::move(u));
  out.multiplier = lambda;
  out.active_subgradient = Point(std::move(w));
  return out;
}

AngularSolution solve_angular_subproblem(const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  if (b.size() != c.size()) throw DimensionMismatch("solve_angular_subproblem: b and c lengths differ");
  const double cc = c.squaredNorm();
  if (!(cc < 1.0)) throw PreconditionViolation("solve_angular_subproblem: requires ||c|| < 1");
  AngularSolution s;
  const double bb = b.squaredNorm();
  if (bb == 0.0) {
    s.w = unit_sign(b);
    s.kappa = 0.0;
    s.t = 0.0;
    return s;
  }
  const double bc = b.dot(c);
  s.t = (bc + std::sqrt(bc * bc + bb * (1.0 - cc))) / bb;
  s.w = c - s.t * b;
  s.w /= s.w.norm();
  s.kappa = b.dot(s.w) / (1.0 - c.dot(s.w));
  return s;
}

LOOutput lo_group(const Eigen::VectorXd& a, const Eigen::VectorXd& xi, double sigma,
                  const Partition& blocks, const Eigen::VectorXd& y) {
  require_same_length(a, xi, "lo_group");
  if (!(sigma > 0)) throw PreconditionViolation("lo_group: sigma must be positive");
  const Index n = a.size();
  validate_partition(blocks, n);
  if (a.isZero(0.0)) {
    GroupL1Norm p1(blocks);
    return stay_put(Point(or_zero(y, n)), &p1);
  }

  std::size_t best = 0;
  AngularSolution best_sol;
  best_sol.kappa = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto& block = blocks[j];
    Eigen::VectorXd b(static_cast<Index>(block.size())), c(static_cast<Index>(block.size()));
    for (std::size_t k = 0; k < block.size(); ++k) {
      b(static_cast<Index>(k)) = a(block[k]);
      c(static_cast<Index>(k)) = xi(block[k]);
    }
    AngularSolution sol = solve_angular_subproblem(b, c);
    if (sol.kappa < best_sol.kappa) {
      best_sol = std::move(sol);
      best = j;
    }
  }

  const auto& block = blocks[best];
  double cw = 0.0;
  for (std::size_t k = 0; k < block.size(); ++k) cw += xi(block[k]) * best_sol.w(static_cast<Index>(k));
  const double radius = sigma / (1.0 - cw);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = xi - best_sol.t * a;
  double value = 0.0;
  for (std::size_t k = 0; k < block.size(); ++k) {
    const Index i = block[k];
    u(i) = radius * best_sol.w(static_cast<Index>(k));
    w(i) = best_sol.w(static_cast<Index>(k));
    value += a(i) * u(i);
  }

  LOOutput out;
  out.u = Point(std::move(u));
  out.multiplier = 1.0 / best_sol.t;
  out.active_subgradient = Point(std::move(w));
  out.objective_value = value;
  return out;
}

LOOutput lo_nuclear(const Point& a, const Point& xi, double sigma, const NuclearOracleOptions& options,
                    const std::optional<Point>& y) {
  if (!a.is_matrix()) throw DimensionMismatch("lo_nuclear: a must be a matrix");
  require_compatible(a, xi);
  if (!(sigma > 0)) throw PreconditionViolation("lo_nuclear: sigma must be positive");
  const Index m = a.rows();
  const Index n = a.cols();
  if (is_zero(a)) {
    NuclearNorm p1;
    return stay_put(y ? *y : Point(FactoredMatrix::zero(m, n)), &p1);
  }

  const linalg::PencilOperator pencil = linalg::make_pencil(a, xi);
  Eigen::VectorXd start;
  if (options.warm_start && options.warm_start->size() == m + n && !options.warm_start->isZero(0.0))
    start = *options.warm_start;
  else
    start = Eigen::VectorXd::Constant(m + n, 1.0 / std::sqrt(double(m + n)));
  const linalg::EigenPair e = linalg::gen_eig_smallest(pencil, start, options.eig);
  if (!(e.lambda < 0))
    throw NonConvergence("lo_nuclear: smallest generalized eigenvalue is not negative");

  const Eigen::VectorXd z1 = e.z.head(m);
  const Eigen::VectorXd z2 = e.z.tail(n);
  LOOutput out;
  out.u = Point(FactoredMatrix::rank_one(2.0 * sigma, z1, z2));
  out.multiplier = -e.lambda;
  out.objective_value = inner(a, out.u);
  out.warm_start = e.z;
  out.eig_iterations = e.iterations;
  if (options.want_certificate) {
    out.active_subgradient =
        Point(Eigen::MatrixXd(xi.to_dense() - a.to_dense() / out.multiplier));
  }
  return out;
}

LOOutput lo_strongly_convex(const Eigen::VectorXd& a, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& xi, const DCConstraint& constraint) {
  const auto* sc = std::get_if<structure::StronglyConvex>(&constraint.structure);
  if (!sc) throw PreconditionViolation("lo_strongly_convex: constraint is not strongly convex");
  require_same_length(a, xi, "lo_strongly_convex");
  if (y.size() != a.size()) throw DimensionMismatch("lo_strongly_convex: y length differs");
  if (a.isZero(0.0)) return stay_put(Point(y), constraint.p1.get());

  const Point yp(y);
  const Point xp(xi);
  const double level = effective_level(constraint, yp, xp);
  const double rho = sc->rho;
  auto point_at = [&](double iota) { return sc->prox((xi - iota * a) / rho, 1.0 / rho); };
  auto residual = [&](const Eigen::VectorXd& x) {
    return constraint.p1->value(Point(x)) - xi.dot(x) - level;
  };

  double lo = 1e-12;
  Eigen::VectorXd x_lo = point_at(lo);
  double r_lo = residual(x_lo);
  if (r_lo > 0)
    throw PreconditionViolation("lo_strongly_convex: no strictly feasible point (Slater fails)");
  double hi = 1.0;
  while (residual(point_at(hi)) <= 0) {
    hi *= 2.0;
    if (hi > 1e300) throw PreconditionViolation("lo_strongly_convex: interior optimum");
  }
  // Bisection keeping the feasible endpoint.
  for (int it = 0; it < 400 && r_lo < -1e-12 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi;
       ++it) {
    const double mid = 0.5 * (lo + hi);
    Eigen::VectorXd x_mid = point_at(mid);
    const double r_mid = residual(x_mid);
    if (r_mid <= 0) {
      lo = mid;
      x_lo = std::move(x_mid);
      r_lo = r_mid;
    } else {
      hi = mid;
    }
  }

  LOOutput out;
  out.objective_value = a.dot(x_lo);
  out.u = Point(std::move(x_lo));
  out.multiplier = 1.0 / lo;
  out.active_subgradient = Point(Eigen::VectorXd(xi - lo * a));
  return out;
}

AtomicDecomposition atomic_decomposition(const Point& y, const Structure& structure) {
  if (is_zero(y)) throw PreconditionViolation("atomic_decomposition: y must be nonzero");
  AtomicDecomposition d;
  if (std::holds_alternative<structure::Nuclear>(structure)) {
    if (!y.is_matrix()) throw DimensionMismatch("atomic_decomposition: nuclear structure needs a matrix");
    const FactoredMatrix f =
        y.kind() == Point::Kind::Factored ? y.factored() : linalg::thin_svd(y.to_dense());
    double total = 0.0;
    for (Index k = 0; k < f.rank(); ++k)
      if (f.s(k) > kRankThreshold) total += f.s(k);
    if (total == 0.0) throw PreconditionViolation("atomic_decomposition: no singular value above 1e-6");
    for (Index k = 0; k < f.rank(); ++k) {
      if (!(f.s(k) > kRankThreshold)) continue;
      d.atoms.emplace_back(FactoredMatrix::rank_one(1.0, f.U.col(k), f.W.col(k)));
      d.weights.push_back(f.s(k) / total);
    }
    d.scale = total;
    return d;
  }

  const auto& v = y.vector();
  Partition blocks;
  if (const auto* g = std::get_if<structure::GroupL1>(&structure))
    blocks = g->blocks;
  else if (std::holds_alternative<structure::ElementwiseL1>(structure))
    blocks = singleton_partition(v.size());
  else
    throw PreconditionViolation("atomic_decomposition: structure is not an atomic norm");

  std::vector<double> norms;
  double total = 0.0;
  for (const auto& block : blocks) {
    double sq = 0.0;
    for (Index i : block) sq += v(i) * v(i);
    norms.push_back(std::sqrt(sq));
    total += norms.back();
  }
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    if (norms[j] == 0.0) continue;
    Eigen::VectorXd atom = Eigen::VectorXd::Zero(v.size());
    for (Index i : blocks[j]) atom(i) = v(i) / norms[j];
    d.atoms.emplace_back(std::move(atom));
    d.weights.push_back(norms[j] / total);
  }
  d.scale = total;
  return d;
}

std::size_t away_pad_index(const Point& a, const Point& xi, const AtomicDecomposition& d,
                           double sigma) {
  if (d.atoms.empty()) throw PreconditionViolation("away_pad_index: empty decomposition");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.atoms.size(); ++i) {
    const double value = sigma * inner(a, d.atoms[i]) / (1.0 - inner(xi, d.atoms[i]));
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  return best;
}

AwaySet build_away_set(const Point& y, const Point& xi, const AtomicDecomposition& d, double sigma,
                       std::size_t pad_index) {
  if (d.atoms.empty() || d.atoms.size() != d.weights.size())
    throw PreconditionViolation("build_away_set: malformed decomposition");
  if (pad_index >= d.atoms.size()) throw PreconditionViolation("build_away_set: pad index out of range");
  if (!(sigma > 0)) throw PreconditionViolation("build_away_set: sigma must be positive");
  require_compatible(y, xi);

  AwaySet s;
  std::vector<double> xs;
  double total = 0.0;
  for (std::size_t i = 0; i < d.atoms.size(); ++i) {
    const double xs_i = inner(xi, d.atoms[i]);
    if (!(1.0 - xs_i > 0)) throw PreconditionViolation("build_away_set: requires 1 - <xi, s> > 0");
    xs.push_back(xs_i);
    s.points.push_back(scaled(d.atoms[i], sigma / (1.0 - xs_i)));
    s.weights.push_back(d.weights[i] * d.scale * (1.0 - xs_i) / sigma);
    total += s.weights.back();
  }
  const double deficit = 1.0 - total;
  if (std::abs(deficit) <= 1e-10) return s;
  if (deficit < 0) {
    // y sits marginally outside the level set; renormalise instead of padding.
    for (double& c : s.weights) c /= total;
    return s;
  }
  const double xp = xs[pad_index];
  s.weights[pad_index] += deficit * (1.0 - xp) / 2.0;
  s.points.push_back(scaled(d.atoms[pad_index], -sigma / (1.0 + xp)));
  s.weights.push_back(deficit * (1.0 + xp) / 2.0);
  return s;
}

std::pair<Point, std::size_t> awo_select(const Point& a, const AwaySet& s) {
  if (s.points.empty()) throw PreconditionViolation("awo_select: empty away set");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const double value = inner(a, s.points[i]);
    if (value > best_value) {
      best_value = value;
      best = i;
    }
  }
  return {s.points[best], best};
}

double max_away_step(const AwaySet& s, std::size_t index, double zeta) {
  if (index >= s.weights.size()) throw PreconditionViolation("max_away_step: index out of range");
  const double c = s.weights[index];
  if (c >= 1.0) return zeta;
  return std::min(c / (1.0 - c), zeta);
}

LOOutput linear_oracle(const LOQuery& q, const NuclearOracleOptions& nuclear) {
  require_compatible(q.a, q.y);
  require_compatible(q.a, q.xi);
  const DCConstraint& c = q.constraint;
  const double level = effective_level(c, q.y, q.xi);
  if (std::holds_alternative<structure::ElementwiseL1>(c.structure))
    return lo_elementwise(q.a.vector(), q.xi.vector(), level, q.y.vector());
  if (const auto* g = std::get_if<structure::GroupL1>(&c.structure))
    return lo_group(q.a.vector(), q.xi.vector(), level, g->blocks, q.y.vector());
  if (std::holds_alternative<structure::Nuclear>(c.structure))
    return lo_nuclear(q.a, q.xi, level, nuclear, q.y);
  if (std::holds_alternative<structure::StronglyConvex>(c.structure))
    return lo_strongly_convex(q.a.vector(), q.y.vector(), q.xi.vector(), c);
  throw PreconditionViolation("linear_oracle: no closed-form oracle for a generic constraint");
}

}  // namespace dcfw
