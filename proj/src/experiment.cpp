#include "dcfw/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include <Eigen/SVD>

#include "dcfw/random.hpp"

namespace dcfw {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class T>
bool parse_full(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_on(std::string_view s, std::string_view sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + sep.size();
  }
}

// Sorted unique ids, then each id's position among them.
std::vector<Index> dense_remap(const std::vector<long long>& ids, Index& count) {
  std::vector<long long> uniq(ids);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  count = static_cast<Index>(uniq.size());
  std::vector<Index> out(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k)
    out[k] = std::lower_bound(uniq.begin(), uniq.end(), ids[k]) - uniq.begin();
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

RatingsDataset subset(const RatingsDataset& d, const std::vector<std::size_t>& idx) {
  RatingsDataset out;
  out.n_users = d.n_users;
  out.n_items = d.n_items;
  out.centering_offset = d.centering_offset;
  out.user.reserve(idx.size());
  out.item.reserve(idx.size());
  out.rating.reserve(idx.size());
  for (std::size_t k : idx) {
    out.user.push_back(d.user[k]);
    out.item.push_back(d.item[k]);
    out.rating.push_back(d.rating[k]);
  }
  return out;
}

Observations observations_of(const RatingsDataset& d) {
  Observations obs;
  obs.rows = d.n_users;
  obs.cols = d.n_items;
  obs.row = d.user;
  obs.col = d.item;
  obs.value = Eigen::Map<const Eigen::VectorXd>(d.rating.data(), static_cast<Index>(d.size()));
  return obs;
}

double nuclear_norm_of(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues().sum();
}

}  // namespace

// --- ratings ----------------------------------------------------------------

RatingsDataset parse_ratings(std::istream& in) {
  std::vector<long long> users, items;
  std::vector<double> ratings;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const auto fields = split_on(body, "::");
    long long u = 0, i = 0;
    double r = 0.0;
    if ((fields.size() != 3 && fields.size() != 4) || !parse_full(fields[0], u) || !parse_full(fields[1], i) ||
        !parse_full(fields[2], r) || !std::isfinite(r))
      throw ParseError("expected UserID::MovieID::Rating::Timestamp, got '" + std::string(body) + "'", lineno);
    users.push_back(u);
    items.push_back(i);
    ratings.push_back(r);
  }
  if (ratings.empty()) throw ParseError("no ratings in input", 0);

  RatingsDataset d;
  d.user = dense_remap(users, d.n_users);
  d.item = dense_remap(items, d.n_items);
  d.centering_offset = mean_of(ratings);
  for (double& r : ratings) r -= d.centering_offset;
  d.rating = std::move(ratings);
  return d;
}

RatingsDataset ingest_ratings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ratings file '" + path + "'");
  return parse_ratings(in);
}

void write_ratings(std::ostream& out, const RatingsDataset& d) {
  for (std::size_t k = 0; k < d.size(); ++k)
    out << d.user[k] + 1 << "::" << d.item[k] + 1 << "::" << format_number(d.raw(k)) << "::0\n";
}

std::pair<RatingsDataset, RatingsDataset> split_dataset(const RatingsDataset& d, double train_fraction,
                                                        std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw PreconditionViolation("split_dataset: fraction must lie in (0, 1)");
  std::vector<std::size_t> perm(d.size());
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
  Rng rng(seed);
  rng.shuffle(perm);
  // The small guard keeps products like 0.7·10 from flooring to 6.
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(d.size()) + 1e-9));
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {subset(d, train), subset(d, test)};
}

RatingsDataset recentered(const RatingsDataset& d, double offset) {
  RatingsDataset out = d;
  for (std::size_t k = 0; k < out.size(); ++k) out.rating[k] = d.raw(k) - offset;
  out.centering_offset = offset;
  return out;
}

// --- synthetic data ---------------------------------------------------------

SyntheticMC gen_synthetic_mc(Index m, Index n, Index rank, double obs_fraction, double noise,
                             std::uint64_t seed) {
  if (m <= 0 || n <= 0) throw PreconditionViolation("gen_synthetic_mc: dimensions must be positive");
  if (rank < 0 || rank > std::min(m, n)) throw PreconditionViolation("gen_synthetic_mc: rank out of range");
  if (!(obs_fraction > 0.0 && obs_fraction <= 1.0))
    throw PreconditionViolation("gen_synthetic_mc: observation fraction must lie in (0, 1]");
  if (!(noise >= 0.0)) throw PreconditionViolation("gen_synthetic_mc: noise must be nonnegative");

  Rng rng(seed);
  SyntheticMC s;
  const double factor_scale = rank > 0 ? std::pow(static_cast<double>(rank), -0.25) : 0.0;
  s.left = factor_scale * rng.normal_matrix(m, rank);
  s.right = factor_scale * rng.normal_matrix(n, rank);
  const Eigen::MatrixXd truth = s.truth();
  s.truth_nuclear = nuclear_norm_of(truth);

  const auto total = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n);
  const auto count = static_cast<std::uint64_t>(std::llround(obs_fraction * static_cast<double>(total)));
  const std::vector<std::uint64_t> picks = rng.sample(total, std::max<std::uint64_t>(count, 1));
  RatingsDataset& d = s.data;
  d.n_users = m;
  d.n_items = n;
  for (std::uint64_t p : picks) {
    const auto i = static_cast<Index>(p / static_cast<std::uint64_t>(n));
    const auto j = static_cast<Index>(p % static_cast<std::uint64_t>(n));
    d.user.push_back(i);
    d.item.push_back(j);
    d.rating.push_back(noise > 0.0 ? truth(i, j) + noise * rng.normal() : truth(i, j));
  }
  return s;
}

namespace {

SyntheticRegression regression_from(Rng& rng, Index n, Index measurements, Partition blocks,
                                    const std::vector<std::uint64_t>& active, double noise) {
  if (measurements <= 0) throw PreconditionViolation("synthetic regression: need at least one measurement");
  if (!(noise >= 0.0)) throw PreconditionViolation("synthetic regression: noise must be nonnegative");
  SyntheticRegression s;
  s.A = rng.normal_matrix(measurements, n) / std::sqrt(static_cast<double>(measurements));
  s.truth = Eigen::VectorXd::Zero(n);
  for (std::uint64_t g : active)
    for (Index i : blocks[g]) s.truth(i) = rng.normal();
  s.b = s.A * s.truth;
  if (noise > 0.0) s.b += noise * rng.normal_vector(measurements);
  s.blocks = std::move(blocks);
  return s;
}

}  // namespace

SyntheticRegression gen_synthetic_cs(Index n, Index measurements, Index sparsity, double noise,
                                     std::uint64_t seed) {
  if (n <= 0 || sparsity < 0 || sparsity > n) throw PreconditionViolation("gen_synthetic_cs: bad sizes");
  Rng rng(seed);
  const auto active = rng.sample(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(sparsity));
  return regression_from(rng, n, measurements, singleton_partition(n), active, noise);
}

SyntheticRegression gen_synthetic_gl(Index n, Index measurements, Index groups, Index active_groups,
                                     double noise, std::uint64_t seed) {
  if (n <= 0 || groups <= 0 || groups > n || active_groups < 0 || active_groups > groups)
    throw PreconditionViolation("gen_synthetic_gl: bad sizes");
  Rng rng(seed);
  const auto active = rng.sample(static_cast<std::uint64_t>(groups), static_cast<std::uint64_t>(active_groups));
  return regression_from(rng, n, measurements, contiguous_partition(n, groups), active, noise);
}

// --- configuration ----------------------------------------------------------

std::string problem_name(ProblemKind p) {
  switch (p) {
    case ProblemKind::CS: return "cs";
    case ProblemKind::GL: return "gl";
    case ProblemKind::MC: return "mc";
  }
  return "?";
}

ProblemKind parse_problem(const std::string& s) {
  if (s == "cs") return ProblemKind::CS;
  if (s == "gl") return ProblemKind::GL;
  if (s == "mc") return ProblemKind::MC;
  throw PreconditionViolation("unknown problem '" + s + "' (expected cs, gl or mc)");
}

void ExperimentConfig::validate() const {
  if (sigma && !(*sigma > 0.0)) throw PreconditionViolation("sigma must be positive");
  if (!(mu >= 0.0 && mu < 1.0)) throw PreconditionViolation("mu must lie in [0, 1)");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw PreconditionViolation("train_fraction must lie in (0, 1)");
  if (!(obs_fraction > 0.0 && obs_fraction <= 1.0))
    throw PreconditionViolation("obs_fraction must lie in (0, 1]");
  if (!(noise >= 0.0)) throw PreconditionViolation("noise must be nonnegative");
  if (n <= 0 || measurements <= 0 || rows <= 0 || cols <= 0)
    throw PreconditionViolation("dimensions must be positive");
  if (sparsity < 0 || sparsity > n) throw PreconditionViolation("sparsity must lie in [0, n]");
  if (groups <= 0 || groups > n || active_groups < 0 || active_groups > groups)
    throw PreconditionViolation("need 0 < groups <= n and 0 <= active_groups <= groups");
  if (rank < 0 || rank > std::min(rows, cols)) throw PreconditionViolation("rank must lie in [0, min(rows, cols)]");
  if (data_file && problem != ProblemKind::MC) throw PreconditionViolation("data_file applies to mc only");
  solver.validate();
}

ExperimentConfig parse_experiment_config(std::istream& in, ExperimentConfig cfg) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", lineno);
    const std::string key(trim(body.substr(0, eq)));
    const std::string_view value = trim(body.substr(eq + 1));

    auto real = [&] {
      double v = 0.0;
      if (!parse_full(value, v)) throw ParseError("'" + key + "' needs a number", lineno);
      return v;
    };
    auto integer = [&] {
      long long v = 0;
      if (!parse_full(value, v)) throw ParseError("'" + key + "' needs an integer", lineno);
      return v;
    };
    auto boolean = [&] {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      throw ParseError("'" + key + "' needs true or false", lineno);
    };

    try {
      SolverConfig& s = cfg.solver;
      if (key == "problem") cfg.problem = parse_problem(std::string(value));
      else if (key == "sigma") cfg.sigma = real();
      else if (key == "mu") cfg.mu = real();
      else if (key == "variant") s.variant = parse_variant(std::string(value));
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer());
      else if (key == "c") s.c = real();
      else if (key == "eta") s.eta = real();
      else if (key == "eps_aw") s.eps_aw = real();
      else if (key == "zeta") s.zeta = real();
      else if (key == "rel_gap_tol") s.rel_gap_tol = real();
      else if (key == "max_iter") s.max_iter = static_cast<int>(integer());
      else if (key == "time_budget") s.time_budget_s = real();
      else if (key == "alpha0_floor") s.alpha0_floor = real();
      else if (key == "boundary_boost") s.boundary_boost = boolean();
      else if (key == "max_backtracks") s.max_backtracks = static_cast<int>(integer());
      else if (key == "eig_tol") s.eig.tol = real();
      else if (key == "eig_max_iter") s.eig.max_iter = static_cast<int>(integer());
      else if (key == "data_file") cfg.data_file = std::string(value);
      else if (key == "n") cfg.n = integer();
      else if (key == "measurements") cfg.measurements = integer();
      else if (key == "sparsity") cfg.sparsity = integer();
      else if (key == "groups") cfg.groups = integer();
      else if (key == "active_groups") cfg.active_groups = integer();
      else if (key == "noise") cfg.noise = real();
      else if (key == "rows") cfg.rows = integer();
      else if (key == "cols") cfg.cols = integer();
      else if (key == "rank") cfg.rank = integer();
      else if (key == "obs_fraction") cfg.obs_fraction = real();
      else if (key == "train_fraction") cfg.train_fraction = real();
      else if (key == "trace") cfg.trace_path = std::string(value);
      else if (key == "summary") cfg.summary_path = std::string(value);
      else if (key == "timing") cfg.timing = boolean();
      else throw ParseError("unknown key '" + key + "'", lineno);
    } catch (const PreconditionViolation& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  return parse_experiment_config(in, std::move(base));
}

// --- experiments ------------------------------------------------------------

BuiltExperiment build_experiment(const ExperimentConfig& config) {
  config.validate();
  BuiltExperiment b;
  const double mu = config.mu;
  auto pick_sigma = [&](double fallback) {
    b.sigma = config.sigma ? *config.sigma : fallback;
    if (!(b.sigma > 0.0)) b.sigma = 1.0;
  };

  if (config.problem == ProblemKind::MC) {
    RatingsDataset all;
    if (config.data_file) {
      all = ingest_ratings(*config.data_file);
      pick_sigma(2.5932);
    } else {
      SyntheticMC s = gen_synthetic_mc(config.rows, config.cols, config.rank, config.obs_fraction, config.noise,
                                       config.seed);
      const Eigen::MatrixXd truth = s.truth();
      b.truth_value = s.truth_nuclear - mu * truth.norm();
      all = std::move(s.data);
      pick_sigma(0.9 * s.truth_nuclear);
    }
    auto [train, test] = split_dataset(all, config.train_fraction, config.seed);
    const double offset = mean_of([&] {
      std::vector<double> raw(train.size());
      for (std::size_t k = 0; k < train.size(); ++k) raw[k] = train.raw(k);
      return raw;
    }());
    b.train = recentered(train, offset);
    b.test = recentered(test, offset);
    b.problem.objective = std::make_shared<MatrixCompletionObjective>(observations_of(*b.train));
    b.problem.constraint = nuclear_minus_frobenius(mu, b.sigma);
    b.problem.initial_point = Point(FactoredMatrix::zero(all.n_users, all.n_items));
    return b;
  }

  const SyntheticRegression s =
      config.problem == ProblemKind::CS
          ? gen_synthetic_cs(config.n, config.measurements, config.sparsity, config.noise, config.seed)
          : gen_synthetic_gl(config.n, config.measurements, config.groups, config.active_groups, config.noise,
                             config.seed);
  DCConstraint c = config.problem == ProblemKind::CS ? l1_minus_l2(mu, 1.0) : group_minus_l2(s.blocks, mu, 1.0);
  b.truth_value = constraint_value(c, Point(s.truth));
  pick_sigma(0.9 * b.truth_value);
  c.sigma = b.sigma;
  b.problem.objective = std::make_shared<LeastSquares>(s.A, s.b);
  b.problem.constraint = std::move(c);
  b.problem.initial_point = Point(Eigen::VectorXd(Eigen::VectorXd::Zero(config.n)));
  return b;
}

double relative_gap(double f, double gap) { return gap / std::max(std::abs(f - gap), 1.0); }

double rmse(const Point& x, const RatingsDataset& d) {
  if (d.size() == 0) return 0.0;
  const Eigen::VectorXd pred = entries_at(x, observations_of(d));
  double s = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double r = pred(static_cast<Index>(k)) - d.rating[k];
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(d.size()));
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const BuiltExperiment b = build_experiment(config);

  std::ofstream trace_file;
  std::optional<TraceWriter> writer;
  if (config.trace_path) {
    trace_file.open(*config.trace_path, std::ios::binary);
    if (!trace_file) throw Error("cannot open trace file '" + *config.trace_path + "'");
    writer.emplace(trace_file, config.timing);
  }
  TraceSink sink;
  if (writer) sink = [&](const TraceRecord& r) { writer->write(r); };

  ExperimentResult out;
  try {
    out.solve = solve(b.problem, config.solver, sink);
  } catch (...) {
    if (writer) writer->flush();
    throw;
  }
  if (writer) writer->flush();

  const SolveResult& s = out.solve;
  const TraceRecord& last = s.trace.back();
  out.rank = last.rank;
  auto& sum = out.summary;
  auto put = [&](const std::string& k, const std::string& v) { sum.emplace_back(k, v); };
  auto num = [&](const std::string& k, double v) { put(k, format_number(v)); };

  put("problem", problem_name(config.problem));
  put("variant", variant_name(config.solver.variant));
  put("seed", std::to_string(config.seed));
  num("sigma", b.sigma);
  num("mu", config.mu);
  put("termination", termination_name(s.termination));
  put("iterations", std::to_string(last.iter));
  num("final_f", last.f);
  num("fw_gap", last.fw_gap);
  num("relative_gap", relative_gap(last.f, last.fw_gap));
  put("rank", std::to_string(last.rank));
  num("constraint_value", last.constraint_value);
  num("feasibility_slack", std::max(0.0, last.constraint_value - b.sigma));
  num("wall_time_s", config.timing ? s.wall_time_s : 0.0);
  if (config.problem == ProblemKind::MC) {
    out.train_rmse = rmse(s.x_final, *b.train);
    out.test_rmse = rmse(s.x_final, *b.test);
    put("rows", std::to_string(b.train->n_users));
    put("cols", std::to_string(b.train->n_items));
    put("train_ratings", std::to_string(b.train->size()));
    put("test_ratings", std::to_string(b.test->size()));
    num("train_rmse", *out.train_rmse);
    num("test_rmse", *out.test_rmse);
    num("centering_offset", b.train->centering_offset);
    put("centering", "global-mean-of-training-ratings (substitute transform)");
  }
  if (b.truth_value != 0.0) num("truth_constraint_value", b.truth_value);

  if (config.summary_path) {
    std::ofstream f(*config.summary_path, std::ios::binary);
    if (!f) throw Error("cannot open summary file '" + *config.summary_path + "'");
    f << format_summary(sum);
  }
  return out;
}

// --- output -----------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string format_summary(const std::vector<std::pair<std::string, std::string>>& summary) {
  std::string out;
  for (const auto& [k, v] : summary) out += k + "=" + v + "\n";
  return out;
}

TraceWriter::TraceWriter(std::ostream& out, bool timing) : out_(out), timing_(timing) {
  out_ << header() << '\n';
}

const char* TraceWriter::header() { return "iter,elapsed_s,f,fw_gap,step_type,alpha,backtracks,rank,constraint_value"; }

void TraceWriter::write(const TraceRecord& r) {
  out_ << r.iter << ',' << format_number(timing_ ? r.elapsed_s : 0.0) << ',' << format_number(r.f) << ','
       << format_number(r.fw_gap) << ',' << step_type_name(r.step_type) << ',' << format_number(r.alpha) << ','
       << r.backtracks << ',' << r.rank << ',' << format_number(r.constraint_value) << '\n';
  if (++pending_ >= 100) flush();
}

void TraceWriter::flush() {
  out_.flush();
  pending_ = 0;
}

}  // namespace dcfw
