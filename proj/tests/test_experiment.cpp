#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "dcfw/experiment.hpp"
#include "helpers.hpp"

using namespace dcfw;

namespace {

RatingsDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_ratings(in);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "dcfw_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("ratings parsing") {
  const RatingsDataset d = parse("1::10::4.0::978300760\n2::10::3.0::978300761");
  CHECK(d.n_users == 2);
  CHECK(d.n_items == 1);
  CHECK(d.centering_offset == doctest::Approx(3.5));
  CHECK(d.rating[0] == doctest::Approx(0.5));
  CHECK(d.rating[1] == doctest::Approx(-0.5));
  CHECK(d.raw(0) == doctest::Approx(4.0));

  const RatingsDataset gap = parse("1::7::5\n\n9::3::1\n");
  CHECK(gap.n_users == 2);
  CHECK(gap.n_items == 2);
  CHECK(gap.user == std::vector<Index>{0, 1});
  CHECK(gap.item == std::vector<Index>{1, 0});

  try {
    parse("abc\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
  try {
    parse("1::2::3\n1::x::3\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(ingest_ratings("/nonexistent/ratings.dat"), Error);
}

TEST_CASE("train/test split") {
  std::string text;
  for (int i = 1; i <= 10; ++i) text += std::to_string(i) + "::" + std::to_string(i % 3 + 1) + "::" + std::to_string(i % 5) + "\n";
  const RatingsDataset d = parse(text);
  const auto [train, test] = split_dataset(d, 0.7, 42);
  CHECK(train.size() == 7);
  CHECK(test.size() == 3);
  CHECK(train.n_users == d.n_users);

  std::multiset<std::tuple<Index, Index, double>> all, parts;
  for (std::size_t k = 0; k < d.size(); ++k) all.insert({d.user[k], d.item[k], d.rating[k]});
  for (const auto* p : {&train, &test})
    for (std::size_t k = 0; k < p->size(); ++k) parts.insert({p->user[k], p->item[k], p->rating[k]});
  CHECK(all == parts);

  const auto again = split_dataset(d, 0.7, 42);
  CHECK(again.first.user == train.user);
  CHECK(again.first.item == train.item);
  CHECK(split_dataset(d, 0.75, 1).first.size() == 7);
  CHECK(split_dataset(d, 0.79, 1).first.size() == 7);
}

TEST_CASE("synthetic matrix completion data") {
  const SyntheticMC s = gen_synthetic_mc(200, 150, 5, 0.3, 0.01, 1);
  CHECK(s.data.size() == 9000);
  std::set<std::pair<Index, Index>> seen;
  for (std::size_t k = 0; k < s.data.size(); ++k) seen.insert({s.data.user[k], s.data.item[k]});
  CHECK(seen.size() == 9000);

  const SyntheticMC clean = gen_synthetic_mc(20, 15, 2, 0.5, 0.0, 3);
  const Eigen::MatrixXd t = clean.truth();
  for (std::size_t k = 0; k < clean.data.size(); ++k)
    CHECK(clean.data.rating[k] == t(clean.data.user[k], clean.data.item[k]));
  CHECK(clean.truth_nuclear == doctest::Approx(t.jacobiSvd().singularValues().sum()));

  const SyntheticMC zero = gen_synthetic_mc(10, 8, 0, 0.5, 0.0, 3);
  CHECK(zero.truth().norm() == 0.0);
  CHECK(zero.truth_nuclear == 0.0);

  const SyntheticMC again = gen_synthetic_mc(200, 150, 5, 0.3, 0.01, 1);
  CHECK(again.data.rating == s.data.rating);
}

TEST_CASE("written ratings parse back") {
  const SyntheticMC s = gen_synthetic_mc(12, 9, 2, 0.4, 0.1, 5);
  std::stringstream io;
  write_ratings(io, s.data);
  const RatingsDataset back = parse_ratings(io);
  REQUIRE(back.size() == s.data.size());
  for (std::size_t k = 0; k < back.size(); ++k) CHECK(std::abs(back.raw(k) - s.data.raw(k)) < 1e-12);
}

TEST_CASE("experiment configuration files") {
  std::istringstream in("# comment\nproblem = cs\nsigma = 2.5\nvariant = afw\nmax_iter=17\n\ntiming = false\n");
  const ExperimentConfig c = parse_experiment_config(in);
  CHECK(c.problem == ProblemKind::CS);
  CHECK(c.sigma.value() == 2.5);
  CHECK(c.solver.variant == Variant::AFW);
  CHECK(c.solver.max_iter == 17);
  CHECK_FALSE(c.timing);

  std::istringstream bad("sigma = 1\nbogus = 3\n");
  try {
    parse_experiment_config(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream badval("mu = lots\n");
  CHECK_THROWS_AS(parse_experiment_config(badval), ParseError);
}

TEST_CASE("trace format") {
  CHECK(std::string(TraceWriter::header()) == "iter,elapsed_s,f,fw_gap,step_type,alpha,backtracks,rank,constraint_value");
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(relative_gap(10.0, 2.0) == doctest::Approx(0.25));
  CHECK(relative_gap(0.5, 0.25) == doctest::Approx(0.25));
}

TEST_CASE("compressed sensing experiment stays feasible") {
  ExperimentConfig c;
  c.problem = ProblemKind::CS;
  c.sigma = 1.0;
  c.mu = 0.5;
  c.solver.max_iter = 500;
  const ExperimentResult r = run_experiment(c);
  double slack = -1.0;
  for (const auto& [k, v] : r.summary)
    if (k == "feasibility_slack") slack = std::stod(v);
  CHECK(slack >= 0.0);
  CHECK(slack <= 1e-9);
}

TEST_CASE("matrix completion traces are monotone and reproducible") {
  const auto trace1 = scratch("mc1.csv"), trace2 = scratch("mc2.csv");
  ExperimentConfig c;
  c.problem = ProblemKind::MC;
  c.rows = 40;
  c.cols = 30;
  c.rank = 2;
  c.solver.max_iter = 60;
  c.timing = false;
  c.trace_path = trace1.string();
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.test_rmse.has_value());
  c.trace_path = trace2.string();
  run_experiment(c);

  const std::string a = slurp(trace1);
  CHECK(a == slurp(trace2));

  std::istringstream lines(a);
  std::string line;
  std::getline(lines, line);
  CHECK(line == TraceWriter::header());
  double prev = std::numeric_limits<double>::infinity();
  int rows = 0;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string iter, elapsed, f;
    std::getline(fields, iter, ',');
    std::getline(fields, elapsed, ',');
    std::getline(fields, f, ',');
    CHECK(elapsed == "0");
    const double fv = std::stod(f);
    CHECK(fv <= prev + 1e-12 * std::max(1.0, std::abs(prev)));
    prev = fv;
    ++rows;
  }
  CHECK(rows == static_cast<int>(r.solve.trace.size()));
}

TEST_CASE("missing data files are reported") {
  ExperimentConfig c;
  c.problem = ProblemKind::MC;
  c.data_file = "/nonexistent/ratings.dat";
  CHECK_THROWS_AS(run_experiment(c), Error);
}
