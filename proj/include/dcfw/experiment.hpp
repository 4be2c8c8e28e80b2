#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dcfw/solver.hpp"

namespace dcfw {

/// Rating triples with densely remapped indices, stored centred (rating − centering_offset).
struct RatingsDataset {
  std::vector<Index> user;
  std::vector<Index> item;
  std::vector<double> rating;
  Index n_users = 0;
  Index n_items = 0;
  double centering_offset = 0.0;

  std::size_t size() const { return rating.size(); }
  /// rating + centering_offset
  double raw(std::size_t k) const { return rating[k] + centering_offset; }
};

/// Parses `UserID::MovieID::Rating::Timestamp` lines (timestamp optional and ignored).
/// Ids are remapped densely in increasing order; the offset is the mean rating.
/// Blank lines are skipped. Throws ParseError with the line number, or on empty input.
RatingsDataset parse_ratings(std::istream& in);
RatingsDataset ingest_ratings(const std::string& path);

/// Writes raw ratings as `user+1::item+1::rating::0` lines.
void write_ratings(std::ostream& out, const RatingsDataset& d);

/// Uniform random split with |train| = floor(fraction·size). Both parts keep the
/// dimensions and offset of `d`.
std::pair<RatingsDataset, RatingsDataset> split_dataset(const RatingsDataset& d, double train_fraction,
                                                        std::uint64_t seed);

/// Shifts the stored ratings so the offset becomes `offset` (raw values unchanged).
RatingsDataset recentered(const RatingsDataset& d, double offset);

struct SyntheticMC {
  RatingsDataset data;       // offset 0, rows/cols not remapped
  Eigen::MatrixXd left;      // m × r
  Eigen::MatrixXd right;     // n × r
  double truth_nuclear = 0;  // ‖left·rightᵀ‖_*

  Eigen::MatrixXd truth() const { return left * right.transpose(); }
};

/// Truth L Rᵀ with L, R ~ N(0, 1/√rank) entrywise (unit-variance truth entries),
/// llround(fraction·m·n) distinct entries observed with N(0, noise²) added.
SyntheticMC gen_synthetic_mc(Index m, Index n, Index rank, double obs_fraction, double noise,
                             std::uint64_t seed);

/// b = A x* + noise with A ~ N(0, 1/m) and a block-sparse x*.
struct SyntheticRegression {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd truth;
  Partition blocks;  // singletons for compressed sensing
};

/// Compressed sensing: `sparsity` nonzero entries of x*.
SyntheticRegression gen_synthetic_cs(Index n, Index measurements, Index sparsity, double noise,
                                     std::uint64_t seed);
/// Group sparsity: `active_groups` of `groups` contiguous blocks nonzero.
SyntheticRegression gen_synthetic_gl(Index n, Index measurements, Index groups, Index active_groups,
                                     double noise, std::uint64_t seed);

enum class ProblemKind { CS, GL, MC };
std::string problem_name(ProblemKind p);
ProblemKind parse_problem(const std::string& s);

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::MC;
  /// Defaults: 0.9·(P₁ − P₂)(x*) for synthetic data, 2.5932 for a ratings file.
  std::optional<double> sigma;
  double mu = 0.5;
  SolverConfig solver;
  std::uint64_t seed = 1;  // data generation and train/test split

  std::optional<std::string> data_file;  // mc only
  // cs / gl
  Index n = 100;
  Index measurements = 50;
  Index sparsity = 5;
  Index groups = 10;
  Index active_groups = 2;
  double noise = 0.01;
  // mc
  Index rows = 200;
  Index cols = 150;
  Index rank = 5;
  double obs_fraction = 0.3;
  double train_fraction = 0.7;

  std::optional<std::string> trace_path;
  std::optional<std::string> summary_path;
  /// Off: elapsed_s and wall times are written as 0 so reruns are byte-identical.
  bool timing = true;

  void validate() const;
};

/// Reads `key = value` lines with `#` comments over the defaults in `base`.
/// Unknown keys and malformed values raise ParseError with the line number.
ExperimentConfig parse_experiment_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_experiment_config(const std::string& path, ExperimentConfig base = {});

/// Everything needed to run and score one experiment.
struct BuiltExperiment {
  ProblemInstance problem;
  std::optional<RatingsDataset> train;  // mc only, centred on the training mean
  std::optional<RatingsDataset> test;
  double truth_value = 0.0;  // (P₁ − P₂)(x*) for synthetic data, 0 otherwise
  double sigma = 0.0;
};

BuiltExperiment build_experiment(const ExperimentConfig& config);

/// gap / max{|f − gap|, 1}, the quantity the stopping rule compares with its tolerance.
double relative_gap(double f, double gap);

/// sqrt(mean (x_ij − r_ij)²) over the entries of d (centred values on both sides).
double rmse(const Point& x, const RatingsDataset& d);

struct ExperimentResult {
  SolveResult solve;
  /// Ordered key=value pairs of the summary.
  std::vector<std::pair<std::string, std::string>> summary;
  std::optional<double> train_rmse;
  std::optional<double> test_rmse;
  int rank = 0;
};

/// Builds the problem, solves it, writes the trace and summary files when configured.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// CSV writer for the trace schema; flushes at least every 100 records.
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, bool timing);
  void write(const TraceRecord& r);
  void flush();

  static const char* header();

 private:
  std::ostream& out_;
  bool timing_;
  std::size_t pending_ = 0;
};

/// Shortest round-trip decimal form, independent of locale.
std::string format_number(double v);

std::string format_summary(const std::vector<std::pair<std::string, std::string>>& summary);

}  // namespace dcfw
