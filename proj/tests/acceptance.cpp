// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dcfw/checks.hpp"

using namespace dcfw;
using namespace dcfw::verify;

namespace {

using Clock = std::chrono::steady_clock;

struct Line {
  std::string name;
  bool passed = true;
  std::string detail;
};

void absorb(Line& line, const CheckResult& r) {
  line.passed = line.passed && r.passed;
  if (!line.detail.empty()) line.detail += "; ";
  line.detail += (r.passed ? "" : "FAILED ") + r.name + ": " + r.detail;
}

Line timed(const std::string& name, double budget_s, const std::function<void(Line&)>& body) {
  Line line{name};
  const auto t0 = Clock::now();
  body(line);
  const double s = std::chrono::duration<double>(Clock::now() - t0).count();
  std::ostringstream os;
  os << "; " << s << " s";
  if (budget_s > 0) {
    os << " of " << budget_s << " s budget";
    if (s > budget_s) {
      line.passed = false;
      os << " (over budget)";
    }
  }
  line.detail += os.str();
  return line;
}

}  // namespace

int main() {
  const QueryFamily vector_families[] = {QueryFamily::Elementwise, QueryFamily::Group, QueryFamily::StronglyConvex};
  const QueryFamily all_families[] = {QueryFamily::Elementwise, QueryFamily::Group, QueryFamily::Nuclear,
                                      QueryFamily::StronglyConvex};
  std::vector<Line> lines;

  lines.push_back(timed("oracle-vs-brute-force", 180.0, [&](Line& l) {
    for (QueryFamily f : vector_families)
      absorb(l, check_oracle_grid(f, 200, 1000000, f == QueryFamily::StronglyConvex ? 1e-5 : 1e-4, 101));
    absorb(l, check_oracle_nuclear(200, 8, 1e-6, 102));
  }));

  lines.push_back(timed("kkt-certification", 60.0, [&](Line& l) {
    for (QueryFamily f : all_families) absorb(l, check_kkt(f, 1000, 1e-8, 1e-3, 201));
  }));

  lines.push_back(timed("feasibility-and-descent", 0.0, [&](Line& l) {
    for (ProblemKind k : {ProblemKind::CS, ProblemKind::GL, ProblemKind::MC})
      absorb(l, check_feasibility_descent(k, 20, 300, 301));
  }));

  lines.push_back(timed("stationarity-2d", 10.0, [&](Line& l) {
    absorb(l, check_stationarity(Variant::FW, 5000, 1000000));
    absorb(l, check_stationarity(Variant::AFW, 5000, 1000000));
  }));

  lines.push_back(timed("classic-fw-reduction", 0.0, [&](Line& l) { absorb(l, check_classic_reduction(50, 501)); }));

  lines.push_back(timed("complexity-trend", 0.0,
                        [&](Line& l) { absorb(l, check_complexity_trend(10, 1000, 0.1, 601)); }));

  lines.push_back(timed("matrix-completion-desk", 0.0, [&](Line& l) {
    const DeskMCReport r = check_desk_matrix_completion(3000, 1e-4, 120.0);
    absorb(l, r.check);
    std::ostringstream os;
    os << "; rank afw " << r.afw_rank << " vs fw " << r.fw_rank << " (reported)";
    l.detail += os.str();
  }));

  lines.push_back(timed("default-constants", 0.0, [&](Line& l) { absorb(l, check_default_constants()); }));

  lines.push_back(timed("linalg-kernels", 0.0, [&](Line& l) {
    absorb(l, check_svd_accumulation(50, 1e-7, 901));
    absorb(l, check_eigensolver(100, 14, 1e-8, 902));
  }));

  bool all = true;
  for (const Line& l : lines) {
    all = all && l.passed;
    std::printf("%s %s: %s\n", l.passed ? "PASS" : "FAIL", l.name.c_str(), l.detail.c_str());
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}
