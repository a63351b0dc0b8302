#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rkpair/integrate.hpp"
#include "rkpair/problems.hpp"
#include "rkpair/scalar.hpp"

namespace rkpair {

struct WorkPrecisionRecord {
  std::string pair_id;
  std::string problem_id;
  double atol = 0;
  long n_rhs = 0;
  long n_accept = 0;
  long n_reject = 0;
  double error = 0;  // NaN when the integration failed
  std::string failure;
};

// n log-spaced tolerances from hi down to lo.
std::vector<double> default_atol_grid(int n = 25, double hi = 1e-3, double lo = 1e-11);

using NamedPair = std::pair<std::string, ButcherPair>;

// One record per (pair, atol), in pair-major, grid order. Cells run on
// `threads` workers (hardware concurrency when 0).
std::vector<WorkPrecisionRecord> work_precision(const std::vector<NamedPair>& pairs,
                                                const NamedProblem& problem,
                                                const std::vector<double>& atol_grid,
                                                const ControllerConfig& base = {},
                                                unsigned threads = 0);

void write_csv(std::ostream& out, const std::vector<WorkPrecisionRecord>& records);
// gnuplot script plotting error against n_rhs per problem and pair from `csv_path`.
std::string gnuplot_script(const std::string& csv_path,
                           const std::vector<WorkPrecisionRecord>& records,
                           const std::string& output_stem);

// Evaluations needed for `error`, interpolated log-log along one pair's curve;
// absent outside the achieved error range.
std::optional<double> evaluations_at_error(const std::vector<WorkPrecisionRecord>& curve,
                                           double error);

struct ScanRow {
  double c3 = 0;
  std::optional<double> cp3_a, cp3_b, cp3_c_plus, cp3_c_minus;
};

// c'3 on the type A, B and C curves for c6 = 1 and the given c2, c5.
std::vector<ScanRow> family_scan(const Rational& c2, const Rational& c5,
                                 const std::vector<double>& c3_grid);
void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows);

}  // namespace rkpair
