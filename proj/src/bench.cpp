#include "rkpair/bench.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "rkpair/derive.hpp"
#include "rkpair/errors.hpp"

namespace rkpair {

std::vector<double> default_atol_grid(int n, double hi, double lo) {
  if (n < 2 || !(hi > lo) || !(lo > 0)) throw RangeError("invalid tolerance grid");
  std::vector<double> grid;
  const double a = std::log10(hi), b = std::log10(lo);
  for (int i = 0; i < n; ++i) grid.push_back(std::pow(10.0, a + (b - a) * i / (n - 1)));
  return grid;
}

std::vector<WorkPrecisionRecord> work_precision(const std::vector<NamedPair>& pairs,
                                                const NamedProblem& problem,
                                                const std::vector<double>& atol_grid,
                                                const ControllerConfig& base, unsigned threads) {
  if (atol_grid.empty()) throw RangeError("empty tolerance grid");
  for (std::size_t i = 0; i < atol_grid.size(); ++i) {
    if (!(atol_grid[i] > 0)) throw RangeError("tolerances must be positive");
    if (i > 0 && !(atol_grid[i] < atol_grid[i - 1])) {
      throw RangeError("tolerance grid must be strictly descending");
    }
  }
  if (!problem.closed_form) reference_solution(problem, problem.tend);

  const std::size_t cells = pairs.size() * atol_grid.size();
  std::vector<WorkPrecisionRecord> records(cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells; i = next++) {
      const auto& [id, pair] = pairs[i / atol_grid.size()];
      WorkPrecisionRecord& r = records[i];
      r.pair_id = id;
      r.problem_id = problem.id;
      r.atol = atol_grid[i % atol_grid.size()];
      ControllerConfig cfg = base;
      cfg.atol = r.atol;
      cfg.record_trajectory = true;
      cfg.record_steps = false;
      try {
        const IntegrationStats s =
            integrate_adaptive(pair, problem.system, problem.t0, problem.tend, problem.x0, cfg);
        r.n_rhs = s.n_rhs;
        r.n_accept = s.n_accept;
        r.n_reject = s.n_reject;
        r.error = measure_error(problem, s);
      } catch (const IntegrationFailure& e) {
        r.n_rhs = e.partial().n_rhs;
        r.n_accept = e.partial().n_accept;
        r.n_reject = e.partial().n_reject;
        r.error = std::numeric_limits<double>::quiet_NaN();
        r.failure = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cells));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  return records;
}

void write_csv(std::ostream& out, const std::vector<WorkPrecisionRecord>& records) {
  out << "pair_id,problem_id,atol,n_rhs,n_accept,n_reject,error\n";
  for (const auto& r : records) {
    out << r.pair_id << ',' << r.problem_id << ',' << format_double(r.atol) << ',' << r.n_rhs
        << ',' << r.n_accept << ',' << r.n_reject << ','
        << (std::isnan(r.error) ? std::string("nan") : format_double(r.error)) << '\n';
  }
}

std::string gnuplot_script(const std::string& csv_path,
                           const std::vector<WorkPrecisionRecord>& records,
                           const std::string& output_stem) {
  std::vector<std::string> problems, pairs;
  for (const auto& r : records) {
    if (std::find(problems.begin(), problems.end(), r.problem_id) == problems.end()) {
      problems.push_back(r.problem_id);
    }
    if (std::find(pairs.begin(), pairs.end(), r.pair_id) == pairs.end()) {
      pairs.push_back(r.pair_id);
    }
  }
  std::string s;
  s += "set datafile separator ','\n";
  s += "set logscale xy\nset format x '10^{%L}'\nset format y '10^{%L}'\n";
  s += "set xlabel 'error'\nset ylabel 'r.h.s. evaluations'\nset key outside right\n";
  s += "set terminal pngcairo size 900,600\n";
  for (const auto& prob : problems) {
    s += fmt::format("set output '{}_{}.png'\nset title '{}'\nplot \\\n", output_stem, prob, prob);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      s += fmt::format(
          "  '{}' using ((strcol(1) eq '{}' && strcol(2) eq '{}') ? $7 : 1/0):4 "
          "with linespoints title '{}'{}\n",
          csv_path, pairs[i], prob, pairs[i], i + 1 < pairs.size() ? ", \\" : "");
    }
  }
  return s;
}

std::optional<double> evaluations_at_error(const std::vector<WorkPrecisionRecord>& curve,
                                           double error) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : curve) {
    if (std::isfinite(r.error) && r.error > 0) {
      pts.emplace_back(std::log(r.error), std::log(static_cast<double>(r.n_rhs)));
    }
  }
  if (pts.size() < 2 || !(error > 0)) return std::nullopt;
  std::sort(pts.begin(), pts.end());
  const double le = std::log(error);
  if (le < pts.front().first || le > pts.back().first) return std::nullopt;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (le <= pts[i].first) {
      const auto& [x0, y0] = pts[i - 1];
      const auto& [x1, y1] = pts[i];
      const double w = x1 > x0 ? (le - x0) / (x1 - x0) : 0.0;
      return std::exp(y0 + w * (y1 - y0));
    }
  }
  return std::exp(pts.back().second);
}

std::vector<ScanRow> family_scan(const Rational& c2, const Rational& c5,
                                 const std::vector<double>& c3_grid) {
  const double c2d = to_double(c2), c5d = to_double(c5);
  const double e2 = 3 - 12 * c2d + 10 * c2d * c2d;
  std::vector<ScanRow> rows;
  for (double c3 : c3_grid) {
    ScanRow row;
    row.c3 = c3;
    row.cp3_a = c3 * c3 / 2;
    if (e2 != 0) row.cp3_b = 3 * (c3 - c2d) * (c2d + c3 - 4 * c2d * c3) / (2 * e2);
    const auto roots = type_c_roots(c2d, c3, c5d, 1.0);
    if (roots.size() == 2) {
      row.cp3_c_plus = roots[0];
      row.cp3_c_minus = roots[1];
    } else if (roots.size() == 1) {
      row.cp3_c_plus = roots[0];
    }
    rows.push_back(row);
  }
  return rows;
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
  auto field = [](const std::optional<double>& v) {
    return v && std::isfinite(*v) ? format_double(*v) : std::string();
  };
  out << "c3,cp3_A,cp3_B,cp3_C_plus,cp3_C_minus\n";
  for (const auto& r : rows) {
    out << format_double(r.c3) << ',' << field(r.cp3_a) << ',' << field(r.cp3_b) << ','
        << field(r.cp3_c_plus) << ',' << field(r.cp3_c_minus) << '\n';
  }
}

}  // namespace rkpair
