#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rkpair/bench.hpp"
#include "rkpair/errors.hpp"

using namespace rkpair;

namespace {

NamedProblem zero_problem() {
  NamedProblem p;
  p.id = "ZERO";
  p.system = {2, [](double, const State<double>&, State<double>& dx) {
                dx[0] = 0;
                dx[1] = 0;
              }};
  p.tend = 5;
  p.x0 = {1, -1};
  p.mask = {0, 1};
  return p;
}

std::vector<NamedPair> pairs(std::initializer_list<const char*> names) {
  std::vector<NamedPair> out;
  for (const char* n : names) out.emplace_back(n, builtin(n));
  return out;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("default grid") {
  const auto g = default_atol_grid();
  REQUIRE(g.size() == 25);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g.back() == doctest::Approx(1e-11));
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(std::log10(g[i - 1] / g[i]) == doctest::Approx(8.0 / 24));
  }
  CHECK_THROWS_AS(default_atol_grid(1), RangeError);
}

TEST_CASE("zero problem gives zero error") {
  const auto recs = work_precision(pairs({"aprime", "typeB"}), zero_problem(), {1e-4, 1e-8});
  REQUIRE(recs.size() == 4);
  for (const auto& r : recs) {
    CHECK(r.error == 0);
    CHECK(r.n_reject == 0);
  }
}

TEST_CASE("A3 records and CSV") {
  const auto recs = work_precision(pairs({"typeB", "aprime", "sqrt4054", "dopri"}), problem("A3"),
                                   default_atol_grid());
  REQUIRE(recs.size() == 100);
  CHECK(recs[0].pair_id == "typeB");
  CHECK(recs[25].pair_id == "aprime");
  CHECK(recs[99].atol == doctest::Approx(1e-11));
  for (const auto& r : recs) {
    CHECK(r.failure.empty());
    CHECK(r.error > 0);
  }
  std::ostringstream csv;
  write_csv(csv, recs);
  const std::string text = csv.str();
  CHECK(text.rfind("pair_id,problem_id,atol,n_rhs,n_accept,n_reject,error\n", 0) == 0);
  CHECK(count_lines(text) == 101);

  const std::string gp = gnuplot_script("bench.csv", recs, "bench");
  CHECK(gp.find("'bench.csv'") != std::string::npos);
  CHECK(gp.find("title 'sqrt4054'") != std::string::npos);
  CHECK(gp.find("set output 'bench_A3.png'") != std::string::npos);

  // Achieved error shrinks with ATOL up to small noise.
  for (std::size_t i = 1; i < recs.size(); ++i) {
    if (recs[i].pair_id != recs[i - 1].pair_id) continue;
    CHECK(recs[i].error < 10 * recs[i - 1].error);
  }
}

TEST_CASE("records are independent of the thread count") {
  const auto grid = default_atol_grid(6, 1e-4, 1e-8);
  const auto one = work_precision(pairs({"aprime", "dopri"}), problem("A4"), grid, {}, 1);
  const auto many = work_precision(pairs({"aprime", "dopri"}), problem("A4"), grid, {}, 4);
  REQUIRE(one.size() == many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].pair_id == many[i].pair_id);
    CHECK(one[i].n_rhs == many[i].n_rhs);
    CHECK(one[i].error == many[i].error);
  }
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(work_precision(pairs({"aprime"}), problem("A3"), {1e-8, 1e-4}), RangeError);
  CHECK_THROWS_AS(work_precision(pairs({"aprime"}), problem("A3"), {}), RangeError);
  CHECK_THROWS_AS(work_precision(pairs({"aprime"}), problem("A3"), {-1.0}), RangeError);
}

TEST_CASE("failed cells are recorded") {
  NamedProblem p = zero_problem();
  p.id = "BLOWUP";
  p.system = {2, [](double, const State<double>& x, State<double>& dx) {
                dx[0] = x[0] * x[0];
                dx[1] = 0;
              }};
  p.x0 = {1, 0};
  p.closed_form = true;
  ControllerConfig cfg;
  const auto recs = work_precision(pairs({"dopri"}), p, {1e-6}, cfg);
  REQUIRE(recs.size() == 1);
  CHECK(std::isnan(recs[0].error));
  CHECK_FALSE(recs[0].failure.empty());
  std::ostringstream csv;
  write_csv(csv, recs);
  CHECK(csv.str().find(",nan\n") != std::string::npos);
}

TEST_CASE("evaluations at a given error") {
  std::vector<WorkPrecisionRecord> curve(3);
  curve[0].error = 1e-4;
  curve[0].n_rhs = 100;
  curve[1].error = 1e-6;
  curve[1].n_rhs = 400;
  curve[2].error = std::nan("");
  curve[2].n_rhs = 5;
  CHECK(*evaluations_at_error(curve, 1e-5) == doctest::Approx(200));
  CHECK(*evaluations_at_error(curve, 1e-4) == doctest::Approx(100));
  CHECK_FALSE(evaluations_at_error(curve, 1e-7));
}

TEST_CASE("family scan curves") {
  const Rational c2(1, 5), c5(4, 5);
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(-0.5 + 0.02 * i);
  const auto rows = family_scan(c2, c5, grid);
  REQUIRE(rows.size() == 101);
  for (const auto& r : rows) {
    CHECK(*r.cp3_a == doctest::Approx(r.c3 * r.c3 / 2).epsilon(1e-15));
    CHECK(*r.cp3_b == doctest::Approx(3 * (5 * r.c3 - 1) * (1 + r.c3) / 50).epsilon(1e-13));
  }
  for (double s : {-1.0, 1.0}) {
    const double c3 = (6 + s * std::sqrt(6.0)) / 10;
    const auto row = family_scan(c2, c5, {c3})[0];
    CHECK(std::abs(*row.cp3_a - *row.cp3_b) < 1e-12);
    const double c_near = std::min(std::abs(*row.cp3_c_plus - *row.cp3_a),
                                   std::abs(*row.cp3_c_minus - *row.cp3_a));
    CHECK(c_near < 1e-12);
  }
  const auto at_zero = family_scan(c2, c5, {0.0})[0];
  CHECK(std::abs(*at_zero.cp3_c_plus) < 1e-15);
  CHECK(std::abs(*at_zero.cp3_a) < 1e-15);
  const auto at_c2 = family_scan(c2, c5, {0.2})[0];
  CHECK(std::abs(*at_c2.cp3_c_minus) < 1e-15);
  CHECK(std::abs(*at_c2.cp3_b) < 1e-15);

  std::ostringstream csv;
  write_scan_csv(csv, rows);
  CHECK(csv.str().rfind("c3,cp3_A,cp3_B,cp3_C_plus,cp3_C_minus\n", 0) == 0);
}
