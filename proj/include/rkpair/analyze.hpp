#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "rkpair/scalar.hpp"
#include "rkpair/tableau.hpp"
#include "rkpair/trees.hpp"

namespace rkpair {

struct ResidualEntry {
  RootedTree tree;
  std::int64_t density = 1;
  std::int64_t symmetry = 1;
  double b_residual = 0;  // b.Phi(t) - 1/t!
  double d_residual = 0;  // d.Phi(t)
  std::optional<Rational> b_exact, d_exact;
};

struct ResidualReport {
  int max_order = 0;
  bool exact = false;
  std::vector<ResidualEntry> entries;

  // Trees whose b residual (order <= 5) or d residual (order <= 4) is nonzero:
  // exactly in rational mode unless `tol` is given, beyond the tolerance otherwise.
  std::vector<std::string> violations(std::optional<double> tol = std::nullopt) const;
  bool ok(std::optional<double> tol = std::nullopt) const { return violations(tol).empty(); }
};

ResidualReport residuals(const ButcherPair& pair, int max_order);

// T_p = sqrt(sum over trees of order p of ((b.Phi(t) - 1/t!)/sigma(t))^2).
template <class T>
T error_norm_squared(const Coefficients<T>& k, int order);
double error_norm(const ButcherPair& pair, int order);

struct PairMetrics {
  double max_abs_a = 0;
  double min_nonzero_b = 0;
  std::optional<double> k6;  // b A^5 1; absent unless 7 stages
  std::optional<Rational> k6_exact;
};
PairMetrics metrics(const ButcherPair& pair);
PairMetrics metrics(const Coefficients<Rational>& k);

// R(z) = sum_k coefficients[k] z^k with coefficients[k] = b A^(k-1) 1.
struct StabilityPoly {
  std::vector<double> coefficients;
  std::optional<std::vector<Rational>> exact;
};
StabilityPoly stability(const ButcherPair& pair);

struct BoundaryTrace {
  std::vector<std::complex<double>> points;
  bool complete = true;
  std::string warning;
};
// Solves R(z) = exp(i phi) by Newton continuation from z = 0 along the closed
// boundary curve through the origin. The n points are uniform in phi over the
// curve's total winding, so point n/2 is the negative real-axis crossing.
BoundaryTrace stability_boundary(const std::vector<double>& coefficients, int n_points = 2048);
// Largest x with |R(-y)| <= 1 for all 0 < y <= x.
double real_stability_interval(const std::vector<double>& coefficients);

struct DsoReport {
  int dso5 = 1;
  int dso4 = 1;
  std::vector<int> violating_stages;  // 1-based stages with c'_i != c_i^2/2
};
DsoReport dso(const ButcherPair& pair);

struct InterpolantRow {
  Rational theta;
  std::vector<double> residuals;  // one per tree of order <= 4
  bool exact_zero = false;
};
struct InterpolantReport {
  std::vector<InterpolantRow> rows;
  bool endpoint_matches_b = false;         // beta(1) = b
  bool endpoint_derivative_matches = false;  // sum_k k beta_kj = delta_js
  bool vanishes_at_zero = false;
  bool ok(double tol = kFloatTolerance) const;
};
// Throws CapabilityError when the pair has no interpolant.
InterpolantReport interpolant_check(const ButcherPair& pair, const std::vector<Rational>& thetas);

}  // namespace rkpair
