#include "rkpair/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rkpair/errors.hpp"

namespace rkpair {
namespace {

template <class T>
T abs_value(const T& x) {
  return x < 0 ? T(-x) : x;
}

double as_double(const Rational& x) { return to_double(x); }
double as_double(double x) { return x; }

template <class T>
bool near_zero(const T& x, double tol) {
  if constexpr (std::is_same_v<T, Rational>) {
    (void)tol;
    return x == 0;
  } else {
    return std::abs(x) <= tol;
  }
}

template <class T>
Vector<T> mat_vec(const Matrix<T>& a, const Vector<T>& v) {
  Vector<T> out(v.size(), T(0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < i && j < v.size(); ++j) out[i] += a[i][j] * v[j];
  }
  return out;
}

template <class T>
ResidualReport residuals_of(const Coefficients<T>& k, int max_order) {
  ResidualReport r;
  r.max_order = max_order;
  r.exact = std::is_same_v<T, Rational>;
  for (const auto& e : enumerate_trees(max_order)) {
    const Vector<T> phi = elementary_weight(e.tree, k.a);
    const T br = dot(k.b, phi) - T(1) / T(e.density);
    const T dr = dot(k.d, phi);
    ResidualEntry entry{e.tree, e.density, e.symmetry, as_double(br), as_double(dr), {}, {}};
    if constexpr (std::is_same_v<T, Rational>) {
      entry.b_exact = br;
      entry.d_exact = dr;
    }
    r.entries.push_back(std::move(entry));
  }
  return r;
}

template <class T>
Vector<T> stability_coefficients(const Coefficients<T>& k) {
  Vector<T> coeffs = {T(1)};
  Vector<T> v(k.stages(), T(1));
  for (std::size_t p = 1; p <= k.stages(); ++p) {
    coeffs.push_back(dot(k.b, v));
    v = mat_vec(k.a, v);
  }
  while (coeffs.size() > 7 && coeffs.back() == 0) coeffs.pop_back();
  return coeffs;
}

template <class T>
PairMetrics metrics_of(const Coefficients<T>& k) {
  PairMetrics m;
  for (const auto& row : k.a) {
    for (const auto& x : row) m.max_abs_a = std::max(m.max_abs_a, as_double(abs_value(x)));
  }
  bool first = true;
  T best = 0;
  for (const auto& x : k.b) {
    if (x == 0) continue;
    if (first || x < best) best = x;
    first = false;
  }
  m.min_nonzero_b = as_double(best);
  if (k.stages() == 7) {
    const Vector<T> coeffs = stability_coefficients(k);
    const T k6 = coeffs.size() > 6 ? coeffs[6] : T(0);
    m.k6 = as_double(k6);
    if constexpr (std::is_same_v<T, Rational>) m.k6_exact = k6;
  }
  return m;
}

template <class T>
std::int64_t count_violations(const Vector<T>& w, const std::vector<bool>& violating, double tol) {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (violating[i] && !near_zero(w[i], tol)) ++n;
  }
  return n;
}

template <class T>
DsoReport dso_of(const Coefficients<T>& k) {
  constexpr double tol = 1e-12;
  const Vector<T> cp = mat_vec(k.a, k.c);
  std::vector<bool> violating(k.stages(), false);
  DsoReport r;
  for (std::size_t i = 0; i < k.stages(); ++i) {
    if (!near_zero(T(cp[i] - k.c[i] * k.c[i] / 2), tol)) {
      violating[i] = true;
      r.violating_stages.push_back(static_cast<int>(i) + 1);
    }
  }
  r.dso5 = count_violations(k.b, violating, tol) == 0 ? 2 : 1;
  r.dso4 = count_violations(k.embedded_weights(), violating, tol) == 0 ? 2 : 1;
  return r;
}

template <class T>
InterpolantReport interpolant_of(const Coefficients<T>& k, const std::vector<Rational>& thetas) {
  InterpolantReport out;
  const std::size_t s = k.stages();
  const double tol = kFloatTolerance;
  auto beta_at = [&](const T& theta) {
    Vector<T> beta(s, T(0));
    T power = theta;
    for (const auto& row : k.beta) {
      for (std::size_t j = 0; j < s; ++j) beta[j] += row[j] * power;
      power *= theta;
    }
    return beta;
  };
  const TreeTable trees = enumerate_trees(4);
  std::vector<Vector<T>> phis;
  for (const auto& e : trees) phis.push_back(elementary_weight(e.tree, k.a));
  for (const auto& theta_exact : thetas) {
    const T theta = to_real<T>(theta_exact);
    const Vector<T> beta = beta_at(theta);
    InterpolantRow row{theta_exact, {}, true};
    for (std::size_t t = 0; t < trees.size(); ++t) {
      T target = T(1) / T(trees[t].density);
      for (int p = 0; p < trees[t].tree.order(); ++p) target *= theta;
      const T res = dot(beta, phis[t]) - target;
      row.residuals.push_back(as_double(res));
      if (!near_zero(res, tol)) row.exact_zero = false;
    }
    out.rows.push_back(std::move(row));
  }
  const Vector<T> at_one = beta_at(T(1));
  const Vector<T> at_zero = beta_at(T(0));
  out.endpoint_matches_b = true;
  out.vanishes_at_zero = true;
  out.endpoint_derivative_matches = true;
  for (std::size_t j = 0; j < s; ++j) {
    if (!near_zero(T(at_one[j] - k.b[j]), tol)) out.endpoint_matches_b = false;
    if (!near_zero(at_zero[j], tol)) out.vanishes_at_zero = false;
    T deriv = 0;
    for (std::size_t p = 0; p < k.beta.size(); ++p) deriv += T(static_cast<int>(p + 1)) * k.beta[p][j];
    const T expected = j + 1 == s ? T(1) : T(0);
    if (!near_zero(T(deriv - expected), tol)) out.endpoint_derivative_matches = false;
  }
  return out;
}

std::complex<double> poly_eval(const std::vector<double>& c, std::complex<double> z,
                               std::complex<double>* deriv) {
  std::complex<double> v = 0, d = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    d = d * z + v;
    v = v * z + *it;
  }
  if (deriv) *deriv = d;
  return v;
}

}  // namespace

std::vector<std::string> ResidualReport::violations(std::optional<double> tolerance) const {
  std::vector<std::string> out;
  const bool exact_check = exact && !tolerance;
  const double tol = tolerance.value_or(kFloatTolerance);
  for (const auto& e : entries) {
    const int order = e.tree.order();
    const bool b_bad = order <= 5 && (exact_check ? *e.b_exact != 0 : std::abs(e.b_residual) > tol);
    const bool d_bad = order <= 4 && (exact_check ? *e.d_exact != 0 : std::abs(e.d_residual) > tol);
    if (b_bad) out.push_back("b: " + e.tree.to_string());
    if (d_bad) out.push_back("d: " + e.tree.to_string());
  }
  return out;
}

ResidualReport residuals(const ButcherPair& pair, int max_order) {
  if (max_order < 1 || max_order > kMaxTreeOrder) {
    throw RangeError("residual order must be in [1, " + std::to_string(kMaxTreeOrder) + "]");
  }
  return pair.visit([&](const auto& k) { return residuals_of(k, max_order); });
}

template <class T>
T error_norm_squared(const Coefficients<T>& k, int order) {
  T sum = 0;
  for (const auto& t : trees_of_order(order)) {
    const T tau = (dot(k.b, elementary_weight(t, k.a)) - T(1) / T(density(t))) / T(symmetry(t));
    sum += tau * tau;
  }
  return sum;
}
template Rational error_norm_squared(const Coefficients<Rational>&, int);
template double error_norm_squared(const Coefficients<double>&, int);

double error_norm(const ButcherPair& pair, int order) {
  return pair.visit(
      [&](const auto& k) { return std::sqrt(as_double(error_norm_squared(k, order))); });
}

PairMetrics metrics(const ButcherPair& pair) {
  return pair.visit([](const auto& k) { return metrics_of(k); });
}

PairMetrics metrics(const Coefficients<Rational>& k) { return metrics_of(k); }

StabilityPoly stability(const ButcherPair& pair) {
  StabilityPoly out;
  pair.visit([&](const auto& k) {
    const auto coeffs = stability_coefficients(k);
    for (const auto& x : coeffs) out.coefficients.push_back(as_double(x));
    if constexpr (std::is_same_v<std::decay_t<decltype(coeffs)>, Vector<Rational>>) {
      out.exact = coeffs;
    }
  });
  return out;
}

namespace {

// Newton solve of R(z) = target starting from z.
bool newton_to(const std::vector<double>& coefficients, std::complex<double>& z,
               std::complex<double> target) {
  for (int it = 0; it < 60; ++it) {
    std::complex<double> d;
    const std::complex<double> f = poly_eval(coefficients, z, &d) - target;
    if (std::abs(f) <= 1e-13) return true;
    if (d == 0.0) return false;
    z -= f / d;
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return false;
}

}  // namespace

BoundaryTrace stability_boundary(const std::vector<double>& coefficients, int n_points) {
  if (n_points < 2) throw RangeError("boundary needs at least 2 points");
  BoundaryTrace trace;
  const double base = 2 * M_PI / n_points;

  // Winding of arg R along the upper arc up to the first real-axis crossing,
  // where R = +-1 and phi is a multiple of pi.
  constexpr int kMaxTurns = 16;
  int half_turns = 0;
  std::complex<double> z = 0;
  for (long i = 1; i <= static_cast<long>(kMaxTurns) * n_points; ++i) {
    const double phi = base * i;
    if (!newton_to(coefficients, z, std::polar(1.0, phi))) break;
    if (z.imag() < 0) {
      half_turns = static_cast<int>(std::lround(phi / M_PI));
      break;
    }
  }
  if (half_turns == 0) {
    trace.complete = false;
    trace.warning = "boundary does not return to the real axis; tracing one turn";
    half_turns = 2;
  }

  // Uniform grid over [0, half_turns pi] closed by conjugate symmetry; each
  // interval is subdivided so that Newton steps stay below the base spacing.
  const double total = half_turns * M_PI * (trace.complete ? 2 : 1);
  const double step = total / n_points;
  const int substeps = std::max(1, static_cast<int>(std::ceil(step / base)));
  z = 0;
  trace.points.push_back(z);
  for (int i = 1; i < n_points; ++i) {
    bool converged = true;
    for (int k = 1; k <= substeps && converged; ++k) {
      const double phi = step * (i - 1) + step * k / substeps;
      converged = newton_to(coefficients, z, std::polar(1.0, phi));
    }
    if (!converged) {
      trace.complete = false;
      trace.warning = "continuation diverged at phi = " + std::to_string(step * i);
      break;
    }
    trace.points.push_back(z);
  }
  return trace;
}

double real_stability_interval(const std::vector<double>& coefficients) {
  auto amp = [&](double y) { return std::abs(poly_eval(coefficients, {-y, 0.0}, nullptr)); };
  constexpr double dy = 1e-3;
  double y = dy;
  while (amp(y) <= 1 + 1e-14) {
    y += dy;
    if (y > 1e3) return std::numeric_limits<double>::infinity();
  }
  double lo = y - dy, hi = y;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = (lo + hi) / 2;
    (amp(mid) <= 1 ? lo : hi) = mid;
  }
  return lo;
}

DsoReport dso(const ButcherPair& pair) {
  return pair.visit([](const auto& k) { return dso_of(k); });
}

bool InterpolantReport::ok(double) const {
  if (!endpoint_matches_b || !endpoint_derivative_matches || !vanishes_at_zero) return false;
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.exact_zero; });
}

InterpolantReport interpolant_check(const ButcherPair& pair, const std::vector<Rational>& thetas) {
  if (!pair.has_interpolant()) throw CapabilityError("pair has no continuous interpolant");
  return pair.visit([&](const auto& k) { return interpolant_of(k, thetas); });
}

}  // namespace rkpair
