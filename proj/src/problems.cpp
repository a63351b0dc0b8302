#include "rkpair/problems.hpp"

#include <cmath>
#include <mutex>

#include "rkpair/errors.hpp"

namespace rkpair {
namespace {

constexpr double kEccentricity = 0.9;
constexpr int kBodies = 7;

// DETEST A3 (Hull, Enright, Fellen, Sedgwick 1972): y' = y cos t, y(0) = 1.
NamedProblem a3() {
  NamedProblem p;
  p.id = "A3";
  p.system = {1, [](double t, const State<double>& x, State<double>& dx) { dx[0] = x[0] * std::cos(t); }};
  p.tend = 20;
  p.x0 = {1.0};
  p.mask = {0};
  p.closed_form = true;
  return p;
}

// DETEST A4: y' = (y/4)(1 - y/20), y(0) = 1.
NamedProblem a4() {
  NamedProblem p;
  p.id = "A4";
  p.system = {1, [](double, const State<double>& x, State<double>& dx) {
                dx[0] = x[0] / 4 * (1 - x[0] / 20);
              }};
  p.tend = 20;
  p.x0 = {1.0};
  p.mask = {0};
  p.closed_form = true;
  return p;
}

// DETEST D5: two-body orbit with eccentricity 0.9, state (y1, y2, y1', y2').
NamedProblem d5() {
  NamedProblem p;
  p.id = "D5";
  p.system = {4, [](double, const State<double>& x, State<double>& dx) {
                const double r2 = x[0] * x[0] + x[1] * x[1];
                const double r3 = r2 * std::sqrt(r2);
                dx[0] = x[2];
                dx[1] = x[3];
                dx[2] = -x[0] / r3;
                dx[3] = -x[1] / r3;
              }};
  p.tend = 20;
  const double e = kEccentricity;
  p.x0 = {1 - e, 0, 0, std::sqrt((1 + e) / (1 - e))};
  p.mask = {0, 1, 2, 3};
  p.closed_form = true;
  return p;
}

// Pleiades (Hairer, Norsett, Wanner, Solving ODE I, p. 245): seven bodies with
// masses m_i = i; state (x_1..7, y_1..7, x'_1..7, y'_1..7).
NamedProblem plei() {
  NamedProblem p;
  p.id = "PLEI";
  p.system = {4 * kBodies, [](double, const State<double>& s, State<double>& ds) {
                const double* x = s.data();
                const double* y = s.data() + kBodies;
                for (int i = 0; i < 2 * kBodies; ++i) ds[i] = s[2 * kBodies + i];
                double* ax = ds.data() + 2 * kBodies;
                double* ay = ds.data() + 3 * kBodies;
                for (int i = 0; i < kBodies; ++i) {
                  ax[i] = 0;
                  ay[i] = 0;
                }
                for (int i = 0; i < kBodies; ++i) {
                  for (int j = i + 1; j < kBodies; ++j) {
                    const double dx = x[j] - x[i];
                    const double dy = y[j] - y[i];
                    const double r2 = dx * dx + dy * dy;
                    const double r3 = r2 * std::sqrt(r2);
                    ax[i] += (j + 1) * dx / r3;
                    ay[i] += (j + 1) * dy / r3;
                    ax[j] -= (i + 1) * dx / r3;
                    ay[j] -= (i + 1) * dy / r3;
                  }
                }
              }};
  p.tend = 3;
  p.x0 = {3,    3,    -1, -3, 2, -2,   2,    3, -3, 2, 0, 0,     -4, 4,
          0,    0,    0,  0,  0, 1.75, -1.5, 0, 0,  0, -1.25, 1, 0,  0};
  p.error_rule = ErrorRule::endpoint_on_mask;
  for (std::size_t i = 0; i < 2 * kBodies; ++i) p.mask.push_back(i);
  return p;
}

double kepler_anomaly(double t, double e) {
  double u = t;
  for (int i = 0; i < 100; ++i) {
    const double f = u - e * std::sin(u) - t;
    const double du = f / (1 - e * std::cos(u));
    u -= du;
    if (std::abs(du) <= 1e-16 * std::max(1.0, std::abs(u))) break;
  }
  return u;
}

State<double> high_accuracy_run(const NamedProblem& p, double t, double atol) {
  ControllerConfig cfg;
  cfg.atol = atol;
  cfg.record_trajectory = false;
  return integrate_adaptive(builtin("dopri"), p.system, p.t0, t, p.x0, cfg).trajectory.back().x;
}

double masked_distance(const State<double>& a, const State<double>& b,
                       const std::vector<std::size_t>& mask) {
  double sq = 0;
  for (std::size_t i : mask) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

State<double> verified_run(const NamedProblem& p, double t) {
  const State<double> fine = high_accuracy_run(p, t, 1e-13);
  const State<double> finer = high_accuracy_run(p, t, 5e-14);
  if (masked_distance(fine, finer, p.mask) > 1e-10) {
    throw NumericalError("reference runs for " + p.id + " disagree beyond 1e-10");
  }
  return finer;
}

}  // namespace

std::vector<std::string> problem_ids() { return {"A3", "A4", "D5", "PLEI"}; }

NamedProblem problem(const std::string& id) {
  if (id == "A3") return a3();
  if (id == "A4") return a4();
  if (id == "D5") return d5();
  if (id == "PLEI") return plei();
  throw LookupError("unknown problem '" + id + "' (known: A3, A4, D5, PLEI)");
}

State<double> reference_solution(const NamedProblem& p, double t) {
  if (t < p.t0 || t > p.tend) throw RangeError("reference time outside the problem interval");
  if (p.id == "A3") return {std::exp(std::sin(t))};
  if (p.id == "A4") return {20 / (1 + 19 * std::exp(-t / 4))};
  if (p.id == "D5") {
    const double e = kEccentricity;
    const double u = kepler_anomaly(t, e);
    const double w = std::sqrt(1 - e * e);
    const double den = 1 - e * std::cos(u);
    return {std::cos(u) - e, w * std::sin(u), -std::sin(u) / den, w * std::cos(u) / den};
  }
  if (t == p.t0) return p.x0;
  if (t == p.tend) {
    static std::once_flag once;
    static State<double> cached;
    std::call_once(once, [&] { cached = verified_run(p, p.tend); });
    return cached;
  }
  return verified_run(p, t);
}

double measure_error(const NamedProblem& p, const IntegrationStats& stats) {
  if (stats.trajectory.empty()) throw StructuralError("integration recorded no states");
  if (p.error_rule == ErrorRule::endpoint_on_mask) {
    const auto& end = stats.trajectory.back();
    return masked_distance(end.x, reference_solution(p, end.t), p.mask);
  }
  double worst = 0;
  for (const auto& pt : stats.trajectory) {
    worst = std::max(worst, masked_distance(pt.x, reference_solution(p, pt.t), p.mask));
  }
  return worst;
}

double kepler_energy(const State<double>& x) {
  return (x[2] * x[2] + x[3] * x[3]) / 2 - 1 / std::sqrt(x[0] * x[0] + x[1] * x[1]);
}

}  // namespace rkpair
