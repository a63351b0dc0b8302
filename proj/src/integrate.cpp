#include "rkpair/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rkpair {
namespace {

bool finite_state(const State<double>& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

void check_config(const ControllerConfig& cfg) {
  if (!(cfg.atol > 0)) throw RangeError("atol must be positive");
  if (!(cfg.safety > 0 && cfg.safety < 1)) throw RangeError("safety must lie in (0, 1)");
  if (!(cfg.exponent > 0)) throw RangeError("exponent must be positive");
  if (!(cfg.h0 > 0)) throw RangeError("h0 must be positive");
  if (cfg.clamp && !(cfg.clamp->first > 0 && cfg.clamp->first < 1 && cfg.clamp->second > 1)) {
    throw RangeError("step clamps must satisfy 0 < min < 1 < max");
  }
}

IntegrationStats integrate_adaptive(const ButcherPair& pair, const OdeSystem& sys, double t0,
                                    double tend, const State<double>& x0,
                                    const ControllerConfig& cfg) {
  check_config(cfg);
  if (!(tend > t0)) throw RangeError("tend must exceed t0");
  if (x0.size() != sys.dimension) throw StructuralError("initial state has wrong dimension");
  const RkStepper<double> stepper(pair);
  const double h_min = 1e-15 * std::abs(tend - t0);

  IntegrationStats stats;
  double t = t0;
  State<double> x = x0;
  State<double> f1(x.size());
  sys.rhs(t, x, f1);
  stats.n_rhs = 1;
  if (cfg.record_trajectory) stats.trajectory.push_back({t, x});
  double h = std::min(cfg.h0, tend - t0);

  while (t < tend) {
    if (stats.n_accept + stats.n_reject >= cfg.max_attempts) {
      throw IntegrationFailure("attempt limit reached at t = " + std::to_string(t), stats);
    }
    const bool last = h >= tend - t;
    const double h_try = last ? tend - t : h;
    StepResult<double> r = stepper.step(sys, t, x, h_try, &f1, &stats.n_rhs);
    double e = r.error;
    double factor;
    if (!std::isfinite(e) || !finite_state(r.x_next)) {
      e = std::numeric_limits<double>::infinity();
      factor = cfg.clamp ? cfg.clamp->first : 0.2;
    } else {
      if (e == 0) e = std::numeric_limits<double>::epsilon() * cfg.atol;
      factor = cfg.safety * std::pow(cfg.atol / e, cfg.exponent);
      if (cfg.clamp) factor = std::clamp(factor, cfg.clamp->first, cfg.clamp->second);
    }
    if (e <= cfg.atol) {
      ++stats.n_accept;
      if (cfg.record_steps) stats.steps.push_back({t, h_try, x, r.stages});
      t = last ? tend : t + h_try;
      x = std::move(r.x_next);
      if (stepper.fsal()) {
        f1 = std::move(r.stages.back());
      } else if (t < tend) {
        sys.rhs(t, x, f1);
        ++stats.n_rhs;
      }
      if (cfg.record_trajectory) stats.trajectory.push_back({t, x});
    } else {
      ++stats.n_reject;
    }
    h = h_try * factor;
    if (t < tend && !(h >= h_min)) {
      throw IntegrationFailure("step size underflow at t = " + std::to_string(t), stats);
    }
  }
  if (!cfg.record_trajectory) stats.trajectory.push_back({t, x});
  return stats;
}

State<double> dense_eval(const ButcherPair& pair, const std::vector<State<double>>& stages,
                         const State<double>& x, double h, double theta) {
  if (!pair.has_interpolant()) throw CapabilityError("pair has no continuous interpolant");
  const Coefficients<double> k = pair.coefficients_as<double>();
  const std::size_t s = k.stages();
  if (stages.size() != s) throw StructuralError("stage count does not match the pair");
  Vector<double> beta(s, 0.0);
  double power = theta;
  for (const auto& row : k.beta) {
    for (std::size_t j = 0; j < s; ++j) beta[j] += row[j] * power;
    power *= theta;
  }
  State<double> out = x;
  for (std::size_t c = 0; c < x.size(); ++c) {
    double acc = 0;
    for (std::size_t j = 0; j < s; ++j) acc += beta[j] * stages[j][c];
    out[c] += h * acc;
  }
  return out;
}

}  // namespace rkpair
