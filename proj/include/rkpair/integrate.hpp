#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "rkpair/errors.hpp"
#include "rkpair/tableau.hpp"

namespace rkpair {

template <class Real>
using State = std::vector<Real>;

// dx/dt = f(t, x); rhs writes f(t, x) into its third argument and must be reentrant.
template <class Real>
struct BasicOdeSystem {
  std::size_t dimension = 0;
  std::function<void(Real, const State<Real>&, State<Real>&)> rhs;
};
using OdeSystem = BasicOdeSystem<double>;

struct ControllerConfig {
  double atol = 1e-6;
  double safety = 0.9;
  double exponent = 0.2;
  double h0 = 1e-6;
  // Step ratio limits (min, max); unlimited when absent.
  std::optional<std::pair<double, double>> clamp;
  long max_attempts = 50'000'000;
  bool record_trajectory = true;
  // Keeps the stage derivatives of accepted steps for dense output.
  bool record_steps = false;
};

void check_config(const ControllerConfig& cfg);

template <class Real>
struct StepResult {
  State<Real> x_next;
  Real error = 0;
  // F_1 .. F_s over the evaluated stages; for FSAL pairs F_s = f(t + h, x_next).
  std::vector<State<Real>> stages;
};

struct TrajectoryPoint {
  double t = 0;
  State<double> x;
};

struct AcceptedStep {
  double t = 0;
  double h = 0;
  State<double> x;
  std::vector<State<double>> stages;
};

struct IntegrationStats {
  long n_rhs = 0;
  long n_accept = 0;
  long n_reject = 0;
  std::vector<TrajectoryPoint> trajectory;
  std::vector<AcceptedStep> steps;
};

class IntegrationFailure : public NumericalError {
 public:
  IntegrationFailure(const std::string& what, IntegrationStats partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const IntegrationStats& partial() const { return partial_; }

 private:
  IntegrationStats partial_;
};

enum class Weights { fifth, fourth };

template <class Real>
class RkStepper {
 public:
  explicit RkStepper(const ButcherPair& pair, Weights weights = Weights::fifth)
      : k_(pair.coefficients_as<Real>()) {
    check_shape(pair);
    // A padded trailing stage with zero weights is never evaluated.
    s_ = pair.effective_stages();
    fsal_ = pair.fsal() && s_ == k_.stages();
    w_ = weights == Weights::fifth ? k_.b : k_.embedded_weights();
  }

  std::size_t stages() const { return s_; }
  bool fsal() const { return fsal_; }
  const Coefficients<Real>& coefficients() const { return k_; }

  // One step from (t, x); f1, when given, must equal f(t, x). Adds the number
  // of rhs evaluations made to *n_rhs.
  StepResult<Real> step(const BasicOdeSystem<Real>& sys, Real t, const State<Real>& x, Real h,
                        const State<Real>* f1, long* n_rhs = nullptr) const {
    using std::sqrt;
    const std::size_t s = s_;
    const std::size_t n = x.size();
    StepResult<Real> r;
    r.stages.assign(s, State<Real>(n, Real(0)));
    if (f1) {
      r.stages[0] = *f1;
    } else {
      sys.rhs(t, x, r.stages[0]);
      if (n_rhs) ++*n_rhs;
    }
    State<Real> y(n);
    for (std::size_t i = 1; i < s; ++i) {
      for (std::size_t c = 0; c < n; ++c) {
        Real acc = 0;
        for (std::size_t j = 0; j < i; ++j) acc += k_.a[i][j] * r.stages[j][c];
        y[c] = x[c] + h * acc;
      }
      sys.rhs(t + k_.c[i] * h, y, r.stages[i]);
      if (n_rhs) ++*n_rhs;
    }
    r.x_next.assign(n, Real(0));
    Real sq = 0;
    for (std::size_t c = 0; c < n; ++c) {
      Real acc = 0, err = 0;
      for (std::size_t j = 0; j < s; ++j) {
        acc += w_[j] * r.stages[j][c];
        err += k_.d[j] * r.stages[j][c];
      }
      r.x_next[c] = x[c] + h * acc;
      err *= h;
      sq += err * err;
    }
    r.error = sqrt(sq);
    return r;
  }

 private:
  Coefficients<Real> k_;
  Vector<Real> w_;
  std::size_t s_ = 0;
  bool fsal_ = false;
};

template <class Real>
StepResult<Real> rk_step(const ButcherPair& pair, const BasicOdeSystem<Real>& sys, Real t,
                         const State<Real>& x, Real h, const State<Real>* f1 = nullptr) {
  return RkStepper<Real>(pair).step(sys, t, x, h, f1);
}

IntegrationStats integrate_adaptive(const ButcherPair& pair, const OdeSystem& sys, double t0,
                                    double tend, const State<double>& x0,
                                    const ControllerConfig& cfg);

// x + h sum_j beta_j(theta) F_j for a step's stage derivatives.
State<double> dense_eval(const ButcherPair& pair, const std::vector<State<double>>& stages,
                         const State<double>& x, double h, double theta);

// Fixed-step integration with n_steps equal steps; returns the state at every
// step endpoint (index 0 is x0).
template <class Real>
std::vector<State<Real>> integrate_fixed(const ButcherPair& pair, const BasicOdeSystem<Real>& sys,
                                         Real t0, Real tend, const State<Real>& x0, long n_steps,
                                         Weights weights) {
  if (n_steps < 1) throw RangeError("n_steps must be positive");
  const RkStepper<Real> stepper(pair, weights);
  const Real h = (tend - t0) / Real(n_steps);
  std::vector<State<Real>> out{x0};
  State<Real> x = x0;
  for (long i = 0; i < n_steps; ++i) {
    x = stepper.step(sys, t0 + Real(i) * h, x, h, nullptr).x_next;
    out.push_back(x);
  }
  return out;
}

}  // namespace rkpair
