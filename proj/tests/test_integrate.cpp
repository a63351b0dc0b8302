#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rkpair/analyze.hpp"
#include "rkpair/errors.hpp"
#include "rkpair/integrate.hpp"

using namespace rkpair;

namespace {

const OdeSystem kZero{2, [](double, const State<double>&, State<double>& dx) {
                        dx[0] = 0;
                        dx[1] = 0;
                      }};
const OdeSystem kConstant{1, [](double, const State<double>&, State<double>& dx) { dx[0] = 1; }};
const OdeSystem kLinear{1, [](double, const State<double>& x, State<double>& dx) { dx[0] = x[0]; }};
const OdeSystem kCosine{1, [](double t, const State<double>& x, State<double>& dx) {
                          dx[0] = x[0] * std::cos(t);
                        }};

// sum_k (b A^(k-1) 1) h^k from the tableau, computed here.
double amplification(const Coefficients<double>& k, double h) {
  double r = 1, hp = 1;
  Vector<double> v(k.stages(), 1.0);
  for (std::size_t p = 1; p <= k.stages(); ++p) {
    hp *= h;
    r += dot(k.b, v) * hp;
    Vector<double> next(k.stages(), 0.0);
    for (std::size_t i = 0; i < k.stages(); ++i) {
      for (std::size_t j = 0; j < k.stages(); ++j) next[i] += k.a[i][j] * v[j];
    }
    v = next;
  }
  return r;
}

}  // namespace

TEST_CASE("zero right-hand side") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const auto r = rk_step<double>(builtin(name), kZero, 0.0, {1.5, -2.0}, 0.3);
    CHECK(r.x_next == State<double>{1.5, -2.0});
    CHECK(r.error == 0);
  }
}

TEST_CASE("constant right-hand side has zero error estimate") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const auto r = rk_step<double>(builtin(name), kConstant, 0.0, {0.0}, 0.25);
    CHECK(r.x_next[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(r.error < 1e-15);
  }
}

TEST_CASE("linear problem follows the stability polynomial") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const ButcherPair p = builtin(name);
    for (double h : {0.05, 0.3, -1.2}) {
      const auto r = rk_step<double>(p, kLinear, 0.0, {1.0}, h);
      CHECK(r.x_next[0] == doctest::Approx(amplification(p.float_coefficients(), h)).epsilon(1e-14));
    }
    const PairMetrics m = metrics(p);
    if (m.k6) {
      const double h = 0.1;
      const double taylor = 1 + h + h * h / 2 + std::pow(h, 3) / 6 + std::pow(h, 4) / 24 +
                            std::pow(h, 5) / 120 + *m.k6 * std::pow(h, 6);
      const auto r = rk_step<double>(p, kLinear, 0.0, {1.0}, h);
      CHECK(r.x_next[0] == doctest::Approx(taylor).epsilon(1e-14));
    }
  }
}

TEST_CASE("supplied first stage is used without evaluation") {
  const ButcherPair p = builtin("aprime");
  const RkStepper<double> stepper(p);
  long calls = 0;
  const State<double> x{1.0}, f1{1.0};
  const auto with = stepper.step(kLinear, 0.0, x, 0.1, &f1, &calls);
  CHECK(calls == 6);
  calls = 0;
  const auto without = stepper.step(kLinear, 0.0, x, 0.1, nullptr, &calls);
  CHECK(calls == 7);
  CHECK(with.x_next == without.x_next);
  CHECK(with.error == without.error);
}

TEST_CASE("FSAL stage equals the next first stage") {
  const ButcherPair p = builtin("dopri");
  const auto r = rk_step<double>(p, kCosine, 0.2, {1.3}, 0.1);
  State<double> f(1);
  kCosine.rhs(0.3, r.x_next, f);
  CHECK(r.stages.back()[0] == doctest::Approx(f[0]).epsilon(1e-15));
}

TEST_CASE("adaptive run of the zero problem") {
  ControllerConfig cfg;
  cfg.atol = 1e-8;
  const IntegrationStats s = integrate_adaptive(builtin("aprime"), kZero, 0, 10, {1, 2}, cfg);
  CHECK(s.n_reject == 0);
  CHECK(s.trajectory.back().t == 10);
  CHECK(s.trajectory.back().x == State<double>{1, 2});
}

TEST_CASE("evaluation accounting") {
  ControllerConfig cfg;
  for (const auto& name : builtin_names()) {
    const ButcherPair p = builtin(name);
    for (double atol : {1e-4, 1e-7, 1e-10}) {
      cfg.atol = atol;
      cfg.h0 = 0.5;  // forces early rejections
      const IntegrationStats s = integrate_adaptive(p, kCosine, 0, 20, {1.0}, cfg);
      CAPTURE(name);
      CAPTURE(atol);
      const long attempts = s.n_accept + s.n_reject;
      if (p.fsal() && p.effective_stages() == p.stages()) {
        CHECK(s.n_rhs == 1 + static_cast<long>(p.stages() - 1) * attempts);
      } else {
        // New stages per attempt plus one first stage per accepted step except the last.
        CHECK(s.n_rhs ==
              1 + static_cast<long>(p.effective_stages() - 1) * attempts + s.n_accept - 1);
      }
      CHECK(s.trajectory.back().t == 20);
    }
  }
  cfg.atol = 1e-6;
  for (const char* name : {"aprime", "dopri", "tsitouras", "sqrt4054", "bprime-c3-0"}) {
    const IntegrationStats s = integrate_adaptive(builtin(name), kCosine, 0, 20, {1.0}, cfg);
    CHECK(s.n_rhs == 1 + 6 * (s.n_accept + s.n_reject));
  }
}

TEST_CASE("adaptive accuracy improves with tolerance") {
  ControllerConfig cfg;
  double previous = 1;
  for (double atol : {1e-4, 1e-6, 1e-8, 1e-10}) {
    cfg.atol = atol;
    const IntegrationStats s = integrate_adaptive(builtin("aprime"), kCosine, 0, 20, {1.0}, cfg);
    double worst = 0;
    for (const auto& pt : s.trajectory) worst = std::max(worst, std::abs(pt.x[0] - std::exp(std::sin(pt.t))));
    CHECK(worst < previous);
    CHECK(worst < 100 * atol);
    previous = worst;
  }
}

TEST_CASE("deterministic runs") {
  ControllerConfig cfg;
  cfg.atol = 1e-7;
  const auto a = integrate_adaptive(builtin("typeB"), kCosine, 0, 20, {1.0}, cfg);
  const auto b = integrate_adaptive(builtin("typeB"), kCosine, 0, 20, {1.0}, cfg);
  CHECK(a.n_rhs == b.n_rhs);
  CHECK(a.trajectory.back().x == b.trajectory.back().x);
}

TEST_CASE("controller configuration is validated") {
  ControllerConfig cfg;
  cfg.atol = 0;
  CHECK_THROWS_AS(integrate_adaptive(builtin("dopri"), kCosine, 0, 1, {1.0}, cfg), RangeError);
  cfg = {};
  cfg.clamp = std::pair{2.0, 5.0};
  CHECK_THROWS_AS(integrate_adaptive(builtin("dopri"), kCosine, 0, 1, {1.0}, cfg), RangeError);
  CHECK_THROWS_AS(integrate_adaptive(builtin("dopri"), kCosine, 1, 0, {1.0}, {}), RangeError);
  CHECK_THROWS_AS(integrate_adaptive(builtin("dopri"), kCosine, 0, 1, {1.0, 2.0}, {}),
                  StructuralError);
}

TEST_CASE("blow-up ends in an integration failure") {
  const OdeSystem blowup{1, [](double, const State<double>& x, State<double>& dx) {
                           dx[0] = x[0] * x[0];
                         }};
  ControllerConfig cfg;
  cfg.atol = 1e-8;
  CHECK_THROWS_AS(integrate_adaptive(builtin("dopri"), blowup, 0, 2, {1.0}, cfg),
                  IntegrationFailure);
}

TEST_CASE("dense output") {
  const ButcherPair p = builtin("aprime");
  const double h = 0.2;
  const auto r = rk_step<double>(p, kLinear, 0.0, {1.0}, h);
  CHECK(dense_eval(p, r.stages, {1.0}, h, 0.0)[0] == 1.0);
  CHECK(dense_eval(p, r.stages, {1.0}, h, 1.0)[0] == doctest::Approx(r.x_next[0]).epsilon(1e-15));

  // Fourth-order interpolant: error at theta = 1/2 shrinks like h^5.
  double prev = 0;
  for (double hh : {0.1, 0.05, 0.025}) {
    const auto s = rk_step<double>(p, kLinear, 0.0, {1.0}, hh);
    const double err = std::abs(dense_eval(p, s.stages, {1.0}, hh, 0.5)[0] - std::exp(hh / 2));
    if (prev > 0) CHECK(prev / err > 20);
    prev = err;
  }

  // Continuity across accepted steps.
  ControllerConfig cfg;
  cfg.atol = 1e-8;
  cfg.record_steps = true;
  const auto s = integrate_adaptive(p, kCosine, 0, 5, {1.0}, cfg);
  for (std::size_t i = 0; i + 1 < s.steps.size(); ++i) {
    const auto& st = s.steps[i];
    const double end = dense_eval(p, st.stages, st.x, st.h, 1.0)[0];
    CHECK(end == doctest::Approx(s.steps[i + 1].x[0]).epsilon(1e-13));
  }
  CHECK_THROWS_AS(dense_eval(builtin("typeB"), s.steps[0].stages, {1.0}, 0.1, 0.5),
                  CapabilityError);
}

TEST_CASE("fixed-step convergence on the cosine problem") {
  const ButcherPair p = builtin("dopri");
  auto err = [&](long n, Weights w) {
    const auto xs = integrate_fixed<double>(p, kCosine, 0.0, 5.0, {1.0}, n, w);
    return std::abs(xs.back()[0] - std::exp(std::sin(5.0)));
  };
  CHECK(std::log2(err(40, Weights::fifth) / err(80, Weights::fifth)) ==
        doctest::Approx(5.0).epsilon(0.06));
  CHECK(std::log2(err(320, Weights::fourth) / err(640, Weights::fourth)) ==
        doctest::Approx(4.0).epsilon(0.08));
}
