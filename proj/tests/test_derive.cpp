#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "reference_tableaux.hpp"
#include "rkpair/analyze.hpp"
#include "rkpair/derive.hpp"
#include "rkpair/errors.hpp"

using namespace rkpair;
using reference::r;

namespace {

Rational q(long p, long s = 1) { return Rational(p, s); }

GeneralParams type_b_params() {
  const Rational c2 = q(1, 6), c3 = q(7, 32);
  const Rational cp3 = family_cp3(FamilyType::B, c2, c3);
  return {c2, c3, c4_six_stage(c2, c3, cp3), q(3, 4), q(7, 8), cp3};
}

GeneralParams a_prime_params() {
  const Rational c3 = q(21, 65);
  return {q(1, 5), c3, q(9, 10), q(39, 40), 1, c3 * c3 / 2};
}

}  // namespace

TEST_CASE("auxiliary quantities") {
  const ExtendedNodes n = extended_nodes(type_b_params());
  const AuxQuantities aux = aux_quantities(n.c, n.cp, n.cpp);
  CHECK(aux.g(4, Kind::cpp_c) == 0);
  for (Kind k : kKinds) CHECK(aux.l(4, k) == 0);

  GeneralParams p = a_prime_params();
  p.c3 = q(3, 5);
  p.cp3 = p.c3 * p.c3 / 2;
  p.c4 = c4_six_stage(p.c2, p.c3, p.cp3);
  const ExtendedNodes m = extended_nodes(p);
  CHECK(aux_quantities(m.c, m.cp, m.cpp).e(Kind::cp_c) == 0);
}

TEST_CASE("c' identity") {
  GeneralParams p = a_prime_params();
  const ExtendedNodes n = extended_nodes(p);
  for (int m = 3; m <= 5; ++m) CHECK(n.cp[m] == n.c[m] * n.c[m] / 2);
  CHECK(cp_from_node(p.c2, p.c3, p.cp3, 1, q(1, 6)) == q(1, 2));
}

TEST_CASE("type-B construction") {
  const GeneralParams p = type_b_params();
  CHECK(p.c4 == q(33, 68));
  const ButcherPair pair = construct_general(p);
  const auto& k = pair.exact_coefficients();
  CHECK(k.a[3][2] == q(180960, 112999));
  REQUIRE(metrics(pair).k6_exact);
  CHECK(*metrics(pair).k6_exact == q(7, 5440));
  CHECK(reference::mismatches(reference::type_b(), k).empty());
  CHECK(m_diagnostics(p).six_stage_condition);
  CHECK(k.d[6] == 0);
}

TEST_CASE("type A closed form and general path agree") {
  const ButcherPair a = construct_family(FamilyA{q(1, 5), q(3, 10), q(4, 5), 1});
  const ButcherPair g = construct_family_general(FamilyA{q(1, 5), q(3, 10), q(4, 5), 1});
  CHECK(a.exact_coefficients().c == g.exact_coefficients().c);
  CHECK(a.exact_coefficients().a == g.exact_coefficients().a);
  CHECK(a.exact_coefficients().b == g.exact_coefficients().b);
  CHECK(a.exact_coefficients().d == g.exact_coefficients().d);
  CHECK(residuals(a, 5).ok());
  CHECK(a.exact_coefficients().b[1] == 0);
}

TEST_CASE("A-prime reproduces the printed tableau") {
  const ButcherPair p = construct_family(FamilyAPrime{q(1, 5), q(21, 65), q(9, 10), q(39, 40)});
  // The printed d starts negative; the derived one is normalized to start positive.
  CHECK(reference::mismatches(reference::a_prime(), p.exact_coefficients(), true,
                              reference::DScale::nonzero)
            .empty());
  const MDiagnostics m = m_diagnostics(a_prime_params());
  CHECK(m.rank_m == 2);
  CHECK(p.exact_coefficients().d[6] != 0);
}

TEST_CASE("B-prime c3 = 0 reproduces the printed tableau") {
  const ButcherPair p = construct_family(FamilyBPrimeC3Zero{q(4, 15), q(1, 2), q(4, 5)});
  const auto& k = p.exact_coefficients();
  CHECK(k.a[4][3] == q(128, 175));
  CHECK(reference::mismatches(reference::b_prime_c3_zero(), k).empty());
  const ButcherPair g = construct_family_general(FamilyBPrimeC3Zero{q(4, 15), q(1, 2), q(4, 5)});
  CHECK(g.exact_coefficients() == k);
}

TEST_CASE("B-prime c3 = c2") {
  const ButcherPair p = construct_family(FamilyBPrimeC3C2{q(1, 4), q(4, 5), std::nullopt});
  const auto& k = p.exact_coefficients();
  CHECK(k.c[3] == (3 - 5 * q(4, 5)) / (5 * (1 - 2 * q(4, 5))));
  CHECK(k.c[3] == q(1, 3));
  CHECK(k.b == reference::rationals(reference::b_prime_c3_c2().b));
  CHECK(reference::mismatches(reference::b_prime_c3_c2(), k, false).empty());

  // The printed d row violates sum_j d_j c'_j = 0; the consistent row differs in d2, d3.
  const auto printed = reference::rationals(reference::b_prime_c3_c2().d);
  const auto consistent = reference::rationals(reference::b_prime_c3_c2_d_consistent());
  Rational printed_dcp = 0, consistent_dcp = 0, consistent_dc = 0;
  for (std::size_t j = 0; j < 7; ++j) {
    Rational cp = 0;
    for (std::size_t i = 0; i < j; ++i) cp += k.a[j][i] * k.c[i];
    printed_dcp += printed[j] * cp;
    consistent_dcp += consistent[j] * cp;
    consistent_dc += consistent[j] * k.c[j];
  }
  CHECK(printed_dcp != 0);
  CHECK(consistent_dcp == 0);
  CHECK(consistent_dc == 0);
  reference::PrintedTableau fixed = reference::b_prime_c3_c2();
  fixed.d = reference::b_prime_c3_c2_d_consistent();
  CHECK(reference::mismatches(fixed, k).empty());

  const DsoReport d = dso(p);
  CHECK(d.dso5 == 2);
  CHECK(d.dso4 == 1);
}

TEST_CASE("six-stage node and family c'3") {
  CHECK(c4_six_stage(q(1, 5), q(3, 5), q(9, 50)) == q(3, 4));
  const Rational c3 = q(2, 7);
  CHECK(c4_six_stage(q(1, 5), c3, c3 * c3 / 2) == c3 / (2 * (1 - 4 * c3 + 5 * c3 * c3)));
  CHECK(family_cp3(FamilyType::A, q(1, 5), q(21, 65)) == q(441, 8450));
  for (long n = -5; n <= 15; ++n) {
    const Rational x = q(n, 10) + q(1, 37);
    CHECK(family_cp3(FamilyType::B, q(1, 5), x) == 3 * (5 * x - 1) * (1 + x) / 50);
  }
}

TEST_CASE("type C roots follow the printed closed form") {
  for (int i = 1; i < 40; ++i) {
    const double c3 = -0.4 + 0.045 * i;
    const double disc = 73 - 208 * c3 + 144 * c3 * c3;
    if (disc < 0) continue;
    const auto roots = type_c_roots(0.2, c3, 0.8, 1.0);
    REQUIRE(roots.size() == 2);
    const double plus = c3 * (5 * c3 - 1) * (13 - 12 * c3 + std::sqrt(disc)) / 20;
    const double minus = c3 * (5 * c3 - 1) * (13 - 12 * c3 - std::sqrt(disc)) / 20;
    CHECK(roots[0] == doctest::Approx(plus).epsilon(1e-12));
    CHECK(roots[1] == doctest::Approx(minus).epsilon(1e-12));
  }
  const auto exact = type_c_roots(q(1, 5), q(1, 2), q(4, 5), q(1));
  REQUIRE(exact.size() == 2);
  CHECK(exact[0].value == doctest::Approx((13 - 6 + std::sqrt(73 - 104 + 36.0)) * 0.5 * 1.5 / 20));
}

TEST_CASE("type C pair satisfies order 5") {
  const ButcherPair p = construct_family(FamilyC{q(1, 5), q(3, 10), q(4, 5), 1, 0});
  CHECK(residuals(p, 5).ok(1e-12));
}

TEST_CASE("B-prime root finder") {
  FamilyBPrimeGeneral spec{q(1, 5), q(1, 4), q(3, 5), 0, q(1, 40), Unknown::c5, q(7, 10), q(85, 100)};
  const BPrimeSolution s = solve_bprime(spec);
  const double expected = 3 * (8 * std::sqrt(4054.0) - 431) / 289;
  CHECK(std::abs(s.root_value - expected) < 1e-12);
  CHECK(std::abs(s.residual) < 1e-30);

  spec.lo = -11;
  spec.hi = -9;
  CHECK(solve_bprime(spec).root_value == doctest::Approx(-9.76).epsilon(1e-3));

  spec.lo = q(7, 10);
  spec.hi = q(9, 10);
  CHECK_THROWS_AS(solve_bprime(spec), NoSolutionError);
}

TEST_CASE("degenerate parameters") {
  CHECK_THROWS_AS(construct_family(FamilyB{q(1, 6), q(1, 6), q(3, 4), q(7, 8)}), DegenerateError);
}

TEST_CASE("perturbed tableau has no d") {
  auto k = builtin("aprime").exact_coefficients();
  k.a[4][1] += q(1, 1000);
  k.a[4][0] -= q(1, 1000);
  CHECK_THROWS_AS(solve_d(k), InconsistentError);
}

TEST_CASE("d solutions match the printed rows up to scale") {
  auto k = builtin("typeB").exact_coefficients();
  const auto d = normalize_d(solve_d(k).d);
  const auto printed = reference::rationals(reference::type_b().d);
  const Rational scale = d[1] / printed[1];
  CHECK(scale > 0);
  for (std::size_t j = 0; j < printed.size(); ++j) CHECK(d[j] == scale * printed[j]);
}

TEST_CASE("rank invariant on random parameters") {
  std::mt19937 rng(20240611);
  std::uniform_int_distribution<int> num(-60, 60), den(1, 40);
  auto draw = [&] { return Rational(num(rng), den(rng)); };
  int checked = 0;
  while (checked < 100) {
    GeneralParams p{draw(), draw(), draw(), draw(), draw(), draw()};
    try {
      const MDiagnostics m = m_diagnostics(p);
      CHECK(m.rank_invariant == p.cp3 * p.cp3 * p.c2);
      CHECK(m.rank_m <= 2);
      ++checked;
    } catch (const DegenerateError&) {
    }
  }
}

TEST_CASE("random parameters violate the six-stage conditions") {
  const MDiagnostics m = m_diagnostics({q(2, 9), q(3, 7), q(5, 11), q(7, 10), q(9, 13), q(1, 17)});
  CHECK(m.rank_12x2 == 2);
  CHECK_FALSE(m.six_stage_condition);
}

TEST_CASE("exact rank") {
  CHECK(rank({{1, 2}, {2, 4}}) == 1);
  CHECK(rank({{1, 2}, {3, 4}}) == 2);
  CHECK(rank({{0, 0}, {0, 0}}) == 0);
}
