#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rkpair/scalar.hpp"
#include "rkpair/tableau.hpp"

namespace rkpair {

// The six free parameters: nodes c2..c6 and c'3 = a32 c2.
struct GeneralParams {
  Rational c2, c3, c4, c5, c6, cp3;
};

// Stage vectors c, c' = Ac, c'' = Ac' (index 0 is stage 1) plus the scalars
// that close the construction.
struct ExtendedNodes {
  Vector<Rational> c, cp, cpp;
  Rational cppp5, cppp6, a65, b5, b6;
};

enum class Kind { c2, c3, c4, cp_c, cp_c2, cp2, cpp_c };
inline constexpr std::array<Kind, 7> kKinds = {Kind::c2,   Kind::c3,    Kind::c4, Kind::cp_c,
                                               Kind::cp_c2, Kind::cp2, Kind::cpp_c};
std::string to_string(Kind kind);

// gamma, lambda, mu for stages m = 4..7 (index m - 4) and every kind;
// eta for kinds c2, c3, c4, cp_c (zero for the others).
struct AuxQuantities {
  std::array<std::array<Rational, 7>, 4> gamma, lambda, mu;
  std::array<Rational, 7> eta;
  Rational gamma_ac2, eta_ac2;

  const Rational& g(int m, Kind k) const { return gamma[m - 4][static_cast<int>(k)]; }
  const Rational& l(int m, Kind k) const { return lambda[m - 4][static_cast<int>(k)]; }
  const Rational& u(int m, Kind k) const { return mu[m - 4][static_cast<int>(k)]; }
  const Rational& e(Kind k) const { return eta[static_cast<int>(k)]; }
};

AuxQuantities aux_quantities(const Vector<Rational>& c, const Vector<Rational>& cp,
                             const Vector<Rational>& cpp);

using Matrix54 = std::array<std::array<Rational, 4>, 5>;

// Coefficient matrix of the weight-difference system, before and after the
// row/column reduction that exposes its rank.
struct ConstructionMatrix {
  Matrix54 m;
  Matrix54 reduced;
};

ConstructionMatrix construction_matrix(const ExtendedNodes& nodes);

// c'_m for a node c_m with second moment c''_m.
Rational cp_from_node(const Rational& c2, const Rational& c3, const Rational& cp3,
                      const Rational& cm, const Rational& cppm);

ExtendedNodes extended_nodes(const GeneralParams& params);
// Fills A and b (row s = b); d is left zero.
Coefficients<Rational> back_substitute(const ExtendedNodes& nodes);

struct DSolution {
  Vector<Rational> d;
  bool extra_freedom = false;
};
DSolution solve_d(const Coefficients<Rational>& k);
struct DSolutionFloat {
  Vector<double> d;
  bool extra_freedom = false;
};
DSolutionFloat solve_d(const Coefficients<double>& k);
// Scale so max |d_j| = 1 with the first nonzero component positive.
Vector<Rational> normalize_d(Vector<Rational> d);

ButcherPair construct_general(const GeneralParams& params, const std::string& name = {},
                              const std::string& family = {});

Rational c4_six_stage(const Rational& c2, const Rational& c3, const Rational& cp3);

enum class FamilyType { A, B };
Rational family_cp3(FamilyType type, const Rational& c2, const Rational& c3);

struct Root {
  double value = 0;
  std::optional<Rational> exact;
};
// Roots of the type-C quadratic in c'3, "+" branch first; empty when complex.
std::vector<Root> type_c_roots(const Rational& c2, const Rational& c3, const Rational& c5,
                               const Rational& c6);
// Same, evaluated in double precision (used for irrational c3 in scans).
std::vector<double> type_c_roots(double c2, double c3, double c5, double c6);

struct FamilyA {
  Rational c2, c3, c5, c6;
};
struct FamilyB {
  Rational c2, c3, c5, c6;
};
struct FamilyC {
  Rational c2, c3, c5, c6;
  int branch = 0;  // 0: "+" root, 1: "-" root
};
struct FamilyAPrime {
  Rational c2, c3, c4, c5;
};
struct FamilyBPrimeC3Zero {
  Rational c2, c4, c5;
};
struct FamilyBPrimeC3C2 {
  Rational c2, c5;
  std::optional<Rational> cp3;  // does not enter b or d; defaults to 4 c2 / 5
};
enum class Unknown { c2, c3, c4, c5, cp3 };
// c6 = 1; four of the five values are fixed, the designated one is solved
// for inside [lo, hi] so that b.(c' * c') = 1/20.
struct FamilyBPrimeGeneral {
  Rational c2, c3, c4, c5, cp3;
  Unknown unknown = Unknown::c5;
  Rational lo, hi;
};

using FamilySpec = std::variant<FamilyA, FamilyB, FamilyC, FamilyAPrime, FamilyBPrimeC3Zero,
                                FamilyBPrimeC3C2, FamilyBPrimeGeneral>;

struct BPrimeSolution {
  Rational root;        // dyadic rational approximation of the solved value
  double root_value = 0;
  double residual = 0;  // b.(c' * c') - 1/20 at `root`
  int iterations = 0;
  Coefficients<Rational> tableau;  // exact tableau at `root`
};
BPrimeSolution solve_bprime(const FamilyBPrimeGeneral& spec);

// Family closed forms where available, the general path otherwise.
ButcherPair construct_family(const FamilySpec& spec);
// The general path for every family (no closed forms).
ButcherPair construct_family_general(const FamilySpec& spec);

struct MDiagnostics {
  int rank_12x2 = 0;
  int rank_m = 0;
  int rank_m_without_row5 = 0;
  bool rows_1_3_proportional = false;
  Rational rank_invariant;  // m51 m24 - m21 m54 of the reduced matrix
  Rational expected_invariant;  // c'3^2 c2
  std::array<Rational, 3> q;    // q1, q3, q4
  bool six_stage_condition = false;
};
MDiagnostics m_diagnostics(const GeneralParams& params);

// Exact rank of a rational matrix.
int rank(Matrix<Rational> m);

}  // namespace rkpair
