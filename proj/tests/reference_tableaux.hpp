#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rkpair/scalar.hpp"
#include "rkpair/tableau.hpp"

namespace rkpair::reference {

// Printed tableaux as transcribed entry strings; rows of A below the diagonal.
struct PrintedTableau {
  std::vector<std::string> c;
  std::vector<std::vector<std::string>> a;
  std::vector<std::string> b;
  std::vector<std::string> d;
  std::vector<std::vector<std::string>> beta;
};

inline const PrintedTableau& type_b() {
  static const PrintedTableau t{
      {"0", "1/6", "7/32", "33/68", "3/4", "7/8"},
      {{},
       {"1/6"},
       {"67/512", "45/512"},
       {"224787/903992", "-1233765/903992", "180960/112999"},
       {"921/3496", "-552447/1136200", "125664/316825", "103173/179075"},
       {"13/13984", "-5604237/49992800", "2246076/3485075", "-1822723/189103200", "371/1056"}},
      {"1/9", "-59508/193375", "2281472/3882375", "1920983/7492875", "437/5355", "76912/283815"},
      {"0", "2349/700", "-832/175", "83521/31800", "-377/168", "377/371"},
      {}};
  return t;
}

inline const PrintedTableau& a_prime() {
  static const PrintedTableau t{
      {"0", "1/5", "21/65", "9/10", "39/40", "1", "1"},
      {{},
       {"1/5"},
       {"21/338", "441/1690"},
       {"639/392", "-729/140", "1755/392"},
       {"4878991/1693440", "-16601/1792", "210067/28224", "-1469/17280"},
       {"13759919/4230954", "-2995/287", "507312091/61294590", "-22/405", "-7040/180687"},
       {"1441/14742", "0", "114244/234927", "118/81", "-12800/4407", "41/22"}},
      {"1441/14742", "0", "114244/234927", "118/81", "-12800/4407", "41/22", "0"},
      {"-1/273", "0", "2197/174020", "-4/15", "1280/1469", "-33743/52712", "127/4792"},
      {{"1", "0", "0", "0", "0", "0", "0"},
       {"-4489/1638", "0", "35152/8701", "-118/9", "48000/1469", "-246/11", "3/2"},
       {"21170/7371", "0", "-1441232/234927", "2596/81", "-339200/4407", "574/11", "-4"},
       {"-2540/2457", "0", "202124/78309", "-472/27", "60800/1469", "-615/22", "5/2"}}};
  return t;
}

inline const PrintedTableau& b_prime_c3_zero() {
  static const PrintedTableau t{
      {"0", "4/15", "0", "1/2", "4/5", "1", "1"},
      {{},
       {"4/15"},
       {"6/7", "-6/7"},
       {"-11/384", "21/32", "-49/384"},
       {"4/75", "-6/35", "14/75", "128/175"},
       {"81/224", "4917/1568", "-33/32", "-132/49", "275/224"},
       {"41/384", "3375/9856", "-7/384", "4/21", "125/384", "7/132"}},
      {"41/384", "3375/9856", "-7/384", "4/21", "125/384", "7/132", "0"},
      {"1/40", "405/616", "-7/40", "-32/35", "5/8", "-56/55", "4/5"},
      {}};
  return t;
}

// d as printed; see b_prime_c3_c2_d_consistent.
inline const PrintedTableau& b_prime_c3_c2() {
  static const PrintedTableau t{
      {"0", "1/4", "1/4", "1/3", "4/5", "1", "1"},
      {{},
       {"1/4"},
       {"-11/20", "4/5"},
       {"1/9", "43/216", "5/216"},
       {"66/125", "-593/250", "-19/50", "378/125"},
       {"-7/2", "151/8", "25/8", "-135/7", "25/14"},
       {"5/48", "0", "0", "27/56", "125/336", "1/24"}},
      {"5/48", "0", "0", "27/56", "125/336", "1/24", "0"},
      {"11/8", "8/3", "-40/3", "297/28", "-125/56", "-1/12", "1"},
      {}};
  return t;
}

// The unique d with d7 = 1 satisfying the order <= 4 conditions for the
// tableau above; differs from the printed row in d2 and d3.
inline const std::vector<std::string>& b_prime_c3_c2_d_consistent() {
  static const std::vector<std::string> d = {"11/8", "-9", "-5/3", "297/28", "-125/56",
                                             "-1/12", "1"};
  return d;
}

// Rounded to the nearest thousandth.
inline const PrintedTableau& sqrt4054_rounded() {
  static const PrintedTableau t{
      {"0", "0.200", "0.250", "0.600", "0.814", "1.000", "1.000"},
      {{},
       {"0.200"},
       {"0.125", "0.125"},
       {"0.245", "-1.983", "2.337"},
       {"-0.107", "2.416", "-2.110", "0.615"},
       {"0.304", "-4.967", "5.896", "-1.014", "0.782"},
       {"0.086", "-0.116", "0.490", "0.232", "0.249", "0.059"}},
      {"0.086", "-0.116", "0.490", "0.232", "0.249", "0.059", "0"},
      {"0.056", "0.392", "-0.707", "0.706", "-0.657", "-0.791", "1.000"},
      {}};
  return t;
}

// A printed metric: decimal digits followed by "..." when truncated.
struct PrintedValue {
  std::string digits;
  bool truncated = true;
};

struct ComparisonRow {
  std::string pair;
  PrintedValue t6_e4, t7_e3, max_abs_a, min_b;
  std::string k6;  // "p/q" exact, "1/x..." truncated reciprocal, or "N/A"
};

inline const std::vector<ComparisonRow>& comparison_table() {
  static const std::vector<ComparisonRow> rows = {
      {"fehlberg", {"33.557"}, {"6.7653"}, {"8", false}, {"-0.18", false}, "1/2080"},
      {"cash-karp", {"9.4828"}, {"1.3689"}, {"2.5925"}, {"0.0978"}, "1/800"},
      {"dopri", {"3.9908"}, {"3.9557"}, {"11.595"}, {"-0.3223"}, "1/600"},
      {"tsitouras", {"1.3851"}, {"2.1124"}, {"12.920"}, {"-3.2900"}, "1/698..."},
      {"bogacki-shampine", {"0.2216"}, {"0.2126"}, {"1.1637"}, {"0.0086"}, "N/A"},
      {"typeB", {"8.9041"}, {"1.2159"}, {"1.6014"}, {"-0.3077"}, "7/5440"},
      {"aprime", {"1.2239"}, {"1.9225"}, {"10.435"}, {"-2.9044"}, "3/2080"},
      {"bprime-c3-0", {"7.6950"}, {"1.6029"}, {"3.1358"}, {"-0.0182"}, "1/720"},
      {"bprime-c3-c2", {"18.132"}, {"2.7565"}, {"19.285"}, {"0.0416"}, "1/960"},
      {"sqrt4054", {"5.6328"}, {"1.0199"}, {"5.8955"}, {"-0.1160"}, "1/600"},
  };
  return rows;
}

inline Rational r(const std::string& s) { return parse_rational(s); }

inline std::vector<Rational> rationals(const std::vector<std::string>& v) {
  std::vector<Rational> out;
  for (const auto& s : v) out.push_back(r(s));
  return out;
}

enum class DScale { positive, nonzero };

// Entries of `k` differing from the printed c, A, b (exactly) and d (up to one
// scale). Stages beyond the printed ones must have zero b and d.
inline std::vector<std::string> mismatches(const PrintedTableau& t, const Coefficients<Rational>& k,
                                           bool include_d = true,
                                           DScale d_scale = DScale::positive) {
  std::vector<std::string> out;
  const std::size_t n = t.c.size();
  if (k.stages() < n) return {"stage count " + std::to_string(k.stages())};
  auto entry = [&](const std::string& label, const Rational& got, const std::string& want) {
    if (got != r(want)) out.push_back(label + " = " + format_rational(got) + ", printed " + want);
  };
  for (std::size_t i = 0; i < n; ++i) {
    entry("c" + std::to_string(i + 1), k.c[i], t.c[i]);
    for (std::size_t j = 0; j < t.a[i].size(); ++j) {
      entry("a" + std::to_string(i + 1) + std::to_string(j + 1), k.a[i][j], t.a[i][j]);
    }
  }
  for (std::size_t j = 0; j < k.stages(); ++j) {
    entry("b" + std::to_string(j + 1), k.b[j], j < t.b.size() ? t.b[j] : "0");
  }
  if (!include_d) return out;
  std::optional<Rational> scale;
  for (std::size_t j = 0; j < k.stages(); ++j) {
    const Rational want = j < t.d.size() ? r(t.d[j]) : Rational(0);
    if (!scale && want != 0) scale = k.d[j] / want;
  }
  if (!scale || *scale == 0 || (d_scale == DScale::positive && *scale < 0)) {
    out.push_back("d not a positive multiple of the printed row");
    return out;
  }
  for (std::size_t j = 0; j < k.stages(); ++j) {
    const Rational want = j < t.d.size() ? r(t.d[j]) : Rational(0);
    if (k.d[j] != *scale * want) {
      out.push_back("d" + std::to_string(j + 1) + " = " + format_rational(k.d[j] / *scale) +
                    " (scaled), printed " + format_rational(want));
    }
  }
  return out;
}

// Largest |k - printed| over c, A, b, d for a rounded printed tableau.
inline double max_rounded_deviation(const PrintedTableau& t, const Coefficients<double>& k) {
  double worst = 0;
  auto dev = [&](double got, const std::string& want) {
    worst = std::max(worst, std::abs(got - parse_double(want)));
  };
  for (std::size_t i = 0; i < t.c.size(); ++i) {
    dev(k.c[i], t.c[i]);
    for (std::size_t j = 0; j < t.a[i].size(); ++j) dev(k.a[i][j], t.a[i][j]);
    dev(k.b[i], t.b[i]);
    dev(k.d[i], t.d[i]);
  }
  return worst;
}

}  // namespace rkpair::reference
