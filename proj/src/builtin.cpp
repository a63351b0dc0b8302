#include <algorithm>
#include <filesystem>
#include <map>

#include "embedded_data.hpp"
#include "rkpair/errors.hpp"
#include "rkpair/tableau.hpp"

namespace rkpair {
namespace {

using Row = std::vector<const char*>;

Vector<Rational> parse_row(const Row& row, std::size_t s) {
  Vector<Rational> out(s, Rational(0));
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = parse_rational(row[j]);
  return out;
}

// Lower-triangular rows below the first; row s is taken from b when omitted.
Coefficients<Rational> from_table(const Row& c, const std::vector<Row>& a, const Row& b,
                                  const Row& d, const std::vector<Row>& beta = {}) {
  Coefficients<Rational> k;
  const std::size_t s = c.size();
  k.c = parse_row(c, s);
  k.a.assign(s, Vector<Rational>(s, Rational(0)));
  for (std::size_t i = 0; i < a.size(); ++i) k.a[i + 1] = parse_row(a[i], s);
  k.b = parse_row(b, s);
  if (a.size() + 1 < s) k.a[s - 1] = k.b;
  k.d = parse_row(d, s);
  for (const auto& row : beta) k.beta.push_back(parse_row(row, s));
  return k;
}

ButcherPair type_b() {
  return ButcherPair(
      from_table({"0", "1/6", "7/32", "33/68", "3/4", "7/8", "1"},
                 {{"1/6"},
                  {"67/512", "45/512"},
                  {"224787/903992", "-1233765/903992", "180960/112999"},
                  {"921/3496", "-552447/1136200", "125664/316825", "103173/179075"},
                  {"13/13984", "-5604237/49992800", "2246076/3485075", "-1822723/189103200",
                   "371/1056"}},
                 {"1/9", "-59508/193375", "2281472/3882375", "1920983/7492875", "437/5355",
                  "76912/283815", "0"},
                 {"0", "2349/700", "-832/175", "83521/31800", "-377/168", "377/371", "0"}),
      "typeB", "B", "6-stage pair of type B, stored in 7-stage FSAL form");
}

ButcherPair type_a_prime() {
  return ButcherPair(
      from_table({"0", "1/5", "21/65", "9/10", "39/40", "1", "1"},
                 {{"1/5"},
                  {"21/338", "441/1690"},
                  {"639/392", "-729/140", "1755/392"},
                  {"4878991/1693440", "-16601/1792", "210067/28224", "-1469/17280"},
                  {"13759919/4230954", "-2995/287", "507312091/61294590", "-22/405",
                   "-7040/180687"},
                  {"1441/14742", "0", "114244/234927", "118/81", "-12800/4407", "41/22"}},
                 {"1441/14742", "0", "114244/234927", "118/81", "-12800/4407", "41/22", "0"},
                 {"-1/273", "0", "2197/174020", "-4/15", "1280/1469", "-33743/52712",
                  "127/4792"},
                 {{"1", "0", "0", "0", "0", "0", "0"},
                  {"-4489/1638", "0", "35152/8701", "-118/9", "48000/1469", "-246/11", "3/2"},
                  {"21170/7371", "0", "-1441232/234927", "2596/81", "-339200/4407", "574/11",
                   "-4"},
                  {"-2540/2457", "0", "202124/78309", "-472/27", "60800/1469", "-615/22",
                   "5/2"}}),
      "aprime", "A-prime", "pair of type A' with a 4th-order continuous interpolant");
}

ButcherPair type_b_prime_c3_zero() {
  return ButcherPair(
      from_table({"0", "4/15", "0", "1/2", "4/5", "1", "1"},
                 {{"4/15"},
                  {"6/7", "-6/7"},
                  {"-11/384", "21/32", "-49/384"},
                  {"4/75", "-6/35", "14/75", "128/175"},
                  {"81/224", "4917/1568", "-33/32", "-132/49", "275/224"},
                  {"41/384", "3375/9856", "-7/384", "4/21", "125/384", "7/132"}},
                 {"41/384", "3375/9856", "-7/384", "4/21", "125/384", "7/132", "0"},
                 {"1/40", "405/616", "-7/40", "-32/35", "5/8", "-56/55", "4/5"}),
      "bprime-c3-0", "B-prime", "pair of type B' with c3 = 0");
}

ButcherPair type_b_prime_c3_c2() {
  return ButcherPair(
      from_table({"0", "1/4", "1/4", "1/3", "4/5", "1", "1"},
                 {{"1/4"},
                  {"-11/20", "4/5"},
                  {"1/9", "43/216", "5/216"},
                  {"66/125", "-593/250", "-19/50", "378/125"},
                  {"-7/2", "151/8", "25/8", "-135/7", "25/14"},
                  {"5/48", "0", "0", "27/56", "125/336", "1/24"}},
                 {"5/48", "0", "0", "27/56", "125/336", "1/24", "0"},
                 {"11/8", "-9", "-5/3", "297/28", "-125/56", "-1/12", "1"}),
      "bprime-c3-c2", "B-prime", "pair of type B' with c3 = c2");
}

Rational nonzero(const Rational& x, const char* factor) {
  if (x == 0) throw DegenerateError(factor);
  return x;
}

ButcherPair type_b_prime_sqrt4054() {
  auto pair = ButcherPair(sqrt4054_tableau(sqrt4054_node()).convert<double>(), "sqrt4054",
                          "B-prime", "pair of type B' with c5 = 3(8 sqrt(4054) - 431)/289");
  return pair;
}

struct Entry {
  const char* name;
  ButcherPair (*make)();
};

ButcherPair from_data(const char* key) {
  const auto& files = embedded_tableaux();
  const auto it = files.find(key);
  if (it == files.end()) throw LookupError(std::string("missing data file for ") + key);
  return parse_tableau(it->second);
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"typeB", type_b},
      {"aprime", type_a_prime},
      {"bprime-c3-0", type_b_prime_c3_zero},
      {"bprime-c3-c2", type_b_prime_c3_c2},
      {"sqrt4054", type_b_prime_sqrt4054},
      {"fehlberg", [] { return from_data("fehlberg"); }},
      {"cash-karp", [] { return from_data("cash-karp"); }},
      {"dopri", [] { return from_data("dopri"); }},
      {"tsitouras", [] { return from_data("tsitouras"); }},
      {"bogacki-shampine", [] { return from_data("bogacki-shampine"); }},
  };
  return entries;
}

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& e : registry()) names.emplace_back(e.name);
  return names;
}

ButcherPair builtin(const std::string& name) {
  for (const auto& e : registry()) {
    if (name == e.name) return e.make();
  }
  std::string list;
  for (const auto& e : registry()) list += std::string(list.empty() ? "" : ", ") + e.name;
  throw LookupError("unknown pair '" + name + "'; available: " + list);
}

ButcherPair resolve_pair(const std::string& name_or_path) {
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return builtin(name_or_path);
  }
  if (std::filesystem::exists(name_or_path)) return load(name_or_path);
  return builtin(name_or_path);
}

Rational sqrt4054_node(int bits) {
  // 3(8 sqrt(4054) - 431)/289 = (24 sqrt(4054) - 1293)/289
  const Rational root = sqrt_approx(Rational(4054), bits + 8);
  return (24 * root - 1293) / 289;
}

Coefficients<Rational> sqrt4054_tableau(const Rational& x) {
  nonzero(x, "c5");
  const Rational f39 = nonzero(39 * x - 5, "39c5 - 5");
  const Rational f285 = nonzero(285 - 319 * x, "285 - 319c5");
  const Rational f5 = nonzero(5 * x - 1, "5c5 - 1");
  const Rational f4 = nonzero(4 * x - 1, "4c5 - 1");
  const Rational f53 = nonzero(5 * x - 3, "5c5 - 3");
  const Rational f1 = nonzero(1 - x, "1 - c5");
  const Rational x2 = x * x;
  const Rational x3 = x2 * x;
  const Rational g = 43 * x - 33;
  const Rational big = x * f5 * f4 * f53;

  Coefficients<Rational> k;
  k.c = {0, Rational(1, 5), Rational(1, 4), Rational(3, 5), x, 1, 1};
  k.a.assign(7, Vector<Rational>(7, Rational(0)));
  k.a[1][0] = Rational(1, 5);
  k.a[2][0] = Rational(1, 8);
  k.a[2][1] = Rational(1, 8);
  k.a[3][0] = Rational(141, 575);
  k.a[3][1] = Rational(-228, 115);
  k.a[3][2] = Rational(1344, 575);
  k.a[4][0] = -x * (860 * x3 - 1077 * x2 + 379 * x - 48) / (3 * f39);
  k.a[4][1] = x * f5 * (1340 * x2 - 1367 * x + 277) / (2 * f39);
  k.a[4][2] = -16 * x * f5 * f4 * (73 * x - 55) / (7 * f39);
  k.a[4][3] = 115 * x * f5 * f4 * f53 / (42 * f39);
  k.a[5][0] = (113 * x2 - 35 * x - 40) / (x * f285);
  k.a[5][1] = -4 * (2845 * x2 - 2999 * x + 654) / (f5 * f285);
  k.a[5][2] = 384 * (168 * x2 - 193 * x + 52) / (7 * f4 * f285);
  k.a[5][3] = -460 * (35 * x2 - 55 * x + 22) / (7 * f53 * f285);
  k.a[5][4] = 24 * f1 * f39 / (big * f285);
  k.b = {(31 * x - 5) / (288 * x),
         -125 * (3 - x) / (768 * f5),
         8 * (7 * x + 3) / (63 * f4),
         2875 * (7 * x - 5) / (8064 * f53),
         f39 / (96 * big * f1),
         f285 / (2304 * f1),
         0};
  k.a[6] = k.b;
  k.d = {5 * g / (216 * x),
         175 * g / (288 * f5),
         -152 * g / (189 * f4),
         575 * g / (1512 * f53),
         -f39 * g / (72 * big * f1),
         -5 * f285 / (864 * f1),
         1};
  return k;
}

}  // namespace rkpair
