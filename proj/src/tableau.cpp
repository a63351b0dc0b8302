#include "rkpair/tableau.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "rkpair/errors.hpp"

namespace rkpair {

std::string to_string(ScalarMode mode) {
  return mode == ScalarMode::exact ? "rational" : "float";
}

ButcherPair::ButcherPair(Coefficients<Rational> coefficients, std::string name_,
                         std::string family_, std::string source_)
    : name(std::move(name_)),
      family(std::move(family_)),
      source(std::move(source_)),
      data_(std::move(coefficients)) {}

ButcherPair::ButcherPair(Coefficients<double> coefficients, std::string name_,
                         std::string family_, std::string source_)
    : name(std::move(name_)),
      family(std::move(family_)),
      source(std::move(source_)),
      data_(std::move(coefficients)) {}

ScalarMode ButcherPair::mode() const {
  return std::holds_alternative<Coefficients<Rational>>(data_) ? ScalarMode::exact
                                                               : ScalarMode::floating;
}

const Coefficients<Rational>& ButcherPair::exact_coefficients() const {
  if (const auto* r = std::get_if<Coefficients<Rational>>(&data_)) return *r;
  throw CapabilityError("pair '" + name + "' has no exact rational coefficients");
}

Coefficients<double> ButcherPair::float_coefficients() const { return coefficients_as<double>(); }

std::size_t ButcherPair::stages() const {
  return visit([](const auto& k) { return k.stages(); });
}

bool ButcherPair::has_interpolant() const {
  return visit([](const auto& k) { return k.has_interpolant(); });
}

namespace {

template <class T>
bool vanishes(const T& x) {
  if constexpr (std::is_same_v<T, Rational>) {
    return x == 0;
  } else {
    return std::abs(x) <= kFloatTolerance;
  }
}

template <class T>
std::string show(const T& x) {
  if constexpr (std::is_same_v<T, Rational>) {
    return format_rational(x);
  } else {
    return format_double(x);
  }
}

template <class T>
bool is_fsal(const Coefficients<T>& k) {
  const std::size_t s = k.stages();
  if (s < 2 || !vanishes(T(k.c[s - 1] - 1)) || !vanishes(k.b[s - 1])) return false;
  for (std::size_t j = 0; j < s; ++j) {
    if (!vanishes(T(k.a[s - 1][j] - k.b[j]))) return false;
  }
  return true;
}

template <class T>
void check_invariants(const Coefficients<T>& k, std::vector<std::string>& out) {
  const std::size_t s = k.stages();
  for (std::size_t i = 0; i < s; ++i) {
    T row = 0;
    for (std::size_t j = 0; j < s; ++j) {
      if (j >= i && !vanishes(k.a[i][j])) {
        out.push_back("a" + std::to_string(i + 1) + std::to_string(j + 1) +
                      " = " + show(k.a[i][j]) + " on or above the diagonal");
      }
      row += k.a[i][j];
    }
    if (!vanishes(T(row - k.c[i]))) {
      out.push_back("row " + std::to_string(i + 1) + " sums to " + show(row) + ", c" +
                    std::to_string(i + 1) + " = " + show(k.c[i]));
    }
  }
  if (!vanishes(k.c[0])) out.push_back("c1 = " + show(k.c[0]) + ", expected 0");
  if (!vanishes(T(k.c[s - 1] - 1))) {
    out.push_back("c" + std::to_string(s) + " = " + show(k.c[s - 1]) + ", expected 1");
  }
  if (!vanishes(k.b[s - 1])) {
    out.push_back("FSAL: b" + std::to_string(s) + " = " + show(k.b[s - 1]) + ", expected 0");
  }
  for (std::size_t j = 0; j < s; ++j) {
    if (!vanishes(T(k.a[s - 1][j] - k.b[j]))) {
      out.push_back("FSAL: a" + std::to_string(s) + std::to_string(j + 1) + " = " +
                    show(k.a[s - 1][j]) + " differs from b" + std::to_string(j + 1) +
                    " = " + show(k.b[j]));
    }
  }
  bool d_zero = true;
  T d_sum = 0;
  for (const auto& x : k.d) {
    if (!vanishes(x)) d_zero = false;
    d_sum += x;
  }
  if (d_zero) out.push_back("d is the zero vector");
  if (!vanishes(d_sum)) out.push_back("sum of d = " + show(d_sum) + ", expected 0");
  if (k.has_interpolant()) {
    for (std::size_t j = 0; j < s; ++j) {
      T at_one = 0;
      for (const auto& row : k.beta) at_one += row[j];
      if (!vanishes(T(at_one - k.b[j]))) {
        out.push_back("interpolant: beta" + std::to_string(j + 1) + "(1) = " + show(at_one) +
                      " differs from b" + std::to_string(j + 1));
      }
    }
  }
}

}  // namespace

bool ButcherPair::fsal() const {
  return visit([](const auto& k) { return is_fsal(k); });
}

std::size_t ButcherPair::effective_stages() const {
  return visit([](const auto& k) {
    const std::size_t s = k.stages();
    return (s > 1 && k.d[s - 1] == 0) ? s - 1 : s;
  });
}

void check_shape(const ButcherPair& pair) {
  pair.visit([&](const auto& k) {
    const std::size_t s = k.stages();
    if (s < 2) throw StructuralError("a tableau needs at least 2 stages");
    if (k.a.size() != s) throw StructuralError("A has " + std::to_string(k.a.size()) +
                                               " rows, expected " + std::to_string(s));
    for (std::size_t i = 0; i < s; ++i) {
      if (k.a[i].size() != s) {
        throw StructuralError("row " + std::to_string(i + 1) + " of A has " +
                              std::to_string(k.a[i].size()) + " entries, expected " +
                              std::to_string(s));
      }
    }
    if (k.b.size() != s) throw StructuralError("b has wrong length");
    if (k.d.size() != s) throw StructuralError("d has wrong length");
    for (const auto& row : k.beta) {
      if (row.size() != s) throw StructuralError("interpolant row has wrong length");
    }
  });
}

ValidationReport validate(const ButcherPair& pair) {
  check_shape(pair);
  ValidationReport report;
  pair.visit([&](const auto& k) { check_invariants(k, report.violations); });
  return report;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

struct RawSection {
  std::size_t line = 0;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

template <class T>
T parse_entry(const std::string& token, std::size_t line, const std::string& section) {
  if constexpr (std::is_same_v<T, Rational>) {
    if (const auto slash = token.find('/'); slash != std::string::npos) {
      const std::string den = token.substr(slash + 1);
      if (!den.empty() && den.find_first_not_of('0') == std::string::npos) {
        throw ParseError(line, section, "zero denominator in '" + token + "'");
      }
    }
    if (auto r = try_parse_rational(token)) return *r;
    throw ParseError(line, section, "'" + token + "' is not an exact rational");
  } else {
    try {
      return parse_double(token);
    } catch (const ParseError&) {
      throw ParseError(line, section, "'" + token + "' is not a number");
    }
  }
}

template <class T>
Vector<T> flat(const RawSection& sec, const std::string& name) {
  Vector<T> out;
  for (const auto& [line, row] : sec.rows) {
    for (const auto& t : row) out.push_back(parse_entry<T>(t, line, name));
  }
  return out;
}

template <class T>
Matrix<T> rows(const RawSection& sec, const std::string& name) {
  Matrix<T> out;
  for (const auto& [line, row] : sec.rows) {
    Vector<T> r;
    for (const auto& t : row) r.push_back(parse_entry<T>(t, line, name));
    out.push_back(std::move(r));
  }
  return out;
}

template <class T>
Coefficients<T> assemble(const std::map<std::string, RawSection>& sections) {
  auto need = [&](const std::string& n) -> const RawSection& {
    const auto it = sections.find(n);
    if (it == sections.end()) throw ParseError(0, n, "missing section [" + n + "]");
    return it->second;
  };
  Coefficients<T> k;
  const auto& sc = need("C");
  k.c = flat<T>(sc, "C");
  const std::size_t s = k.c.size();
  if (s < 2) throw ParseError(sc.line, "C", "at least 2 nodes required");
  const auto& sa = need("A");
  k.a = rows<T>(sa, "A");
  if (k.a.size() != s) {
    throw ParseError(sa.line, "A", std::to_string(k.a.size()) + " rows, expected " +
                                       std::to_string(s));
  }
  for (std::size_t i = 0; i < s; ++i) {
    if (k.a[i].size() != s) {
      throw ParseError(sa.rows[i].first, "A",
                       std::to_string(k.a[i].size()) + " entries, expected " + std::to_string(s));
    }
  }
  const auto& sb = need("B");
  k.b = flat<T>(sb, "B");
  if (k.b.size() != s) throw ParseError(sb.line, "B", "expected " + std::to_string(s) + " entries");
  const auto& sd = need("D");
  k.d = flat<T>(sd, "D");
  if (k.d.size() != s) throw ParseError(sd.line, "D", "expected " + std::to_string(s) + " entries");
  if (const auto it = sections.find("BETA"); it != sections.end()) {
    k.beta = rows<T>(it->second, "BETA");
    for (std::size_t r = 0; r < k.beta.size(); ++r) {
      if (k.beta[r].size() != s) {
        throw ParseError(it->second.rows[r].first, "BETA",
                         "expected " + std::to_string(s) + " entries");
      }
    }
  }
  return k;
}

template <class T>
void write_coefficients(std::ostream& out, const Coefficients<T>& k) {
  auto line = [&](const Vector<T>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << show(v[i]);
    out << '\n';
  };
  out << "[C]\n";
  line(k.c);
  out << "[A]\n";
  for (const auto& r : k.a) line(r);
  out << "[B]\n";
  line(k.b);
  out << "[D]\n";
  line(k.d);
  if (k.has_interpolant()) {
    out << "[BETA]\n";
    for (const auto& r : k.beta) line(r);
  }
}

std::string one_line(std::string s) {
  for (auto& ch : s) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

}  // namespace

ButcherPair parse_tableau(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  std::map<std::string, std::string> header;
  std::map<std::string, RawSection> sections;
  RawSection* current = nullptr;
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(lineno, line, "unterminated section label");
      const std::string label = line.substr(1, line.size() - 2);
      if (label != "C" && label != "A" && label != "B" && label != "D" && label != "BETA") {
        throw ParseError(lineno, label, "unknown section");
      }
      if (sections.count(label)) throw ParseError(lineno, label, "duplicate section");
      current = &sections[label];
      current->line = lineno;
      continue;
    }
    if (!current) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) throw ParseError(lineno, line, "expected 'key: value'");
      const std::string key = trim(line.substr(0, colon));
      if (key != "name" && key != "family" && key != "mode" && key != "source") {
        throw ParseError(lineno, key, "unknown header key");
      }
      header[key] = trim(line.substr(colon + 1));
      continue;
    }
    current->rows.emplace_back(lineno, tokens(line));
  }
  const std::string mode = header.count("mode") ? header["mode"] : "rational";
  if (mode == "rational") {
    return ButcherPair(assemble<Rational>(sections), header["name"], header["family"],
                       header["source"]);
  }
  if (mode == "float") {
    return ButcherPair(assemble<double>(sections), header["name"], header["family"],
                       header["source"]);
  }
  throw ParseError(0, "mode", "expected 'rational' or 'float', got '" + mode + "'");
}

std::string format_tableau(const ButcherPair& pair) {
  std::ostringstream out;
  out << "name: " << one_line(pair.name) << '\n';
  out << "family: " << one_line(pair.family) << '\n';
  out << "mode: " << to_string(pair.mode()) << '\n';
  if (!pair.source.empty()) out << "source: " << one_line(pair.source) << '\n';
  out << '\n';
  pair.visit([&](const auto& k) { write_coefficients(out, k); });
  return out.str();
}

ButcherPair load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LookupError("cannot open tableau file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_tableau(buf.str());
}

void save(const ButcherPair& pair, const std::filesystem::path& path) {
  check_shape(pair);
  std::ofstream out(path);
  if (!out) throw LookupError("cannot write tableau file '" + path.string() + "'");
  out << format_tableau(pair);
}

}  // namespace rkpair
