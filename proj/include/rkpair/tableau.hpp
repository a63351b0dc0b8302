#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "rkpair/scalar.hpp"

namespace rkpair {

enum class ScalarMode { exact, floating };

std::string to_string(ScalarMode mode);

// c, A (s x s, strictly lower triangular), b, d (4th-order weights are b + d),
// and optional interpolant rows beta[k-1][j] for the coefficient of theta^k.
template <class T>
struct Coefficients {
  Vector<T> c;
  Matrix<T> a;
  Vector<T> b;
  Vector<T> d;
  Matrix<T> beta;

  std::size_t stages() const { return c.size(); }
  bool has_interpolant() const { return !beta.empty(); }

  template <class U>
  Coefficients<U> convert() const {
    Coefficients<U> out;
    auto vec = [](const Vector<T>& v) {
      Vector<U> r;
      r.reserve(v.size());
      for (const auto& x : v) {
        if constexpr (std::is_same_v<T, Rational>) {
          r.push_back(to_real<U>(x));
        } else {
          r.push_back(static_cast<U>(x));
        }
      }
      return r;
    };
    out.c = vec(c);
    out.b = vec(b);
    out.d = vec(d);
    for (const auto& row : a) out.a.push_back(vec(row));
    for (const auto& row : beta) out.beta.push_back(vec(row));
    return out;
  }

  Vector<T> embedded_weights() const {
    Vector<T> w(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) w[i] = b[i] + d[i];
    return w;
  }

  friend bool operator==(const Coefficients&, const Coefficients&) = default;
};

class ButcherPair {
 public:
  ButcherPair() = default;
  ButcherPair(Coefficients<Rational> coefficients, std::string name = {},
              std::string family = {}, std::string source = {});
  ButcherPair(Coefficients<double> coefficients, std::string name = {},
              std::string family = {}, std::string source = {});

  ScalarMode mode() const;
  bool exact() const { return mode() == ScalarMode::exact; }

  // Throws CapabilityError for float-mode pairs.
  const Coefficients<Rational>& exact_coefficients() const;
  // Rounded copy for exact pairs.
  Coefficients<double> float_coefficients() const;

  // Exact conversion from rational data; float data are widened.
  template <class Real>
  Coefficients<Real> coefficients_as() const {
    if (const auto* r = std::get_if<Coefficients<Rational>>(&data_)) {
      return r->template convert<Real>();
    }
    return std::get<Coefficients<double>>(data_).template convert<Real>();
  }

  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), data_);
  }

  std::size_t stages() const;
  // Last stage evaluated at the step end with the 5th-order weights.
  bool fsal() const;
  // Stage count once an unused trailing FSAL stage (d_s = 0) is dropped.
  std::size_t effective_stages() const;
  bool has_interpolant() const;

  std::string name;
  std::string family;
  std::string source;

  friend bool operator==(const ButcherPair&, const ButcherPair&) = default;

 private:
  std::variant<Coefficients<Rational>, Coefficients<double>> data_;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline constexpr double kFloatTolerance = 1e-13;

// Throws StructuralError on inconsistent dimensions; reports invariant
// breaches otherwise.
ValidationReport validate(const ButcherPair& pair);
void check_shape(const ButcherPair& pair);

// Text format (docs/tableau-format.md).
ButcherPair parse_tableau(const std::string& text);
std::string format_tableau(const ButcherPair& pair);
ButcherPair load(const std::filesystem::path& path);
void save(const ButcherPair& pair, const std::filesystem::path& path);

// Registry of the built-in pairs.
std::vector<std::string> builtin_names();
ButcherPair builtin(const std::string& name);
// Builtin name, or a path to a tableau file.
ButcherPair resolve_pair(const std::string& name_or_path);

// Rational approximation (|error| < 2^-bits) to c5 = 3(8 sqrt(4054) - 431)/289.
Rational sqrt4054_node(int bits = 128);
// The closed-form one-parameter tableau with c2 = 1/5, c3 = 1/4, c'3 = 1/40,
// c4 = 3/5, c6 = 1 as a function of c5.
Coefficients<Rational> sqrt4054_tableau(const Rational& c5);

}  // namespace rkpair
