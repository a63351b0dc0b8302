#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace rkpair {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

template <class T>
using Vector = std::vector<T>;
template <class T>
using Matrix = std::vector<std::vector<T>>;

// Accepts "p", "p/q" and exact decimals such as "-1.25e-3".
Rational parse_rational(std::string_view text);
std::optional<Rational> try_parse_rational(std::string_view text);
std::string format_rational(const Rational& x);

double parse_double(std::string_view text);
// Shortest decimal that reads back to the same double.
std::string format_double(double x);

// q * 2^e with q an odd-or-zero integer mantissa of at most `bits` bits,
// rounded to nearest, ties to even.
struct Dyadic {
  Integer mantissa;
  long exponent = 0;
};
Dyadic round_to_bits(const Rational& x, int bits);

template <class Real>
Real to_real(const Rational& x) {
  using std::ldexp;
  if constexpr (std::is_same_v<Real, Rational>) {
    return x;
  } else {
  if (x == 0) return Real(0);
  const Dyadic r = round_to_bits(x, std::numeric_limits<Real>::digits);
  Integer m = abs(r.mantissa);
  std::vector<std::uint32_t> chunks;
  while (m != 0) {
    chunks.push_back(static_cast<std::uint32_t>(m & Integer(0xffffffffu)));
    m >>= 32;
  }
  Real acc = 0;
  for (auto it = chunks.rbegin(); it != chunks.rend(); ++it) {
    acc = ldexp(acc, 32) + Real(*it);
  }
  acc = ldexp(acc, static_cast<int>(r.exponent));
  return r.mantissa < 0 ? Real(-acc) : acc;
  }
}

inline double to_double(const Rational& x) { return to_real<double>(x); }

// Nearest dyadic rational with `bits` significant bits.
Rational truncate_bits(const Rational& x, int bits);
// Rational approximation to sqrt(x) with absolute error below 2^-bits.
Rational sqrt_approx(const Rational& x, int bits);
// Exact square root when x is the square of a rational.
std::optional<Rational> exact_sqrt(const Rational& x);

template <class T>
bool is_zero(const T& x) {
  return x == 0;
}

template <class T>
Vector<T> convert_vector(const Vector<Rational>& v) {
  Vector<T> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(to_real<T>(x));
  return out;
}

}  // namespace rkpair
