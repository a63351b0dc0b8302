#include "rkpair/scalar.hpp"

#include <charconv>
#include <system_error>

#include "rkpair/errors.hpp"

namespace rkpair {
namespace {

Integer parse_integer(std::string_view digits) {
  const auto first = digits.find_first_not_of('0');
  if (first == std::string_view::npos) return Integer(0);
  return Integer{std::string(digits.substr(first))};
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (ch < '0' || ch > '9') return false;
  }
  return true;
}

Integer pow10(unsigned long n) {
  Integer r = 1;
  for (unsigned long i = 0; i < n; ++i) r *= 10;
  return r;
}

}  // namespace

std::optional<Rational> try_parse_rational(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  Rational value;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = text.substr(0, slash);
    const auto den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return std::nullopt;
    const Integer d = parse_integer(den);
    if (d == 0) return std::nullopt;
    value = Rational(parse_integer(num), d);
  } else {
    std::string_view mant = text;
    long exp10 = 0;
    if (const auto e = text.find_first_of("eE"); e != std::string_view::npos) {
      mant = text.substr(0, e);
      auto es = text.substr(e + 1);
      bool eneg = false;
      if (!es.empty() && (es.front() == '-' || es.front() == '+')) {
        eneg = es.front() == '-';
        es.remove_prefix(1);
      }
      if (!all_digits(es) || es.size() > 6) return std::nullopt;
      exp10 = std::stol(std::string(es));
      if (eneg) exp10 = -exp10;
    }
    std::string digits;
    if (const auto dot = mant.find('.'); dot != std::string_view::npos) {
      const auto ip = mant.substr(0, dot);
      const auto fp = mant.substr(dot + 1);
      if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip)) ||
          (!fp.empty() && !all_digits(fp))) {
        return std::nullopt;
      }
      digits = std::string(ip) + std::string(fp);
      exp10 -= static_cast<long>(fp.size());
    } else {
      if (!all_digits(mant)) return std::nullopt;
      digits = std::string(mant);
    }
    if (digits.empty()) return std::nullopt;
    const Integer m = parse_integer(digits);
    if (exp10 >= 0) {
      value = Rational(m * pow10(static_cast<unsigned long>(exp10)));
    } else {
      value = Rational(m, pow10(static_cast<unsigned long>(-exp10)));
    }
  }
  return negative ? Rational(-value) : value;
}

Rational parse_rational(std::string_view text) {
  if (auto r = try_parse_rational(text)) return *r;
  throw ParseError(0, std::string(text), "not an exact rational");
}

std::string format_rational(const Rational& x) {
  const Integer n = numerator(x);
  const Integer d = denominator(x);
  if (d == 1) return n.str();
  return n.str() + "/" + d.str();
}

double parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    // Allow exact rational syntax in float fields.
    if (auto r = try_parse_rational(text)) return to_double(*r);
    throw ParseError(0, std::string(text), "not a number");
  }
  return v;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

Dyadic round_to_bits(const Rational& x, int bits) {
  Dyadic out;
  if (x == 0) return out;
  const bool negative = x < 0;
  const Integer n = abs(numerator(x));
  const Integer d = denominator(x);
  long e = static_cast<long>(msb(n)) - static_cast<long>(msb(d)) - bits;
  Integer q, r, den;
  const Integer lo = Integer(1) << (bits - 1);
  const Integer hi = Integer(1) << bits;
  for (;;) {
    Integer num = n;
    den = d;
    if (e < 0) {
      num <<= static_cast<unsigned>(-e);
    } else {
      den <<= static_cast<unsigned>(e);
    }
    divide_qr(num, den, q, r);
    if (q >= hi) {
      ++e;
    } else if (q < lo) {
      --e;
    } else {
      break;
    }
  }
  const Integer twice = r * 2;
  if (twice > den || (twice == den && (q & 1) != 0)) ++q;
  if (q == hi) {
    q >>= 1;
    ++e;
  }
  out.mantissa = negative ? Integer(-q) : q;
  out.exponent = e;
  return out;
}

Rational truncate_bits(const Rational& x, int bits) {
  if (x == 0) return x;
  const Dyadic r = round_to_bits(x, bits);
  if (r.exponent >= 0) return Rational(r.mantissa << static_cast<unsigned>(r.exponent));
  return Rational(r.mantissa, Integer(1) << static_cast<unsigned>(-r.exponent));
}

Rational sqrt_approx(const Rational& x, int bits) {
  if (x < 0) throw RangeError("sqrt of a negative number");
  if (x == 0) return x;
  // floor(sqrt(n * d * 4^bits)) / (d * 2^bits)
  const Integer n = numerator(x);
  const Integer d = denominator(x);
  const unsigned b = static_cast<unsigned>(bits);
  const Integer s = sqrt(Integer((n * d) << (2 * b)));
  return Rational(s, d << b);
}

std::optional<Rational> exact_sqrt(const Rational& x) {
  if (x < 0) return std::nullopt;
  const Integer n = numerator(x);
  const Integer d = denominator(x);
  const Integer sn = sqrt(n);
  const Integer sd = sqrt(d);
  if (sn * sn != n || sd * sd != d) return std::nullopt;
  return Rational(sn, sd);
}

}  // namespace rkpair
