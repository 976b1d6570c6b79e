#include "rcs/rational.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rcs {
namespace {

using i128 = __int128;

i128 abs128(i128 v) { return v < 0 ? -v : v; }

i128 gcd128(i128 a, i128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits64(i128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

std::int64_t parse_int(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

Rational::Rational(std::int64_t num) : num_(num), den_(1) {}

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  *this = from_wide(num, den);
}

Rational Rational::from_wide(i128 num, i128 den) {
  if (den == 0) throw std::domain_error("rational division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
  if (!fits64(num) || !fits64(den)) throw std::overflow_error("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

double Rational::to_double() const {
  return static_cast<double>(to_long_double());
}

long double Rational::to_long_double() const {
  return static_cast<long double>(num_) / static_cast<long double>(den_);
}

std::int64_t Rational::floor() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

std::string Rational::str() const {
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty rational");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t p = parse_int(text.substr(0, slash));
    std::int64_t q = parse_int(text.substr(slash + 1));
    if (q == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return Rational(p, q);
  }

  // Decimal with optional fraction and exponent, converted exactly.
  std::string_view mant = text;
  int exp10 = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    exp10 = static_cast<int>(parse_int(text.substr(e + 1)));
    mant = text.substr(0, e);
  }
  bool neg = false;
  if (!mant.empty() && (mant.front() == '-' || mant.front() == '+')) {
    neg = mant.front() == '-';
    mant.remove_prefix(1);
  }
  std::string digits;
  bool seen_digit = false;
  bool seen_point = false;
  for (char c : mant) {
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --exp10;
    } else {
      throw std::invalid_argument("malformed number '" + std::string(text) + "'");
    }
  }
  if (!seen_digit) throw std::invalid_argument("malformed number '" + std::string(text) + "'");

  i128 num = 0;
  for (char c : digits) {
    num = num * 10 + (c - '0');
    if (abs128(num) > (i128{1} << 100)) throw std::overflow_error("decimal too long: '" + std::string(text) + "'");
  }
  i128 den = 1;
  for (; exp10 > 0; --exp10) {
    num *= 10;
    if (abs128(num) > (i128{1} << 100)) throw std::overflow_error("decimal out of range");
  }
  for (; exp10 < 0; ++exp10) {
    den *= 10;
    if (den > (i128{1} << 100)) throw std::overflow_error("decimal out of range");
  }
  return from_wide(neg ? -num : num, den);
}

Rational Rational::pow2(int e) {
  if (e > 62 || e < -62) throw std::overflow_error("pow2 exponent out of range");
  if (e >= 0) return Rational(std::int64_t{1} << e);
  return Rational(1, std::int64_t{1} << -e);
}

Rational Rational::operator-() const { return from_wide(-i128{num_}, den_); }

Rational& Rational::operator+=(const Rational& o) {
  return *this = from_wide(i128{num_} * o.den_ + i128{o.num_} * den_, i128{den_} * o.den_);
}

Rational& Rational::operator-=(const Rational& o) {
  return *this = from_wide(i128{num_} * o.den_ - i128{o.num_} * den_, i128{den_} * o.den_);
}

Rational& Rational::operator*=(const Rational& o) {
  return *this = from_wide(i128{num_} * o.num_, i128{den_} * o.den_);
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.num_ == 0) throw std::domain_error("rational division by zero");
  return *this = from_wide(i128{num_} * o.den_, i128{den_} * o.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  return i128{a.num_} * b.den_ <=> i128{b.num_} * a.den_;
}

}  // namespace rcs
