#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace rcs {

/// Exact rational with 64-bit numerator and denominator.
///
/// Always normalized: gcd(num, den) == 1 and den > 0. Every arithmetic
/// operation is computed in 128-bit intermediates and throws
/// std::overflow_error when the reduced result does not fit in 64 bits.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num);  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  double to_double() const;
  long double to_long_double() const;

  /// Largest integer <= *this.
  std::int64_t floor() const;

  /// "p/q", always with an explicit denominator.
  std::string str() const;

  /// Accepts "p", "p/q" and finite decimals such as "0.25" or "-1.5e-3".
  /// Decimals are converted exactly; throws std::invalid_argument otherwise.
  static Rational parse(std::string_view text);

  /// 2^e for e in [-62, 62].
  static Rational pow2(int e);

  Rational operator-() const;
  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  static Rational from_wide(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace rcs
