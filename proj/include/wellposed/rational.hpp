#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wellposed {

struct RationalOverflow : std::runtime_error {
  RationalOverflow() : std::runtime_error("rational overflow") {}
};

// Exact rational arithmetic over int64 numerator/denominator with __int128
// intermediates. Values are kept normalized (den > 0, gcd(num, den) == 1);
// results that do not fit int64 after normalization throw RationalOverflow.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(long long n) : num_(n) {}  // NOLINT: implicit by design
  Rational(long long n, long long d);

  static Rational from_int128(__int128 n, __int128 d);

  // Accepts integer and finite-decimal literals: "42", "-7", "0.5", "12.25".
  static std::optional<Rational> parse_decimal(std::string_view s);

  long long num() const { return num_; }
  long long den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

  Rational operator-() const { return Rational(-num_, den_); }
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;  // throws std::domain_error on /0
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const { return *this < o || *this == o; }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  Rational abs() const { return num_ < 0 ? -*this : *this; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  // Exact form: "5", "-3/4".
  std::string to_string() const;

  // Exact decimal when the denominator is of the form 2^a * 5^b ("0.5",
  // "-12.75"); falls back to the exact fraction form otherwise.
  std::string to_decimal_string() const;

  // Rounded decimal for reports, default 6 significant digits.
  std::string to_display_string(int significant = 6) const;

  // SMT-LIB term: "5", "(- 5)", "(/ 1 2)", "(- (/ 1 2))".
  std::string to_smt() const;

 private:
  long long num_ = 0;
  long long den_ = 1;
};

}  // namespace wellposed
