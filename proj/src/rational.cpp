#include "wellposed/rational.hpp"

#include <cmath>
#include <cstdlib>

namespace wellposed {

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr __int128 kMaxI64 = static_cast<__int128>(INT64_MAX);
constexpr __int128 kMinI64 = static_cast<__int128>(INT64_MIN);

}  // namespace

Rational Rational::from_int128(__int128 n, __int128 d) {
  if (d == 0) throw std::domain_error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  if (n > kMaxI64 || n < kMinI64 || d > kMaxI64) throw RationalOverflow();
  Rational r;
  r.num_ = static_cast<long long>(n);
  r.den_ = static_cast<long long>(d);
  return r;
}

Rational::Rational(long long n, long long d) {
  *this = from_int128(static_cast<__int128>(n), static_cast<__int128>(d));
}

std::optional<Rational> Rational::parse_decimal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool neg = false;
  size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i >= s.size() || !isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
  __int128 num = 0;
  __int128 den = 1;
  bool seen_dot = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (seen_dot || i + 1 >= s.size()) return std::nullopt;
      seen_dot = true;
      continue;
    }
    if (!isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    num = num * 10 + (c - '0');
    if (seen_dot) den *= 10;
    if (num > kMaxI64 * 1000 || den > kMaxI64) return std::nullopt;
  }
  if (neg) num = -num;
  try {
    return from_int128(num, den);
  } catch (const RationalOverflow&) {
    return std::nullopt;
  }
}

Rational Rational::operator+(const Rational& o) const {
  return from_int128(static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_,
                     static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
  return from_int128(static_cast<__int128>(num_) * o.den_ - static_cast<__int128>(o.num_) * den_,
                     static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
  return from_int128(static_cast<__int128>(num_) * o.num_, static_cast<__int128>(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num_ == 0) throw std::domain_error("rational division by zero");
  return from_int128(static_cast<__int128>(num_) * o.den_, static_cast<__int128>(den_) * o.num_);
}

bool Rational::operator<(const Rational& o) const {
  return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string Rational::to_decimal_string() const {
  long long d = den_;
  int twos = 0, fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1) return to_string();
  if (den_ == 1) return std::to_string(num_);
  // Scale to 10^k with k = max(twos, fives).
  int k = twos > fives ? twos : fives;
  __int128 scaled = num_;
  for (int i = 0; i < k - twos; ++i) scaled *= 2;
  for (int i = 0; i < k - fives; ++i) scaled *= 5;
  bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  std::string digits;
  if (scaled == 0) digits = "0";
  while (scaled > 0) {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(scaled % 10)));
    scaled /= 10;
  }
  while (static_cast<int>(digits.size()) <= k) digits.insert(digits.begin(), '0');
  digits.insert(digits.size() - k, ".");
  return (neg ? "-" : "") + digits;
}

std::string Rational::to_display_string(int significant) const {
  if (is_integer()) return std::to_string(num_);
  std::string dec = to_decimal_string();
  if (dec.find('/') == std::string::npos) {
    // Exact decimal; trim to the requested significant digits if longer.
    size_t first_sig = dec.find_first_not_of("-0.");
    if (first_sig == std::string::npos) return "0";
    int sig_seen = 0;
    size_t cut = dec.size();
    for (size_t i = first_sig; i < dec.size(); ++i) {
      if (isdigit(static_cast<unsigned char>(dec[i]))) ++sig_seen;
      if (sig_seen == significant) {
        cut = i + 1;
        break;
      }
    }
    if (cut >= dec.size()) return dec;
    std::string trimmed = dec.substr(0, cut);
    if (trimmed.back() == '.') trimmed.pop_back();
    return trimmed;
  }
  char buf[64];
  snprintf(buf, sizeof(buf), "%.*g", significant, to_double());
  return buf;
}

std::string Rational::to_smt() const {
  bool neg = num_ < 0;
  unsigned long long n = neg ? -static_cast<unsigned long long>(num_) : static_cast<unsigned long long>(num_);
  std::string body = den_ == 1 ? std::to_string(n)
                               : "(/ " + std::to_string(n) + " " + std::to_string(den_) + ")";
  return neg ? "(- " + body + ")" : body;
}

}  // namespace wellposed
