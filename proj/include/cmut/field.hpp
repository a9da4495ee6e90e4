#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cmut {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

struct FieldSpec {
  enum class Kind { rationals, prime };
  Kind kind = Kind::rationals;
  std::uint32_t p = 0;

  static FieldSpec rationals() { return {}; }
  static FieldSpec prime(std::uint64_t p);

  bool is_prime() const { return kind == Kind::prime; }
  bool operator==(const FieldSpec&) const = default;
  std::string name() const { return is_prime() ? "fp:" + std::to_string(p) : "q"; }
};

inline bool is_prime_number(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline FieldSpec FieldSpec::prime(std::uint64_t p) {
  if (p > (std::uint64_t{1} << 31) || !is_prime_number(p))
    throw std::invalid_argument("field characteristic must be a prime in [2, 2^31], got " +
                                std::to_string(p));
  FieldSpec f;
  f.kind = Kind::prime;
  f.p = static_cast<std::uint32_t>(p);
  return f;
}

// "q" or "fp:<p>"
inline FieldSpec parse_field(const std::string& s) {
  if (s == "q" || s == "Q") return FieldSpec::rationals();
  if (s.rfind("fp:", 0) == 0) {
    std::size_t used = 0;
    unsigned long long p = 0;
    try {
      p = std::stoull(s.substr(3), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad field spec '" + s + "'");
    }
    if (used != s.size() - 3) throw std::invalid_argument("bad field spec '" + s + "'");
    return FieldSpec::prime(p);
  }
  throw std::invalid_argument("bad field spec '" + s + "' (expected q or fp:<p>)");
}

// Residue modulo a prime carried alongside its modulus.
struct Fp {
  std::uint32_t v = 0;
  std::uint32_t p = 0;

  Fp() = default;
  Fp(std::int64_t x, std::uint32_t mod) : p(mod) {
    std::int64_t r = x % static_cast<std::int64_t>(mod);
    if (r < 0) r += mod;
    v = static_cast<std::uint32_t>(r);
  }

  friend Fp operator+(Fp a, Fp b) {
    std::uint64_t s = std::uint64_t{a.v} + b.v;
    if (s >= a.p) s -= a.p;
    a.v = static_cast<std::uint32_t>(s);
    return a;
  }
  friend Fp operator-(Fp a, Fp b) {
    a.v = a.v >= b.v ? a.v - b.v : static_cast<std::uint32_t>(std::uint64_t{a.v} + a.p - b.v);
    return a;
  }
  friend Fp operator*(Fp a, Fp b) {
    a.v = static_cast<std::uint32_t>((std::uint64_t{a.v} * b.v) % a.p);
    return a;
  }
  Fp operator-() const {
    Fp r = *this;
    r.v = v == 0 ? 0 : p - v;
    return r;
  }
  Fp inverse() const {
    if (v == 0) throw std::domain_error("division by zero in prime field");
    std::int64_t t = 0, nt = 1, r = p, nr = v;
    while (nr != 0) {
      std::int64_t q = r / nr;
      std::int64_t tmp = t - q * nt;
      t = nt;
      nt = tmp;
      tmp = r - q * nr;
      r = nr;
      nr = tmp;
    }
    return Fp(t, p);
  }
  friend Fp operator/(Fp a, Fp b) { return a * b.inverse(); }
  Fp& operator+=(Fp b) { return *this = *this + b; }
  Fp& operator-=(Fp b) { return *this = *this - b; }
  Fp& operator*=(Fp b) { return *this = *this * b; }
  Fp& operator/=(Fp b) { return *this = *this / b; }
  friend bool operator==(Fp a, Fp b) { return a.v == b.v; }
  friend bool operator!=(Fp a, Fp b) { return a.v != b.v; }
  friend bool operator<(Fp a, Fp b) { return a.v < b.v; }
};

// Uniform scalar interface used by the templated algebra.
template <class T>
struct Scalar;

template <>
struct Scalar<Rational> {
  static Rational from_int(std::int64_t x, const FieldSpec&) { return Rational(x); }
  static Rational from_rational(const Rational& x, const FieldSpec&) { return x; }
  static bool is_zero(const Rational& x) { return x == 0; }
  static Rational inv(const Rational& x) {
    if (x == 0) throw std::domain_error("division by zero");
    return 1 / x;
  }
  static std::string str(const Rational& x) {
    BigInt n = boost::multiprecision::numerator(x), d = boost::multiprecision::denominator(x);
    return d == 1 ? n.str() : n.str() + "/" + d.str();
  }
  static bool compatible(const FieldSpec& f) { return !f.is_prime(); }
};

template <>
struct Scalar<Fp> {
  static Fp from_int(std::int64_t x, const FieldSpec& f) { return Fp(x, f.p); }
  static Fp from_rational(const Rational& x, const FieldSpec& f) {
    BigInt n = boost::multiprecision::numerator(x), d = boost::multiprecision::denominator(x);
    BigInt pn = n % f.p, pd = d % f.p;
    if (pn < 0) pn += f.p;
    if (pd == 0) throw std::domain_error("denominator vanishes modulo " + std::to_string(f.p));
    return Fp(static_cast<std::int64_t>(pn), f.p) / Fp(static_cast<std::int64_t>(pd), f.p);
  }
  static bool is_zero(const Fp& x) { return x.v == 0; }
  static Fp inv(const Fp& x) { return x.inverse(); }
  static std::string str(const Fp& x) { return std::to_string(x.v); }
  static bool compatible(const FieldSpec& f) { return f.is_prime(); }
};

inline BigInt parse_integer(const std::string& s) {
  bool neg = !s.empty() && s[0] == '-';
  std::string digits = s.substr(neg || (!s.empty() && s[0] == '+') ? 1 : 0);
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("bad integer '" + s + "'");
  BigInt v(digits);
  return neg ? BigInt(-v) : v;
}

inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(parse_integer(s));
    BigInt n = parse_integer(s.substr(0, slash)), d = parse_integer(s.substr(slash + 1));
    if (d == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    return Rational(n, d);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad rational '" + s + "'");
  }
}

inline std::string rat_str(const Rational& x) { return Scalar<Rational>::str(x); }

}  // namespace cmut
