#pragma once

#include <cstdint>
#include <string>

#include "pmech/errors.hpp"

namespace pmech {

namespace detail {

inline __int128 abs128(__int128 v) { return v < 0 ? -v : v; }

inline __int128 gcd128(__int128 a, __int128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    __int128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

inline std::int64_t narrow64(__int128 v) {
  if (v > __int128(INT64_MAX) || v < __int128(INT64_MIN))
    throw InternalError("rational overflow past 64 bits");
  return static_cast<std::int64_t>(v);
}

}  // namespace detail

// Exact rational on 64-bit words, normalized with den > 0 and gcd 1.
// Intermediates run through __int128; overflow throws rather than wraps.
struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rat() = default;
  Rat(std::int64_t n) : num(n), den(1) {}
  Rat(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (d == 0) throw InternalError("rational with zero denominator");
    reduce128(n, d);
  }

  static Rat from128(__int128 n, __int128 d) {
    Rat r;
    if (d == 0) throw InternalError("rational with zero denominator");
    r.reduce128(n, d);
    return r;
  }

  friend Rat operator+(const Rat& a, const Rat& b) {
    return from128(__int128(a.num) * b.den + __int128(b.num) * a.den,
                   __int128(a.den) * b.den);
  }
  friend Rat operator-(const Rat& a, const Rat& b) {
    return from128(__int128(a.num) * b.den - __int128(b.num) * a.den,
                   __int128(a.den) * b.den);
  }
  friend Rat operator*(const Rat& a, const Rat& b) {
    return from128(__int128(a.num) * b.num, __int128(a.den) * b.den);
  }
  friend Rat operator/(const Rat& a, const Rat& b) {
    if (b.num == 0) throw InternalError("rational division by zero");
    return from128(__int128(a.num) * b.den, __int128(a.den) * b.num);
  }
  Rat operator-() const {
    Rat r;
    r.num = -num;
    r.den = den;
    return r;
  }
  Rat& operator+=(const Rat& o) { return *this = *this + o; }
  Rat& operator-=(const Rat& o) { return *this = *this - o; }
  Rat& operator*=(const Rat& o) { return *this = *this * o; }

  friend bool operator==(const Rat& a, const Rat& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend bool operator<(const Rat& a, const Rat& b) {
    return __int128(a.num) * b.den < __int128(b.num) * a.den;
  }

  Rat pow(int e) const {
    if (e < 0) return (Rat(1) / *this).pow(-e);
    Rat r(1), base = *this;
    while (e > 0) {
      if (e & 1) r = r * base;
      base = base * base;
      e >>= 1;
    }
    return r;
  }

  bool is_zero() const { return num == 0; }
  bool is_integer() const { return den == 1; }
  double to_double() const { return double(num) / double(den); }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

 private:
  void reduce128(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 g = detail::gcd128(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    num = detail::narrow64(n);
    den = detail::narrow64(d == 0 ? 1 : d);
    if (num == 0) den = 1;
  }
};

inline Rat binomial(int n, int k) {
  if (k < 0 || k > n) return Rat(0);
  Rat r(1);
  for (int i = 0; i < k; ++i) r = r * Rat(n - i) / Rat(i + 1);
  return r;
}

inline Rat factorial(int n) {
  Rat r(1);
  for (int i = 2; i <= n; ++i) r = r * Rat(i);
  return r;
}

}  // namespace pmech
