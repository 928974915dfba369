#pragma once

#include <complex>
#include <map>
#include <string>

#include "pmech/rational.hpp"

namespace pmech {

// Gaussian rational a + b i.
struct GaussRat {
  Rat re{0}, im{0};

  GaussRat() = default;
  GaussRat(Rat r) : re(r) {}
  GaussRat(Rat r, Rat i) : re(r), im(i) {}

  friend GaussRat operator+(const GaussRat& a, const GaussRat& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussRat operator-(const GaussRat& a, const GaussRat& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend GaussRat operator*(const GaussRat& a, const GaussRat& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  GaussRat operator-() const { return {-re, -im}; }
  friend bool operator==(const GaussRat& a, const GaussRat& b) {
    return a.re == b.re && a.im == b.im;
  }
  bool is_zero() const { return re.is_zero() && im.is_zero(); }
  GaussRat conj() const { return {re, -im}; }

  static GaussRat i_pow(int m) {
    m = ((m % 4) + 4) % 4;
    switch (m) {
      case 0: return {Rat(1), Rat(0)};
      case 1: return {Rat(0), Rat(1)};
      case 2: return {Rat(-1), Rat(0)};
      default: return {Rat(0), Rat(-1)};
    }
  }

  std::complex<double> to_complex() const {
    return {re.to_double(), im.to_double()};
  }
};

// Exact scalar sum_e c_e (2 pi)^e with Gaussian-rational c_e. Symbolic
// identities (Jacobi, Poisson compatibility, roundtrips) hold exactly in this
// field; conversion to complex<double> happens only at the numeric boundary.
struct ExactCoeff {
  std::map<int, GaussRat> terms;  // exponent of (2 pi) -> coefficient

  ExactCoeff() = default;
  ExactCoeff(Rat r) {
    if (!r.is_zero()) terms[0] = GaussRat(r);
  }
  ExactCoeff(std::int64_t n) : ExactCoeff(Rat(n)) {}
  static ExactCoeff make(GaussRat g, int e = 0) {
    ExactCoeff c;
    if (!g.is_zero()) c.terms[e] = g;
    return c;
  }
  // (-1/(2 pi i))^k = i^k (2 pi)^{-k}; the mechanisation scale.
  static ExactCoeff inv_2pii_neg_pow(int k) {
    return make(GaussRat::i_pow(k), -k);
  }
  // (-2 pi i)^k = (-i)^k (2 pi)^k; the classical-representation scale.
  static ExactCoeff minus_2pii_pow(int k) {
    return make(GaussRat::i_pow(-k), k);
  }

  friend ExactCoeff operator+(const ExactCoeff& a, const ExactCoeff& b) {
    ExactCoeff out = a;
    for (const auto& [e, g] : b.terms) {
      auto it = out.terms.find(e);
      if (it == out.terms.end()) {
        out.terms[e] = g;
      } else {
        it->second = it->second + g;
        if (it->second.is_zero()) out.terms.erase(it);
      }
    }
    return out;
  }
  friend ExactCoeff operator-(const ExactCoeff& a, const ExactCoeff& b) {
    return a + (-b);
  }
  ExactCoeff operator-() const {
    ExactCoeff out;
    for (const auto& [e, g] : terms) out.terms[e] = -g;
    return out;
  }
  friend ExactCoeff operator*(const ExactCoeff& a, const ExactCoeff& b) {
    ExactCoeff out;
    for (const auto& [ea, ga] : a.terms)
      for (const auto& [eb, gb] : b.terms) {
        GaussRat prod = ga * gb;
        auto it = out.terms.find(ea + eb);
        if (it == out.terms.end()) {
          if (!prod.is_zero()) out.terms[ea + eb] = prod;
        } else {
          it->second = it->second + prod;
          if (it->second.is_zero()) out.terms.erase(it);
        }
      }
    return out;
  }
  ExactCoeff& operator+=(const ExactCoeff& o) { return *this = *this + o; }
  ExactCoeff& operator*=(const ExactCoeff& o) { return *this = *this * o; }

  friend bool operator==(const ExactCoeff& a, const ExactCoeff& b) {
    return a.terms == b.terms;
  }
  bool is_zero() const { return terms.empty(); }

  ExactCoeff conj() const {
    ExactCoeff out;
    for (const auto& [e, g] : terms) out.terms[e] = g.conj();
    return out;
  }

  std::complex<double> to_complex() const {
    std::complex<double> acc{0.0, 0.0};
    const double two_pi = 6.283185307179586476925286766559;
    for (const auto& [e, g] : terms)
      acc += g.to_complex() * std::pow(two_pi, e);
    return acc;
  }
};

}  // namespace pmech
