#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "pmech/errors.hpp"
#include "pmech/rational.hpp"

namespace pmech {

// Dimension on the (M, L, T) lattice with exact rational exponents.
// Multiplication of quantities adds exponents; the lattice is an abelian group.
struct Dim {
  Rat m{0}, l{0}, t{0};

  friend Dim operator*(const Dim& a, const Dim& b) {
    return {a.m + b.m, a.l + b.l, a.t + b.t};
  }
  friend Dim operator/(const Dim& a, const Dim& b) {
    return {a.m - b.m, a.l - b.l, a.t - b.t};
  }
  Dim pow(const Rat& e) const { return {m * e, l * e, t * e}; }
  Dim inverse() const { return {-m, -l, -t}; }
  friend bool operator==(const Dim& a, const Dim& b) {
    return a.m == b.m && a.l == b.l && a.t == b.t;
  }
  friend bool operator!=(const Dim& a, const Dim& b) { return !(a == b); }
  bool dimensionless() const {
    return m.is_zero() && l.is_zero() && t.is_zero();
  }
  std::string str() const {
    if (dimensionless()) return "1";
    std::string out;
    auto app = [&out](const char* sym, const Rat& e) {
      if (e.is_zero()) return;
      if (!out.empty()) out += " ";
      out += sym;
      out += "^" + e.str();
    };
    app("M", m);
    app("L", l);
    app("T", t);
    return out;
  }
};

// Base units of the convention, plus the derived units every module touches.
inline const Dim dim_none{};
inline const Dim dim_mass{1, 0, 0};
inline const Dim dim_length{0, 1, 0};
inline const Dim dim_time{0, 0, 1};

inline const Dim dim_q{0, 1, 0};            // position, L
inline const Dim dim_p{1, 1, -1};           // momentum, LM/T
inline const Dim dim_h{1, 2, -1};           // action, ML^2/T
inline const Dim dim_s{-1, -2, 1};          // group center, T/(L^2 M)
inline const Dim dim_x{0, -1, 0};           // dual of q, 1/L
inline const Dim dim_y{-1, -1, 1};          // dual of p, T/(LM)
inline const Dim dim_c1{1, 0, -2};          // oscillator stiffness, M/T^2
inline const Dim dim_c2{-1, 0, 0};          // inverse mass, 1/M
inline const Dim dim_ci{-1, 0, 1};          // vacuum coupling, T/M
inline const Dim dim_energy{1, 2, -2};      // ML^2/T^2
inline const Dim dim_antider = dim_s;       // the bracket multiplier, 1/action

// Complex scalar carrying a Dimension. Addition requires equal dims;
// transcendentals require dimensionless arguments. Inner numeric loops use
// plain doubles ("raw mode"); Quantities guard the API boundaries and tests.
struct Quantity {
  std::complex<double> value{0.0, 0.0};
  Dim dim{};

  Quantity() = default;
  Quantity(double v) : value(v) {}
  Quantity(std::complex<double> v) : value(v) {}
  Quantity(std::complex<double> v, Dim d) : value(v), dim(d) {}
  Quantity(double v, Dim d) : value(v), dim(d) {}

  friend Quantity operator+(const Quantity& a, const Quantity& b) {
    if (a.dim != b.dim)
      throw DimensionMismatch("cannot add " + a.dim.str() + " to " + b.dim.str());
    return {a.value + b.value, a.dim};
  }
  friend Quantity operator-(const Quantity& a, const Quantity& b) {
    if (a.dim != b.dim)
      throw DimensionMismatch("cannot subtract " + b.dim.str() + " from " +
                              a.dim.str());
    return {a.value - b.value, a.dim};
  }
  friend Quantity operator*(const Quantity& a, const Quantity& b) {
    return {a.value * b.value, a.dim * b.dim};
  }
  friend Quantity operator/(const Quantity& a, const Quantity& b) {
    return {a.value / b.value, a.dim / b.dim};
  }
  Quantity operator-() const { return {-value, dim}; }

  Quantity pow(int e) const {
    std::complex<double> v = std::pow(value, e);
    return {v, dim.pow(Rat(e))};
  }
  // Exponents stay exact rationals, so square roots are always representable.
  Quantity sqrt() const { return {std::sqrt(value), dim.pow(Rat(1, 2))}; }
};

inline std::complex<double> assert_dimensionless(const Quantity& a) {
  if (!a.dim.dimensionless())
    throw DimensionMismatch("expected dimensionless, got " + a.dim.str());
  return a.value;
}

inline Quantity q_exp(const Quantity& a) {
  return {std::exp(assert_dimensionless(a))};
}
inline Quantity q_sin(const Quantity& a) {
  return {std::sin(assert_dimensionless(a))};
}
inline Quantity q_cos(const Quantity& a) {
  return {std::cos(assert_dimensionless(a))};
}

}  // namespace pmech
