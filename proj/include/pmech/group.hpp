#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "pmech/errors.hpp"
#include "pmech/units.hpp"

namespace pmech {

// Element (s,x,y) of the Heisenberg group H^n in exponential coordinates.
// Coordinates are raw doubles; dimension checks happen once in checked().
struct GroupPoint {
  double s = 0.0;
  std::vector<double> x, y;

  GroupPoint() : x(1, 0.0), y(1, 0.0) {}
  GroupPoint(double s_, double x_, double y_) : s(s_), x{x_}, y{y_} {}
  GroupPoint(double s_, std::vector<double> x_, std::vector<double> y_)
      : s(s_), x(std::move(x_)), y(std::move(y_)) {
    if (x.size() != y.size() || x.empty())
      throw RankMismatch("group point needs len(x) == len(y) >= 1");
  }

  static GroupPoint checked(const Quantity& s_,
                            const std::vector<Quantity>& x_,
                            const std::vector<Quantity>& y_) {
    if (s_.dim != dim_s) throw DimensionMismatch("s must carry T/(L^2 M)");
    std::vector<double> xr, yr;
    for (const auto& v : x_) {
      if (v.dim != dim_x) throw DimensionMismatch("x must carry 1/L");
      xr.push_back(v.value.real());
    }
    for (const auto& v : y_) {
      if (v.dim != dim_y) throw DimensionMismatch("y must carry T/(LM)");
      yr.push_back(v.value.real());
    }
    return GroupPoint(s_.value.real(), std::move(xr), std::move(yr));
  }

  std::size_t rank() const { return x.size(); }
  static GroupPoint identity(std::size_t n = 1) {
    return GroupPoint(0.0, std::vector<double>(n, 0.0),
                      std::vector<double>(n, 0.0));
  }
};

// Point (h,q,p) of the adjoint space; orbits are planes (h != 0) or points.
struct DualPoint {
  double h = 0.0;
  std::vector<double> q, p;

  DualPoint() : q(1, 0.0), p(1, 0.0) {}
  DualPoint(double h_, double q_, double p_) : h(h_), q{q_}, p{p_} {}
  DualPoint(double h_, std::vector<double> q_, std::vector<double> p_)
      : h(h_), q(std::move(q_)), p(std::move(p_)) {
    if (q.size() != p.size() || q.empty())
      throw RankMismatch("dual point needs len(q) == len(p) >= 1");
  }

  static DualPoint checked(const Quantity& h_,
                           const std::vector<Quantity>& q_,
                           const std::vector<Quantity>& p_) {
    if (h_.dim != dim_h) throw DimensionMismatch("h must carry ML^2/T");
    std::vector<double> qr, pr;
    for (const auto& v : q_) {
      if (v.dim != dim_q) throw DimensionMismatch("q must carry L");
      qr.push_back(v.value.real());
    }
    for (const auto& v : p_) {
      if (v.dim != dim_p) throw DimensionMismatch("p must carry LM/T");
      pr.push_back(v.value.real());
    }
    return DualPoint(h_.value.real(), std::move(qr), std::move(pr));
  }

  std::size_t rank() const { return q.size(); }
};

// omega(x,y;x',y') = x.y' - x'.y, the symplectic form pairing (x,y) planes.
inline double symplectic_form(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& x2,
                              const std::vector<double>& y2) {
  if (x.size() != y.size() || x.size() != x2.size() || x.size() != y2.size())
    throw RankMismatch("symplectic form needs equal-length vectors");
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    acc += x[j] * y2[j] - x2[j] * y[j];
  return acc;
}

inline GroupPoint multiply(const GroupPoint& g1, const GroupPoint& g2) {
  if (g1.rank() != g2.rank()) throw RankMismatch("group rank mismatch");
  GroupPoint out = g1;
  out.s = g1.s + g2.s + 0.5 * symplectic_form(g1.x, g1.y, g2.x, g2.y);
  for (std::size_t j = 0; j < g1.rank(); ++j) {
    out.x[j] = g1.x[j] + g2.x[j];
    out.y[j] = g1.y[j] + g2.y[j];
  }
  return out;
}

inline GroupPoint inverse(const GroupPoint& g) {
  GroupPoint out = g;
  out.s = -g.s;
  for (std::size_t j = 0; j < g.rank(); ++j) {
    out.x[j] = -g.x[j];
    out.y[j] = -g.y[j];
  }
  return out;
}

// Ad*(s,x,y): (h,q,p) -> (h, q + h y, p - h x). Fixes every h=0 point, so the
// action factors through the abelianization and both composition orders hold.
inline DualPoint coadjoint(const GroupPoint& g, const DualPoint& f) {
  if (g.rank() != f.rank()) throw RankMismatch("coadjoint rank mismatch");
  DualPoint out = f;
  for (std::size_t j = 0; j < f.rank(); ++j) {
    out.q[j] = f.q[j] + f.h * g.y[j];
    out.p[j] = f.p[j] - f.h * g.x[j];
  }
  return out;
}

// Linear map A = (a b; c d) on (x,y) space, blocks n x n row-major.
// Units of blocks: a, d dimensionless; b carries M/T; c carries T/M.
struct SympMap {
  std::size_t n = 1;
  std::vector<double> a, b, c, d;

  SympMap() : a{1.0}, b{0.0}, c{0.0}, d{1.0} {}
  SympMap(double a_, double b_, double c_, double d_)
      : a{a_}, b{b_}, c{c_}, d{d_} {}
  SympMap(std::size_t n_, std::vector<double> a_, std::vector<double> b_,
          std::vector<double> c_, std::vector<double> d_)
      : n(n_), a(std::move(a_)), b(std::move(b_)), c(std::move(c_)),
        d(std::move(d_)) {
    if (a.size() != n * n || b.size() != n * n || c.size() != n * n ||
        d.size() != n * n)
      throw RankMismatch("symplectic map blocks must be n x n");
  }

  static SympMap identity() { return SympMap(1, 0, 0, 1); }
  // J: (x,y) -> (y,-x), the quarter rotation.
  static SympMap rotation_J() { return SympMap(0, 1, -1, 0); }
  static SympMap rotation(double theta) {
    return SympMap(std::cos(theta), std::sin(theta), -std::sin(theta),
                   std::cos(theta));
  }
  static SympMap scaling(double lambda) {
    return SympMap(lambda, 0, 0, 1.0 / lambda);
  }
  static SympMap shear_q(double mu) { return SympMap(1, mu, 0, 1); }
  static SympMap shear_p(double mu) { return SympMap(1, 0, mu, 1); }

  // Apply to stacked (x,y): x' = a x + b y, y' = c x + d y.
  void apply(const std::vector<double>& x, const std::vector<double>& y,
             std::vector<double>& xo, std::vector<double>& yo) const {
    if (x.size() != n || y.size() != n)
      throw RankMismatch("symplectic map rank mismatch");
    xo.assign(n, 0.0);
    yo.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        xo[i] += a[i * n + j] * x[j] + b[i * n + j] * y[j];
        yo[i] += c[i * n + j] * x[j] + d[i * n + j] * y[j];
      }
  }

  // Transpose acting on (q,p): q' = a^t q + c^t p, p' = b^t q + d^t p.
  void apply_transpose(const std::vector<double>& q,
                       const std::vector<double>& p, std::vector<double>& qo,
                       std::vector<double>& po) const {
    if (q.size() != n || p.size() != n)
      throw RankMismatch("symplectic map rank mismatch");
    qo.assign(n, 0.0);
    po.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        qo[i] += a[j * n + i] * q[j] + c[j * n + i] * p[j];
        po[i] += b[j * n + i] * q[j] + d[j * n + i] * p[j];
      }
  }
};

// A^t J A = J within 1e-12, i.e. a^t c symmetric, b^t d symmetric,
// a^t d - c^t b = I. Inputs are exact-constructed matrices, so the
// tolerance only absorbs rounding in the block products.
inline bool is_symplectic(const SympMap& A, double tol = 1e-12) {
  const std::size_t n = A.n;
  auto at = [&](const std::vector<double>& m, std::size_t i, std::size_t j) {
    return m[i * n + j];
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double atc = 0, cta = 0, btd = 0, dtb = 0, atd = 0, ctb = 0;
      for (std::size_t k = 0; k < n; ++k) {
        atc += at(A.a, k, i) * at(A.c, k, j);
        cta += at(A.c, k, i) * at(A.a, k, j);
        btd += at(A.b, k, i) * at(A.d, k, j);
        dtb += at(A.d, k, i) * at(A.b, k, j);
        atd += at(A.a, k, i) * at(A.d, k, j);
        ctb += at(A.c, k, i) * at(A.b, k, j);
      }
      if (std::abs(atc - cta) > tol) return false;
      if (std::abs(btd - dtb) > tol) return false;
      double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(atd - ctb - want) > tol) return false;
    }
  return true;
}

// alpha_A(s,x,y) = (s, A(x,y)); an automorphism exactly when A preserves omega.
inline GroupPoint apply_automorphism(const SympMap& A, const GroupPoint& g) {
  if (!is_symplectic(A)) throw NotSymplectic("map does not preserve omega");
  if (A.n != g.rank()) throw RankMismatch("automorphism rank mismatch");
  GroupPoint out = g;
  A.apply(g.x, g.y, out.x, out.y);
  return out;
}

// Adjoint action on the orbit space: (h,q,p) -> (h, A^t(q,p)).
inline DualPoint dalpha_star(const SympMap& A, const DualPoint& f) {
  if (!is_symplectic(A)) throw NotSymplectic("map does not preserve omega");
  if (A.n != f.rank()) throw RankMismatch("rank mismatch");
  DualPoint out = f;
  A.apply_transpose(f.q, f.p, out.q, out.p);
  return out;
}

// ---------------------------------------------------------------------------
// Finite-difference verification of the Lie algebra structure at n = 1.
//
// Left-invariant fields (generators of right shifts):
//   S^l = d/ds,  X^l = d/dx - (y/2) d/ds,  Y^l = d/dy + (x/2) d/ds.
// Right-invariant fields (generators of left shifts):
//   S^r = -d/ds, X^r = -d/dx - (y/2) d/ds, Y^r = -d/dy + (x/2) d/ds.
// Then [X^l,Y^l] = S^l, [X^r,Y^r] = S^r and every left-right pair commutes.
// ---------------------------------------------------------------------------

using ScalarField3 = std::function<double(double, double, double)>;

struct VectorField3 {
  // Direction (ds, dx, dy) as a function of the base point.
  std::function<void(double, double, double, double*, double*, double*)> dir;
};

inline VectorField3 field_S_left() {
  return {[](double, double, double, double* ds, double* dx, double* dy) {
    *ds = 1; *dx = 0; *dy = 0;
  }};
}
inline VectorField3 field_X_left() {
  return {[](double, double, double y, double* ds, double* dx, double* dy) {
    *ds = -0.5 * y; *dx = 1; *dy = 0;
  }};
}
inline VectorField3 field_Y_left() {
  return {[](double, double x, double, double* ds, double* dx, double* dy) {
    *ds = 0.5 * x; *dx = 0; *dy = 1;
  }};
}
inline VectorField3 field_S_right() {
  return {[](double, double, double, double* ds, double* dx, double* dy) {
    *ds = -1; *dx = 0; *dy = 0;
  }};
}
inline VectorField3 field_X_right() {
  return {[](double, double, double y, double* ds, double* dx, double* dy) {
    *ds = -0.5 * y; *dx = -1; *dy = 0;
  }};
}
inline VectorField3 field_Y_right() {
  return {[](double, double x, double, double* ds, double* dx, double* dy) {
    *ds = 0.5 * x; *dx = 0; *dy = -1;
  }};
}

// Central difference along the field direction evaluated at the base point;
// O(step^2) accurate, and nesting two of these keeps O(step^2).
inline ScalarField3 apply_field(const VectorField3& v, ScalarField3 f,
                                double step) {
  return [v, f = std::move(f), step](double s, double x, double y) {
    double ds, dx, dy;
    v.dir(s, x, y, &ds, &dx, &dy);
    return (f(s + step * ds, x + step * dx, y + step * dy) -
            f(s - step * ds, x - step * dx, y - step * dy)) /
           (2.0 * step);
  };
}

struct FieldCommutatorReport {
  double step = 0.0;
  double left_xy = 0.0;    // |([X^l,Y^l] - S^l) f| at the probe point
  double right_xy = 0.0;   // |([X^r,Y^r] - S^r) f|
  double cross_max = 0.0;  // max over the four left-right commutators
  double max_residual() const {
    return std::max(std::max(left_xy, right_xy), cross_max);
  }
};

inline FieldCommutatorReport verify_field_commutators(double step) {
  // Smooth probe with non-vanishing mixed derivatives at the probe point.
  ScalarField3 f = [](double s, double x, double y) {
    return std::exp(-(s * s + x * x + y * y)) + 0.5 * std::sin(x + 2 * y - s);
  };
  const double ps = 0.1, px = 0.2, py = -0.3;

  auto commutator_minus = [&](const VectorField3& A, const VectorField3& B,
                              const VectorField3* S) {
    ScalarField3 ab = apply_field(A, apply_field(B, f, step), step);
    ScalarField3 ba = apply_field(B, apply_field(A, f, step), step);
    double r = ab(ps, px, py) - ba(ps, px, py);
    if (S) r -= apply_field(*S, f, step)(ps, px, py);
    return std::abs(r);
  };

  FieldCommutatorReport rep;
  rep.step = step;
  VectorField3 xl = field_X_left(), yl = field_Y_left(), sl = field_S_left();
  VectorField3 xr = field_X_right(), yr = field_Y_right(),
               sr = field_S_right();
  rep.left_xy = commutator_minus(xl, yl, &sl);
  rep.right_xy = commutator_minus(xr, yr, &sr);
  rep.cross_max = std::max(
      std::max(commutator_minus(xl, xr, nullptr),
               commutator_minus(xl, yr, nullptr)),
      std::max(commutator_minus(yl, xr, nullptr),
               commutator_minus(yl, yr, nullptr)));
  return rep;
}

}  // namespace pmech
