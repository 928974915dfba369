#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "pmech/errors.hpp"
#include "pmech/fft.hpp"
#include "pmech/grid.hpp"

namespace pmech {

// rho_h(k) as a dense matrix acting on GridField samples. Rows and columns
// are flattened position indices m * N + k, matching GridField::data, so
// apply() is a plain matrix-vector product.
struct FockOperator {
  Grid grid;
  Eigen::MatrixXcd matrix;

  GridField apply(const GridField& f) const {
    if (f.grid != grid) throw GridMismatch("operator and field live on different grids");
    GridField out(grid);
    Eigen::Map<const Eigen::VectorXcd> v(f.data.data(),
                                         static_cast<Eigen::Index>(f.data.size()));
    Eigen::Map<Eigen::VectorXcd> w(out.data.data(), static_cast<Eigen::Index>(out.data.size()));
    w = matrix * v;
    return out;
  }
};

inline FockOperator operator+(const FockOperator& a, const FockOperator& b) {
  if (a.grid != b.grid) throw GridMismatch("operators live on different grids");
  return {a.grid, a.matrix + b.matrix};
}
inline FockOperator operator-(const FockOperator& a, const FockOperator& b) {
  if (a.grid != b.grid) throw GridMismatch("operators live on different grids");
  return {a.grid, a.matrix - b.matrix};
}
inline FockOperator operator*(const FockOperator& a, const FockOperator& b) {
  if (a.grid != b.grid) throw GridMismatch("operators live on different grids");
  return {a.grid, a.matrix * b.matrix};
}
inline FockOperator operator*(cd c, const FockOperator& a) { return {a.grid, c * a.matrix}; }

namespace detail {

// Tables of the lattice phases e^{i pi h x_a y_l} and e^{-i pi h y_b x_j}
// that rho_h(0, x_a, y_b) applies to the centered Fourier coefficient it
// reads; the position-space phase then shifts coefficients circularly by
// (a - C, b - C). Phases are anchored at the INPUT index, matching
// rho_point, whose multiply happens before its shift; the two anchorings
// differ only on wrapped entries (by the box flux e^{i pi h x_a N dy}).
struct RhoPhases {
  int N;
  std::vector<cd> pa, pb;  // pa[a * N + l], pb[b * N + j]

  explicit RhoPhases(const Grid& g) : N(g.N), pa(static_cast<std::size_t>(g.N) * g.N),
                                      pb(static_cast<std::size_t>(g.N) * g.N) {
    for (int a = 0; a < N; ++a)
      for (int l = 0; l < N; ++l)
        pa[static_cast<std::size_t>(a) * N + l] = std::polar(1.0, M_PI * g.h * g.x(a) * g.y(l));
    for (int b = 0; b < N; ++b)
      for (int j = 0; j < N; ++j)
        pb[static_cast<std::size_t>(b) * N + j] = std::polar(1.0, -M_PI * g.h * g.y(b) * g.x(j));
  }
};

}  // namespace detail

// Matrix-free rho_h(k) f, any N: transform to Fourier coefficients, apply the
// kernel-weighted sum of lattice shift-phase operators, transform back.
// Agrees with FockOperator::apply to roundoff where both are available.
inline GridField apply_kernel(const GridKernel& k, const GridField& f) {
  if (k.grid != f.grid) throw GridMismatch("kernel and field live on different grids");
  const Grid& g = k.grid;
  detail::require_positive_h(g, "apply_kernel");
  const int N = g.N, C = N / 2, mask = N - 1;
  const detail::RhoPhases ph(g);
  const double unit = g.dx() * g.dy();

  std::vector<cd> cin = to_coeffs(f);
  std::vector<cd> cout(cin.size(), cd(0.0, 0.0));
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const cd cc = k.at(a, b) * unit;
      if (cc == cd(0.0, 0.0)) continue;
      const int sj = a - C, sl = b - C;
      const cd* pa = &ph.pa[static_cast<std::size_t>(a) * N];
      for (int j = 0; j < N; ++j) {
        const int jin = (j + sj + N) & mask;
        const cd w = cc * ph.pb[static_cast<std::size_t>(b) * N + jin];
        const cd* inrow = &cin[static_cast<std::size_t>(jin) * N];
        cd* orow = &cout[static_cast<std::size_t>(j) * N];
        for (int l = 0; l < N; ++l) {
          const int lin = (l + sl + N) & mask;
          orow[l] += w * pa[lin] * inrow[lin];
        }
      }
    }
  return from_coeffs(g, std::move(cout));
}

// Dense rho_h(k). Assembled in the Fourier basis, where each lattice point is
// a phase-weighted circular shift, then conjugated back to the position basis
// by row/column centered FFTs. Capped at N = 48 (2304^2 dense); use
// apply_kernel beyond that.
inline FockOperator rho_kernel(const GridKernel& k) {
  const Grid& g = k.grid;
  detail::require_positive_h(g, "rho_kernel");
  if (g.N > 48)
    throw InternalError("rho_kernel: dense matrices are capped at N = 48; use apply_kernel");
  const int N = g.N, C = N / 2, mask = N - 1;
  const std::size_t D = static_cast<std::size_t>(N) * N;
  const detail::RhoPhases ph(g);
  const double unit = g.dx() * g.dy();

  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(D),
                                              static_cast<Eigen::Index>(D));
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const cd cc = k.at(a, b) * unit;
      if (cc == cd(0.0, 0.0)) continue;
      const int sj = a - C, sl = b - C;
      const cd* pa = &ph.pa[static_cast<std::size_t>(a) * N];
      for (int j = 0; j < N; ++j) {
        const int jin = (j + sj + N) & mask;
        const cd w = cc * ph.pb[static_cast<std::size_t>(b) * N + jin];
        const long row = static_cast<long>(j) * N;
        const long colj = static_cast<long>(jin) * N;
        for (int l = 0; l < N; ++l) {
          const int lin = (l + sl + N) & mask;
          M(row + l, colj + lin) += w * pa[lin];
        }
      }
    }

  // Conjugate to the position basis: M_pos = F^{-1} M F with F the centered
  // coefficient transform. F is symmetric, so right-multiplication transforms
  // rows and left-multiplication by F^{-1} transforms columns.
  std::vector<cd> buf(D);
  const double scale = 1.0 / static_cast<double>(D);
  for (std::size_t r = 0; r < D; ++r) {
    for (std::size_t s = 0; s < D; ++s) buf[s] = M(static_cast<Eigen::Index>(r),
                                                   static_cast<Eigen::Index>(s));
    centered_fft2(buf, N, -1);
    for (std::size_t s = 0; s < D; ++s)
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = buf[s] * scale;
  }
  for (std::size_t c = 0; c < D; ++c) {
    for (std::size_t s = 0; s < D; ++s) buf[s] = M(static_cast<Eigen::Index>(s),
                                                   static_cast<Eigen::Index>(c));
    centered_fft2(buf, N, +1);
    for (std::size_t s = 0; s < D; ++s)
      M(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(c)) = buf[s];
  }
  return {g, std::move(M)};
}

// Orthonormal probes of the lowest Fock levels: Gram-Schmidt applied to
// (p + iq)^m v0, m = 0..K-1. Each raw member solves D_h f = 0 exactly since
// (d_p + i d_q)(p + iq) = 0, and the ladder identity
// annihilate((p+iq)^m v0) = h m (p+iq)^{m-1} v0 pins the scale.
inline std::vector<GridField> fock_basis(const Grid& g, int K) {
  if (K < 1) throw InternalError("fock_basis needs K >= 1");
  std::vector<GridField> out;
  out.reserve(static_cast<std::size_t>(K));
  GridField mono = vacuum(g);
  for (int m = 0; m < K; ++m) {
    if (m > 0) {
      for (int i = 0; i < g.N; ++i)
        for (int j = 0; j < g.N; ++j) mono.at(i, j) *= cd(g.p(j), g.q(i));
    }
    GridField v = mono;
    for (const GridField& prev : out) v = v - inner_product(v, prev) * prev;
    double nrm = field_norm(v);
    if (!(nrm > 1e-9))
      throw InternalError("fock_basis: family degenerates; reduce K or refine the grid");
    v = cd(1.0 / nrm, 0.0) * v;
    out.push_back(std::move(v));
  }
  return out;
}

// Matrix of an operator in an orthonormal field family: H(i,j) = <A f_j, f_i>.
// With fock_basis probes this compresses rho_h(k) to the lowest K levels,
// e.g. for spectral comparisons against 1D oscillator oracles.
inline Eigen::MatrixXcd fock_matrix(const FockOperator& A,
                                    const std::vector<GridField>& basis) {
  const Eigen::Index K = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd H(K, K);
  for (Eigen::Index j = 0; j < K; ++j) {
    GridField Af = A.apply(basis[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < K; ++i)
      H(i, j) = inner_product(Af, basis[static_cast<std::size_t>(i)]);
  }
  return H;
}

// Matrix-free variant for grids past the dense cap.
inline Eigen::MatrixXcd fock_matrix(const GridKernel& k,
                                    const std::vector<GridField>& basis) {
  const Eigen::Index K = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd H(K, K);
  for (Eigen::Index j = 0; j < K; ++j) {
    GridField Af = apply_kernel(k, basis[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < K; ++i)
      H(i, j) = inner_product(Af, basis[static_cast<std::size_t>(i)]);
  }
  return H;
}

// Dense matrix file for offline inspection. Layout: header "N,L_q,L_p,h",
// one grid line, then the N^2 x N^2 entries as "re,im" lines in row-major
// order over (row, col).
inline void save_csv(const FockOperator& A, std::ostream& os) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", A.grid.N, A.grid.L_q, A.grid.L_p,
                A.grid.h);
  os << "N,L_q,L_p,h\n" << buf << "re,im\n";
  const Eigen::Index D = A.matrix.rows();
  for (Eigen::Index r = 0; r < D; ++r)
    for (Eigen::Index c = 0; c < D; ++c) {
      const cd z = A.matrix(r, c);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.real(), z.imag());
      os << buf;
    }
}
inline FockOperator operator_from_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "N,L_q,L_p,h") throw ParseError("bad csv header");
  if (!std::getline(is, line)) throw ParseError("missing grid line");
  int N = 0;
  double Lq = 0, Lp = 0, h = 0;
  if (std::sscanf(line.c_str(), "%d,%lg,%lg,%lg", &N, &Lq, &Lp, &h) != 4)
    throw ParseError("bad grid line");
  if (!std::getline(is, line) || line != "re,im") throw ParseError("missing column header");
  Grid g(N, Lq, Lp, h);
  const Eigen::Index D = static_cast<Eigen::Index>(N) * N;
  Eigen::MatrixXcd M(D, D);
  for (Eigen::Index r = 0; r < D; ++r)
    for (Eigen::Index c = 0; c < D; ++c) {
      if (!std::getline(is, line)) throw ParseError("truncated csv payload");
      double re = 0, im = 0;
      if (std::sscanf(line.c_str(), "%lg,%lg", &re, &im) != 2) throw ParseError("bad csv row");
      if (!std::isfinite(re) || !std::isfinite(im))
        throw ParseError("csv payload contains non-finite entries");
      M(r, c) = cd(re, im);
    }
  return {g, std::move(M)};
}

}  // namespace pmech
