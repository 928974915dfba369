#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "pmech/env.hpp"
#include "pmech/errors.hpp"
#include "pmech/grid.hpp"
#include "pmech/poly.hpp"

namespace pmech {

namespace detail {

// Erf-pair plateau, shifted to vanish exactly at the box seam: 1 to better
// than 1e-10 for |t| <= 0.3 L, centred rolloff at 0.7 L, hard zero at
// |t| = L. The erf taper's spectrum falls at the Gaussian rate
// e^{-(pi w u)^2}, so the sampled symbol rings near 1e-10 at N = 64, and
// zeroing the seam removes the 1/N Gibbs tail a jump in the periodized
// symbol would leave; the clip kink only carries a small derivative jump,
// below either. (A compactly supported exp(-1/u) bump decays like
// e^{-c sqrt(u)} and rings at the percent level on these grids.)
inline double smooth_plateau(double t, double L) {
  const double t0 = 0.7 * L, w = 0.095 * L;
  auto base = [&](double s) { return 0.5 * (std::erf((t0 - s) / w) + std::erf((t0 + s) / w)); };
  const double c = base(L);
  const double v = (base(t) - c) / (1.0 - c);
  return v > 0.0 ? v : 0.0;
}

inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

inline GridField window_field(const Grid& g) {
  GridField out(g);
  std::vector<double> wq(g.N), wp(g.N);
  for (int m = 0; m < g.N; ++m) wq[m] = detail::smooth_plateau(g.q(m), g.L_q);
  for (int k = 0; k < g.N; ++k) wp[k] = detail::smooth_plateau(g.p(k), g.L_p);
  for (int m = 0; m < g.N; ++m)
    for (int k = 0; k < g.N; ++k) out.at(m, k) = wq[m] * wp[k];
  return out;
}

// Windowed samples of a polynomial observable, for symbol-domain work
// (bracket symbols, classical limits): the window keeps the periodized
// samples smooth at the seam. The plateau is 1 to ~1e-9 for
// |q| <= 0.3 L_q, |p| <= 0.3 L_p; conclusions are read off there.
inline GridField sample_symbol(const PolySymbol& c, const Grid& g) {
  if (c.n != 1) throw RankMismatch("grid sampling is n = 1 only");
  GridField out = window_field(g);
  for (int m = 0; m < g.N; ++m)
    for (int k = 0; k < g.N; ++k) out.at(m, k) *= c.evaluate(g.q(m), g.p(k));
  return out;
}

// Fourier pair between phase-space symbols and convolution kernels:
//   sigma(q,p) = dx dy sum_{a,b} k(x_a,y_b) e^{-2 pi i (q x_a + p y_b)}
//   k(x,y)    = dq dp sum_{m,k} sigma(q_m,p_k) e^{+2 pi i (q_m x + p_k y)}.
// Exact mutual inverses on the lattice (dq dx = dp dy = 1/N).
inline GridField symbol_of_kernel(const GridKernel& k) {
  GridField out(k.grid);
  out.data = k.data;
  centered_fft2(out.data, k.grid.N, -1);
  const double s = k.grid.dx() * k.grid.dy();
  for (cd& z : out.data) z *= s;
  return out;
}
inline GridKernel kernel_of_symbol(const GridField& f) {
  GridKernel out(f.grid);
  out.data = f.data;
  centered_fft2(out.data, f.grid.N, +1);
  const double s = f.grid.dq() * f.grid.dp();
  for (cd& z : out.data) z *= s;
  return out;
}

// Sampled kernel of a delta-derivative element: evaluate the centre at
// S = -2 pi i h, read off the Weyl-ordered coefficients, evaluate the symbol
// sum w_{b,c} (-2 pi i q)^b (-2 pi i p)^c on the raw lattice, and Fourier
// back to the dual lattice. mechanise(q) lands on the symbol q. No window:
// the result is the band-limited derivative-of-delta kernel, and on a
// flux-quantized box (Grid::balanced) its circular twisted action matches
// the derived-representation operator to near machine precision, because
// every wrapped term carries an exact full phase turn. On generic boxes the
// seam aliasing is O(1); window explicitly (sample_symbol) when a symbol,
// rather than the operator, is the object under study.
inline GridKernel sample_kernel(const EnvElement& k, const Grid& g) {
  if (k.n != 1) throw RankMismatch("grid sampling is n = 1 only");
  detail::require_positive_h(g, "sample_kernel");
  const auto w = env_weyl_coefficients(k, g.h);
  GridField sym(g);
  std::vector<cd> qpow(g.N), ppow(g.N);
  for (const auto& [bc, coeff] : w) {
    const auto [b, c] = bc;
    for (int m = 0; m < g.N; ++m) {
      cd v(1.0, 0.0);
      for (int e = 0; e < b; ++e) v *= cd(0.0, -2.0 * M_PI * g.q(m));
      qpow[m] = v;
    }
    for (int kk = 0; kk < g.N; ++kk) {
      cd v(1.0, 0.0);
      for (int e = 0; e < c; ++e) v *= cd(0.0, -2.0 * M_PI * g.p(kk));
      ppow[kk] = v;
    }
    for (int m = 0; m < g.N; ++m)
      for (int kk = 0; kk < g.N; ++kk) sym.at(m, kk) += coeff * qpow[m] * ppow[kk];
  }
  return kernel_of_symbol(sym);
}

namespace detail {

// Derived representation on sampled fields:
//   drho(X) = -2 pi i q + (h/2) d_p,   drho(Y) = -2 pi i p - (h/2) d_q,
// derivatives spectral. [drho(X), drho(Y)] = -2 pi i h = drho(S).
inline GridField drho_X(const GridField& f) {
  const Grid& g = f.grid;
  GridField out = spectral_dderiv(f, cd(0.0, 0.0), cd(0.5 * g.h, 0.0));
  for (int m = 0; m < g.N; ++m) {
    const cd mul(0.0, -2.0 * M_PI * g.q(m));
    for (int k = 0; k < g.N; ++k) out.at(m, k) += mul * f.at(m, k);
  }
  return out;
}
inline GridField drho_Y(const GridField& f) {
  const Grid& g = f.grid;
  GridField out = spectral_dderiv(f, cd(-0.5 * g.h, 0.0), cd(0.0, 0.0));
  for (int k = 0; k < g.N; ++k) {
    const cd mul(0.0, -2.0 * M_PI * g.p(k));
    for (int m = 0; m < g.N; ++m) out.at(m, k) += mul * f.at(m, k);
  }
  return out;
}

}  // namespace detail

// rho_h of a delta-derivative element applied spectrally, with no sampling
// window: expand each sym(X^b Y^c) through the same reordering rule the
// symbolic engine uses and compose the derived-representation operators.
// This is the second, kernel-free route to the Weyl operator of a polynomial.
inline GridField rho_env(const EnvElement& k, const GridField& f) {
  if (k.n != 1) throw RankMismatch("grid representation is n = 1 only");
  const Grid& g = f.grid;
  detail::require_positive_h(g, "rho_env");
  const auto w = env_weyl_coefficients(k, g.h);
  const cd sigma(0.0, -2.0 * M_PI * g.h);

  GridField acc(g);
  for (const auto& [bc, coeff] : w) {
    const auto [b, c] = bc;
    for (int r = 0; r <= std::min(b, c); ++r) {
      cd factor = coeff;
      double fr = detail::binom(b, r) * detail::binom(c, r);
      for (int i = 1; i <= r; ++i) fr *= i;
      factor *= fr;
      for (int i = 0; i < r; ++i) factor *= -0.5 * sigma;
      GridField term = f;
      for (int i = 0; i < c - r; ++i) term = detail::drho_Y(term);
      for (int i = 0; i < b - r; ++i) term = detail::drho_X(term);
      acc = acc + factor * term;
    }
  }
  return acc;
}

}  // namespace pmech
