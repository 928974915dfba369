#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "pmech/fft.hpp"
#include "pmech/grid.hpp"

namespace pmech {

namespace detail {

// On lattice pairs the symplectic form is an integer multiple of dx dy:
// x_c y_b - y_d x_a = dx dy ((c-C)(b-C) - (d-C)(a-C)). All phase kernels are
// therefore functions of one integer t in [-2C^2, 2C^2]; we tabulate them.
struct PhaseTable {
  int span;
  std::vector<cd> val;
  cd operator()(long t) const { return val[static_cast<std::size_t>(t + span)]; }
};

template <class F>
PhaseTable tabulate(const Grid& g, F f) {
  const int C = g.N / 2;
  PhaseTable T;
  T.span = 2 * C * C;
  T.val.resize(2 * static_cast<std::size_t>(T.span) + 1);
  const double unit = g.dx() * g.dy();
  for (long t = -T.span; t <= T.span; ++t) T.val[static_cast<std::size_t>(t + T.span)] = f(unit * t);
  return T;
}

// Direct O(N^4) sum out(w) = dx dy sum_{w'} ker(omega(w; w')) k1(w') k2(w - w'),
// with w - w' wrapped on indices and omega taken at unwrapped lattice values.
inline GridKernel kernel_weighted_conv(const GridKernel& k1, const GridKernel& k2,
                                       const PhaseTable& ker) {
  require_same_grid(k1, k2);
  const Grid& g = k1.grid;
  const int N = g.N, C = N / 2;
  GridKernel out(g);
  const double scale = g.dx() * g.dy();
  for (int c = 0; c < N; ++c)
    for (int d = 0; d < N; ++d) {
      cd acc(0.0, 0.0);
      for (int a = 0; a < N; ++a) {
        long base = -static_cast<long>(d - C) * (a - C);
        const cd* row1 = k1.data.data() + static_cast<std::size_t>(a) * N;
        const cd* row2 = k2.data.data() + static_cast<std::size_t>((c - a + N + C) % N) * N;
        for (int b = 0; b < N; ++b) {
          long t = base + static_cast<long>(c - C) * (b - C);
          acc += ker(t) * row1[b] * row2[(d - b + N + C) % N];
        }
      }
      out.at(c, d) = scale * acc;
    }
  return out;
}

}  // namespace detail

// Reference twisted convolution:
//   (k1 *_h k2)(x,y) = dx dy sum e^{i pi h (x y' - y x')} k1(x',y') k2(x-x',y-y').
// Circular in the indices. On a flux-quantized box (h/(N dq dp) even, e.g.
// Grid::balanced) this is the exact convolution algebra of the lattice
// operators; elsewhere it approximates the plane up to boundary tails.
inline GridKernel twisted_conv(const GridKernel& k1, const GridKernel& k2) {
  const double h = k1.grid.h;
  auto T = detail::tabulate(k1.grid, [h](double w) { return std::polar(1.0, M_PI * h * w); });
  return detail::kernel_weighted_conv(k1, k2, T);
}

namespace detail {

// Accelerated path on a flux-quantized box. With nu = h/(2 N dq dp) integer
// the twisted phase is W^{(c-C)(b-C)-(d-C)(a-C)} for the N-th root of unity
// W = e^{2 pi i nu / N}, and the sum collapses to exact finite-Weyl-algebra
// arithmetic: row FFTs of both factors, an index-sheared O(N^3) accumulation,
// and one inverse FFT per output row.
inline GridKernel twisted_conv_quantized(const GridKernel& k1, const GridKernel& k2, long nu) {
  const Grid& g = k1.grid;
  const int N = g.N, C = N / 2;
  std::vector<cd> W(N);
  for (int t = 0; t < N; ++t) W[t] = std::polar(1.0, 2.0 * M_PI * nu * t / N);
  auto wp = [&](long e) { return W[static_cast<std::size_t>((e % N + N) % N)]; };

  FftPlan fwd(N, -1), inv(N, +1);
  // A'(a,b) = k1(a,b) W^{C(a-b)}, rows transformed; B re-centered by C in both
  // indices, rows transformed.
  std::vector<cd> Ahat(static_cast<std::size_t>(N) * N), Bhat(Ahat.size());
  for (int a = 0; a < N; ++a) {
    cd* row = Ahat.data() + static_cast<std::size_t>(a) * N;
    for (int b = 0; b < N; ++b)
      row[b] = k1.data[static_cast<std::size_t>(a) * N + b] * wp(static_cast<long>(C) * (a - b));
    fwd.run(row);
  }
  for (int r = 0; r < N; ++r) {
    cd* row = Bhat.data() + static_cast<std::size_t>(r) * N;
    const cd* src = k2.data.data() + static_cast<std::size_t>((r + C) % N) * N;
    for (int s = 0; s < N; ++s) row[s] = src[(s + C) % N];
    fwd.run(row);
  }

  GridKernel out(g);
  std::vector<cd> R(N);
  const double scale = g.dx() * g.dy() / N;
  for (int c = 0; c < N; ++c) {
    std::fill(R.begin(), R.end(), cd(0.0, 0.0));
    for (int a = 0; a < N; ++a) {
      const cd* arow = Ahat.data() + static_cast<std::size_t>(a) * N;
      const cd* brow = Bhat.data() + static_cast<std::size_t>(((c - a) % N + N) % N) * N;
      // R_c(s) += A^(a, (s + nu(a-c)) mod N) B^((c-a) mod N, (s + nu a) mod N)
      int va = static_cast<int>(((nu * a) % N + N) % N);
      int ja = static_cast<int>(((nu * (a - c)) % N + N) % N);
      for (int s = 0; s < N; ++s) {
        int t = s + va < N ? s + va : s + va - N;
        int u = s + ja < N ? s + ja : s + ja - N;
        R[s] += arow[u] * brow[t];
      }
    }
    inv.run(R.data());
    cd* orow = out.data.data() + static_cast<std::size_t>(c) * N;
    for (int d = 0; d < N; ++d)
      orow[d] = scale * R[d] * wp(static_cast<long>(C) * (d - c));
  }
  return out;
}

// General box: the phase splits as e^{i th (c-C) beta} e^{-i th (d-C) alpha},
// so for each (c, alpha) the beta sum is a plain circular convolution done by
// length-N FFTs. O(N^3 log N) with a larger constant than the quantized path.
inline GridKernel twisted_conv_chirp(const GridKernel& k1, const GridKernel& k2) {
  const Grid& g = k1.grid;
  const int N = g.N, C = N / 2;
  const double th = M_PI * g.h * g.dx() * g.dy();

  std::vector<cd> chirp(2 * static_cast<std::size_t>(C) * C + 1);
  for (long j = -static_cast<long>(C) * C; j <= static_cast<long>(C) * C; ++j)
    chirp[static_cast<std::size_t>(j + static_cast<long>(C) * C)] = std::polar(1.0, th * j);
  auto ch = [&](long j) { return chirp[static_cast<std::size_t>(j + static_cast<long>(C) * C)]; };

  FftPlan fwd(N, -1), inv(N, +1);
  std::vector<cd> k2hat(static_cast<std::size_t>(N) * N);
  for (int r = 0; r < N; ++r) {
    cd* row = k2hat.data() + static_cast<std::size_t>(r) * N;
    const cd* src = k2.data.data() + static_cast<std::size_t>(r) * N;
    for (int b = 0; b < N; ++b) row[b] = src[(b + C) % N];
    fwd.run(row);
  }

  GridKernel out(g);
  std::vector<cd> rowa(N), prod(N), accrow(N);
  for (int c = 0; c < N; ++c) {
    std::fill(accrow.begin(), accrow.end(), cd(0.0, 0.0));
    for (int a = 0; a < N; ++a) {
      const cd* src = k1.data.data() + static_cast<std::size_t>(a) * N;
      for (int b = 0; b < N; ++b) rowa[b] = src[b] * ch(static_cast<long>(c - C) * (b - C));
      fwd.run(rowa.data());
      const cd* h2 = k2hat.data() + static_cast<std::size_t>((c - a + N + C) % N) * N;
      for (int t = 0; t < N; ++t) prod[t] = rowa[t] * h2[t];
      inv.run(prod.data());
      for (int d = 0; d < N; ++d) accrow[d] += prod[d] * ch(-static_cast<long>(d - C) * (a - C));
    }
    const double scale = g.dx() * g.dy() / N;
    for (int d = 0; d < N; ++d) out.at(c, d) = scale * accrow[d];
  }
  return out;
}

}  // namespace detail

// FFT-backed path; must agree with twisted_conv to 1e-10. Dispatches on the
// box flux nu = h / (2 N dq dp): integer flux admits the exact O(N^3) form.
inline GridKernel twisted_conv_fast(const GridKernel& k1, const GridKernel& k2) {
  detail::require_same_grid(k1, k2);
  const Grid& g = k1.grid;
  const double nu = g.h / (2.0 * g.N * g.dq() * g.dp());
  if (std::abs(nu - std::llround(nu)) < 1e-12)
    return detail::twisted_conv_quantized(k1, k2, std::llround(nu));
  return detail::twisted_conv_chirp(k1, k2);
}

// Difference of the two orderings.
inline GridKernel moyal_commutator(const GridKernel& k1, const GridKernel& k2) {
  return twisted_conv(k1, k2) - twisted_conv(k2, k1);
}

// Independent single-pass form of the same commutator: the phase difference
// collapses to 2 i sin(pi h omega).
inline GridKernel moyal_commutator_direct(const GridKernel& k1, const GridKernel& k2) {
  const double h = k1.grid.h;
  auto T = detail::tabulate(k1.grid,
                            [h](double w) { return cd(0.0, 2.0 * std::sin(M_PI * h * w)); });
  return detail::kernel_weighted_conv(k1, k2, T);
}

// Universal-bracket kernel (4 pi / h) sin(pi h omega); its h = 0 limit is the
// Poisson weight 4 pi^2 omega, taken as its own branch so h = 0 grids work.
inline GridKernel pbracket_grid(const GridKernel& k1, const GridKernel& k2) {
  const double h = k1.grid.h;
  detail::PhaseTable T;
  if (h == 0.0) {
    T = detail::tabulate(k1.grid, [](double w) { return cd(4.0 * M_PI * M_PI * w, 0.0); });
  } else {
    T = detail::tabulate(k1.grid, [h](double w) {
      return cd(4.0 * M_PI / h * std::sin(M_PI * h * w), 0.0);
    });
  }
  return detail::kernel_weighted_conv(k1, k2, T);
}

}  // namespace pmech
