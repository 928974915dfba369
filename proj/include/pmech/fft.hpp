#pragma once

#include <complex>
#include <vector>

#include "pmech/errors.hpp"

namespace pmech {

using cd = std::complex<double>;

// Radix-2 decimation-in-time, power-of-two length only. Computes
// A[j] = sum_m a[m] exp(sign * 2 pi i * m j / N), no normalization.
// Twiddles come from a single polar() table, so the rounding error stays at
// a few ulp per butterfly and the run is bit-deterministic. The plan form
// amortizes table setup over repeated same-length transforms.
struct FftPlan {
  std::size_t N = 0;
  int sign = -1;
  std::vector<cd> w;

  FftPlan() = default;
  FftPlan(std::size_t N_, int sign_) : N(N_), sign(sign_), w(N_ / 2) {
    if (N == 0 || (N & (N - 1)) != 0)
      throw InternalError("fft length must be a power of two");
    const double unit = sign * 2.0 * M_PI / static_cast<double>(N);
    for (std::size_t t = 0; t < N / 2; ++t)
      w[t] = std::polar(1.0, unit * static_cast<double>(t));
  }

  void run(cd* a) const {
    if (N == 1) return;
    for (std::size_t i = 1, j = 0; i < N; ++i) {
      std::size_t bit = N >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= N; len <<= 1) {
      const std::size_t stride = N / len;
      for (std::size_t i = 0; i < N; i += len)
        for (std::size_t j = 0; j < len / 2; ++j) {
          cd u = a[i + j];
          cd v = a[i + j + len / 2] * w[j * stride];
          a[i + j] = u + v;
          a[i + j + len / 2] = u - v;
        }
    }
  }
};

inline void fft_pow2(std::vector<cd>& a, int sign) { FftPlan(a.size(), sign).run(a.data()); }

namespace detail {
// exp(sign * i pi N / 2) as an exact fourth root of unity.
inline cd quarter_phase(int sign, std::size_t N) {
  switch ((sign * static_cast<long long>(N) % 4 + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}
}  // namespace detail

// Transform for lattices centered at index C = N/2 in both domains:
//   A[j] = sum_m a[m] exp(sign * 2 pi i (m - C)(j - C) / N).
// Reduces to fft_pow2 by (-1)^m / (-1)^j twiddles and one global phase.
inline void centered_fft(std::vector<cd>& a, int sign) {
  const std::size_t N = a.size();
  for (std::size_t m = 1; m < N; m += 2) a[m] = -a[m];
  fft_pow2(a, sign);
  const cd ph = detail::quarter_phase(sign, N);
  for (std::size_t j = 0; j < N; ++j) a[j] *= (j % 2 ? -ph : ph);
}

// Row-major N x N array, centered transform along both axes.
inline void centered_fft2(std::vector<cd>& a, std::size_t N, int sign) {
  if (a.size() != N * N) throw InternalError("centered_fft2 size mismatch");
  std::vector<cd> tmp(N);
  for (std::size_t r = 0; r < N; ++r) {
    std::copy(a.begin() + r * N, a.begin() + (r + 1) * N, tmp.begin());
    centered_fft(tmp, sign);
    std::copy(tmp.begin(), tmp.end(), a.begin() + r * N);
  }
  for (std::size_t c = 0; c < N; ++c) {
    for (std::size_t r = 0; r < N; ++r) tmp[r] = a[r * N + c];
    centered_fft(tmp, sign);
    for (std::size_t r = 0; r < N; ++r) a[r * N + c] = tmp[r];
  }
}

}  // namespace pmech
