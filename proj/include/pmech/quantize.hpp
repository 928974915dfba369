#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "pmech/bridge.hpp"
#include "pmech/env.hpp"
#include "pmech/errors.hpp"
#include "pmech/fock.hpp"
#include "pmech/grid.hpp"
#include "pmech/poly.hpp"

namespace pmech {

// Fibre coefficient of an observable: a function of (x,y) alone, with no
// s-dependence. Symbolic values are s-free delta-derivative combinations;
// numeric values are samples on the dual lattice of some grid.
struct OmegaFunction {
  bool numeric = false;
  EnvElement sym;
  GridKernel num;

  static OmegaFunction symbolic(EnvElement e) {
    if (e.max_a() != 0)
      throw InternalError("fibre coefficient must be s-free");
    OmegaFunction out;
    out.sym = std::move(e);
    return out;
  }
  static OmegaFunction samples(GridKernel k) {
    OmegaFunction out;
    out.numeric = true;
    out.num = std::move(k);
    return out;
  }
};

// Classical wavelet coefficient of a polynomial observable: termwise
// q^B p^C -> (-1/(2 pi i))^{|B|+|C|} delta^(B)(x) delta^(C)(y). The scale is
// pinned by the exact roundtrip rep_classical(extend_E(W0(c))) = c; combined
// with the symmetrizing extension below it reproduces mechanise identically.
inline OmegaFunction classical_wavelet_W0(const PolySymbol& c) {
  EnvElement out(c.n);
  out.checked = c.checked;
  out.dim = c.dim;
  for (const auto& [pkey, gamma] : c.terms) {
    int deg = 0;
    for (int e : pkey) deg += e;
    EnvKey key{0, std::vector<int>(pkey.begin(), pkey.begin() + static_cast<long>(c.n)),
               std::vector<int>(pkey.begin() + static_cast<long>(c.n), pkey.end())};
    out.add_term(key, gamma * ExactCoeff::inv_2pii_neg_pow(deg));
  }
  return OmegaFunction::symbolic(std::move(out));
}

// Sampled branch: the coefficient is the symplectic Fourier transform of the
// classical observable, evaluated as the exact lattice FFT pair.
inline OmegaFunction classical_wavelet_W0(const GridField& f) {
  return OmegaFunction::samples(kernel_of_symbol(f));
}

// Extension from the fibre to group kernels. Each monomial spreads to its
// fully symmetrized generator word, so extend_E . classical_wavelet_W0 equals
// mechanise term by term.
inline EnvElement extend_E(const OmegaFunction& a) {
  if (a.numeric)
    throw InternalError("symbolic extension needs a symbolic coefficient");
  const std::size_t n = a.sym.n;
  EnvElement out(n);
  out.checked = a.sym.checked;
  out.dim = a.sym.dim;
  for (const auto& [key, c] : a.sym.terms) {
    std::vector<int> pkey(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      pkey[j] = key.B[j];
      pkey[n + j] = key.C[j];
    }
    for (const auto& [nk, coeff] : detail::weyl_sym_word(n, pkey))
      out.add_term(nk, c * ExactCoeff(coeff));
  }
  return out;
}

// Sampled branch of the extension: the fibre function itself carries no h;
// evaluating the extension on the slice at a different h retags the lattice
// while keeping the samples. Feeding both slices through rho_h must yield
// operators with the same classical limit.
inline OmegaFunction extend_E(const OmegaFunction& a, double h) {
  if (!a.numeric)
    throw InternalError("slice extension needs a sampled coefficient");
  const Grid& g0 = a.num.grid;
  Grid g2(g0.N, g0.L_q, g0.L_p, h);
  GridKernel out(g2);
  out.data = a.num.data;
  return OmegaFunction::samples(std::move(out));
}

// Weyl quantisation: rho_h of the sampled p-mechanisation kernel. The
// pipeline rho_h . sample . extend_E . classical_wavelet_W0 assembles the
// identical kernel, since the extension undoes exactly the un-symmetrized
// form W0 produces.
inline FockOperator weyl_quantize(const PolySymbol& c, const Grid& g) {
  return rho_kernel(sample_kernel(mechanise(c), g));
}

namespace detail {

// Coherent states over the full dual lattice, flattened as columns j * N + l.
// Dense (N^2 states of N^2 samples), so capped like rho_kernel.
inline Eigen::MatrixXcd coherent_frame(const Grid& g) {
  if (g.N > 32)
    throw InternalError(
        "coherent_frame: N^2 x N^2 dense frame is capped at N = 32");
  const int N = g.N;
  const Eigen::Index D = static_cast<Eigen::Index>(N) * N;
  const GridField v0 = vacuum(g);
  Eigen::MatrixXcd V(D, D);
  for (int j = 0; j < N; ++j)
    for (int l = 0; l < N; ++l) {
      GridField v = rho_point(GroupPoint(0.0, g.x(j), g.y(l)), v0);
      V.col(static_cast<Eigen::Index>(j) * N + l) =
          Eigen::Map<const Eigen::VectorXcd>(v.data.data(), D);
    }
  return V;
}

// Raw sample dot products convert to the model inner product by this weight;
// see inner_product.
inline double fock_weight(const Grid& g) {
  return (4.0 / g.h) * g.dq() * g.dp();
}

}  // namespace detail

// Reduced wavelet transform: the coefficient recovering the kernel of a
// convolution operator,
//   a(x,y) = c_N sum_{g'} <A v_{g'}, v_{(x,y) g'}> dx' dy',
// where the group product shifts lattice indices circularly and contributes
// the symplectic phase e^{i pi h omega(x,y; x',y')}. The wrapped sum
// telescopes exactly when the box flux h / (N dq dp) is an even integer
// (Grid::balanced has flux 2): each wrap then carries a whole phase turn, the
// frame is torus-periodic, and W_r inverts rho_kernel to roundoff. On other
// boxes the wrap seam leaks into the sum at O(1) of the boundary amplitude.
// The prefactor c_N = (N dq dp)^2 is the lattice Plancherel weight, pinned by
// W_r(rho_kernel(delta)) = delta.
inline OmegaFunction reduced_wavelet_Wr(const FockOperator& A) {
  const Grid& g = A.grid;
  detail::require_positive_h(g, "reduced_wavelet_Wr");
  const int N = g.N, C = N / 2;
  const Eigen::MatrixXcd V = detail::coherent_frame(g);
  const Eigen::MatrixXcd G = V.adjoint() * (A.matrix * V);
  GridKernel out(g);
  const double cell = static_cast<double>(N) * g.dq() * g.dp();
  const double scale =
      cell * cell * g.dx() * g.dy() * detail::fock_weight(g);
  for (int j = 0; j < N; ++j)
    for (int l = 0; l < N; ++l) {
      cd acc(0.0, 0.0);
      for (int jp = 0; jp < N; ++jp) {
        const int jj = (j + jp - C + N) % N;
        for (int lp = 0; lp < N; ++lp) {
          const int ll = (l + lp - C + N) % N;
          const double om = g.x(j) * g.y(lp) - g.x(jp) * g.y(l);
          acc += std::polar(1.0, M_PI * g.h * om) *
                 G(static_cast<Eigen::Index>(jj) * N + ll,
                   static_cast<Eigen::Index>(jp) * N + lp);
        }
      }
      out.at(j, l) = acc * scale;
    }
  return OmegaFunction::samples(std::move(out));
}

// Inverse transform: the quadrature sum a -> sum a(x,y) rho_h(0,x,y) dx dy,
// which is rho_h of the samples read as a convolution kernel. The delta
// coefficient gives the identity exactly; on even-integer-flux boxes
// inverse_Mr . reduced_wavelet_Wr = id to roundoff.
inline FockOperator inverse_Mr(const OmegaFunction& a) {
  if (!a.numeric)
    throw InternalError("inverse transform needs a sampled coefficient");
  return rho_kernel(a.num);
}

// Classical limit: the (q,p) observable whose quantisation reproduces A,
// i.e. the symplectic Fourier transform of the reduced wavelet coefficient.
// Operators farther than 5% (Frobenius) from every convolution are rejected.
inline GridField classical_limit(const FockOperator& A) {
  OmegaFunction a = reduced_wavelet_Wr(A);
  const double na = A.matrix.norm();
  if (na > 0.0) {
    FockOperator B = rho_kernel(a.num);
    const double rel = (B.matrix - A.matrix).norm() / na;
    if (rel > 0.05)
      throw NotConvolution("operator is not a group convolution: roundtrip defect " +
                           std::to_string(rel));
  }
  return symbol_of_kernel(a.num);
}

// Covariant symbol <A v_{(x,y)}, v_{(x,y)}>. Real for Hermitian A; affine
// observables give exactly affine symbols away from the box seam.
inline cd berezin_covariant(const FockOperator& A, double x, double y) {
  GridField v = rho_point(GroupPoint(0.0, x, y), vacuum(A.grid));
  return inner_product(A.apply(v), v);
}

// Matrix-free variant for grids past the dense cap.
inline cd berezin_covariant(const GridKernel& k, double x, double y) {
  GridField v = rho_point(GroupPoint(0.0, x, y), vacuum(k.grid));
  return inner_product(apply_kernel(k, v), v);
}

// Contravariant quantisation h sum a(x,y) P_{(x,y)} dx dy over coherent-state
// projections. The constant is calibrated by the a = 1 gate: on
// even-integer-flux boxes the unit coefficient yields exactly the projector
// onto the model component (rank 2N at flux 2), so the calibration admits no
// further scale.
inline FockOperator berezin_contravariant(const GridKernel& a) {
  const Grid& g = a.grid;
  const int N = g.N;
  const Eigen::Index D = static_cast<Eigen::Index>(N) * N;
  const Eigen::MatrixXcd V = detail::coherent_frame(g);
  const double scale = g.h * g.dx() * g.dy() * detail::fock_weight(g);
  Eigen::VectorXcd d(D);
  for (int j = 0; j < N; ++j)
    for (int l = 0; l < N; ++l)
      d(static_cast<Eigen::Index>(j) * N + l) = a.at(j, l) * scale;
  return {g, V * d.asDiagonal() * V.adjoint()};
}

// Trace by coherent quadrature, h sum <A v_g, v_g> dx dy: the trace of the
// model-component part of A. Agrees with the matrix trace exactly on
// contravariant-built operators.
inline cd trace_coherent(const FockOperator& A) {
  const Grid& g = A.grid;
  const Eigen::MatrixXcd V = detail::coherent_frame(g);
  const Eigen::MatrixXcd AV = A.matrix * V;
  cd acc(0.0, 0.0);
  for (Eigen::Index c = 0; c < V.cols(); ++c)
    acc += (V.col(c).adjoint() * AV.col(c))(0);
  return acc * detail::fock_weight(g) * g.h * g.dx() * g.dy();
}

// Reference oscillator levels for H = (c1 q^2 + c2 p^2)/2 from the ladder
// recursion: with s^2 = h/(4 pi) the matrix in the number basis is
// (s^2/2)(c1+c2)(2n+1) on the diagonal and (s^2/2)(c1-c2) sqrt((n+1)(n+2))
// two off it. Truncation error of the low levels decays super-exponentially
// in M.
inline std::vector<double> oscillator_levels_1d(double c1, double c2, double h,
                                                int count, int M = 64) {
  if (count < 1 || count > M)
    throw InternalError("oscillator_levels_1d: need 1 <= count <= M");
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(M, M);
  const double s2 = h / (4.0 * M_PI);
  for (int n = 0; n < M; ++n) {
    H(n, n) = 0.5 * s2 * (c1 + c2) * (2 * n + 1);
    if (n + 2 < M) {
      const double v =
          0.5 * s2 * (c1 - c2) * std::sqrt(double(n + 1) * double(n + 2));
      H(n, n + 2) = v;
      H(n + 2, n) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

}  // namespace pmech
