#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "pmech/bridge.hpp"
#include "pmech/fock.hpp"
#include "pmech/twisted.hpp"

namespace pmech {

// Polynomial with complex numeric coefficients. Flow snapshots need cos/sin
// entries, which the exact-coefficient PolySymbol cannot carry; this is the
// numeric mirror used by the Hamilton engine. Key layout matches PolySymbol.
struct NumPoly {
  std::size_t n = 1;
  std::map<std::vector<int>, cd> terms;

  explicit NumPoly(std::size_t n_ = 1) : n(n_) {}

  static NumPoly from(const PolySymbol& c) {
    NumPoly out(c.n);
    for (const auto& [key, coeff] : c.terms) out.terms[key] = coeff.to_complex();
    return out;
  }

  void add_term(const std::vector<int>& key, cd v) {
    if (key.size() != 2 * n) throw InternalError("NumPoly key rank mismatch");
    cd& slot = terms[key];
    slot += v;
    if (slot == cd(0.0, 0.0)) terms.erase(key);
  }

  int degree() const {
    int d = 0;
    for (const auto& [key, v] : terms) {
      int t = 0;
      for (int e : key) t += e;
      d = std::max(d, t);
    }
    return d;
  }

  cd coefficient(const std::vector<int>& key) const {
    auto it = terms.find(key);
    return it == terms.end() ? cd(0.0, 0.0) : it->second;
  }

  cd evaluate(double q, double p) const {
    if (n != 1) throw RankMismatch("scalar evaluate needs n = 1");
    cd acc(0.0, 0.0);
    for (const auto& [key, v] : terms)
      acc += v * std::pow(q, key[0]) * std::pow(p, key[1]);
    return acc;
  }

  GridField sample(const Grid& g) const {
    if (n != 1) throw RankMismatch("grid sample needs n = 1");
    GridField out(g);
    for (int m = 0; m < g.N; ++m)
      for (int k = 0; k < g.N; ++k) out.at(m, k) = evaluate(g.q(m), g.p(k));
    return out;
  }

  double norm() const {
    double s = 0;
    for (const auto& [key, v] : terms) s += std::norm(v);
    return std::sqrt(s);
  }

  friend NumPoly operator+(const NumPoly& a, const NumPoly& b) {
    NumPoly out = a;
    for (const auto& [key, v] : b.terms) out.add_term(key, v);
    return out;
  }
  friend NumPoly operator-(const NumPoly& a, const NumPoly& b) {
    NumPoly out = a;
    for (const auto& [key, v] : b.terms) out.add_term(key, -v);
    return out;
  }
  friend NumPoly operator*(cd c, const NumPoly& a) {
    NumPoly out(a.n);
    if (c == cd(0.0, 0.0)) return out;
    for (const auto& [key, v] : a.terms) out.terms[key] = c * v;
    return out;
  }
  friend NumPoly operator*(const NumPoly& a, const NumPoly& b) {
    if (a.n != b.n) throw RankMismatch("NumPoly rank mismatch");
    NumPoly out(a.n);
    for (const auto& [ka, va] : a.terms)
      for (const auto& [kb, vb] : b.terms) {
        std::vector<int> key(ka.size());
        for (std::size_t i = 0; i < key.size(); ++i) key[i] = ka[i] + kb[i];
        out.add_term(key, va * vb);
      }
    return out;
  }
};

// Canonical bracket sum_j df/dq_j dg/dp_j - df/dp_j dg/dq_j on numeric
// coefficients; mirrors poisson_poly.
inline NumPoly poisson_num(const NumPoly& f, const NumPoly& g) {
  if (f.n != g.n) throw RankMismatch("bracket rank mismatch");
  NumPoly out(f.n);
  for (const auto& [kf, vf] : f.terms)
    for (const auto& [kg, vg] : g.terms)
      for (std::size_t j = 0; j < f.n; ++j) {
        const std::size_t iq = j, ip = f.n + j;
        if (kf[iq] > 0 && kg[ip] > 0) {
          std::vector<int> key(kf.size());
          for (std::size_t i = 0; i < key.size(); ++i) key[i] = kf[i] + kg[i];
          key[iq] -= 1;
          key[ip] -= 1;
          out.add_term(key, vf * vg * static_cast<double>(kf[iq] * kg[ip]));
        }
        if (kf[ip] > 0 && kg[iq] > 0) {
          std::vector<int> key(kf.size());
          for (std::size_t i = 0; i < key.size(); ++i) key[i] = kf[i] + kg[i];
          key[iq] -= 1;
          key[ip] -= 1;
          out.add_term(key, -vf * vg * static_cast<double>(kf[ip] * kg[iq]));
        }
      }
  return out;
}

// Harmonic-oscillator energy, E = (c1 q^2 + c2 p^2)/2. The fibre form is
// -(1/8 pi^2)(c1 d(s)d''(x)d(y) + c2 d(s)d(x)d''(y)); kernel() assembles it
// from the mechanised unit monomials so the double coefficients never have to
// pass through the exact layer.
struct QuadraticEnergy {
  Quantity c1, c2;

  QuadraticEnergy(double c1v_, double c2v_) : c1(c1v_, dim_c1), c2(c2v_, dim_c2) {
    if (!(c1v_ > 0.0) || !(c2v_ > 0.0))
      throw InternalError("oscillator coefficients must be positive");
  }

  double c1v() const { return c1.value.real(); }
  double c2v() const { return c2.value.real(); }
  double omega() const { return std::sqrt((c1 * c2).value.real()); }
  double period() const { return 2.0 * M_PI / omega(); }

  GridKernel kernel(const Grid& g) const {
    PolySymbol q = PolySymbol::coordinate_q(), p = PolySymbol::coordinate_p();
    ExactCoeff half(Rat(1, 2));
    GridKernel kq = sample_kernel(mechanise(half * (q * q)), g);
    GridKernel kp = sample_kernel(mechanise(half * (p * p)), g);
    return cd(c1v(), 0.0) * kq + cd(c2v(), 0.0) * kp;
  }

  NumPoly classical() const {
    NumPoly out(1);
    out.add_term({2, 0}, 0.5 * c1v());
    out.add_term({0, 2}, 0.5 * c2v());
    return out;
  }
};

// One evolution run: snapshot i is the state at times[i]; energy_drift and
// norm_drift are relative drifts of the engine's conserved pairings.
template <class Snapshot>
struct FlowResult {
  std::vector<double> times;
  std::vector<Snapshot> snapshots;
  std::vector<double> energy_drift;
  std::vector<double> norm_drift;
};

namespace detail {

inline void require_steps(int steps) {
  if (steps < 1) throw InternalError("evolution needs at least one step");
}

// Snapshot indices 0 = s_0 < s_1 < ... < s_{count-1} = steps, near-uniform.
inline std::vector<int> snapshot_steps(int steps, int count) {
  count = std::max(2, std::min(count, steps + 1));
  std::vector<int> out;
  for (int i = 0; i < count; ++i)
    out.push_back(static_cast<int>(std::llround(static_cast<double>(i) * steps / (count - 1))));
  out.front() = 0;
  out.back() = steps;
  return out;
}

// RK4 absolute-stability interval on the imaginary axis is |lambda| dt
// <= 2 sqrt(2); the brackets here are skew pairings with (near-)imaginary
// spectra, so that is the CFL-style bound we enforce, with the spectral
// radius estimated by power iteration on the actual generator.
inline constexpr double rk4_imag_limit = 2.8;

template <class State, class Rhs, class Norm>
double generator_radius(const State& seed, Rhs rhs, Norm nrm, int iters = 25) {
  State v = seed;
  double r = 0.0;
  for (int it = 0; it < iters; ++it) {
    double s = nrm(v);
    if (s == 0.0) return 0.0;
    v = (1.0 / s) * v;
    v = rhs(v);
    r = nrm(v);
  }
  return r;
}

inline void require_stable_step(double radius, double dt, const char* where) {
  if (radius * std::abs(dt) > rk4_imag_limit)
    throw StepTooLarge(std::string(where) + ": |lambda| dt = " +
                       std::to_string(radius * std::abs(dt)) + " exceeds the RK4 bound " +
                       std::to_string(rk4_imag_limit) + "; increase steps");
}

template <class State, class Rhs>
State rk4_step(const State& f, double dt, Rhs rhs) {
  State k1 = rhs(f);
  State k2 = rhs(f + (0.5 * dt) * k1);
  State k3 = rhs(f + (0.5 * dt) * k2);
  State k4 = rhs(f + dt * k3);
  return f + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline double kernel_norm(const GridKernel& k) {
  double s = 0;
  for (cd z : k.data) s += std::norm(z);
  return std::sqrt(s * k.grid.dx() * k.grid.dy());
}

inline GridKernel random_seed_kernel(const Grid& g) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridKernel out(g);
  for (cd& z : out.data) z = cd(u(rng), u(rng));
  return out;
}

}  // namespace detail

// Exact harmonic flow on fibre kernels. The bracket-derived Hamilton field
// (dq/dt = c2 p, dp/dt = -c1 q) rotates the dual variables as
//   k_t(x, y) = k_0(x cos(wt) + sqrt(c1/c2) y sin(wt),
//               -sqrt(c2/c1) x sin(wt) + y cos(wt)),  w = sqrt(c1 c2),
// evaluated spectrally: the trigonometric interpolant of k_0 is resampled at
// the rotated points, so band-limited data sees no interpolation-order error.
inline GridKernel oscillator_exact(const GridKernel& f0, double t, const QuadraticEnergy& E) {
  const Grid& g = f0.grid;
  const int N = g.N, C = N / 2;
  const double th = E.omega() * t, r = std::sqrt(E.c1v() / E.c2v());
  const double m00 = std::cos(th), m01 = r * std::sin(th);
  const double m10 = -std::sin(th) / r, m11 = std::cos(th);
  const double Lx = 0.5 * N * g.dx(), Ly = 0.5 * N * g.dy();

  std::vector<cd> modes = f0.data;
  centered_fft2(modes, static_cast<std::size_t>(N), -1);
  Eigen::Map<Eigen::MatrixXcd> K(modes.data(), N, N);  // K(nc, mr): column-major map of row-major (m, nc)

  // k_t(j,l) = sum_{m,nc} K(m,nc) exp(i pi (m u/Lx + nc v/Ly)), (u,v) = M(x_j, y_l).
  // Factored as one (N x N)(N x N^2) product plus a columnwise dot.
  const Eigen::Index D = static_cast<Eigen::Index>(N) * N;
  Eigen::MatrixXcd A(N, D), B(N, D);
  for (int j = 0; j < N; ++j)
    for (int l = 0; l < N; ++l) {
      const double u = m00 * g.x(j) + m01 * g.y(l);
      const double v = m10 * g.x(j) + m11 * g.y(l);
      const Eigen::Index J = static_cast<Eigen::Index>(j) * N + l;
      for (int f = 0; f < N; ++f) {
        A(f, J) = std::polar(1.0, M_PI * (f - C) * u / Lx);
        B(f, J) = std::polar(1.0, M_PI * (f - C) * v / Ly);
      }
    }
  Eigen::MatrixXcd W = K.transpose() * B;  // W(m, J) = sum_nc K(m,nc) B(nc,J)
  GridKernel out(g);
  Eigen::Map<Eigen::RowVectorXcd>(out.data.data(), D) =
      (A.cwiseProduct(W)).colwise().sum() / static_cast<double>(static_cast<long>(N) * N);
  return out;
}

// Pointwise form for continuum functions.
template <class F>
auto oscillator_exact(F f0, double t, const QuadraticEnergy& E) {
  const double th = E.omega() * t, r = std::sqrt(E.c1v() / E.c2v());
  return [f0, th, r](double x, double y) {
    return f0(std::cos(th) * x + r * std::sin(th) * y,
              -std::sin(th) / r * x + std::cos(th) * y);
  };
}

// p-dynamic equation df/dt = ub{f, E} on fibre kernels. The universal-bracket
// weight (4 pi/h) sin(pi h w) splits into the two twisted-product orderings,
// so each evaluation rides the quantized O(N^3) convolution; agreement with
// pbracket_grid is at roundoff. At h = 0 the Poisson-weight branch is used.
inline FlowResult<GridKernel> evolve_p(const GridKernel& f0, const GridKernel& E_kernel,
                                       double T, int steps, int snapshots = 9) {
  detail::require_same_grid(f0, E_kernel);
  detail::require_steps(steps);
  const Grid& g = f0.grid;
  const double dt = T / steps;

  std::function<GridKernel(const GridKernel&)> rhs;
  if (g.h == 0.0) {
    rhs = [&E_kernel](const GridKernel& k) { return pbracket_grid(k, E_kernel); };
  } else {
    const cd fac(0.0, -2.0 * M_PI / g.h);
    rhs = [&E_kernel, fac](const GridKernel& k) {
      return fac * (twisted_conv_fast(k, E_kernel) - twisted_conv_fast(E_kernel, k));
    };
  }
  if (T != 0.0) {
    double rad = detail::generator_radius(detail::random_seed_kernel(g), rhs,
                                          detail::kernel_norm);
    detail::require_stable_step(rad, dt, "evolve_p");
  }

  // Conserved pairings: tr(rho(k) rho(E)) ~ (k *_h E)(0), and the lattice L2
  // mass of the kernel (the flow conjugates by a unitary).
  auto energy = [&](const GridKernel& k) {
    return twisted_conv_fast(k, E_kernel).at(g.N / 2, g.N / 2);
  };

  FlowResult<GridKernel> out;
  const std::vector<int> marks = detail::snapshot_steps(steps, snapshots);
  const cd e0 = energy(f0);
  const double n0 = detail::kernel_norm(f0);
  GridKernel k = f0;
  std::size_t next = 0;
  for (int s = 0; s <= steps; ++s) {
    if (next < marks.size() && s == marks[next]) {
      out.times.push_back(s * dt);
      out.snapshots.push_back(k);
      out.energy_drift.push_back(std::abs(energy(k) - e0) / std::max(1.0, std::abs(e0)));
      out.norm_drift.push_back(std::abs(detail::kernel_norm(k) - n0) / n0);
      ++next;
    }
    if (s < steps) k = detail::rk4_step(k, dt, rhs);
  }
  return out;
}

// Heisenberg picture dF/dt = (2 pi/(i h)) [F, H] by RK4 on dense matrices.
inline FlowResult<FockOperator> evolve_heisenberg(const FockOperator& F0, const FockOperator& H,
                                                  double T, int steps, int snapshots = 9) {
  if (F0.grid != H.grid) throw GridMismatch("observable and energy live on different grids");
  detail::require_steps(steps);
  const double h = F0.grid.h, dt = T / steps;
  const cd fac(0.0, -2.0 * M_PI / h);

  using M = Eigen::MatrixXcd;
  auto rhs = [&H, fac](const M& F) -> M { return fac * (F * H.matrix - H.matrix * F); };

  if (T != 0.0) {
    // rho(ad_H) <= 2 rho(H); estimate rho(H) by power iteration on matvecs.
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXcd v(H.matrix.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cd(u(rng), u(rng));
    double rh = 0;
    for (int it = 0; it < 25; ++it) {
      v.normalize();
      v = H.matrix * v;
      rh = v.norm();
    }
    detail::require_stable_step((4.0 * M_PI / h) * rh, dt, "evolve_heisenberg");
  }

  auto energy = [&H](const M& F) { return (F.transpose().cwiseProduct(H.matrix)).sum(); };

  FlowResult<FockOperator> out;
  const std::vector<int> marks = detail::snapshot_steps(steps, snapshots);
  const cd e0 = energy(F0.matrix);
  const double n0 = F0.matrix.norm();
  M F = F0.matrix;
  std::size_t next = 0;
  for (int s = 0; s <= steps; ++s) {
    if (next < marks.size() && s == marks[next]) {
      out.times.push_back(s * dt);
      out.snapshots.push_back(FockOperator{F0.grid, F});
      out.energy_drift.push_back(std::abs(energy(F) - e0) / std::max(1.0, std::abs(e0)));
      out.norm_drift.push_back(std::abs(F.norm() - n0) / n0);
      ++next;
    }
    if (s < steps) F = detail::rk4_step(F, dt, rhs);
  }
  return out;
}

namespace detail {

inline constexpr int hamilton_degree_cap = 6;

// Affine flow z -> M z + w of the quadratic Hamiltonian field
// z' = A z + b, A = [[b1, 2 c], [-2 a, -b1]] for H = a q^2 + b1 qp + c p^2
// + d q + e p. Computed by scaling and squaring of the Taylor series of
// exp(t A) and phi1(t A) b t, exact to roundoff.
struct AffineFlow {
  Eigen::Matrix2cd M;
  Eigen::Vector2cd w;
};

inline AffineFlow hamilton_closed_flow(const NumPoly& H, double t) {
  Eigen::Matrix2cd A;
  A << H.coefficient({1, 1}), 2.0 * H.coefficient({0, 2}),
      -2.0 * H.coefficient({2, 0}), -H.coefficient({1, 1});
  Eigen::Vector2cd b(H.coefficient({0, 1}), -H.coefficient({1, 0}));

  int m = 0;
  double scale = A.cwiseAbs().maxCoeff() * std::abs(t);
  while (scale > 0.25 && m < 60) {
    scale *= 0.5;
    ++m;
  }
  const double dt = t / std::ldexp(1.0, m);
  Eigen::Matrix2cd S = dt * A, term = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd M = Eigen::Matrix2cd::Identity(), P1 = Eigen::Matrix2cd::Identity();
  for (int k = 1; k <= 18; ++k) {
    term = (term * S) / static_cast<double>(k);
    M += term;
    P1 += term / static_cast<double>(k + 1);
  }
  AffineFlow f{M, P1 * (dt * b)};
  for (int i = 0; i < m; ++i) f = AffineFlow{f.M * f.M, f.M * f.w + f.w};
  return f;
}

inline NumPoly substitute_affine(const NumPoly& f0, const AffineFlow& fl) {
  NumPoly lq(1), lp(1);
  lq.add_term({1, 0}, fl.M(0, 0));
  lq.add_term({0, 1}, fl.M(0, 1));
  lq.add_term({0, 0}, fl.w(0));
  lp.add_term({1, 0}, fl.M(1, 0));
  lp.add_term({0, 1}, fl.M(1, 1));
  lp.add_term({0, 0}, fl.w(1));
  NumPoly out(1);
  for (const auto& [key, v] : f0.terms) {
    NumPoly term(1);
    term.add_term({0, 0}, v);
    for (int i = 0; i < key[0]; ++i) term = term * lq;
    for (int i = 0; i < key[1]; ++i) term = term * lp;
    out = out + term;
  }
  return out;
}

inline NumPoly hamilton_bracket_checked(const NumPoly& f, const NumPoly& H) {
  NumPoly r = poisson_num(f, H);
  if (r.degree() > hamilton_degree_cap)
    throw DegreeOverflow("hamilton flow left the degree-" +
                         std::to_string(hamilton_degree_cap) + " cap");
  return r;
}

// Shared engine for evolve_hamilton and consistency_report (the latter's
// coefficients are plain doubles and never pass through PolySymbol).
// Diagnostics ride a probe point transported by the backward flow: H along
// the transported probe is the conserved energy pairing.
inline FlowResult<NumPoly> evolve_hamilton_impl(const NumPoly& f0, const NumPoly& H,
                                                double T, int steps, int snapshots,
                                                bool force_rk4) {
  require_steps(steps);
  if (f0.n != 1 || H.n != 1) throw RankMismatch("hamilton flow is one-dimensional");
  if (f0.degree() > hamilton_degree_cap)
    throw DegreeOverflow("initial observable exceeds the degree cap");
  const bool closed = !force_rk4 && H.degree() <= 2;
  const double dt = T / steps;

  auto rhs = [&H](const NumPoly& f) { return hamilton_bracket_checked(f, H); };
  auto probe_rhs = [&H](const Eigen::Vector2d& z) {
    // Backward transport: dz/dt = -X_H(z).
    const double q = z(0), p = z(1);
    double dHq = 0, dHp = 0;
    for (const auto& [key, v] : H.terms) {
      if (key[0] > 0)
        dHq += (v * static_cast<double>(key[0])).real() * std::pow(q, key[0] - 1) *
               std::pow(p, key[1]);
      if (key[1] > 0)
        dHp += (v * static_cast<double>(key[1])).real() * std::pow(q, key[0]) *
               std::pow(p, key[1] - 1);
    }
    return Eigen::Vector2d(-dHp, dHq);
  };

  FlowResult<NumPoly> out;
  const std::vector<int> marks = snapshot_steps(steps, snapshots);
  Eigen::Vector2d z(1.0, 1.0);
  const double e0 = H.evaluate(z(0), z(1)).real();
  const double n0 = f0.norm();
  NumPoly f = f0;
  std::size_t next = 0;
  for (int s = 0; s <= steps; ++s) {
    if (next < marks.size() && s == marks[next]) {
      if (closed) f = substitute_affine(f0, hamilton_closed_flow(H, s * dt));
      out.times.push_back(s * dt);
      out.snapshots.push_back(f);
      out.energy_drift.push_back(std::abs(H.evaluate(z(0), z(1)).real() - e0) /
                                 std::max(1.0, std::abs(e0)));
      out.norm_drift.push_back(std::abs(f.norm() - n0) / n0);
      ++next;
    }
    if (s < steps) {
      if (!closed) f = rk4_step(f, dt, rhs);
      z = rk4_step(z, dt, probe_rhs);
    }
  }
  return out;
}

}  // namespace detail

// Hamilton equation df/dt = {f, H}. Quadratic H is solved exactly by the
// closed affine flow substituted into f0; otherwise RK4 on coefficients.
inline FlowResult<NumPoly> evolve_hamilton(const PolySymbol& f0, const PolySymbol& H,
                                           double T, int steps, int snapshots = 9) {
  return detail::evolve_hamilton_impl(NumPoly::from(f0), NumPoly::from(H), T, steps,
                                      snapshots, false);
}

// All three engines started from the same localized first-order observable
// and the same energy, then compared through the projections: rho_h lifts
// the p-solution against the Heisenberg matrices, the symbol transform drops
// it against the Hamilton flow, and the exact harmonic flow rules them both.
// The observable is q damped by the self-dual Gaussian window exp(-2 pi
// r^2 / h); that width splits the resolution budget evenly between the
// symbol lattice and its dual, so the deviations measure the engines, not
// seam artifacts of an unresolved comb. The Hamilton engine evolves the bare
// polynomial q; the window rides along through the same closed flow matrix,
// which is what composition with the flow does to a product. Deviations are
// maxima over the common snapshot times.
struct ConsistencyReport {
  double T = 0;
  int steps = 0;
  double dev_quantum = 0;    // |rho_h(p-solution) - Heisenberg| / |Heisenberg|
  double dev_classical = 0;  // symbol of p-solution vs window-damped Hamilton flow
  double dev_exact = 0;      // p-solution vs oscillator_exact, kernel norm

  double max_dev() const { return std::max({dev_quantum, dev_classical, dev_exact}); }
};

inline ConsistencyReport consistency_report(const QuadraticEnergy& E, const Grid& g,
                                            double T, int steps, int snapshots = 5) {
  if (!(g.h > 0.0)) throw InternalError("consistency_report needs h > 0");
  const double inv2s2 = 2.0 * M_PI / g.h;  // 1/(2 sigma^2), sigma^2 = h/(4 pi)
  GridField f0_sym(g);
  for (int m = 0; m < g.N; ++m)
    for (int k = 0; k < g.N; ++k) {
      double q = g.q(m), p = g.p(k);
      f0_sym.at(m, k) = q * std::exp(-inv2s2 * (q * q + p * p));
    }
  GridKernel f0 = kernel_of_symbol(f0_sym);
  GridKernel Ek = E.kernel(g);

  FlowResult<GridKernel> rp = evolve_p(f0, Ek, T, steps, snapshots);
  FlowResult<FockOperator> rh =
      evolve_heisenberg(rho_kernel(f0), rho_kernel(Ek), T, steps, snapshots);
  NumPoly Hnum = E.classical();
  FlowResult<NumPoly> rc = detail::evolve_hamilton_impl(
      NumPoly::from(PolySymbol::coordinate_q()), Hnum, T, steps, snapshots, false);

  ConsistencyReport rep;
  rep.T = T;
  rep.steps = steps;
  for (std::size_t i = 0; i < rp.snapshots.size(); ++i) {
    const GridKernel& k = rp.snapshots[i];
    Eigen::MatrixXcd lift = rho_kernel(k).matrix;
    rep.dev_quantum = std::max(rep.dev_quantum,
                               (lift - rh.snapshots[i].matrix).norm() /
                                   std::max(1e-300, rh.snapshots[i].matrix.norm()));

    // Classical and exact comparisons are taken over the half box. The
    // rotated corners leave the fundamental domain, where the lattice flow
    // and the spectral oracle wrap them differently; the interior is where
    // both agree with the plane picture.
    GridField sym = symbol_of_kernel(k);
    const NumPoly& poly = rc.snapshots[i];
    Eigen::Matrix2cd M = detail::hamilton_closed_flow(Hnum, rp.times[i]).M;
    double num = 0, den = 0;
    for (int m = 0; m < g.N; ++m)
      for (int kk = 0; kk < g.N; ++kk) {
        if (std::abs(g.q(m)) > 0.5 * g.L_q || std::abs(g.p(kk)) > 0.5 * g.L_p) continue;
        double q = g.q(m), p = g.p(kk);
        cd u = M(0, 0) * q + M(0, 1) * p, v = M(1, 0) * q + M(1, 1) * p;
        cd want = poly.evaluate(q, p) * std::exp(-inv2s2 * (u * u + v * v));
        num += std::norm(sym.at(m, kk) - want);
        den += std::norm(want);
      }
    rep.dev_classical = std::max(rep.dev_classical, std::sqrt(num / std::max(1e-300, den)));

    GridKernel ex = oscillator_exact(f0, rp.times[i], E);
    const double xh = 0.25 * g.N * g.dx(), yh = 0.25 * g.N * g.dy();
    num = 0, den = 0;
    for (int a = 0; a < g.N; ++a)
      for (int b = 0; b < g.N; ++b) {
        if (std::abs(g.x(a)) > xh || std::abs(g.y(b)) > yh) continue;
        num += std::norm(k.at(a, b) - ex.at(a, b));
        den += std::norm(ex.at(a, b));
      }
    rep.dev_exact = std::max(rep.dev_exact, std::sqrt(num / std::max(1e-300, den)));
  }
  return rep;
}

// Trajectory CSV: t, caller-defined observable columns, then the drift
// diagnostics. Deterministic full-precision output.
template <class Snapshot, class Obs>
void write_trajectory_csv(const FlowResult<Snapshot>& r, std::ostream& os,
                          const std::vector<std::string>& columns, Obs observe) {
  os << "t";
  for (const std::string& c : columns) os << "," << c;
  os << ",energy_drift,norm_drift\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
    os << r.times[i];
    for (double v : observe(r.snapshots[i])) os << "," << v;
    os << "," << r.energy_drift[i] << "," << r.norm_drift[i] << "\n";
  }
}

}  // namespace pmech
