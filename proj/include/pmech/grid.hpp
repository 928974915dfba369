#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmech/errors.hpp"
#include "pmech/fft.hpp"
#include "pmech/group.hpp"
#include "pmech/units.hpp"

namespace pmech {

inline double default_h() { return 1.0 / (2.0 * M_PI); }

// Square phase-space lattice for n = 1: q_m = (m - N/2) dq, p likewise, with
// the dual (x, y) lattice chosen so that exp(-2 pi i q x) is an exact N-th
// root of unity on lattice pairs (dq * dx = 1/N).
struct Grid {
  int N = 0;
  double L_q = 0.0, L_p = 0.0, h = 0.0;

  Grid() = default;
  Grid(int N_, double Lq, double Lp, double h_) : N(N_), L_q(Lq), L_p(Lp), h(h_) {
    if (N < 2 || (N & (N - 1)) != 0)
      throw InternalError("grid size must be a power of two >= 2");
    if (!(L_q > 0.0) || !(L_p > 0.0)) throw InternalError("grid extents must be positive");
    if (!std::isfinite(h)) throw InternalError("grid h must be finite");
  }

  static Grid standard(int N = 64, double h = default_h()) {
    double L = 4.0 * std::sqrt(h * std::max(1.0, 1.0 / (2.0 * M_PI)));
    return Grid(N, L, L, h);
  }
  // L^2 = N h / 8 equalizes the position and dual Gaussian tails (both
  // exp(-pi N / 4)) and makes h / (N dq dp) = 2, so lattice point operators
  // compose exactly modulo full phase turns: circular twisted convolution is
  // then an exact group algebra, not an approximation. Needs N >= 64 for the
  // vacuum boundary guard; smaller N is fine for kernel-only work.
  static Grid balanced(int N = 64, double h = default_h()) {
    double L = std::sqrt(N * h / 8.0);
    return Grid(N, L, L, h);
  }
  // Dimension-checked entry: L_q carries L, L_p carries ML/T, h carries ML^2/T.
  static Grid checked(int N, const Quantity& Lq, const Quantity& Lp, const Quantity& h) {
    if (Lq.dim != dim_q || Lp.dim != dim_p || h.dim != dim_h)
      throw DimensionMismatch("grid extents must carry (L, ML/T, ML^2/T)");
    return Grid(N, Lq.value.real(), Lp.value.real(), h.value.real());
  }

  double dq() const { return 2.0 * L_q / N; }
  double dp() const { return 2.0 * L_p / N; }
  double dx() const { return 1.0 / (N * dq()); }
  double dy() const { return 1.0 / (N * dp()); }
  double q(int m) const { return (m - N / 2) * dq(); }
  double p(int k) const { return (k - N / 2) * dp(); }
  double x(int a) const { return (a - N / 2) * dx(); }
  double y(int b) const { return (b - N / 2) * dy(); }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.N == b.N && a.L_q == b.L_q && a.L_p == b.L_p && a.h == b.h;
  }
  friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }
};

// Sampled function of (q, p); data[m * N + k] = f(q_m, p_k).
struct GridField {
  Grid grid;
  std::vector<cd> data;

  GridField() = default;
  explicit GridField(const Grid& g) : grid(g), data(static_cast<std::size_t>(g.N) * g.N) {}

  cd& at(int m, int k) { return data[static_cast<std::size_t>(m) * grid.N + k]; }
  const cd& at(int m, int k) const { return data[static_cast<std::size_t>(m) * grid.N + k]; }
};

// Sampled convolution kernel slice of (x, y); data[a * N + b] = k(x_a, y_b).
struct GridKernel {
  Grid grid;
  std::vector<cd> data;

  GridKernel() = default;
  explicit GridKernel(const Grid& g) : grid(g), data(static_cast<std::size_t>(g.N) * g.N) {}

  cd& at(int a, int b) { return data[static_cast<std::size_t>(a) * grid.N + b]; }
  const cd& at(int a, int b) const { return data[static_cast<std::size_t>(a) * grid.N + b]; }
};

namespace detail {
template <class T>
void require_same_grid(const T& a, const T& b) {
  if (a.grid != b.grid) throw GridMismatch("operands live on different grids");
}
template <class T>
void require_finite(const T& v, const char* what) {
  for (const cd& z : v.data)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw InternalError(std::string(what) + " contains non-finite samples");
}
inline void require_positive_h(const Grid& g, const char* op) {
  if (!(g.h > 0.0)) throw InternalError(std::string(op) + " requires h > 0");
}
}  // namespace detail

template <class T>
T lin_comb(cd ca, const T& a, cd cb, const T& b) {
  detail::require_same_grid(a, b);
  T out(a.grid);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = ca * a.data[i] + cb * b.data[i];
  return out;
}
inline GridField operator+(const GridField& a, const GridField& b) { return lin_comb<GridField>(1.0, a, 1.0, b); }
inline GridField operator-(const GridField& a, const GridField& b) { return lin_comb<GridField>(1.0, a, -1.0, b); }
inline GridField operator*(cd c, const GridField& f) {
  GridField out = f;
  for (cd& z : out.data) z *= c;
  return out;
}
inline GridKernel operator+(const GridKernel& a, const GridKernel& b) { return lin_comb<GridKernel>(1.0, a, 1.0, b); }
inline GridKernel operator-(const GridKernel& a, const GridKernel& b) { return lin_comb<GridKernel>(1.0, a, -1.0, b); }
inline GridKernel operator*(cd c, const GridKernel& k) {
  GridKernel out = k;
  for (cd& z : out.data) z *= c;
  return out;
}

// Fourier coefficients on the dual lattice: f = sum fhat(u_j, v_l) e^{2 pi i (q u_j + p v_l)}
// holds exactly at lattice points. Row index j pairs with q, column l with p.
inline std::vector<cd> to_coeffs(const GridField& f) {
  std::vector<cd> c = f.data;
  centered_fft2(c, f.grid.N, -1);
  const double s = 1.0 / (static_cast<double>(f.grid.N) * f.grid.N);
  for (cd& z : c) z *= s;
  return c;
}
inline GridField from_coeffs(const Grid& g, std::vector<cd> c) {
  centered_fft2(c, g.N, +1);
  GridField out(g);
  out.data = std::move(c);
  return out;
}

// <f1, f2> = (4/h) sum f1 conj(f2) dq dp. Dimensionless by construction.
inline cd inner_product(const GridField& f1, const GridField& f2) {
  detail::require_same_grid(f1, f2);
  detail::require_positive_h(f1.grid, "inner_product");
  cd acc(0.0, 0.0);
  for (std::size_t i = 0; i < f1.data.size(); ++i) acc += f1.data[i] * std::conj(f2.data[i]);
  return acc * (4.0 / f1.grid.h) * f1.grid.dq() * f1.grid.dp();
}
inline double field_norm(const GridField& f) {
  return std::sqrt(std::abs(inner_product(f, f).real()));
}

namespace detail {
// Ground Gaussian samples without the box guard; transforms shift it around
// internally and must not re-trip the guard.
inline GridField vacuum_unguarded(const Grid& g) {
  GridField out(g);
  const double a = 2.0 * M_PI / g.h;
  for (int m = 0; m < g.N; ++m)
    for (int k = 0; k < g.N; ++k) {
      double q = g.q(m), p = g.p(k);
      out.at(m, k) = std::exp(-a * (q * q + p * p));
    }
  return out;
}
inline void guard_box(const Grid& g, double q0, double p0, const char* op) {
  double d = std::min(g.L_q - std::abs(q0), g.L_p - std::abs(p0));
  if (d <= 0.0) throw BoxTooSmall(std::string(op) + ": state center outside the box");
  // 1e-10 admits the flux-quantized box at N = 32 (boundary e^{-8 pi}), the
  // smallest frame-quadrature setting, while keeping wrap contamination at
  // least four orders below every tolerance used in the suite.
  double boundary = std::exp(-(2.0 * M_PI / g.h) * d * d);
  if (boundary > 1e-10)
    throw BoxTooSmall(std::string(op) + ": boundary/peak ratio " + std::to_string(boundary) +
                      " exceeds 1e-10");
}
}  // namespace detail

// exp(-(2 pi / h)(q^2 + p^2)); unit norm under inner_product without any
// normalization factor.
inline GridField vacuum(const Grid& g) {
  detail::require_positive_h(g, "vacuum");
  detail::guard_box(g, 0.0, 0.0, "vacuum");
  return detail::vacuum_unguarded(g);
}

// rho_h(s,x,y) f = e^{-2 pi i (h s + q x + p y)} f(q - (h/2) y, p + (h/2) x).
// The non-lattice shift acts spectrally under the periodic boundary, so it is
// exact for band-limited data and Gaussian-tail small otherwise.
inline GridField rho_point(const GroupPoint& g, const GridField& f) {
  if (g.x.size() != 1 || g.y.size() != 1)
    throw RankMismatch("grid representation is n = 1 only");
  const Grid& gr = f.grid;
  detail::require_positive_h(gr, "rho_point");
  const double x = g.x[0], y = g.y[0], h = gr.h;

  std::vector<cd> c = to_coeffs(f);
  // f(q - (h/2) y, p + (h/2) x) has coefficients fhat(u,v) e^{pi i h (x v - y u)}.
  std::vector<cd> eu(gr.N), ev(gr.N);
  for (int j = 0; j < gr.N; ++j) {
    eu[j] = std::polar(1.0, -M_PI * h * y * gr.x(j));
    ev[j] = std::polar(1.0, M_PI * h * x * gr.y(j));
  }
  for (int j = 0; j < gr.N; ++j)
    for (int l = 0; l < gr.N; ++l) c[static_cast<std::size_t>(j) * gr.N + l] *= eu[j] * ev[l];
  GridField out = from_coeffs(gr, std::move(c));

  const cd es = std::polar(1.0, -2.0 * M_PI * h * g.s);
  std::vector<cd> pq(gr.N), pp(gr.N);
  for (int m = 0; m < gr.N; ++m) pq[m] = std::polar(1.0, -2.0 * M_PI * gr.q(m) * x);
  for (int k = 0; k < gr.N; ++k) pp[k] = std::polar(1.0, -2.0 * M_PI * gr.p(k) * y);
  for (int m = 0; m < gr.N; ++m)
    for (int k = 0; k < gr.N; ++k) out.at(m, k) *= es * pq[m] * pp[k];
  return out;
}

// Closed form of rho_point((0,x,y), vacuum):
//   e^{-2 pi i (q x + p y)} exp(-(2 pi / h)((q - (h/2) y)^2 + (p + (h/2) x)^2)).
inline GridField coherent_state(const Grid& g, double x, double y) {
  detail::require_positive_h(g, "coherent_state");
  detail::guard_box(g, 0.5 * g.h * y, -0.5 * g.h * x, "coherent_state");
  GridField out(g);
  const double a = 2.0 * M_PI / g.h;
  for (int m = 0; m < g.N; ++m)
    for (int k = 0; k < g.N; ++k) {
      double q = g.q(m), p = g.p(k);
      double dq0 = q - 0.5 * g.h * y, dp0 = p + 0.5 * g.h * x;
      out.at(m, k) = std::polar(std::exp(-a * (dq0 * dq0 + dp0 * dp0)),
                                -2.0 * M_PI * (q * x + p * y));
    }
  return out;
}

namespace detail {
// c1 * d/dq + c2 * d/dp, spectral.
inline GridField spectral_dderiv(const GridField& f, cd c1, cd c2) {
  const Grid& g = f.grid;
  std::vector<cd> c = to_coeffs(f);
  for (int j = 0; j < g.N; ++j)
    for (int l = 0; l < g.N; ++l) {
      cd w = c1 * cd(0.0, 2.0 * M_PI * g.x(j)) + c2 * cd(0.0, 2.0 * M_PI * g.y(l));
      c[static_cast<std::size_t>(j) * g.N + l] *= w;
    }
  return from_coeffs(g, std::move(c));
}
}  // namespace detail

// A f = (h/2)(d_p - i d_q) f + 2 pi (p - i q) f; kills the vacuum.
inline GridField annihilate(const GridField& f) {
  const Grid& g = f.grid;
  detail::require_positive_h(g, "annihilate");
  GridField out = detail::spectral_dderiv(f, cd(0.0, -0.5 * g.h), cd(0.5 * g.h, 0.0));
  for (int m = 0; m < g.N; ++m)
    for (int k = 0; k < g.N; ++k)
      out.at(m, k) += 2.0 * M_PI * cd(g.p(k), -g.q(m)) * f.at(m, k);
  return out;
}
// Creation counterpart: -(h/2)(d_p + i d_q) f + 2 pi (p + i q) f. [A, A+] = 4 pi h.
inline GridField create(const GridField& f) {
  const Grid& g = f.grid;
  detail::require_positive_h(g, "create");
  GridField out = detail::spectral_dderiv(f, cd(0.0, -0.5 * g.h), cd(-0.5 * g.h, 0.0));
  for (int m = 0; m < g.N; ++m)
    for (int k = 0; k < g.N; ++k)
      out.at(m, k) += 2.0 * M_PI * cd(g.p(k), g.q(m)) * f.at(m, k);
  return out;
}

// Norm of D_h f = (h/2)(d_p + i d_q) f + 2 pi (p + i q) f; zero exactly on the
// Fock space of the orbit.
inline double fock_residual(const GridField& f) {
  const Grid& g = f.grid;
  if (g.h == 0.0) throw InternalError("fock_residual requires h != 0");
  GridField out = detail::spectral_dderiv(f, cd(0.0, 0.5 * g.h), cd(0.5 * g.h, 0.0));
  for (int m = 0; m < g.N; ++m)
    for (int k = 0; k < g.N; ++k)
      out.at(m, k) += 2.0 * M_PI * cd(g.p(k), g.q(m)) * f.at(m, k);
  return field_norm(out);
}

namespace detail {
struct WaveletTables {
  std::vector<cd> E;       // E[t] = exp(2 pi i t / N), exact lattice phases
  std::vector<double> Gq;  // Gq[b*N+m] = exp(-(2 pi/h)(q_m - (h/2) y_b)^2)
  std::vector<double> Gp;  // Gp[a*N+k] = exp(-(2 pi/h)(p_k + (h/2) x_a)^2)
  explicit WaveletTables(const Grid& g)
      : E(g.N), Gq(static_cast<std::size_t>(g.N) * g.N), Gp(Gq.size()) {
    const double amp = 2.0 * M_PI / g.h;
    for (int t = 0; t < g.N; ++t) E[t] = std::polar(1.0, 2.0 * M_PI * t / g.N);
    for (int b = 0; b < g.N; ++b)
      for (int m = 0; m < g.N; ++m) {
        double u = g.q(m) - 0.5 * g.h * g.y(b);
        Gq[static_cast<std::size_t>(b) * g.N + m] = std::exp(-amp * u * u);
      }
    for (int a = 0; a < g.N; ++a)
      for (int k = 0; k < g.N; ++k) {
        double w = g.p(k) + 0.5 * g.h * g.x(a);
        Gp[static_cast<std::size_t>(a) * g.N + k] = std::exp(-amp * w * w);
      }
  }
  int phase_index(int m, int a, int N) const {
    long t = static_cast<long>(m - N / 2) * (a - N / 2) % N;
    return static_cast<int>(t < 0 ? t + N : t);
  }
};
}  // namespace detail

// f breve (x,y) = <f, v_{(x,y)}> on the dual lattice. Direct O(N^4) sum with
// exact root-of-unity phase tables; deterministic summation order.
inline GridKernel wavelet_fwd(const GridField& f) {
  const Grid& g = f.grid;
  detail::require_positive_h(g, "wavelet_fwd");
  const int N = g.N;
  detail::WaveletTables T(g);
  const double scale = (4.0 / g.h) * g.dq() * g.dp();
  GridKernel out(g);
  std::vector<cd> wk(N);
  for (int a = 0; a < N; ++a) {
    for (int b = 0; b < N; ++b) {
      for (int k = 0; k < N; ++k)
        wk[k] = T.E[T.phase_index(k, b, N)] * T.Gp[static_cast<std::size_t>(a) * N + k];
      cd acc(0.0, 0.0);
      for (int m = 0; m < N; ++m) {
        const cd* row = f.data.data() + static_cast<std::size_t>(m) * N;
        cd inner(0.0, 0.0);
        for (int k = 0; k < N; ++k) inner += row[k] * wk[k];
        acc += T.E[T.phase_index(m, a, N)] * T.Gq[static_cast<std::size_t>(b) * N + m] * inner;
      }
      out.at(a, b) = scale * acc;
    }
  }
  return out;
}

// f(q,p) = h sum k(x,y) v_{(x,y)}(q,p) dx dy: superposition of coherent states.
inline GridField wavelet_inv(const GridKernel& kker) {
  const Grid& g = kker.grid;
  detail::require_positive_h(g, "wavelet_inv");
  const int N = g.N;
  detail::WaveletTables T(g);
  const double scale = g.h * g.dx() * g.dy();
  GridField out(g);
  std::vector<cd> wb(N);
  for (int m = 0; m < N; ++m) {
    for (int k = 0; k < N; ++k) {
      for (int b = 0; b < N; ++b)
        wb[b] = std::conj(T.E[T.phase_index(k, b, N)]) * T.Gq[static_cast<std::size_t>(b) * N + m];
      cd acc(0.0, 0.0);
      for (int a = 0; a < N; ++a) {
        const cd* row = kker.data.data() + static_cast<std::size_t>(a) * N;
        cd inner(0.0, 0.0);
        for (int b = 0; b < N; ++b) inner += row[b] * wb[b];
        acc += std::conj(T.E[T.phase_index(m, a, N)]) * T.Gp[static_cast<std::size_t>(a) * N + k] *
               inner;
      }
      out.at(m, k) = scale * acc;
    }
  }
  return out;
}

// ---- serialization: header (N, L_q, L_p, h), then row-major re/im pairs ----

namespace detail {
inline nlohmann::json grid_header(const Grid& g, const char* kind) {
  return {{"kind", kind}, {"N", g.N}, {"L_q", g.L_q}, {"L_p", g.L_p}, {"h", g.h}};
}
template <class T>
nlohmann::json samples_to_json(const T& v, const char* kind) {
  nlohmann::json j = grid_header(v.grid, kind);
  std::vector<double> re(v.data.size()), im(v.data.size());
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    re[i] = v.data[i].real();
    im[i] = v.data[i].imag();
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}
template <class T>
T samples_from_json(const nlohmann::json& j, const char* kind) {
  if (!j.contains("kind") || j["kind"] != kind)
    throw ParseError(std::string("expected serialized ") + kind);
  Grid g(j.at("N").get<int>(), j.at("L_q").get<double>(), j.at("L_p").get<double>(),
         j.at("h").get<double>());
  T out(g);
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (re.size() != out.data.size() || im.size() != out.data.size())
    throw ParseError("sample payload does not match N x N");
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = cd(re[i].template get<double>(), im[i].template get<double>());
  require_finite(out, kind);
  return out;
}
template <class T>
void samples_to_csv(const T& v, std::ostream& os) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", v.grid.N, v.grid.L_q, v.grid.L_p,
                v.grid.h);
  os << "N,L_q,L_p,h\n" << buf << "re,im\n";
  for (const cd& z : v.data) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", z.real(), z.imag());
    os << buf;
  }
}
template <class T>
T samples_from_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "N,L_q,L_p,h") throw ParseError("bad csv header");
  if (!std::getline(is, line)) throw ParseError("missing grid line");
  int N = 0;
  double Lq = 0, Lp = 0, h = 0;
  if (std::sscanf(line.c_str(), "%d,%lg,%lg,%lg", &N, &Lq, &Lp, &h) != 4)
    throw ParseError("bad grid line");
  if (!std::getline(is, line) || line != "re,im") throw ParseError("missing column header");
  T out(Grid(N, Lq, Lp, h));
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    if (!std::getline(is, line)) throw ParseError("truncated csv payload");
    double re = 0, im = 0;
    if (std::sscanf(line.c_str(), "%lg,%lg", &re, &im) != 2) throw ParseError("bad csv row");
    out.data[i] = cd(re, im);
  }
  require_finite(out, "csv payload");
  return out;
}
}  // namespace detail

inline nlohmann::json to_json(const GridField& f) { return detail::samples_to_json(f, "field"); }
inline nlohmann::json to_json(const GridKernel& k) { return detail::samples_to_json(k, "kernel"); }
inline GridField field_from_json(const nlohmann::json& j) {
  return detail::samples_from_json<GridField>(j, "field");
}
inline GridKernel kernel_from_json(const nlohmann::json& j) {
  return detail::samples_from_json<GridKernel>(j, "kernel");
}
inline void save_csv(const GridField& f, std::ostream& os) { detail::samples_to_csv(f, os); }
inline void save_csv(const GridKernel& k, std::ostream& os) { detail::samples_to_csv(k, os); }
inline GridField field_from_csv(std::istream& is) {
  return detail::samples_from_csv<GridField>(is);
}
inline GridKernel kernel_from_csv(std::istream& is) {
  return detail::samples_from_csv<GridKernel>(is);
}

}  // namespace pmech
