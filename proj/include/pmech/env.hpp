#pragma once

#include <algorithm>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pmech/coeff.hpp"
#include "pmech/errors.hpp"
#include "pmech/group.hpp"
#include "pmech/poly.hpp"
#include "pmech/units.hpp"

namespace pmech {

// PBW monomial S^a X^B Y^C. Keys are kept in this canonical order; every
// product re-normal-orders through [X_j, Y_k] = delta_jk S with S central.
struct EnvKey {
  int a = 0;
  std::vector<int> B, C;

  friend bool operator<(const EnvKey& l, const EnvKey& r) {
    if (l.a != r.a) return l.a < r.a;
    if (l.B != r.B) return l.B < r.B;
    return l.C < r.C;
  }
  friend bool operator==(const EnvKey& l, const EnvKey& r) {
    return l.a == r.a && l.B == r.B && l.C == r.C;
  }
  int degree() const {
    int d = a;
    for (int e : B) d += e;
    for (int e : C) d += e;
    return d;
  }
};

// Delta-derivative convolution kernel supported at the group identity,
// i.e. an element of the enveloping algebra of h_n in the PBW basis.
struct EnvElement {
  std::size_t n = 1;
  std::map<EnvKey, ExactCoeff> terms;
  bool checked = false;
  Dim dim{};

  explicit EnvElement(std::size_t n_ = 1) : n(n_) {}

  static EnvElement zero(std::size_t n = 1) { return EnvElement(n); }
  static EnvElement one(std::size_t n = 1) {
    EnvElement out(n);
    out.checked = true;
    out.terms[EnvKey{0, std::vector<int>(n, 0), std::vector<int>(n, 0)}] =
        ExactCoeff(Rat(1));
    return out;
  }
  static EnvElement generator_S(std::size_t n = 1) {
    EnvElement out(n);
    out.checked = true;
    out.dim = dim_h;
    out.terms[EnvKey{1, std::vector<int>(n, 0), std::vector<int>(n, 0)}] =
        ExactCoeff(Rat(1));
    return out;
  }
  static EnvElement generator_X(std::size_t j = 0, std::size_t n = 1) {
    EnvElement out(n);
    out.checked = true;
    out.dim = dim_q;
    EnvKey k{0, std::vector<int>(n, 0), std::vector<int>(n, 0)};
    k.B[j] = 1;
    out.terms[k] = ExactCoeff(Rat(1));
    return out;
  }
  static EnvElement generator_Y(std::size_t j = 0, std::size_t n = 1) {
    EnvElement out(n);
    out.checked = true;
    out.dim = dim_p;
    EnvKey k{0, std::vector<int>(n, 0), std::vector<int>(n, 0)};
    k.C[j] = 1;
    out.terms[k] = ExactCoeff(Rat(1));
    return out;
  }

  void add_term(const EnvKey& key, const ExactCoeff& c) {
    if (key.B.size() != n || key.C.size() != n)
      throw RankMismatch("enveloping key rank mismatch");
    if (c.is_zero()) return;
    auto it = terms.find(key);
    if (it == terms.end()) {
      terms[key] = c;
    } else {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  bool is_zero() const { return terms.empty(); }
  // Coefficient-exact equality; dimension tags do not participate.
  friend bool operator==(const EnvElement& a, const EnvElement& b) {
    return a.n == b.n && a.terms == b.terms;
  }
  friend bool operator!=(const EnvElement& a, const EnvElement& b) {
    return !(a == b);
  }
  int degree() const {
    int d = 0;
    for (const auto& [k, c] : terms) d = std::max(d, k.degree());
    return d;
  }
  // Largest power of any single generator appearing; the s-free elements of
  // quantisation pipelines are classified by max_a() == 0.
  int max_a() const {
    int a = 0;
    for (const auto& [k, c] : terms) a = std::max(a, k.a);
    return a;
  }

  friend EnvElement operator+(const EnvElement& a, const EnvElement& b) {
    if (a.n != b.n) throw RankMismatch("enveloping rank mismatch");
    EnvElement out = a;
    if (a.checked && b.checked) {
      if (a.dim != b.dim)
        throw DimensionMismatch("cannot add kernels of dims " + a.dim.str() +
                                " and " + b.dim.str());
    } else {
      out.checked = false;
    }
    for (const auto& [k, c] : b.terms) out.add_term(k, c);
    return out;
  }
  friend EnvElement operator-(const EnvElement& a, const EnvElement& b) {
    return a + (-b);
  }
  EnvElement operator-() const {
    EnvElement out = *this;
    for (auto& [k, c] : out.terms) c = -c;
    return out;
  }
  friend EnvElement operator*(const ExactCoeff& c, const EnvElement& a) {
    EnvElement out = a;
    for (auto& [k, v] : out.terms) v = c * v;
    std::erase_if(out.terms, [](const auto& kv) { return kv.second.is_zero(); });
    return out;
  }
};

// Normal-ordered product. Axes are independent: for each axis the reorder
// rule is Y^c X^b = sum_k (-1)^k k! C(c,k) C(b,k) X^{b-k} Y^{c-k} S^k.
inline EnvElement env_mul(const EnvElement& k1, const EnvElement& k2) {
  if (k1.n != k2.n) throw RankMismatch("enveloping rank mismatch");
  const std::size_t n = k1.n;
  EnvElement out(n);
  out.checked = k1.checked && k2.checked;
  out.dim = k1.dim * k2.dim;
  for (const auto& [ka, ca] : k1.terms)
    for (const auto& [kb, cb] : k2.terms) {
      // States: (extra S power, per-axis contraction count coefficient).
      struct State {
        int s;
        Rat coeff;
        std::vector<int> k;
      };
      std::vector<State> states{{0, Rat(1), std::vector<int>(n, 0)}};
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<State> next;
        int cmax = std::min(ka.C[j], kb.B[j]);
        for (const State& st : states)
          for (int k = 0; k <= cmax; ++k) {
            Rat f = factorial(k) * binomial(ka.C[j], k) * binomial(kb.B[j], k);
            if (k % 2) f = -f;
            State ns = st;
            ns.s += k;
            ns.coeff = st.coeff * f;
            ns.k[j] = k;
            next.push_back(std::move(ns));
          }
        states = std::move(next);
      }
      ExactCoeff prod = ca * cb;
      for (const State& st : states) {
        EnvKey key;
        key.a = ka.a + kb.a + st.s;
        key.B.resize(n);
        key.C.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
          key.B[j] = ka.B[j] + kb.B[j] - st.k[j];
          key.C[j] = ka.C[j] + kb.C[j] - st.k[j];
        }
        out.add_term(key, ExactCoeff(st.coeff) * prod);
      }
    }
  return out;
}

inline EnvElement env_commutator(const EnvElement& k1, const EnvElement& k2) {
  return env_mul(k1, k2) - env_mul(k2, k1);
}

// p-mechanical bracket: commutator followed by the antiderivative, i.e.
// ub{k1,k2} = -4 pi^2 S^{-1}[k1,k2]. The sign is pinned by the exact
// compatibility rep_classical(ub{k1,k2}) = {rep k1, rep k2}; see the tests.
// Commutators always land in the ideal (S), so the division must succeed.
inline EnvElement env_pbracket(const EnvElement& k1, const EnvElement& k2) {
  EnvElement comm = env_commutator(k1, k2);
  EnvElement out(comm.n);
  out.checked = k1.checked && k2.checked;
  out.dim = k1.dim * k2.dim * dim_antider;
  const ExactCoeff minus_4pi2 = -ExactCoeff::make(GaussRat(Rat(1)), 2);
  for (const auto& [k, c] : comm.terms) {
    if (k.a < 1)
      throw InternalError("commutator not divisible by S: ordering bug");
    EnvKey key = k;
    key.a -= 1;
    out.add_term(key, minus_4pi2 * c);
  }
  return out;
}

// Classical representation: S -> 0, X_j -> -2 pi i q_j, Y_j -> -2 pi i p_j.
inline PolySymbol rep_classical(const EnvElement& k) {
  PolySymbol out(k.n);
  out.checked = k.checked;
  out.dim = k.dim;
  for (const auto& [key, c] : k.terms) {
    if (key.a > 0) continue;
    int deg = 0;
    std::vector<int> pkey(2 * k.n);
    for (std::size_t j = 0; j < k.n; ++j) {
      pkey[j] = key.B[j];
      pkey[k.n + j] = key.C[j];
      deg += key.B[j] + key.C[j];
    }
    out.add_term(std::move(pkey), c * ExactCoeff::minus_2pii_pow(deg));
  }
  return out;
}

namespace detail {

// Fully symmetrized generator word of q^B p^C in the PBW basis. Axes are
// independent and per axis
//   sym(X^b Y^c) = sum_k C(b,k) C(c,k) k! (-1/2)^k S^k X^{b-k} Y^{c-k}.
inline std::vector<std::pair<EnvKey, Rat>> weyl_sym_word(
    std::size_t n, const std::vector<int>& pkey) {
  std::vector<std::pair<EnvKey, Rat>> states;
  EnvKey base{0, std::vector<int>(n, 0), std::vector<int>(n, 0)};
  states.emplace_back(base, Rat(1));
  for (std::size_t j = 0; j < n; ++j) {
    int b = pkey[j], cc = pkey[n + j];
    std::vector<std::pair<EnvKey, Rat>> next;
    for (const auto& [key, coeff] : states)
      for (int k = 0; k <= std::min(b, cc); ++k) {
        Rat f = binomial(b, k) * binomial(cc, k) * factorial(k) *
                Rat(1, 2).pow(k);
        if (k % 2) f = -f;
        EnvKey nk = key;
        nk.a += k;
        nk.B[j] = b - k;
        nk.C[j] = cc - k;
        next.emplace_back(std::move(nk), coeff * f);
      }
    states = std::move(next);
  }
  return states;
}

}  // namespace detail

// Weyl p-mechanisation: q^B p^C -> (-1/(2 pi i))^{|B|+|C|} times the fully
// symmetrized generator word.
inline EnvElement mechanise(const PolySymbol& c) {
  EnvElement out(c.n);
  out.checked = c.checked;
  out.dim = c.dim;
  for (const auto& [pkey, gamma] : c.terms) {
    int deg = 0;
    for (int e : pkey) deg += e;
    ExactCoeff scale = gamma * ExactCoeff::inv_2pii_neg_pow(deg);
    for (const auto& [key, coeff] : detail::weyl_sym_word(c.n, pkey))
      out.add_term(key, scale * ExactCoeff(coeff));
  }
  return out;
}

// n = 1 helper: after evaluating the centre at S = -2 pi i h, rewrite the
// element as sum w_{b,c} sym(X^b Y^c). Weyl-ordered coefficients feed the
// sampled-symbol path of the quantisation pipeline.
inline std::map<std::pair<int, int>, std::complex<double>>
env_weyl_coefficients(const EnvElement& k, double h) {
  if (k.n != 1) throw RankMismatch("weyl coefficients implemented for n = 1");
  const std::complex<double> sigma(0.0, -2.0 * M_PI * h);
  std::map<std::pair<int, int>, std::complex<double>> pbw;
  for (const auto& [key, c] : k.terms) {
    std::complex<double> v = c.to_complex();
    for (int i = 0; i < key.a; ++i) v *= sigma;
    pbw[{key.B[0], key.C[0]}] += v;
  }
  // Eliminate from the top: sym(X^b Y^c) has leading PBW term X^b Y^c.
  std::vector<std::pair<int, int>> keys;
  for (const auto& [key, v] : pbw) keys.push_back(key);
  std::sort(keys.begin(), keys.end(), [](auto l, auto r) {
    return l.first + l.second > r.first + r.second;
  });
  std::map<std::pair<int, int>, std::complex<double>> weyl;
  for (auto [b, c] : keys) {
    auto it = pbw.find({b, c});
    if (it == pbw.end()) continue;
    std::complex<double> w = it->second;
    pbw.erase(it);
    if (w == std::complex<double>(0.0, 0.0)) continue;
    weyl[{b, c}] += w;
    for (int kk = 1; kk <= std::min(b, c); ++kk) {
      double f = binomial(b, kk).to_double() * binomial(c, kk).to_double() *
                 factorial(kk).to_double();
      std::complex<double> term = w * f * std::pow(-sigma / 2.0, kk);
      pbw[{b - kk, c - kk}] -= term;
    }
  }
  return weyl;
}

namespace detail {

// Continued-fraction reconstruction; requires the double to be exactly a
// small rational (symplectic test maps are), otherwise reports failure.
inline bool rat_from_double(double v, Rat& out, std::int64_t max_den = 1 << 20) {
  double x = v;
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int it = 0; it < 64; ++it) {
    double fl = std::floor(x);
    std::int64_t a = static_cast<std::int64_t>(fl);
    std::int64_t p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den || q2 < 0) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    if (double(p1) / double(q1) == v) {
      out = Rat(p1, q1);
      return out.to_double() == v;
    }
    double frac = x - fl;
    if (frac == 0.0) break;
    x = 1.0 / frac;
  }
  return false;
}

}  // namespace detail

// Pullback along the automorphism (s,x,y) -> (s, A(x,y)): generators map as
// X_j -> sum_i a_ij X_i + c_ij Y_i, Y_j -> sum_i b_ij X_i + d_ij Y_i, S fixed.
// Exact, so map entries must be rationals (all the lattice-preserving
// generators are); the grid pullback covers irrational maps.
inline EnvElement pullback_env(const SympMap& A, const EnvElement& k) {
  if (!is_symplectic(A)) throw NotSymplectic("map does not preserve omega");
  if (A.n != k.n) throw RankMismatch("pullback rank mismatch");
  const std::size_t n = k.n;
  auto lift = [&](const std::vector<double>& m, std::size_t i,
                  std::size_t j) {
    Rat r;
    if (!detail::rat_from_double(m[i * n + j], r))
      throw InternalError("pullback_env requires rational map entries");
    return r;
  };
  std::vector<EnvElement> imgX(n, EnvElement::zero(n)),
      imgY(n, EnvElement::zero(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      imgX[j] = imgX[j] + ExactCoeff(lift(A.a, i, j)) * EnvElement::generator_X(i, n) +
                ExactCoeff(lift(A.c, i, j)) * EnvElement::generator_Y(i, n);
      imgY[j] = imgY[j] + ExactCoeff(lift(A.b, i, j)) * EnvElement::generator_X(i, n) +
                ExactCoeff(lift(A.d, i, j)) * EnvElement::generator_Y(i, n);
    }
    imgX[j].checked = false;
    imgY[j].checked = false;
  }
  EnvElement out(n);
  out.checked = k.checked;
  out.dim = k.dim;
  out.n = n;
  for (const auto& [key, c] : k.terms) {
    EnvElement term = EnvElement::one(n);
    term.checked = false;
    EnvKey skey{key.a, std::vector<int>(n, 0), std::vector<int>(n, 0)};
    EnvElement spart(n);
    spart.add_term(skey, ExactCoeff(Rat(1)));
    term = env_mul(term, spart);
    for (std::size_t j = 0; j < n; ++j)
      for (int e = 0; e < key.B[j]; ++e) term = env_mul(term, imgX[j]);
    for (std::size_t j = 0; j < n; ++j)
      for (int e = 0; e < key.C[j]; ++e) term = env_mul(term, imgY[j]);
    for (const auto& [tk, tc] : term.terms) out.add_term(tk, c * tc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pretty printer in delta notation. A PBW monomial corresponds to the
// distribution (-1)^{a+|B|+|C|} delta^(a)(s) delta^(B)(x) delta^(C)(y);
// the sign is folded into the printed coefficient.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string superscript(int v) {
  static const char* digits[10] = {"⁰", "¹", "²", "³",
                                   "⁴", "⁵", "⁶", "⁷",
                                   "⁸", "⁹"};
  std::string out;
  for (char ch : std::to_string(v)) out += digits[ch - '0'];
  return out;
}

inline std::string delta_factor(const std::string& var, int order) {
  if (order == 0) return "δ(" + var + ")";
  return "δ⁽" + superscript(order) + "⁾(" + var + ")";
}

// Render a coefficient as sign + body, in the 2^e-folded forms
// "4π²", "(1/8π²)", "(1/2πi)".
inline bool render_env_coeff(const ExactCoeff& c, bool& neg, std::string& body) {
  if (c.is_zero()) return false;
  if (c.terms.size() != 1) {
    std::complex<double> v = c.to_complex();
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%.6g%+.6gi)", v.real(), v.imag());
    neg = false;
    body = buf;
    return true;
  }
  auto& [e, g] = *c.terms.begin();
  bool realpart = g.im.is_zero();
  bool imagpart = g.re.is_zero();
  if (!realpart && !imagpart) {
    std::complex<double> v = c.to_complex();
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%.6g%+.6gi)", v.real(), v.imag());
    neg = false;
    body = buf;
    return true;
  }
  Rat r = realpart ? g.re : g.im;
  // Value r (2pi)^e, or r i (2pi)^e = (-r)/i (2pi)^e in the imaginary case.
  neg = realpart ? (r.num < 0) : (r.num > 0);
  Rat a = r.num < 0 ? -r : r;
  std::string istr = imagpart ? "i" : "";
  if (e >= 0) {
    Rat m = a * Rat(2).pow(e);
    std::string pi = e > 0 ? ("π" + (e > 1 ? superscript(e) : "")) : "";
    std::string ms = m == Rat(1) && e > 0 ? "" : m.str();
    if (m.den != 1) ms = "(" + ms + ")";
    body = ms + pi + istr;
    if (body.empty()) body = "1";
    return true;
  }
  int k = -e;
  __int128 d128 = __int128(a.den);
  for (int i = 0; i < k; ++i) d128 *= 2;
  std::string pi = "π" + (k > 1 ? superscript(k) : "");
  body = "(" + std::to_string(a.num < 0 ? -a.num : a.num) + "/" +
         std::to_string(detail::narrow64(d128)) + pi + istr + ")";
  return true;
}

}  // namespace detail

inline std::string env_to_string(const EnvElement& k) {
  if (k.is_zero()) return "0";
  std::vector<std::pair<EnvKey, ExactCoeff>> items(k.terms.begin(),
                                                   k.terms.end());
  std::sort(items.begin(), items.end(), [](const auto& l, const auto& r) {
    int dl = l.first.degree(), dr = r.first.degree();
    if (dl != dr) return dl < dr;
    if (l.first.a != r.first.a) return l.first.a < r.first.a;
    if (l.first.C != r.first.C) return l.first.C < r.first.C;
    return l.first.B < r.first.B;
  });
  std::string out;
  for (const auto& [key, c] : items) {
    int order = key.a;
    for (int e : key.B) order += e;
    for (int e : key.C) order += e;
    ExactCoeff folded = (order % 2) ? (-c) : c;
    bool neg = false;
    std::string body;
    if (!detail::render_env_coeff(folded, neg, body)) continue;
    std::string deltas = detail::delta_factor("s", key.a);
    for (std::size_t j = 0; j < k.n; ++j)
      deltas += detail::delta_factor(
          k.n == 1 ? "x" : "x" + std::to_string(j + 1), key.B[j]);
    for (std::size_t j = 0; j < k.n; ++j)
      deltas += detail::delta_factor(
          k.n == 1 ? "y" : "y" + std::to_string(j + 1), key.C[j]);
    std::string term = (body == "1" ? deltas : body + " " + deltas);
    if (out.empty())
      out = (neg ? "-" : "") + term;
    else
      out += (neg ? " - " : " + ") + term;
  }
  return out;
}

}  // namespace pmech
