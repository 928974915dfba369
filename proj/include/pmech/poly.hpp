#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "pmech/coeff.hpp"
#include "pmech/errors.hpp"
#include "pmech/units.hpp"

namespace pmech {

// Polynomial observable on the classical orbit, exact coefficients.
// Key layout: exponents [q_1..q_n, p_1..p_n]. The dim tag is the dimension of
// the polynomial's VALUE; it is enforced only when `checked` is set, so the
// numeric pipelines can run raw while unit tests exercise Convention rules.
struct PolySymbol {
  std::size_t n = 1;
  std::map<std::vector<int>, ExactCoeff> terms;
  bool checked = false;
  Dim dim{};

  explicit PolySymbol(std::size_t n_ = 1) : n(n_) {}

  static PolySymbol constant(ExactCoeff c, std::size_t n = 1) {
    PolySymbol out(n);
    if (!c.is_zero()) out.terms[std::vector<int>(2 * n, 0)] = c;
    return out;
  }
  static PolySymbol coordinate_q(std::size_t j = 0, std::size_t n = 1) {
    PolySymbol out(n);
    std::vector<int> key(2 * n, 0);
    key[j] = 1;
    out.terms[key] = ExactCoeff(Rat(1));
    return out;
  }
  static PolySymbol coordinate_p(std::size_t j = 0, std::size_t n = 1) {
    PolySymbol out(n);
    std::vector<int> key(2 * n, 0);
    key[n + j] = 1;
    out.terms[key] = ExactCoeff(Rat(1));
    return out;
  }

  PolySymbol with_dim(Dim d) const {
    PolySymbol out = *this;
    out.checked = true;
    out.dim = d;
    return out;
  }

  void add_term(std::vector<int> key, const ExactCoeff& c) {
    if (key.size() != 2 * n) throw RankMismatch("polynomial key length");
    if (c.is_zero()) return;
    auto it = terms.find(key);
    if (it == terms.end()) {
      terms[std::move(key)] = c;
    } else {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  bool is_zero() const { return terms.empty(); }
  int degree() const {
    int deg = 0;
    for (const auto& [k, c] : terms) {
      int d = 0;
      for (int e : k) d += e;
      deg = std::max(deg, d);
    }
    return deg;
  }

  friend PolySymbol operator+(const PolySymbol& a, const PolySymbol& b) {
    if (a.n != b.n) throw RankMismatch("polynomial rank mismatch");
    PolySymbol out = a;
    if (a.checked && b.checked) {
      if (a.dim != b.dim)
        throw DimensionMismatch("cannot add observables of dims " +
                                a.dim.str() + " and " + b.dim.str());
    } else {
      out.checked = false;
    }
    for (const auto& [k, c] : b.terms) out.add_term(k, c);
    return out;
  }
  friend PolySymbol operator-(const PolySymbol& a, const PolySymbol& b) {
    return a + (-b);
  }
  PolySymbol operator-() const {
    PolySymbol out = *this;
    for (auto& [k, c] : out.terms) c = -c;
    return out;
  }
  friend PolySymbol operator*(const PolySymbol& a, const PolySymbol& b) {
    if (a.n != b.n) throw RankMismatch("polynomial rank mismatch");
    PolySymbol out(a.n);
    out.checked = a.checked && b.checked;
    out.dim = a.dim * b.dim;
    for (const auto& [ka, ca] : a.terms)
      for (const auto& [kb, cb] : b.terms) {
        std::vector<int> key(2 * a.n);
        for (std::size_t i = 0; i < key.size(); ++i) key[i] = ka[i] + kb[i];
        out.add_term(std::move(key), ca * cb);
      }
    return out;
  }
  friend PolySymbol operator*(const ExactCoeff& c, const PolySymbol& a) {
    PolySymbol out = a;
    for (auto& [k, v] : out.terms) v = c * v;
    std::erase_if(out.terms, [](const auto& kv) { return kv.second.is_zero(); });
    return out;
  }

  friend bool operator==(const PolySymbol& a, const PolySymbol& b) {
    return a.n == b.n && a.terms == b.terms;
  }

  PolySymbol derivative_q(std::size_t j) const {
    PolySymbol out(n);
    out.checked = checked;
    out.dim = dim / dim_q;
    for (const auto& [k, c] : terms) {
      if (k[j] == 0) continue;
      std::vector<int> key = k;
      key[j] -= 1;
      out.add_term(std::move(key), ExactCoeff(Rat(k[j])) * c);
    }
    return out;
  }
  PolySymbol derivative_p(std::size_t j) const {
    PolySymbol out(n);
    out.checked = checked;
    out.dim = dim / dim_p;
    for (const auto& [k, c] : terms) {
      if (k[n + j] == 0) continue;
      std::vector<int> key = k;
      key[n + j] -= 1;
      out.add_term(std::move(key), ExactCoeff(Rat(k[n + j])) * c);
    }
    return out;
  }

  std::complex<double> evaluate(const std::vector<double>& q,
                                const std::vector<double>& p) const {
    if (q.size() != n || p.size() != n)
      throw RankMismatch("evaluation point rank mismatch");
    std::complex<double> acc{0.0, 0.0};
    for (const auto& [k, c] : terms) {
      double mono = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        for (int e = 0; e < k[j]; ++e) mono *= q[j];
        for (int e = 0; e < k[n + j]; ++e) mono *= p[j];
      }
      acc += c.to_complex() * mono;
    }
    return acc;
  }
  std::complex<double> evaluate(double q, double p) const {
    return evaluate(std::vector<double>{q}, std::vector<double>{p});
  }
};

// {f,g} = sum_j (df/dq_j dg/dp_j - df/dp_j dg/dq_j), exact.
inline PolySymbol poisson_poly(const PolySymbol& f, const PolySymbol& g) {
  if (f.n != g.n) throw RankMismatch("polynomial rank mismatch");
  PolySymbol out(f.n);
  for (std::size_t j = 0; j < f.n; ++j) {
    out = out + f.derivative_q(j) * g.derivative_p(j) -
          f.derivative_p(j) * g.derivative_q(j);
  }
  out.checked = f.checked && g.checked;
  out.dim = f.dim * g.dim * dim_antider;
  return out;
}

namespace detail {

inline std::string coeff_plain_str(const ExactCoeff& c);

}  // namespace detail

// ASCII rendering "3/4 q^2 p" used by the CLI echo; exact strings are
// asserted by golden tests, so keep the format deterministic.
inline std::string poly_to_string(const PolySymbol& f) {
  if (f.is_zero()) return "0";
  std::string out;
  for (const auto& [k, c] : f.terms) {
    std::string mono;
    for (std::size_t j = 0; j < f.n; ++j) {
      auto var = [&](const char* base, int e) {
        if (e == 0) return std::string();
        std::string v = base;
        if (f.n > 1) v += std::to_string(j + 1);
        if (e > 1) v += "^" + std::to_string(e);
        return v + " ";
      };
      mono += var("q", k[j]);
      mono += var("p", k[f.n + j]);
    }
    while (!mono.empty() && mono.back() == ' ') mono.pop_back();
    std::string cs = detail::coeff_plain_str(c);
    std::string term;
    bool neg = !cs.empty() && cs[0] == '-';
    std::string body = neg ? cs.substr(1) : cs;
    if (body == "1" && !mono.empty()) body.clear();
    term = body.empty() ? mono : (mono.empty() ? body : body + " " + mono);
    if (out.empty())
      out = (neg ? "-" : "") + term;
    else
      out += (neg ? " - " : " + ") + term;
  }
  return out;
}

namespace detail {

inline std::string rat_str(const Rat& r) { return r.str(); }

inline std::string coeff_plain_str(const ExactCoeff& c) {
  if (c.is_zero()) return "0";
  // Pure rational constants print exactly; anything else numerically.
  if (c.terms.size() == 1) {
    auto& [e, g] = *c.terms.begin();
    if (e == 0 && g.im.is_zero()) return rat_str(g.re);
    if (e == 0 && g.re.is_zero()) return rat_str(g.im) + "i";
  }
  std::complex<double> v = c.to_complex();
  char buf[64];
  if (std::abs(v.imag()) < 1e-15) {
    std::snprintf(buf, sizeof buf, "%.6g", v.real());
    return buf;
  }
  std::snprintf(buf, sizeof buf, "(%.6g%+.6gi)", v.real(), v.imag());
  return buf;
}

}  // namespace detail

}  // namespace pmech
