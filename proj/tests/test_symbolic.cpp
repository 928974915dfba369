#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "pmech/env.hpp"
#include "pmech/poly.hpp"

using namespace pmech;

namespace {

const EnvElement X = EnvElement::generator_X();
const EnvElement Y = EnvElement::generator_Y();
const EnvElement S = EnvElement::generator_S();
const EnvElement One = EnvElement::one();

std::mt19937 rng(12345);

EnvElement monomial(int a, int b, int c, Rat coeff = Rat(1)) {
  EnvElement out(1);
  out.add_term(EnvKey{a, {b}, {c}}, ExactCoeff(coeff));
  return out;
}

EnvElement random_element(int max_deg = 3, bool allow_s = true) {
  EnvElement out(1);
  std::uniform_int_distribution<int> nterms(1, 4), num(-4, 4), den(1, 3);
  for (int t = nterms(rng); t > 0; --t) {
    std::uniform_int_distribution<int> d(0, max_deg);
    int deg = d(rng);
    std::uniform_int_distribution<int> asplit(0, allow_s ? deg : 0);
    int a = asplit(rng);
    std::uniform_int_distribution<int> bsplit(0, deg - a);
    int b = bsplit(rng);
    int c = deg - a - b;
    int nu = num(rng);
    if (nu == 0) nu = 1;
    out.add_term(EnvKey{a, {b}, {c}}, ExactCoeff(Rat(nu, den(rng))));
  }
  return out;
}

PolySymbol random_poly(int max_deg = 3) {
  PolySymbol out(1);
  std::uniform_int_distribution<int> nterms(1, 4), num(-4, 4), den(1, 3);
  for (int t = nterms(rng); t > 0; --t) {
    std::uniform_int_distribution<int> d(0, max_deg);
    int deg = d(rng);
    std::uniform_int_distribution<int> bsplit(0, deg);
    int b = bsplit(rng);
    int nu = num(rng);
    if (nu == 0) nu = 1;
    out.add_term({b, deg - b}, ExactCoeff(Rat(nu, den(rng))));
  }
  return out;
}

}  // namespace

TEST_CASE("normal-ordered product against the word-reduction oracle") {
  REQUIRE(env_commutator(X, Y) == S);
  EnvElement r = random_element();
  REQUIRE(env_mul(One, r) == env_mul(r, One));
  REQUIRE(env_mul(env_mul(X, Y), Y) == env_mul(X, env_mul(Y, Y)));

  // Every monomial pair of degree <= 3 per factor.
  for (int a1 = 0; a1 <= 1; ++a1)
    for (int b1 = 0; b1 <= 3; ++b1)
      for (int c1 = 0; c1 + b1 + a1 <= 3; ++c1)
        for (int a2 = 0; a2 <= 1; ++a2)
          for (int b2 = 0; b2 <= 3; ++b2)
            for (int c2 = 0; c2 + b2 + a2 <= 3; ++c2) {
              EnvElement got =
                  env_mul(monomial(a1, b1, c1), monomial(a2, b2, c2));
              EnvElement want =
                  oracles::monomial_product(a1, b1, c1, a2, b2, c2);
              REQUIRE(got == want);
            }
}

TEST_CASE("product is associative on every monomial triple up to degree 4") {
  std::vector<std::array<int, 3>> monos;
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b)
      for (int c = 0; a + b + c <= 4; ++c) monos.push_back({a, b, c});
  int checked = 0;
  for (const auto& m1 : monos)
    for (const auto& m2 : monos)
      for (const auto& m3 : monos) {
        int total = m1[0] + m1[1] + m1[2] + m2[0] + m2[1] + m2[2] + m3[0] +
                    m3[1] + m3[2];
        if (total > 4) continue;
        EnvElement e1 = monomial(m1[0], m1[1], m1[2]);
        EnvElement e2 = monomial(m2[0], m2[1], m2[2]);
        EnvElement e3 = monomial(m3[0], m3[1], m3[2]);
        REQUIRE(env_mul(env_mul(e1, e2), e3) == env_mul(e1, env_mul(e2, e3)));
        ++checked;
      }
  REQUIRE(checked > 500);

  SECTION("and on random higher-degree elements") {
    for (int i = 0; i < 10; ++i) {
      EnvElement e1 = random_element(), e2 = random_element(),
                 e3 = random_element();
      REQUIRE(env_mul(env_mul(e1, e2), e3) == env_mul(e1, env_mul(e2, e3)));
    }
  }
}

TEST_CASE("commutators") {
  REQUIRE(env_commutator(X, X).is_zero());
  // [X^2, Y] = 2 S X by hand reduction.
  EnvElement want(1);
  want.add_term(EnvKey{1, {1}, {0}}, ExactCoeff(Rat(2)));
  REQUIRE(env_commutator(env_mul(X, X), Y) == want);
  for (int i = 0; i < 15; ++i) {
    EnvElement k1 = random_element(), k2 = random_element();
    REQUIRE(env_commutator(k1, k2) == -env_commutator(k2, k1));
    // Commutators lie in the ideal generated by S.
    for (const auto& [key, c] : env_commutator(k1, k2).terms)
      REQUIRE(key.a >= 1);
  }
  SECTION("n = 2 axes commute crosswise") {
    EnvElement x1 = EnvElement::generator_X(0, 2),
               y2 = EnvElement::generator_Y(1, 2);
    REQUIRE(env_commutator(x1, y2).is_zero());
    REQUIRE(env_commutator(x1, EnvElement::generator_Y(0, 2)) ==
            EnvElement::generator_S(2));
  }
}

TEST_CASE("p-mechanical bracket") {
  // The sign of the antiderivative multiplier is pinned by the classical
  // compatibility identity below, which forces ub{X,Y} = -4 pi^2.
  EnvElement b = env_pbracket(X, Y);
  REQUIRE(b == -ExactCoeff::make(GaussRat(Rat(1)), 2) * One);
  REQUIRE(env_to_string(b) == "-4π² δ(s)δ(x)δ(y)");

  for (int i = 0; i < 10; ++i) {
    EnvElement k = random_element();
    REQUIRE(env_pbracket(k, k).is_zero());
  }

  SECTION("Jacobi identity, exactly") {
    for (int i = 0; i < 8; ++i) {
      EnvElement k1 = random_element(), k2 = random_element(),
                 k3 = random_element();
      EnvElement jac = env_pbracket(k1, env_pbracket(k2, k3)) +
                       env_pbracket(k2, env_pbracket(k3, k1)) +
                       env_pbracket(k3, env_pbracket(k1, k2));
      REQUIRE(jac.is_zero());
    }
  }
  SECTION("Leibniz identity, exactly") {
    for (int i = 0; i < 8; ++i) {
      EnvElement k1 = random_element(2), k2 = random_element(2),
                 k3 = random_element(2);
      EnvElement lhs = env_pbracket(k1, env_mul(k2, k3));
      EnvElement rhs = env_mul(env_pbracket(k1, k2), k3) +
                       env_mul(k2, env_pbracket(k1, k3));
      REQUIRE(lhs == rhs);
    }
  }
}

TEST_CASE("classical representation and mechanisation invert each other") {
  PolySymbol q = PolySymbol::coordinate_q(), p = PolySymbol::coordinate_p();
  REQUIRE(rep_classical(mechanise(q)) == q);
  REQUIRE(rep_classical(mechanise(p)) == p);
  REQUIRE(rep_classical(S).is_zero());
  REQUIRE(rep_classical(env_mul(S, X)).is_zero());

  PolySymbol H = ExactCoeff(Rat(1, 2)) *
                 (ExactCoeff(Rat(3)) * (q * q) + ExactCoeff(Rat(1, 2)) * (p * p));
  REQUIRE(rep_classical(mechanise(H)) == H);

  for (int i = 0; i < 20; ++i) {
    PolySymbol f = random_poly(5);
    REQUIRE(rep_classical(mechanise(f)) == f);
  }
}

TEST_CASE("mechanisation matches the enumerated Weyl symmetrization") {
  for (int b = 0; b <= 3; ++b)
    for (int c = 0; c <= 3; ++c) {
      PolySymbol mono(1);
      mono.add_term({b, c}, ExactCoeff(Rat(1)));
      EnvElement got = mechanise(mono);
      EnvElement want = ExactCoeff::inv_2pii_neg_pow(b + c) *
                        oracles::symmetrized_word(b, c);
      REQUIRE(got == want);
    }
}

TEST_CASE("delta-notation printer golden strings") {
  PolySymbol q = PolySymbol::coordinate_q(), p = PolySymbol::coordinate_p();
  REQUIRE(env_to_string(mechanise(q)) ==
          "(1/2πi) δ(s)δ⁽¹⁾(x)δ(y)");
  REQUIRE(env_to_string(mechanise(p)) ==
          "(1/2πi) δ(s)δ(x)δ⁽¹⁾(y)");

  PolySymbol osc = ExactCoeff(Rat(1, 2)) * (q * q + p * p);
  REQUIRE(env_to_string(mechanise(osc)) ==
          "-(1/8π²) δ(s)δ⁽²⁾(x)δ(y)"
          " - "
          "(1/8π²) δ(s)δ(x)δ⁽²⁾(y)");

  REQUIRE(env_to_string(EnvElement::zero()) == "0");
  REQUIRE(env_to_string(One) == "δ(s)δ(x)δ(y)");
}

TEST_CASE("poisson bracket on polynomials") {
  PolySymbol q = PolySymbol::coordinate_q(), p = PolySymbol::coordinate_p();
  REQUIRE(poisson_poly(q, p) == PolySymbol::constant(ExactCoeff(Rat(1))));

  PolySymbol H = ExactCoeff(Rat(1, 2)) *
                 (ExactCoeff(Rat(2)) * (q * q) + ExactCoeff(Rat(3)) * (p * p));
  // {q, H} = c2 p with c2 = 3, {p, H} = -c1 q with c1 = 2.
  REQUIRE(poisson_poly(q, H) == ExactCoeff(Rat(3)) * p);
  REQUIRE(poisson_poly(p, H) == ExactCoeff(Rat(-2)) * q);

  for (int i = 0; i < 10; ++i) {
    PolySymbol f = random_poly(), g = random_poly();
    REQUIRE(poisson_poly(f, f).is_zero());
    REQUIRE(poisson_poly(f, g) == -poisson_poly(g, f));
    // Numeric cross-check at a random point.
    std::uniform_real_distribution<double> pt(-1.0, 1.0);
    double qq = pt(rng), pp = pt(rng);
    auto direct = poisson_poly(f, g).evaluate(qq, pp);
    auto fd = oracles::poisson_fd(f, g, qq, pp);
    REQUIRE(std::abs(direct - fd) < 1e-5);
  }
}

TEST_CASE("classical compatibility: rep of ub equals Poisson of reps") {
  // Exhaustive over monomial pairs with no S factor and degree <= 4.
  for (int b1 = 0; b1 <= 4; ++b1)
    for (int c1 = 0; b1 + c1 <= 4; ++c1)
      for (int b2 = 0; b2 <= 4; ++b2)
        for (int c2 = 0; b2 + c2 <= 4; ++c2) {
          EnvElement k1 = monomial(0, b1, c1), k2 = monomial(0, b2, c2);
          PolySymbol lhs = rep_classical(env_pbracket(k1, k2));
          PolySymbol rhs =
              poisson_poly(rep_classical(k1), rep_classical(k2));
          REQUIRE(lhs == rhs);
        }
}

TEST_CASE("shift generators act as scaled derivatives on symbols") {
  // rep(ub{X,k}) = kappa_p d(rep k)/dp with kappa_p = -2 pi i, and
  // rep(ub{Y,k}) = kappa_q d(rep k)/dq with kappa_q = +2 pi i. Poisson
  // antisymmetry forces the opposite signs; the magnitudes agree.
  const ExactCoeff kappa_p = ExactCoeff::make(GaussRat(Rat(0), Rat(-1)), 1);
  const ExactCoeff kappa_q = ExactCoeff::make(GaussRat(Rat(0), Rat(1)), 1);
  REQUIRE(kappa_p == -kappa_q);
  for (int i = 0; i < 15; ++i) {
    EnvElement k = random_element(3, false);
    PolySymbol img = rep_classical(k);
    REQUIRE(rep_classical(env_pbracket(X, k)) ==
            kappa_p * img.derivative_p(0));
    REQUIRE(rep_classical(env_pbracket(Y, k)) ==
            kappa_q * img.derivative_q(0));
  }
}

TEST_CASE("weyl-ordered coefficients at a fixed h slice") {
  PolySymbol q = PolySymbol::coordinate_q(), p = PolySymbol::coordinate_p();
  const double h = 0.37;

  auto wq = env_weyl_coefficients(mechanise(q), h);
  REQUIRE(wq.size() == 1);
  // -1/(2 pi i) = i/(2 pi)
  REQUIRE(std::abs(wq[{1, 0}] - std::complex<double>(0.0, 1.0 / (2 * M_PI))) <
          1e-15);

  // mechanise(q p) is exactly a multiple of sym(XY): the S-part cancels.
  auto wqp = env_weyl_coefficients(mechanise(q * p), h);
  for (const auto& [key, v] : wqp) {
    if (key == std::make_pair(1, 1))
      REQUIRE(std::abs(v - std::complex<double>(-1.0 / (4 * M_PI * M_PI), 0)) <
              1e-15);
    else
      REQUIRE(std::abs(v) < 1e-15);
  }

  // Round trip: rebuild the PBW element from sym words and compare.
  for (int i = 0; i < 5; ++i) {
    EnvElement k = random_element(3);
    auto w = env_weyl_coefficients(k, h);
    // Reassemble sum w_{b,c} sym(X^b Y^c) with S evaluated numerically.
    std::map<std::pair<int, int>, std::complex<double>> pbw;
    const std::complex<double> sigma(0.0, -2 * M_PI * h);
    for (const auto& [key, v] : w)
      for (int kk = 0; kk <= std::min(key.first, key.second); ++kk) {
        double f = binomial(key.first, kk).to_double() *
                   binomial(key.second, kk).to_double() *
                   factorial(kk).to_double();
        pbw[{key.first - kk, key.second - kk}] +=
            v * f * std::pow(-sigma / 2.0, kk);
      }
    std::map<std::pair<int, int>, std::complex<double>> direct;
    for (const auto& [key, c] : k.terms) {
      std::complex<double> v = c.to_complex();
      for (int j = 0; j < key.a; ++j) v *= sigma;
      direct[{key.B[0], key.C[0]}] += v;
    }
    for (const auto& [key, v] : direct) {
      auto it = pbw.find(key);
      std::complex<double> got = it == pbw.end() ? 0.0 : it->second;
      REQUIRE(std::abs(got - v) < 1e-12 * (1.0 + std::abs(v)));
    }
  }
}

TEST_CASE("pullback along symplectic maps is an algebra homomorphism") {
  SympMap J = SympMap::rotation_J();

  EnvElement k = random_element();
  REQUIRE(pullback_env(SympMap::identity(), k) == k);

  // J sends X to -Y and Y to X; commutation survives.
  REQUIRE(pullback_env(J, X) == -Y);
  REQUIRE(pullback_env(J, Y) == X);
  REQUIRE(env_commutator(pullback_env(J, X), pullback_env(J, Y)) == S);

  std::vector<SympMap> maps{J, SympMap::shear_q(Rat(3, 2).to_double()),
                            SympMap::shear_p(-1.0), SympMap::scaling(2.0)};
  for (const SympMap& A : maps) {
    REQUIRE(env_commutator(pullback_env(A, X), pullback_env(A, Y)) == S);
    for (int i = 0; i < 5; ++i) {
      EnvElement k1 = random_element(), k2 = random_element();
      REQUIRE(pullback_env(A, env_mul(k1, k2)) ==
              env_mul(pullback_env(A, k1), pullback_env(A, k2)));
    }
  }
  REQUIRE_THROWS_AS(pullback_env(SympMap(2, 0, 0, 2), k), NotSymplectic);
}

TEST_CASE("dimension tags flow through the symbolic algebra") {
  REQUIRE(X.dim == dim_q);
  REQUIRE(Y.dim == dim_p);
  REQUIRE(S.dim == dim_h);
  REQUIRE_THROWS_AS(X + Y, DimensionMismatch);
  REQUIRE(env_mul(X, Y).dim == dim_q * dim_p);
  REQUIRE(env_pbracket(X, Y).dim.dimensionless());

  PolySymbol q = PolySymbol::coordinate_q().with_dim(dim_q);
  PolySymbol p = PolySymbol::coordinate_p().with_dim(dim_p);
  REQUIRE_THROWS_AS(q + p, DimensionMismatch);
  PolySymbol H = (q * q).with_dim(dim_energy) + (p * p).with_dim(dim_energy);
  REQUIRE(mechanise(H).dim == dim_energy);
  REQUIRE(rep_classical(mechanise(H)).dim == dim_energy);
  REQUIRE(poisson_poly(q, p).dim == (dim_q * dim_p * dim_antider));
}
