#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "pmech/dynamics.hpp"
#include "pmech/quantize.hpp"

using namespace pmech;

namespace {

// Polynomially modulated Gaussian, width chosen so both the kernel and its
// symbol stay resolved on the balanced box (sigma_x/dx = sigma_q/dq when
// s ~ 0.25 at N = 64). Band-limited data is what the spectral oracle and
// the quantized flow agree on; an unresolved kernel measures the lattice,
// not the engine.
GridKernel poly_gauss(const Grid& g, double s) {
  GridKernel out(g);
  for (int a = 0; a < g.N; ++a)
    for (int b = 0; b < g.N; ++b) {
      double x = g.x(a), y = g.y(b);
      out.at(a, b) = (cd(1.0, 0.0) + cd(0.8, 0.0) * x - cd(0.4, 0.0) * y + cd(0.0, 0.3) * x * y) *
                     std::exp(-s * (x * x + y * y));
    }
  return out;
}

cd poly_gauss_at(double x, double y, double s) {
  return (cd(1.0, 0.0) + cd(0.8, 0.0) * x - cd(0.4, 0.0) * y + cd(0.0, 0.3) * x * y) *
         std::exp(-s * (x * x + y * y));
}

double sup_diff(const GridKernel& a, const GridKernel& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

// Sup over the half box; the rotated corners of the full box leave the
// fundamental domain and wrap differently in the lattice flow and in the
// spectral oracle.
double sup_interior(const GridKernel& a, const GridKernel& b) {
  const Grid& g = a.grid;
  const double xh = 0.25 * g.N * g.dx(), yh = 0.25 * g.N * g.dy();
  double m = 0;
  for (int i = 0; i < g.N; ++i)
    for (int j = 0; j < g.N; ++j) {
      if (std::abs(g.x(i)) > xh || std::abs(g.y(j)) > yh) continue;
      m = std::max(m, std::abs(a.at(i, j) - b.at(i, j)));
    }
  return m;
}

double lattice_mass(const GridKernel& k) {
  double s = 0;
  for (const cd& z : k.data) s += std::norm(z);
  return s;
}

double coherent_expect(const FockOperator& A, const GridField& v) {
  Eigen::Map<const Eigen::VectorXcd> w(v.data.data(), static_cast<Eigen::Index>(v.data.size()));
  return ((w.adjoint() * A.matrix * w)(0) / w.squaredNorm()).real();
}

}  // namespace

TEST_CASE("exact oscillator flow: identity, period, quarter turn, measure") {
  Grid g = Grid::balanced(64);
  GridKernel f0 = poly_gauss(g, 0.25);
  QuadraticEnergy E(1.0, 1.0);

  SECTION("t = 0 is the identity") {
    REQUIRE(sup_diff(oscillator_exact(f0, 0.0, E), f0) < 1e-12);
  }

  SECTION("full period returns the kernel") {
    REQUIRE(sup_diff(oscillator_exact(f0, E.period(), E), f0) < 1e-6);
  }

  SECTION("isotropic quarter turn is the (x,y) -> (y,-x) substitution") {
    GridKernel want(g);
    for (int a = 0; a < g.N; ++a)
      for (int b = 0; b < g.N; ++b) want.at(a, b) = poly_gauss_at(g.y(b), -g.x(a), 0.25);
    REQUIRE(sup_diff(oscillator_exact(f0, M_PI / 2, E), want) < 1e-10);
  }

  SECTION("anisotropic quarter turn carries the sqrt(c1/c2) stretch") {
    // Interior comparison: the stretched substitution point (2y, -x/2)
    // leaves the box for |y| > L/2 and the periodic oracle wraps it there.
    QuadraticEnergy Ea(4.0, 1.0);  // omega = 2, quarter period at t = pi/4
    GridKernel want(g);
    for (int a = 0; a < g.N; ++a)
      for (int b = 0; b < g.N; ++b)
        want.at(a, b) = poly_gauss_at(2.0 * g.y(b), -0.5 * g.x(a), 0.25);
    REQUIRE(sup_interior(oscillator_exact(f0, M_PI / 4, Ea), want) < 1e-10);
  }

  SECTION("lattice mass is preserved around the circle") {
    const double m0 = lattice_mass(f0);
    QuadraticEnergy Ea(2.0, 0.5);
    for (int k = 1; k <= 8; ++k) {
      double mk = lattice_mass(oscillator_exact(f0, E.period() * k / 8.0, E));
      REQUIRE(std::abs(mk - m0) / m0 < 1e-8);
      double ma = lattice_mass(oscillator_exact(f0, 0.05 * k, Ea));
      REQUIRE(std::abs(ma - m0) / m0 < 1e-8);
    }
  }
}

TEST_CASE("p-dynamic flow of a resolved kernel follows the continuum rotation") {
  Grid g = Grid::balanced(64);
  QuadraticEnergy E(1.0, 1.0);
  GridKernel Ek = E.kernel(g);

  SECTION("one full period at N = 64") {
    GridKernel f0 = poly_gauss(g, 0.25);
    FlowResult<GridKernel> r = evolve_p(f0, Ek, E.period(), 1000, 5);

    REQUIRE(r.times.size() == r.snapshots.size());
    REQUIRE(r.times.size() == r.energy_drift.size());
    REQUIRE(r.times.size() == r.norm_drift.size());
    REQUIRE(r.times.front() == 0.0);
    REQUIRE(r.times.back() == Catch::Approx(E.period()));

    double worst = 0;
    for (std::size_t i = 0; i < r.snapshots.size(); ++i)
      worst = std::max(worst, sup_diff(r.snapshots[i], oscillator_exact(f0, r.times[i], E)));
    REQUIRE(worst < 1e-3);
    REQUIRE(r.norm_drift.back() < 1e-6);
  }

  SECTION("the energy kernel is a fixed point of its own flow") {
    FlowResult<GridKernel> r = evolve_p(Ek, Ek, 1.0, 50, 3);
    REQUIRE(sup_diff(r.snapshots.back(), Ek) < 1e-15);
    REQUIRE(r.energy_drift.back() < 1e-15);
  }

  SECTION("snapshot count is clamped to the step marks") {
    GridKernel f0 = poly_gauss(g, 0.25);
    FlowResult<GridKernel> r1 = evolve_p(f0, Ek, 0.01, 4, 1);
    REQUIRE(r1.snapshots.size() == 2);
    FlowResult<GridKernel> r2 = evolve_p(f0, Ek, 0.01, 4, 100);
    REQUIRE(r2.snapshots.size() == 5);
  }

  SECTION("a step outside the stability region is refused") {
    GridKernel f0 = poly_gauss(g, 0.25);
    REQUIRE_THROWS_AS(evolve_p(f0, Ek, E.period(), 30, 3), StepTooLarge);
  }
}

TEST_CASE("integrator order: halving dt scales the error by sixteen") {
  Grid g = Grid::balanced(64);
  QuadraticEnergy E(1.0, 1.0);
  GridKernel Ek = E.kernel(g);
  GridKernel f0 = poly_gauss(g, 0.25);
  const double T = M_PI / 4;

  GridKernel ref = evolve_p(f0, Ek, T, 640, 2).snapshots.back();
  double err[3];
  int steps[3] = {20, 40, 80};
  for (int i = 0; i < 3; ++i)
    err[i] = sup_diff(evolve_p(f0, Ek, T, steps[i], 2).snapshots.back(), ref);

  REQUIRE(err[0] / err[1] > 12.0);
  REQUIRE(err[0] / err[1] < 20.0);
  REQUIRE(err[1] / err[2] > 12.0);
  REQUIRE(err[1] / err[2] < 20.0);
}

TEST_CASE("anisotropic stretch: short-time exactness and the lattice echo") {
  Grid g = Grid::balanced(64);
  QuadraticEnergy Ea(2.0, 0.5);
  GridKernel Eka = Ea.kernel(g);
  GridKernel f0 = poly_gauss(g, 0.25);

  SECTION("before the stretch reaches the box the flow is spectrally exact") {
    FlowResult<GridKernel> r = evolve_p(f0, Eka, 0.2, 80, 2);
    REQUIRE(sup_diff(r.snapshots.back(), oscillator_exact(f0, 0.2, Ea)) < 1e-6);
  }

  SECTION("mode content wrapped past Nyquist at peak stretch unwinds by half period") {
    // At quarter period the sqrt(c1/c2) = 2 stretch pushes part of the mode
    // content across the Nyquist edge; the quantized flow wraps it exactly
    // while the continuum oracle does not, so the comparison is taken on the
    // interior and the echo is checked once the stretch has closed.
    FlowResult<GridKernel> r = evolve_p(f0, Eka, M_PI, 1260, 3);
    REQUIRE(sup_interior(r.snapshots[1], oscillator_exact(f0, M_PI / 2, Ea)) < 2e-2);
    REQUIRE(sup_diff(r.snapshots[2], oscillator_exact(f0, M_PI, Ea)) < 2e-2);
  }
}

TEST_CASE("Heisenberg picture: trajectory, conserved energy, step guard") {
  QuadraticEnergy E(1.0, 1.0);

  SECTION("coherent expectations trace the classical trajectory") {
    Grid g = Grid::balanced(32);
    FockOperator H = rho_kernel(E.kernel(g));
    FockOperator Fq = rho_kernel(sample_kernel(mechanise(PolySymbol::coordinate_q()), g));
    FockOperator Fp = rho_kernel(sample_kernel(mechanise(PolySymbol::coordinate_p()), g));
    GridField v = coherent_state(g, 0.3, -0.2);

    const double q0 = coherent_expect(Fq, v);
    const double p0 = coherent_expect(Fp, v);
    REQUIRE(std::abs(q0) > 1e-3);  // the probe state is genuinely displaced

    FlowResult<FockOperator> r = evolve_heisenberg(Fq, H, M_PI / 8, 12, 5);
    double worst = 0;
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      double want = q0 * std::cos(r.times[i]) + p0 * std::sin(r.times[i]);
      worst = std::max(worst, std::abs(coherent_expect(r.snapshots[i], v) - want));
    }
    REQUIRE(worst < 1e-3);
  }

  SECTION("the coarse grid has a visible resolution floor") {
    // At N = 16 the vacuum spans barely one grid spacing and the quantized
    // coordinate operators carry an O(exp(-(pi sigma/dq)^2/2)) defect; the
    // trajectory deviation sits at that floor, an order above the N = 32 run.
    const double h = default_h();
    Grid g(16, 2.1 * std::sqrt(h), 2.1 * std::sqrt(h), h);
    FockOperator H = rho_kernel(E.kernel(g));
    FockOperator Fq = rho_kernel(sample_kernel(mechanise(PolySymbol::coordinate_q()), g));
    FockOperator Fp = rho_kernel(sample_kernel(mechanise(PolySymbol::coordinate_p()), g));
    GridField v = coherent_state(g, 0.5, -0.3);
    const double q0 = coherent_expect(Fq, v);
    const double p0 = coherent_expect(Fp, v);

    FlowResult<FockOperator> r = evolve_heisenberg(Fq, H, M_PI / 2, 100, 9);
    double worst = 0;
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      double want = q0 * std::cos(r.times[i]) + p0 * std::sin(r.times[i]);
      worst = std::max(worst, std::abs(coherent_expect(r.snapshots[i], v) - want));
    }
    REQUIRE(worst < 2.5e-3);
  }

  SECTION("the Hamiltonian is a fixed point of its own flow") {
    Grid g = Grid::balanced(16);
    FockOperator H = rho_kernel(E.kernel(g));
    FlowResult<FockOperator> r = evolve_heisenberg(H, H, 0.7, 10, 3);
    REQUIRE((r.snapshots.back().matrix - H.matrix).norm() < 1e-12 * H.matrix.norm());
    REQUIRE(r.energy_drift.back() < 1e-15);
  }

  SECTION("a step outside the stability region is refused") {
    Grid g = Grid::balanced(16);
    FockOperator H = rho_kernel(E.kernel(g));
    REQUIRE_THROWS_AS(evolve_heisenberg(H, H, M_PI, 2, 2), StepTooLarge);
  }
}

TEST_CASE("Hamilton picture: closed flow, conservation, degree guard") {
  PolySymbol q = PolySymbol::coordinate_q(), p = PolySymbol::coordinate_p();
  PolySymbol Hp =
      ExactCoeff(Rat(1, 2)) * (ExactCoeff(Rat(2)) * (q * q) + ExactCoeff(Rat(1, 2)) * (p * p));
  QuadraticEnergy E(2.0, 0.5);

  SECTION("quadratic energy: q flows to cos/sin combination exactly") {
    const double T = 0.9;
    FlowResult<NumPoly> r = evolve_hamilton(q, Hp, T, 64, 3);
    NumPoly want =
        cd(std::cos(T)) * NumPoly::from(q) + cd(0.5 * std::sin(T)) * NumPoly::from(p);
    REQUIRE((r.snapshots.back() + cd(-1.0) * want).norm() < 1e-12);
    REQUIRE(r.energy_drift.back() < 1e-10);
  }

  SECTION("the energy is constant under its own flow") {
    FlowResult<NumPoly> r = evolve_hamilton(Hp, Hp, 0.9, 64, 3);
    REQUIRE((r.snapshots.back() + cd(-1.0) * E.classical()).norm() < 1e-12);
  }

  SECTION("non-quadratic energy takes the RK4 path and stays exact on a terminating chain") {
    // {p, q^3} = -3q^2 and {q^2, q^3} = 0: the flow is p - 3 q^2 t with a
    // constant right-hand side, which RK4 integrates without error.
    const double T = 0.8;
    FlowResult<NumPoly> r = evolve_hamilton(p, q * q * q, T, 40, 3);
    NumPoly want = NumPoly::from(p);
    want.add_term({2, 0}, cd(-3.0 * T));
    REQUIRE((r.snapshots.back() + cd(-1.0) * want).norm() < 1e-12);
  }

  SECTION("degree guard: at the entry and when the bracket chain overflows") {
    PolySymbol deep = (q * q * q * q) * (p * p * p);  // degree 7
    REQUIRE_THROWS_AS(evolve_hamilton(deep, Hp, 0.1, 8, 2), DegreeOverflow);
    // {q^5, p^3} = 15 q^4 p^2 stays admissible; the next bracket in the same
    // RK4 step reaches degree 7 and must be refused.
    REQUIRE_THROWS_AS(evolve_hamilton(q * q * q * q * q, p * p * p, 0.1, 8, 2), DegreeOverflow);
  }

  SECTION("both pictures generate the same 2x2 flow matrix on first-order symbols") {
    PolySymbol Ep =
        ExactCoeff(Rat(1, 2)) * (ExactCoeff(Rat(3)) * (q * q) + ExactCoeff(Rat(1, 3)) * (p * p));
    // p-mechanical bracket projected to the classical representation...
    NumPoly dqm = NumPoly::from(rep_classical(env_pbracket(mechanise(q), mechanise(Ep))));
    NumPoly dpm = NumPoly::from(rep_classical(env_pbracket(mechanise(p), mechanise(Ep))));
    // ...against the Poisson bracket.
    NumPoly dqc = poisson_num(NumPoly::from(q), NumPoly::from(Ep));
    NumPoly dpc = poisson_num(NumPoly::from(p), NumPoly::from(Ep));
    REQUIRE((dqm + cd(-1.0) * dqc).norm() < 1e-15);
    REQUIRE((dpm + cd(-1.0) * dpc).norm() < 1e-15);

    // Exponentiate each generator over T and compare the linear maps through
    // the public flow: rows of M are the evolved first-order symbols.
    const double T = 1.3;
    FlowResult<NumPoly> rq = evolve_hamilton(q, Ep, T, 32, 2);
    FlowResult<NumPoly> rp = evolve_hamilton(p, Ep, T, 32, 2);
    const double w = 1.0, rr = 1.0 / 3.0;  // omega = sqrt(3 * 1/3), r = sqrt((1/3)/3)
    REQUIRE(std::abs(rq.snapshots.back().coefficient({1, 0}) - std::cos(w * T)) < 1e-6);
    REQUIRE(std::abs(rq.snapshots.back().coefficient({0, 1}) - rr * std::sin(w * T)) < 1e-6);
    REQUIRE(std::abs(rp.snapshots.back().coefficient({1, 0}) + std::sin(w * T) / rr) < 1e-6);
    REQUIRE(std::abs(rp.snapshots.back().coefficient({0, 1}) - std::cos(w * T)) < 1e-6);
  }
}

TEST_CASE("cross-picture consistency report") {
  QuadraticEnergy E(1.0, 1.0);

  SECTION("harmonic case stays under 1e-3 on the flux-quantized box") {
    ConsistencyReport r = consistency_report(E, Grid::balanced(16), M_PI / 16, 40, 5);
    REQUIRE(r.dev_quantum < 1e-3);
    REQUIRE(r.dev_classical < 1e-3);
    REQUIRE(r.dev_exact < 1e-3);
    // At integer flux the lift of the p-solution IS the Heisenberg solution.
    REQUIRE(r.dev_quantum < 1e-12);
  }

  SECTION("zero time reports zero deviations") {
    ConsistencyReport r = consistency_report(E, Grid::balanced(16), 0.0, 4, 3);
    REQUIRE(r.dev_quantum < 1e-13);
    REQUIRE(r.dev_classical < 1e-13);
    REQUIRE(r.dev_exact < 1e-13);
  }

  SECTION("doubling the grid at least halves the worst deviation") {
    ConsistencyReport r8 = consistency_report(E, Grid::balanced(8), M_PI / 16, 40, 5);
    ConsistencyReport r16 = consistency_report(E, Grid::balanced(16), M_PI / 16, 40, 5);
    REQUIRE(r8.max_dev() < 8e-2);
    REQUIRE(r16.max_dev() <= 0.5 * r8.max_dev());
  }
}

TEST_CASE("period recurrence and trajectory output") {
  QuadraticEnergy E(1.0, 1.0);

  SECTION("states at t and t + period agree within integrator tolerance") {
    Grid g = Grid::balanced(32);
    const double inv2s2 = 2.0 * M_PI / g.h;
    GridField f0s(g);
    for (int m = 0; m < g.N; ++m)
      for (int k = 0; k < g.N; ++k) {
        double q = g.q(m), p = g.p(k);
        f0s.at(m, k) = q * std::exp(-inv2s2 * (q * q + p * p));
      }
    GridKernel f0 = kernel_of_symbol(f0s);
    // 18 snapshots over 17 pi/8 land exactly on t = pi/8 and t = 2 pi + pi/8.
    FlowResult<GridKernel> r = evolve_p(f0, E.kernel(g), 17.0 * M_PI / 8.0, 850, 18);
    REQUIRE(r.times[1] == Catch::Approx(M_PI / 8));
    REQUIRE(r.times[17] == Catch::Approx(2.0 * M_PI + M_PI / 8));
    double rel = detail::kernel_norm(r.snapshots[17] - r.snapshots[1]) /
                 detail::kernel_norm(r.snapshots[1]);
    REQUIRE(rel < 1e-5);
  }

  SECTION("trajectory csv carries the header, the times, and the drift columns") {
    PolySymbol q = PolySymbol::coordinate_q();
    PolySymbol Hp = ExactCoeff(Rat(1, 2)) *
                    (PolySymbol::coordinate_q() * PolySymbol::coordinate_q() +
                     PolySymbol::coordinate_p() * PolySymbol::coordinate_p());
    FlowResult<NumPoly> r = evolve_hamilton(q, Hp, 1.0, 16, 5);
    std::ostringstream os;
    write_trajectory_csv(r, os, {"cq", "cp"}, [](const NumPoly& f) {
      return std::vector<double>{f.coefficient({1, 0}).real(), f.coefficient({0, 1}).real()};
    });
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    REQUIRE(line == "t,cq,cp,energy_drift,norm_drift");
    int rows = 0;
    double prev_t = -1.0, t, cq, cp, ed, nd;
    char comma;
    while (std::getline(is, line)) {
      std::istringstream row(line);
      REQUIRE((row >> t >> comma >> cq >> comma >> cp >> comma >> ed >> comma >> nd));
      REQUIRE(t > prev_t);
      REQUIRE(std::abs(cq - std::cos(t)) < 1e-10);
      REQUIRE(std::abs(cp - std::sin(t)) < 1e-10);
      prev_t = t;
      ++rows;
    }
    REQUIRE(rows == 5);
    REQUIRE(prev_t == Catch::Approx(1.0));
  }
}
