// Cohomological equation: operator assembly, invariant distributions and solvers.
#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oracles.hpp"
#include "twistlab/cohosolve.hpp"
#include "twistlab/errors.hpp"

using namespace twistlab;

namespace {

double max_abs(const CSparse& a) {
  double w = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (CSparse::InnerIterator it(a, k); it; ++it) w = std::max(w, std::abs(it.value()));
  return w;
}

struct Torus {
  int m;
  Grid g;
  SparseOperator S, T;
  explicit Torus(int m_) : m(m_), g(surfaces::torus(), m_), S(assemble_S(g)), T(assemble_T(g)) {}
};

// Directional symbol of S_theta + i twist on the torus mode (k, l).
Complex torus_symbol(int k, int l, int m, double theta, double twist) {
  return kI * (oracle::symbol(k, m) * std::cos(theta) + oracle::symbol(l, m) * std::sin(theta) + twist);
}

}  // namespace

TEST_CASE("assembly of L_theta") {
  Torus t(9);
  CSparse id(t.g.size(), t.g.size());
  id.setIdentity();
  SolveConfig c;
  c.theta = 0.0;
  c.sigma = 0.0;
  CHECK(max_abs(assemble_Ltheta(t.S, t.T, c).matrix - t.S.matrix) == 0.0);
  c.theta = kPi / 2;
  c.sigma = 1.7;
  c.twist_mode = TwistMode::CosScaled;
  CHECK(max_abs(assemble_Ltheta(t.S, t.T, c).matrix - t.T.matrix) < 1e-15);
  c.theta = kPi / 4;
  c.sigma = 1.0;
  c.twist_mode = TwistMode::Raw;
  CSparse expect = (t.S.matrix + t.T.matrix) / std::sqrt(2.0) + kI * id;
  CHECK(max_abs(assemble_Ltheta(t.S, t.T, c).matrix - expect) < 1e-15);
  c.theta = kPi;
  c.sigma = 0.0;
  CHECK(max_abs(assemble_Ltheta(t.S, t.T, c).matrix + t.S.matrix) < 1e-15);
}

TEST_CASE("solve config validation") {
  SolveConfig c;
  c.method = SolveMethod::Resolvent;
  c.rho_schedule = {0.5, 0.4};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.rho_schedule = {0.5, 1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.rho_schedule = {0.5, 0.9};
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(parse_twist_mode("cosine"), ConfigError);
  CHECK(parse_solve_method("resolvent") == SolveMethod::Resolvent);
}

TEST_CASE("invariant distributions on the torus") {
  const int m = 9;
  Torus t(m);
  SolveConfig c;
  auto L = assemble_Ltheta(t.S, t.T, c);
  // Symbols vanishing at theta = 0: every mode with sin(2 pi k/m) = 0.
  int zeros = 0;
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l)
      if (std::abs(oracle::symbol(k, m)) < 1e-12) ++zeros;
  auto inv = invariant_distributions(L, 1e-8);
  CHECK(inv.dim == zeros);
  CHECK(inv.dim == m);
  // The mean functional lies in their span.
  GridField one = GridField::Constant(t.g.size(), 1.0) / std::sqrt(double(t.g.size()));
  CHECK((one - inv.basis * (inv.basis.adjoint() * one)).norm() < 1e-10);

  // A direction where only the zero symbol vanishes.
  c.theta = 0.4142;
  int generic_zeros = 0;
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l)
      if (std::abs(torus_symbol(k, l, m, c.theta, 0.0)) < 1e-9) ++generic_zeros;
  auto inv2 = invariant_distributions(assemble_Ltheta(t.S, t.T, c), 1e-8);
  CHECK(inv2.dim == generic_zeros);
  CHECK(inv2.dim == 1);
}

TEST_CASE("minimal-norm solve matches the torus symbol") {
  for (int m : {9, 27}) {
    Torus t(m);
    for (double sigma : {0.0, 1.0, 2.7}) {
      SolveConfig c;
      c.theta = 0.5923;
      c.sigma = sigma;
      CohomologicalSolver solver(t.S, t.T, t.g, c);
      for (auto [k, l] : {std::pair{1, 0}, {2, -3}, {-4, 1}, {0, 0}}) {
        GridField f = oracle::torus_mode(m, k, l);
        Complex den = torus_symbol(k, l, m, c.theta, sigma);
        SolveReport rep = solver.solve(f);
        if (std::abs(den) < 1e-9) {
          CHECK(rep.solution.norm() < 1e-6 * f.norm());
          CHECK(rep.obstruction_mass == doctest::Approx(t.g.norm(f)).epsilon(1e-10));
        } else {
          GridField expect = f / den;
          CHECK((rep.solution - expect).norm() <= 1e-10 * expect.norm());
          CHECK(rep.obstruction_mass < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("constant data with a twist") {
  Torus t(9);
  SolveConfig c;
  c.sigma = 1.9;
  GridField f = t.g.constant(Complex(0.3, -1.2));
  SolveReport rep = solve_lsq(f, t.S, t.T, t.g, c);
  GridField expect = -kI * f / c.sigma;
  CHECK((rep.solution - expect).cwiseAbs().maxCoeff() < 1e-12);

  Grid gl(surfaces::l_shaped(), 9);
  auto Sl = assemble_S(gl), Tl = assemble_T(gl);
  GridField fl = gl.constant(Complex(1.0, 0.5));
  SolveReport repl = solve_lsq(fl, Sl, Tl, gl, c);
  CHECK((repl.solution + kI * fl / c.sigma).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("solver invariants on the L-shaped surface") {
  Grid g(surfaces::l_shaped(), 9);
  auto S = assemble_S(g), T = assemble_T(g);
  for (double sigma : {0.0, 1.0}) {
    SolveConfig c;
    c.theta = 0.8;
    c.sigma = sigma;
    CohomologicalSolver solver(S, T, g, c);
    GridField f1 = random_complex(g.size(), 1, 11).col(0);
    GridField f2 = random_complex(g.size(), 1, 12).col(0);
    Complex a(0.7, -0.2), b(-1.1, 0.4);
    SolveReport r1 = solver.solve(f1), r2 = solver.solve(f2), r12 = solver.solve(a * f1 + b * f2);
    GridField lin = a * r1.solution + b * r2.solution;
    CHECK((r12.solution - lin).norm() <= 1e-9 * lin.norm());
    // Minimal norm: orthogonal to the computed kernel.
    const CMatrix& K = solver.kernel();
    if (K.cols() > 0) CHECK((K.adjoint() * r1.solution).cwiseAbs().maxCoeff() < 1e-8 * r1.solution.norm());
    // Obstruction consistency: the cokernel component of f - L u is the obstruction.
    const CMatrix& D = solver.cokernel().basis;
    GridField rem = f1 - solver.L().apply(r1.solution);
    double mass = D.cols() > 0 ? (D.adjoint() * rem).norm() / g.m() : 0.0;
    CHECK(std::abs(mass * mass - r1.obstruction_mass * r1.obstruction_mass) < 1e-8);
    CHECK(r1.obstruction_dim == solver.cokernel().dim);
  }
}

TEST_CASE("data in the cokernel is fully obstructed") {
  Torus t(9);
  SolveConfig c;
  auto inv = invariant_distributions(assemble_Ltheta(t.S, t.T, c), 1e-8);
  GridField f = inv.basis * random_complex(inv.dim, 1, 5).col(0);
  SolveReport rep = solve_lsq(f, t.S, t.T, t.g, c);
  CHECK(rep.solution.norm() < 1e-10);
  CHECK(rep.obstruction_mass == doctest::Approx(t.g.norm(f)).epsilon(1e-10));
}

TEST_CASE("Sobolev ratio of a single mode") {
  const int m = 9;
  Torus t(m);
  SolveConfig c;
  c.theta = 0.5923;
  c.sigma = 0.0;
  c.sobolev_r = 1.0;
  c.sobolev_s = 2.0;
  GridField f = oracle::torus_mode(m, 1, 2);
  SolveReport rep = solve_lsq(f, t.S, t.T, t.g, c);
  REQUIRE(rep.norms_computed);
  double a = oracle::symbol(1, m), b = oracle::symbol(2, m);
  // Weighted norm squared of a mode: (1/2) sum over i+j<=k of 2 a^{2i} b^{2j}.
  auto weighted = [&](int k) {
    double s = 0.0;
    for (int i = 0; i <= k; ++i)
      for (int j = 0; i + j <= k; ++j) s += std::pow(a, 2 * i) * std::pow(b, 2 * j);
    return std::sqrt(s);
  };
  double den = std::abs(torus_symbol(1, 2, m, c.theta, 0.0));
  CHECK(rep.ratio == doctest::Approx(weighted(1) / (den * weighted(2))).epsilon(1e-10));
}

TEST_CASE("resolvent route agrees with the symbol and with least squares") {
  const int m = 9;
  Torus t(m);
  const double sigma = 1.0;
  DeficiencyData def = deficiency_spaces(sigma, t.S, t.T);
  REQUIRE(def.d_plus == 0);
  UnitaryExtension U(t.S, t.T, def);
  for (double theta : {0.31, 1.27, 2.2}) {
    SolveConfig c;
    c.theta = theta;
    c.sigma = sigma;
    c.twist_mode = TwistMode::CosScaled;
    c.method = SolveMethod::Resolvent;
    for (auto [k, l] : {std::pair{1, 2}, {-3, 1}}) {
      GridField f = oracle::torus_mode(m, k, l);
      double sk = oracle::symbol(k, m), sl = oracle::symbol(l, m);
      Complex sp = kI * (sk + sigma) - sl, sm = kI * (sk + sigma) + sl;
      Complex e2 = std::polar(1.0, 2 * theta);
      Complex factor = 2.0 * std::polar(1.0, theta) / ((sp / sm + e2) * sm);
      SolveReport rr = solve_resolvent(f, U, t.S, t.T, t.g, c);
      CHECK((rr.solution - factor * f).norm() <= 1e-7 * std::abs(factor) * f.norm());
      CHECK(rr.rho_trace.size() == c.rho_schedule.size());
      SolveConfig cl = c;
      cl.method = SolveMethod::Lsq;
      SolveReport rl = solve_lsq(f, t.S, t.T, t.g, cl);
      CHECK((rr.solution - rl.solution).norm() <= 1e-6 * rl.solution.norm());
    }
    SolveReport zero = solve_resolvent(GridField::Zero(t.g.size()), U, t.S, t.T, t.g, c);
    CHECK(zero.solution.norm() == 0.0);
  }
  SolveConfig raw;
  raw.method = SolveMethod::Resolvent;
  raw.sigma = sigma;
  CHECK_THROWS_AS(solve_resolvent(oracle::torus_mode(m, 1, 1), U, t.S, t.T, t.g, raw), ConfigError);
}

TEST_CASE("resolvent route diverges at a measured resonance") {
  const int m = 5;
  Torus t(m);
  const double sigma = 1.0;
  DeficiencyData def = deficiency_spaces(sigma, t.S, t.T);
  UnitaryExtension U(t.S, t.T, def);
  Eigen::ComplexEigenSolver<CMatrix> es(U.dense());
  // e^{2 i theta} = -lambda for one eigenphase lambda.
  Complex lambda = es.eigenvalues()(3);
  double theta = 0.5 * std::arg(-lambda);
  SolveConfig c;
  c.theta = theta;
  c.sigma = sigma;
  c.twist_mode = TwistMode::CosScaled;
  c.method = SolveMethod::Resolvent;
  GridField f = es.eigenvectors().col(3);
  CHECK_THROWS_AS(solve_resolvent(f, U, t.S, t.T, t.g, c), BoundaryDivergence);
}

TEST_CASE("theta scans") {
  const int m = 9;
  Torus t(m);
  SolveConfig c;
  std::vector<double> thetas = uniform_grid(16, 0.0, kTwoPi);
  auto zero = theta_scan(GridField::Zero(t.g.size()), t.S, t.T, t.g, c, thetas, {0.6}, nullptr, 2);
  CHECK(zero.failures == 0);
  for (const auto& row : zero.rows) CHECK(row.ratio == 0.0);

  GridField f = oracle::torus_mode(m, 1, 2);
  auto scan = theta_scan(f, t.S, t.T, t.g, c, thetas, {0.6, 1.0}, nullptr, 2);
  REQUIRE(scan.rows.size() == thetas.size());
  for (const auto& row : scan.rows) {
    REQUIRE(row.error.empty());
    CHECK(row.ratio == doctest::Approx(1.0 / std::abs(torus_symbol(1, 2, m, row.theta, 0.0))).epsilon(1e-9));
  }
  double acc = 0.0;
  for (const auto& row : scan.rows) acc += std::pow(row.ratio, 0.6);
  CHECK(scan.stats[0].value == doctest::Approx(std::pow(acc / thetas.size(), 1.0 / 0.6)).epsilon(1e-12));
  CHECK_FALSE(scan.regime_ok);
  CHECK_FALSE(scan.stats[0].regime_ok);

  // Per-theta failures are recorded without aborting the scan.
  SolveConfig rc = c;
  rc.method = SolveMethod::Resolvent;
  rc.twist_mode = TwistMode::CosScaled;
  rc.sigma = 1.0;
  rc.rho_schedule = {0.5, 0.6};
  auto bad = theta_scan(f, t.S, t.T, t.g, rc, thetas, {0.6}, nullptr, 1);
  CHECK(bad.failures == static_cast<int>(thetas.size()));
  CHECK(bad.rows[0].error.rfind("BoundaryDivergence", 0) == 0);
}
