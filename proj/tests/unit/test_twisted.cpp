// Twisted Cauchy-Riemann operators, kernels and deficiency spaces.
#include "doctest.h"
#include "oracles.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/linalg.hpp"
#include "twistlab/twisted.hpp"

using namespace twistlab;

namespace {

double max_abs(const CSparse& a) {
  double w = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (CSparse::InnerIterator it(a, k); it; ++it) w = std::max(w, std::abs(it.value()));
  return w;
}

}  // namespace

TEST_CASE("exact algebraic identities of the twisted operators") {
  for (const Origami& o : {surfaces::torus(), surfaces::l_shaped(), surfaces::quaternion()}) {
    Grid g(o, 9);
    auto S = assemble_S(g), T = assemble_T(g);
    for (double sigma : {0.0, 1.0, -2.7}) {
      auto p = assemble_cr(S, T, sigma, CRSign::Plus);
      auto m = assemble_cr(S, T, sigma, CRSign::Minus);
      CHECK(max_abs(CSparse(p.matrix.adjoint()) + m.matrix) == 0.0);
      CHECK(max_abs(CSparse(m.matrix.adjoint()) + p.matrix) == 0.0);
      auto m_neg = assemble_cr(S, T, -sigma, CRSign::Minus);
      CHECK(max_abs(CSparse(p.matrix.conjugate()) - m_neg.matrix) == 0.0);
      auto p0 = assemble_cr(S, T, 0.0, CRSign::Plus);
      CSparse id(g.size(), g.size());
      id.setIdentity();
      CHECK(max_abs(p.matrix - p0.matrix - Complex(0.0, sigma) * id) == 0.0);
    }
    auto p0 = assemble_cr(S, T, 0.0, CRSign::Plus);
    CHECK(max_abs(p0.matrix - (S.matrix + kI * T.matrix)) == 0.0);
  }
}

TEST_CASE("torus modes see the twisted symbol") {
  const int m = 9;
  Grid g(surfaces::torus(), m);
  auto S = assemble_S(g), T = assemble_T(g);
  const double sigma = 1.3;
  auto p = assemble_cr(S, T, sigma, CRSign::Plus);
  auto mi = assemble_cr(S, T, sigma, CRSign::Minus);
  for (int k = -4; k <= 4; ++k)
    for (int l = -4; l <= 4; ++l) {
      GridField f = oracle::torus_mode(m, k, l);
      double sk = oracle::symbol(k, m), sl = oracle::symbol(l, m);
      Complex plus = kI * (sk + sigma) - sl, minus = kI * (sk + sigma) + sl;
      CHECK((p.apply(f) - plus * f).cwiseAbs().maxCoeff() < 1e-11);
      CHECK((mi.apply(f) - minus * f).cwiseAbs().maxCoeff() < 1e-11);
      double q = (sk + sigma) * (sk + sigma) + sl * sl;
      CHECK(q_form_twisted(f, sigma, S, T, g) == doctest::Approx(q).epsilon(1e-11));
    }
}

TEST_CASE("twisted form on constants") {
  Grid g(surfaces::l_shaped(), 5);
  auto S = assemble_S(g), T = assemble_T(g);
  GridField c = g.constant(Complex(1.0, -2.0));
  CHECK(q_form_twisted(c, 0.7, S, T, g) == doctest::Approx(0.49 * 5.0 * 3.0));
  GridField u = random_complex(g.size(), 1, 4).col(0);
  CHECK(q_form_twisted(u, 0.0, S, T, g) == doctest::Approx(dirichlet_form(u, S, T, g)));
}

TEST_CASE("joint kernel on the torus") {
  const int m = 9;
  Grid g(surfaces::torus(), m);
  auto S = assemble_S(g), T = assemble_T(g);
  CHECK(kernel_K(0.0, S, T).dim == 1);
  CHECK(kernel_K(1.0, S, T).dim == 0);
  const int k0 = 2;
  double sigma = oracle::symbol(k0, m);
  auto ker = kernel_K(sigma, S, T);
  REQUIRE(ker.dim == 1);
  GridField e = oracle::torus_mode(m, -k0, 0);
  e /= e.norm();
  CHECK(std::abs(ker.basis.col(0).dot(e)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("deficiency spaces") {
  Grid t(surfaces::torus(), 9);
  auto S = assemble_S(t), T = assemble_T(t);
  auto d = deficiency_spaces(0.0, S, T);
  CHECK(d.d_plus == 1);
  CHECK(d.d_minus == 1);
  auto d1 = deficiency_spaces(1.0, S, T);
  CHECK(d1.d_plus == 0);
  CHECK(d1.d_minus == 0);

  Grid l(surfaces::l_shaped(), 9);
  auto Sl = assemble_S(l), Tl = assemble_T(l);
  for (double sigma : {0.0, 0.5, 3.0}) {
    auto a = deficiency_spaces(sigma, Sl, Tl), b = deficiency_spaces(-sigma, Sl, Tl);
    CHECK(a.d_plus == b.d_minus);
    CHECK(a.d_minus == b.d_plus);
    auto dp = assemble_cr(Sl, Tl, sigma, CRSign::Plus);
    if (a.d_plus > 0) CHECK((dp.matrix * a.basis_plus).cwiseAbs().maxCoeff() < 1e-6);
  }
  Grid big(surfaces::l_shaped(), 83);
  CHECK_THROWS_AS(deficiency_spaces(0.0, assemble_S(big), assemble_T(big)), Unsupported);
}

TEST_CASE("isometry residual") {
  Grid t(surfaces::torus(), 9);
  auto S = assemble_S(t), T = assemble_T(t);
  for (int trial = 0; trial < 10; ++trial) {
    GridField u = random_complex(t.size(), 1, 50 + trial).col(0);
    double scale = t.norm(u) * t.norm(u) + dirichlet_form(u, S, T, t);
    CHECK(isometry_residual(u, 5.0, CRSign::Plus, S, T, t) <= 1e-12 * scale);
    CHECK(isometry_residual(u, 5.0, CRSign::Minus, S, T, t) <= 1e-12 * scale);
  }
  Grid l(surfaces::l_shaped(), 9);
  auto Sl = assemble_S(l), Tl = assemble_T(l);
  auto rep = commutator_report(Sl, Tl, l);
  GridField u = random_complex(l.size(), 1, 3).col(0);
  GridField bump = GridField::Zero(l.size());
  for (int k : rep.support) {
    bump(k) = u(k);
    u(k) = 0.0;
  }
  double scale = l.norm(u) * l.norm(u) + dirichlet_form(u, Sl, Tl, l);
  CHECK(isometry_residual(u, 1.0, CRSign::Plus, Sl, Tl, l) <= 1e-12 * scale);
  // On the commutator support the defect is |<[S,T] u, u>|.
  CSparse c = Sl.matrix * Tl.matrix - Tl.matrix * Sl.matrix;
  double defect = std::abs(bump.dot(c * bump)) / 81.0;
  CHECK(isometry_residual(bump, 1.0, CRSign::Plus, Sl, Tl, l) == doctest::Approx(defect).epsilon(1e-9));
  CHECK(defect > 0.0);
}

TEST_CASE("form comparison against the torus symbol") {
  const int m = 9;
  Grid g(surfaces::torus(), m);
  auto S = assemble_S(g), T = assemble_T(g);
  auto b = lowest_eigenpairs(assemble_Q(S, T), g, m * m, 1e-10, 0);
  auto r0 = form_comparison_scan(0.0, S, T, b);
  CHECK(r0.c_lower == 1.0);
  CHECK(r0.c_upper == 1.0);
  const double sigma = 1.0;
  double lo = 1e300, hi = 0.0;
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) {
      if (k == 0 && l == 0) continue;
      double sk = oracle::symbol(k, m), sl = oracle::symbol(l, m);
      double r = ((sk + sigma) * (sk + sigma) + sl * sl) / (sk * sk + sl * sl);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  auto r1 = form_comparison_scan(sigma, S, T, b);
  CHECK(r1.kernel_dim == 0);
  CHECK(r1.subspace_dim == m * m - 1);
  CHECK(r1.c_lower == doctest::Approx(lo).epsilon(1e-8));
  CHECK(r1.c_upper == doctest::Approx(hi).epsilon(1e-8));
  CHECK(r1.c_lower > 0.0);
}
