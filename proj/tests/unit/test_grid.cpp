// Grid topology, difference operators and the commutator report.
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/grid.hpp"
#include "twistlab/linalg.hpp"

using namespace twistlab;

TEST_CASE("grid rejects even sizes") {
  CHECK_THROWS_AS(Grid(surfaces::torus(), 4), EvenGridSize);
  CHECK_NOTHROW(Grid(surfaces::torus(), 5));
}

TEST_CASE("neighbour lookups across edges") {
  Grid t(surfaces::torus(), 3);
  CHECK(t.neighbor({0, 2, 1}, Direction::Right) == Cell{0, 0, 1});
  Grid l(surfaces::l_shaped(), 3);
  CHECK(l.neighbor({0, 2, 1}, Direction::Right) == Cell{1, 0, 1});
  CHECK(l.neighbor({0, 1, 2}, Direction::Up) == Cell{2, 1, 0});
  Grid q(surfaces::quaternion(), 5);
  for (int k = 0; k < q.size(); ++k) {
    Cell c = q.cell(k);
    CHECK(q.index(c) == k);
    CHECK(q.neighbor(q.neighbor(c, Direction::Right), Direction::Left) == c);
    CHECK(q.neighbor(q.neighbor(c, Direction::Up), Direction::Down) == c);
  }
}

TEST_CASE("inner product normalisation") {
  Grid g(surfaces::l_shaped(), 7);
  GridField one = g.constant(1.0);
  CHECK(std::abs(g.inner(one, one) - Complex(3.0)) < 1e-13);
  CHECK(std::abs(g.norm(one) - std::sqrt(3.0)) < 1e-13);
}

TEST_CASE("S and T are exactly skew and kill constants") {
  for (const Origami& o : {surfaces::torus(), surfaces::l_shaped(), surfaces::quaternion()}) {
    Grid g(o, 9);
    auto S = assemble_S(g), T = assemble_T(g);
    CHECK(symmetry_defect(S.matrix, Symmetry::Skew) == 0.0);
    CHECK(symmetry_defect(T.matrix, Symmetry::Skew) == 0.0);
    GridField one = g.constant(1.0);
    CHECK(S.apply(one).cwiseAbs().maxCoeff() == 0.0);
    CHECK(T.apply(one).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("torus difference operators act on modes by the discrete symbol") {
  for (int m : {5, 9, 11}) {
    Grid g(surfaces::torus(), m);
    auto S = assemble_S(g), T = assemble_T(g);
    for (int k = -m / 2; k <= m / 2; ++k)
      for (int l = -m / 2; l <= m / 2; l += 2) {
        GridField f = oracle::torus_mode(m, k, l);
        GridField sf = S.apply(f) - kI * oracle::symbol(k, m) * f;
        GridField tf = T.apply(f) - kI * oracle::symbol(l, m) * f;
        CHECK(sf.cwiseAbs().maxCoeff() < 1e-11 * m);
        CHECK(tf.cwiseAbs().maxCoeff() < 1e-11 * m);
      }
  }
}

TEST_CASE("torus Q spectrum matches the symbol") {
  const int m = 7;
  Grid g(surfaces::torus(), m);
  auto Q = assemble_Q(assemble_S(g), assemble_T(g));
  Eigen::SelfAdjointEigenSolver<CMatrix> es{CMatrix(Q.matrix)};
  auto expected = oracle::torus_eigenvalues(m);
  for (int i = 0; i < m * m; ++i) CHECK(es.eigenvalues()(i) == doctest::Approx(expected[i]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("Dirichlet form is nonnegative and vanishes on constants") {
  Grid g(surfaces::l_shaped(), 9);
  auto S = assemble_S(g), T = assemble_T(g);
  CHECK(dirichlet_form(g.constant(2.5), S, T, g) == 0.0);
  CMatrix samples = random_complex(g.size(), 5, 3);
  for (int c = 0; c < 5; ++c) CHECK(dirichlet_form(samples.col(c), S, T, g) >= 0.0);
}

TEST_CASE("central differences are second-order accurate") {
  std::vector<double> err;
  for (int m : {9, 27, 81}) {
    Grid g(surfaces::torus(), m);
    auto S = assemble_S(g);
    GridField u(g.size()), du(g.size());
    for (int k = 0; k < g.size(); ++k) {
      Cell c = g.cell(k);
      double x = g.x_center(c.i), y = g.x_center(c.j);
      double phase = kTwoPi * x + std::cos(kTwoPi * y);
      u(k) = std::sin(phase);
      du(k) = kTwoPi * std::cos(phase);
    }
    err.push_back((S.apply(u) - du).cwiseAbs().maxCoeff());
  }
  for (int i = 0; i + 1 < 3; ++i) CHECK(std::log(err[i] / err[i + 1]) / std::log(3.0) >= 1.9);
}

TEST_CASE("commutator vanishes on the torus and is localised near corners") {
  Grid t(surfaces::torus(), 9);
  auto rt = commutator_report(assemble_S(t), assemble_T(t), t);
  CHECK(rt.norm == 0.0);
  CHECK(rt.support.empty());

  Grid g(surfaces::l_shaped(), 9);
  auto S = assemble_S(g), T = assemble_T(g);
  auto rep = commutator_report(S, T, g);
  CHECK(rep.norm > 0.0);
  CHECK(rep.max_corner_distance <= 2.0);
  CSparse c = S.matrix * T.matrix - T.matrix * S.matrix;
  GridField u = random_complex(g.size(), 1, 5).col(0);
  for (int k : rep.support) u(k) = 0.0;
  // Off-support fields see no commutator in the quadratic form.
  CHECK(std::abs(u.dot(c * u)) < 1e-9 * u.squaredNorm());
}

TEST_CASE("coordinate export format") {
  Grid g(surfaces::torus(), 3);
  std::ostringstream os;
  write_coo(os, assemble_S(g));
  std::istringstream is(os.str());
  std::string pct;
  long rows, cols, nnz;
  is >> pct >> rows >> cols >> nnz;
  CHECK(pct == "%");
  CHECK(rows == 9);
  CHECK(nnz == 18);
  int r, c;
  double re, im;
  long lines = 0;
  while (is >> r >> c >> re >> im) ++lines;
  CHECK(lines == nnz);
}
