// Eigensolver, null spaces and the bordered minimal-norm solver against
// dense reference factorizations.
#include <Eigen/SVD>

#include "doctest.h"
#include "oracles.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/grid.hpp"
#include "twistlab/linalg.hpp"

using namespace twistlab;

TEST_CASE("Krylov eigenpairs match a dense solve") {
  Grid g(surfaces::l_shaped(), 15);  // 675 unknowns, above the dense cutoff
  CSparse q = CSparse(assemble_S(g).matrix.adjoint()) * assemble_S(g).matrix +
              CSparse(assemble_T(g).matrix.adjoint()) * assemble_T(g).matrix;
  KrylovOptions opt;
  opt.tol = 1e-9;
  opt.max_dim = 400;
  auto pairs = lowest_eigs<Complex>(q, 30, opt);
  Eigen::SelfAdjointEigenSolver<CMatrix> es{CMatrix(q)};
  for (int i = 0; i < 30; ++i)
    CHECK(pairs.values(i) == doctest::Approx(es.eigenvalues()(i)).epsilon(1e-9).scale(1.0));
  CHECK(pairs.residuals.maxCoeff() <= 1e-9);
  CMatrix gram = pairs.vectors.adjoint() * pairs.vectors;
  CHECK((gram - CMatrix::Identity(30, 30)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("eigensolver is deterministic for a fixed seed") {
  Grid g(surfaces::quaternion(), 13);
  auto S = assemble_S(g), T = assemble_T(g);
  CSparse a = CSparse(S.matrix.adjoint()) * S.matrix + CSparse(T.matrix.adjoint()) * T.matrix;
  KrylovOptions opt;
  opt.seed = 17;
  auto p1 = lowest_eigs<Complex>(a, 12, opt);
  auto p2 = lowest_eigs<Complex>(a, 12, opt);
  CHECK((p1.values - p2.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p1.vectors - p2.vectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("null space of torus S at small and large sizes") {
  // ker S on the torus: fields constant along each horizontal line, dim m.
  for (int m : {9, 31}) {
    Grid g(surfaces::torus(), m);
    auto S = assemble_S(g);
    auto ns = null_space(S.matrix, 1e-8, 0);
    CHECK(ns.dim == m);
    CHECK((S.matrix * ns.basis).cwiseAbs().maxCoeff() < 1e-9 * m);
    CMatrix gram = ns.basis.adjoint() * ns.basis;
    CHECK((gram - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("rank ambiguity is reported") {
  CSparse a(3, 3);
  a.insert(0, 0) = 1.0;
  a.insert(1, 1) = 1e-8;  // right at the threshold
  CHECK_THROWS_AS(null_space(a, 1e-8), RankAmbiguous);
}

TEST_CASE("bordered solver returns the minimal-norm least-squares solution") {
  Grid g(surfaces::l_shaped(), 7);
  CSparse a = assemble_S(g).matrix + Complex(0.0, 0.0) * assemble_T(g).matrix;
  auto ker = null_space(a, 1e-8);
  auto coker = null_space(CSparse(a.adjoint()), 1e-8);
  MinNormSolver solver(a, ker.basis, coker.basis);
  CVector b = random_complex(g.size(), 1, 9).col(0);
  CVector x = solver.solve(b);
  CMatrix dense(a);
  CVector ref = Eigen::CompleteOrthogonalDecomposition<CMatrix>(dense).solve(b);
  CHECK((x - ref).norm() <= 1e-10 * ref.norm());
  CVector y = solver.solve_adjoint(b);
  CVector ref_adj = Eigen::CompleteOrthogonalDecomposition<CMatrix>(CMatrix(dense.adjoint())).solve(b);
  CHECK((y - ref_adj).norm() <= 1e-10 * ref_adj.norm());
}

TEST_CASE("solver rejects mismatched borders") {
  CSparse a(2, 2);
  a.insert(0, 0) = 1.0;
  CHECK_THROWS_AS(MinNormSolver(a, CMatrix::Zero(2, 1), CMatrix::Zero(2, 0)), DimensionMismatch);
}

TEST_CASE("orthonormalize drops dependent columns") {
  CMatrix m = random_complex(20, 3, 1);
  CMatrix x(20, 4);
  x << m, m.col(0) + m.col(1);
  CMatrix q = orthonormalize(x);
  CHECK(q.cols() == 3);
  CHECK((q.adjoint() * q - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}
