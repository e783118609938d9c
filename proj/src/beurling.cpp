#include "twistlab/beurling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "twistlab/errors.hpp"

namespace twistlab {

PartialIsometry::PartialIsometry(const SparseOperator& S, const SparseOperator& T,
                                 const DeficiencyData& def)
    : plus_(assemble_cr(S, T, def.sigma, CRSign::Plus)),
      minus_(assemble_cr(S, T, def.sigma, CRSign::Minus)),
      def_(def) {
  if (def.basis_plus.rows() != S.size() || def.basis_minus.rows() != S.size()) {
    throw DimensionMismatch("deficiency bases do not match the operator size");
  }
  // ker d- = basis_minus, ker (d-)^H = ker d+ = basis_plus, and symmetrically.
  solve_minus_ = MinNormSolver(minus_.matrix, def.basis_minus, def.basis_plus);
  solve_plus_ = MinNormSolver(plus_.matrix, def.basis_plus, def.basis_minus);
}

GridField PartialIsometry::project_domain(const GridField& w) const {
  if (def_.basis_plus.cols() == 0) return w;
  return w - def_.basis_plus * (def_.basis_plus.adjoint() * w);
}

GridField PartialIsometry::apply(const GridField& w) const {
  if (w.size() != size()) throw DimensionMismatch("field size does not match the operator");
  return plus_.apply(solve_minus_.solve(w));
}

GridField apply_partial_isometry(const GridField& w, double sigma, const SparseOperator& S,
                                 const SparseOperator& T, double rank_tol) {
  DeficiencyData def = deficiency_spaces(sigma, S, T, rank_tol);
  return PartialIsometry(S, T, def).apply(w);
}

CMatrix seeded_unitary(int d, std::uint64_t seed) {
  if (seed == 0 || d == 0) return CMatrix::Identity(d, d);
  CMatrix a = random_complex(d, d, seed);
  Eigen::HouseholderQR<CMatrix> qr(a);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    Complex rii = r(i, i);
    if (std::abs(rii) > 0.0) q.col(i) *= rii / std::abs(rii);
  }
  return q;
}

UnitaryExtension::UnitaryExtension(const SparseOperator& S, const SparseOperator& T,
                                   const DeficiencyData& def, std::uint64_t J_seed, int probes)
    : iso_(S, T, def), J_seed_(J_seed) {
  if (def.d_plus != def.d_minus) {
    throw DimensionMismatch("deficiency dimensions differ: d+ = " + std::to_string(def.d_plus) +
                            ", d- = " + std::to_string(def.d_minus));
  }
  const int n = S.size();
  J_ = seeded_unitary(def.d_plus, J_seed);

  // d+^H d+ - d+ d+^H = -2i [S, T], supported on the commutator cells.
  CSparse c = Complex(0.0, -2.0) * CSparse(S.matrix * T.matrix - T.matrix * S.matrix);
  c.prune(Complex(0.0, 0.0));
  std::vector<int> support;
  {
    std::vector<char> mark(n, 0);
    for (int k = 0; k < c.outerSize(); ++k)
      for (CSparse::InnerIterator it(c, k); it; ++it) mark[it.row()] = 1;
    for (int i = 0; i < n; ++i)
      if (mark[i]) support.push_back(i);
  }
  Y_.resize(n, 0);
  delta_.resize(0);
  P_.resize(n, 0);
  if (!support.empty()) {
    const int rc = static_cast<int>(support.size());
    std::vector<int> local(n, -1);
    for (int i = 0; i < rc; ++i) local[support[i]] = i;
    CMatrix cs = CMatrix::Zero(rc, rc);
    for (int k = 0; k < c.outerSize(); ++k)
      for (CSparse::InnerIterator it(c, k); it; ++it) cs(local[it.row()], local[it.col()]) = it.value();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(cs);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<int> keep;
    for (int i = 0; i < rc; ++i)
      if (std::abs(es.eigenvalues()(i)) > 1e-12 * top) keep.push_back(i);
    const int r = static_cast<int>(keep.size());
    CMatrix g(n, r);
    RVector lambda(r);
    for (int j = 0; j < r; ++j) {
      CVector z = CVector::Zero(n);
      for (int i = 0; i < rc; ++i) z(support[i]) = es.eigenvectors()(i, keep[j]);
      g.col(j) = iso_.solver_plus().solve(z);
      lambda(j) = es.eigenvalues()(keep[j]);
    }
    // E = G Lambda G^H = Y H Y^H with Y an orthonormal basis of Ran G.
    CMatrix y = orthonormalize(g, nullptr, 1e-12);
    CMatrix yg = y.adjoint() * g;
    CMatrix h = yg * lambda.asDiagonal() * yg.adjoint();
    h = (0.5 * (h + h.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<CMatrix> hs(h);
    Y_ = y * hs.eigenvectors();
    delta_.resize(Y_.cols());
    for (int i = 0; i < Y_.cols(); ++i) {
      double one_plus = 1.0 + hs.eigenvalues()(i);
      if (!(one_plus > 1e-12)) {
        std::ostringstream os;
        os << "the partial isometry is not injective on Ran d- (eigenvalue " << one_plus
           << " of U^H U)";
        throw NoConvergence(os.str());
      }
      delta_(i) = 1.0 / std::sqrt(one_plus) - 1.0;
    }
    P_.resize(n, Y_.cols());
    for (int i = 0; i < Y_.cols(); ++i) P_.col(i) = iso_.apply(Y_.col(i));
  }

  // Randomized probe of U^H U - I.
  CMatrix probe = random_complex(n, probes, J_seed ^ 0xA5A5A5A5ULL);
  for (int i = 0; i < probes; ++i) {
    CVector u = probe.col(i);
    double e = (apply_adjoint(apply(u)) - u).norm() / u.norm();
    unitarity_defect_ = std::max(unitarity_defect_, e);
  }
}

double UnitaryExtension::correction_size() const {
  return delta_.size() > 0 ? delta_.cwiseAbs().maxCoeff() : 0.0;
}

GridField UnitaryExtension::apply(const GridField& u) const {
  if (u.size() != size()) throw DimensionMismatch("field size does not match the operator");
  const DeficiencyData& def = iso_.deficiency();
  GridField w = iso_.project_domain(u);
  if (Y_.cols() > 0) w += Y_ * (delta_.asDiagonal() * (Y_.adjoint() * u));
  GridField out = iso_.apply(w);
  if (J_.rows() > 0) out += def.basis_minus * (J_ * (def.basis_plus.adjoint() * u));
  return out;
}

GridField UnitaryExtension::apply_base(const GridField& u) const {
  const DeficiencyData& def = iso_.deficiency();
  GridField out = iso_.apply(iso_.project_domain(u));
  if (J_.rows() > 0) out += def.basis_minus * (J_ * (def.basis_plus.adjoint() * u));
  return out;
}

GridField UnitaryExtension::apply_adjoint(const GridField& y) const {
  if (y.size() != size()) throw DimensionMismatch("field size does not match the operator");
  const DeficiencyData& def = iso_.deficiency();
  // U_sigma^H y = (d+)^+ d- y.
  GridField g = iso_.solver_plus().solve(iso_.minus().apply(y));
  if (Y_.cols() > 0) g += Y_ * (delta_.asDiagonal() * (Y_.adjoint() * g));
  if (J_.rows() > 0) g += def.basis_plus * (J_.adjoint() * (def.basis_minus.adjoint() * y));
  return g;
}

CMatrix UnitaryExtension::dense() const {
  const int n = size();
  if (n > 2000) throw Unsupported("dense assembly is limited to 2000 unknowns");
  CMatrix u(n, n);
  for (int k = 0; k < n; ++k) u.col(k) = apply(CVector::Unit(n, k));
  return u;
}

UnitaryExtension extend_unitary(const SparseOperator& S, const SparseOperator& T,
                                const DeficiencyData& def, std::uint64_t J_seed) {
  return UnitaryExtension(S, T, def, J_seed);
}

Resolvent::Resolvent(const UnitaryExtension& U, Complex z) : U_(&U), z_(z) {
  const double dist = std::abs(std::abs(z) - 1.0);
  if (!(dist > 0.0)) throw NoConvergence("resolvent requested on the unit circle");
  const PartialIsometry& iso = U.partial_isometry();
  const DeficiencyData& def = iso.deficiency();
  n_ = U.size();
  d_ = U.deficiency_dim();
  // x = d- y + B+ c with B-^H y = 0 turns (U_base - z) x = f into
  //   (d+ - z d-) y + (B- J - z B+) c = f.
  CSparse a = iso.plus().matrix - z * iso.minus().matrix;
  CSparse big = d_ > 0 ? bordered(a, def.basis_minus * U.J_matrix() - z * def.basis_plus, def.basis_minus)
                       : a;
  lu_ = std::make_shared<Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>>>();
  lu_->analyzePattern(big);
  lu_->factorize(big);
  if (lu_->info() != Eigen::Success) {
    throw NoConvergence("sparse LU of the resolvent system failed: " + lu_->lastErrorMessage());
  }
  const int r = U.correction_rank();
  if (r > 0) {
    BinvP_.resize(n_, r);
    for (int i = 0; i < r; ++i) BinvP_.col(i) = solve_base(U.correction_image().col(i));
    CMatrix m = CMatrix::Identity(r, r) +
                U.correction_basis().adjoint() * BinvP_ * U.correction_weights().asDiagonal();
    cap_ = m.inverse();
  }
}

GridField Resolvent::solve_base(const GridField& f) const {
  const PartialIsometry& iso = U_->partial_isometry();
  CVector rhs = CVector::Zero(n_ + d_);
  rhs.head(n_) = f;
  CVector sol = lu_->solve(rhs);
  GridField x = iso.minus().apply(sol.head(n_));
  if (d_ > 0) x += iso.deficiency().basis_plus * sol.tail(d_);
  return x;
}

GridField Resolvent::apply_inverse_approx(const GridField& f) const {
  GridField b = solve_base(f);
  if (BinvP_.cols() > 0) {
    CVector coef = cap_ * (U_->correction_basis().adjoint() * b);
    b -= BinvP_ * (U_->correction_weights().asDiagonal() * coef);
  }
  return b;
}

GridField Resolvent::apply(const GridField& f, double tol) const {
  if (f.size() != n_) throw DimensionMismatch("field size does not match the operator");
  const double fn = f.norm();
  last_iterations_ = 0;
  if (fn == 0.0) return GridField::Zero(n_);
  const double dist = std::abs(std::abs(z_) - 1.0);
  const int cap = std::min(200, 4 + static_cast<int>(std::ceil(1.0 / dist)));
  GridField x = apply_inverse_approx(f);
  double rel = 0.0;
  for (int it = 0; it < cap; ++it) {
    GridField r = f - (U_->apply(x) - z_ * x);
    rel = r.norm() / fn;
    last_iterations_ = it + 1;
    if (rel <= tol) return x;
    x += apply_inverse_approx(r);
  }
  std::ostringstream os;
  os << "resolvent at z = " << z_ << " reached relative residual " << rel << " > " << tol
     << " after " << cap << " refinement steps";
  throw NoConvergence(os.str());
}

GridField resolvent_apply(const UnitaryExtension& U, Complex z, const GridField& u, double tol) {
  return Resolvent(U, z).apply(u, tol);
}

}  // namespace twistlab
