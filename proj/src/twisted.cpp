#include "twistlab/twisted.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "twistlab/errors.hpp"
#include "twistlab/linalg.hpp"

namespace twistlab {

double TwistParams::sigma_theta() const { return sigma * std::cos(theta); }

namespace {

CSparse identity(int n) {
  CSparse id(n, n);
  id.setIdentity();
  return id;
}

double max_row_sum(const CSparse& a) {
  RVector sums = RVector::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (CSparse::InnerIterator it(a, k); it; ++it) sums(it.row()) += std::abs(it.value());
  return sums.size() > 0 ? sums.maxCoeff() : 0.0;
}

}  // namespace

SparseOperator assemble_cr(const SparseOperator& S, const SparseOperator& T, double sigma,
                           CRSign sign) {
  if (S.size() != T.size()) throw DimensionMismatch("S and T sizes differ");
  const Complex s = sign == CRSign::Plus ? kI : -kI;
  SparseOperator op;
  op.matrix = S.matrix + s * T.matrix + Complex(0.0, sigma) * identity(S.size());
  op.matrix.makeCompressed();
  op.symmetry = sigma == 0.0 ? Symmetry::Skew : Symmetry::None;
  return op;
}

SparseOperator q_form_matrix(const SparseOperator& S, const SparseOperator& T, double sigma) {
  CSparse a = S.matrix + Complex(0.0, sigma) * identity(S.size());
  SparseOperator op;
  op.matrix = CSparse(a.adjoint()) * a + CSparse(T.matrix.adjoint()) * T.matrix;
  op.matrix.prune(Complex(0.0, 0.0));
  op.matrix.makeCompressed();
  op.symmetry = Symmetry::Hermitian;
  return op;
}

double q_form_twisted(const GridField& u, double sigma, const SparseOperator& S,
                      const SparseOperator& T, const Grid& g) {
  double a = g.norm(S.apply(u) + Complex(0.0, sigma) * u);
  double b = g.norm(T.apply(u));
  return a * a + b * b;
}

KernelK kernel_K(double sigma, const SparseOperator& S, const SparseOperator& T, double tol,
                 std::uint64_t seed) {
  const int n = S.size();
  SparseOperator M = q_form_matrix(S, T, sigma);
  const double scale = std::max(1.0, max_row_sum(M.matrix));
  KernelK out;
  out.threshold = tol * tol;
  CSparse shifted_a = S.matrix + Complex(0.0, sigma) * identity(n);
  auto form_value = [&](const CVector& x) {
    return (shifted_a * x).squaredNorm() + (T.matrix * x).squaredNorm();
  };
  int k_try = std::min(n, 4);
  while (true) {
    KrylovOptions opt;
    opt.tol = 1e-11 * scale;
    opt.shift = 1e-6 * scale;
    opt.seed = seed;
    opt.block = std::min(n, k_try + 4);
    opt.extra = 4;
    auto eig = lowest_eigs<Complex>(M.matrix, k_try, opt);
    RVector values(k_try);
    for (int i = 0; i < k_try; ++i) values(i) = form_value(eig.vectors.col(i));
    int d = 0;
    for (int i = 0; i < k_try; ++i)
      if (values(i) <= out.threshold) ++d;
    if (d < k_try || k_try == n) {
      std::vector<int> keep;
      for (int i = 0; i < k_try; ++i)
        if (values(i) <= out.threshold) keep.push_back(i);
      CMatrix basis(n, static_cast<int>(keep.size()));
      for (std::size_t i = 0; i < keep.size(); ++i) basis.col(static_cast<int>(i)) = eig.vectors.col(keep[i]);
      out.basis = orthonormalize(basis);
      out.dim = static_cast<int>(out.basis.cols());
      out.form_values = values;
      return out;
    }
    k_try = std::min(n, 2 * k_try);
  }
}

DeficiencyData deficiency_spaces(double sigma, const SparseOperator& S, const SparseOperator& T,
                                 double rank_tol, std::uint64_t seed) {
  if (S.size() > 20000) {
    throw Unsupported("deficiency spaces are limited to 20000 unknowns, got " +
                      std::to_string(S.size()));
  }
  DeficiencyData d;
  d.sigma = sigma;
  d.rank_tol = rank_tol;
  // (d-)^H = -d+ and (d+)^H = -d-, so the adjoint kernels are kernels of d+ and d-.
  NullSpace plus = null_space(assemble_cr(S, T, sigma, CRSign::Plus).matrix, rank_tol, seed);
  NullSpace minus = null_space(assemble_cr(S, T, sigma, CRSign::Minus).matrix, rank_tol, seed);
  d.basis_plus = plus.basis;
  d.basis_minus = minus.basis;
  d.d_plus = plus.dim;
  d.d_minus = minus.dim;
  d.singular_plus = plus.singular_values;
  d.singular_minus = minus.singular_values;
  d.gap = std::min(plus.gap, minus.gap);
  return d;
}

double isometry_residual(const GridField& u, double sigma, CRSign sign, const SparseOperator& S,
                         const SparseOperator& T, const Grid& g) {
  double a = g.norm(assemble_cr(S, T, sigma, sign).apply(u));
  return std::abs(a * a - q_form_twisted(u, sigma, S, T, g));
}

FormComparison form_comparison_scan(double sigma, const SparseOperator& S, const SparseOperator& T,
                                    const EigenBasis& basis, double kernel_tol, double zero_tol) {
  const int n = S.size();
  FormComparison out;
  std::vector<int> pos, zero;
  for (int k = 0; k < basis.size(); ++k) (basis.eigenvalues(k) > zero_tol ? pos : zero).push_back(k);
  CMatrix excluded(n, 0);
  if (!zero.empty()) {
    CMatrix z(n, static_cast<int>(zero.size()));
    for (std::size_t i = 0; i < zero.size(); ++i) z.col(static_cast<int>(i)) = basis.vectors.col(zero[i]);
    excluded = orthonormalize(z);
  }
  if (sigma != 0.0) {
    KernelK ker = kernel_K(sigma, S, T, kernel_tol, basis.seed);
    out.kernel_dim = ker.dim;
    if (ker.dim > 0) {
      CMatrix both(n, excluded.cols() + ker.dim);
      both << excluded, ker.basis;
      excluded = orthonormalize(both);
    }
  }
  CMatrix span(n, static_cast<int>(pos.size()));
  for (std::size_t i = 0; i < pos.size(); ++i) span.col(static_cast<int>(i)) = basis.vectors.col(pos[i]);
  CMatrix w = orthonormalize(span, excluded.cols() > 0 ? &excluded : nullptr, 1e-8);
  out.subspace_dim = static_cast<int>(w.cols());
  if (out.subspace_dim == 0) return out;
  if (sigma == 0.0) {
    out.c_lower = out.c_upper = 1.0;
    return out;
  }
  CMatrix sw = S.matrix * w, tw = T.matrix * w;
  CMatrix b = sw.adjoint() * sw + tw.adjoint() * tw;
  CMatrix ssw = sw + Complex(0.0, sigma) * w;
  CMatrix a = ssw.adjoint() * ssw + tw.adjoint() * tw;
  a = (0.5 * (a + a.adjoint())).eval();
  b = (0.5 * (b + b.adjoint())).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<CMatrix> ges(a, b, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw NoConvergence("generalized eigenproblem failed");
  out.c_lower = ges.eigenvalues().minCoeff();
  out.c_upper = ges.eigenvalues().maxCoeff();
  return out;
}

TwistedScanRow twisted_scan_row(double sigma, const SparseOperator& S, const SparseOperator& T,
                                const EigenBasis& basis, double kernel_tol, double rank_tol,
                                std::uint64_t seed) {
  TwistedScanRow row;
  row.sigma = sigma;
  row.dim_K = kernel_K(sigma, S, T, kernel_tol, seed).dim;
  DeficiencyData def = deficiency_spaces(sigma, S, T, rank_tol, seed);
  row.d_plus = def.d_plus;
  row.d_minus = def.d_minus;
  row.gap = def.gap;
  FormComparison fc = form_comparison_scan(sigma, S, T, basis, kernel_tol);
  row.c_lower = fc.c_lower;
  row.c_upper = fc.c_upper;
  return row;
}

}  // namespace twistlab
