#include "twistlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twistlab/errors.hpp"
#include "twistlab/linalg.hpp"

namespace twistlab {

int EigenBasis::kernel_dimension(double tol_zero) const {
  int d = 0;
  for (int k = 0; k < size(); ++k)
    if (std::abs(eigenvalues(k)) <= tol_zero) ++d;
  return d;
}

namespace {

bool is_real(const CSparse& a) {
  for (int k = 0; k < a.outerSize(); ++k)
    for (CSparse::InnerIterator it(a, k); it; ++it)
      if (it.value().imag() != 0.0) return false;
  return true;
}

}  // namespace

EigenBasis lowest_eigenpairs(const SparseOperator& Q, const Grid& g, int K, double tol,
                             std::uint64_t seed) {
  if (Q.size() != g.size()) throw DimensionMismatch("operator size does not match the grid");
  KrylovOptions opt;
  opt.tol = tol;
  opt.seed = seed;
  opt.shift = 1.0;
  EigenBasis basis;
  if (is_real(Q.matrix)) {
    RSparse q = Q.matrix.real();
    auto pairs = lowest_eigs<double>(q, K, opt);
    basis.eigenvalues = pairs.values;
    basis.vectors = pairs.vectors.cast<Complex>();
    basis.residuals = pairs.residuals;
    basis.subspace_dim = pairs.subspace_dim;
  } else {
    auto pairs = lowest_eigs<Complex>(Q.matrix, K, opt);
    basis.eigenvalues = pairs.values;
    basis.vectors = pairs.vectors;
    basis.residuals = pairs.residuals;
    basis.subspace_dim = pairs.subspace_dim;
  }
  // Unit Euclidean vectors have grid norm 1/m; rescale to grid-orthonormal.
  // Residual norms are unchanged by this rescaling.
  basis.vectors *= static_cast<double>(g.m());
  basis.residual_bound = basis.residuals.size() > 0 ? basis.residuals.maxCoeff() : 0.0;
  basis.tol = tol;
  basis.seed = seed;
  basis.m = g.m();
  basis.n_squares = g.origami().n_squares();
  return basis;
}

WeylPoint weyl_ratio(const EigenBasis& basis, double lambda) {
  if (basis.size() == 0) throw LambdaOutOfRange("empty eigenbasis");
  double top = basis.eigenvalues(basis.size() - 1);
  if (!(lambda > 0.0) || !(lambda < top)) {
    std::ostringstream os;
    os << "Lambda = " << lambda << " outside the resolved range (0, " << top << ")";
    throw LambdaOutOfRange(os.str());
  }
  WeylPoint p;
  p.lambda = lambda;
  const double* begin = basis.eigenvalues.data();
  const double* end = begin + basis.size();
  p.count = static_cast<long>(std::upper_bound(begin, end, lambda) - begin);
  p.ratio = static_cast<double>(p.count) / lambda;
  return p;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  const std::size_t n = std::min(x.size(), y.size());
  f.n_points = static_cast<int>(n);
  if (n < 2) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r_squared = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

LinearFit weyl_fit(const EigenBasis& basis, double lo, double hi, int n_points,
                   std::vector<WeylPoint>* points) {
  std::vector<double> xs, ys;
  for (int i = 0; i < n_points; ++i) {
    double lambda = n_points > 1 ? lo + (hi - lo) * i / (n_points - 1) : lo;
    WeylPoint p = weyl_ratio(basis, lambda);
    xs.push_back(lambda);
    ys.push_back(static_cast<double>(p.count));
    if (points) points->push_back(p);
  }
  return fit_line(xs, ys);
}

FriedrichsReport friedrichs_report(const GridField& u, double s, const EigenBasis& basis,
                                   const Grid& g, double tail_tol) {
  if (u.size() != basis.vectors.rows()) throw DimensionMismatch("field size does not match basis");
  const double w = 1.0 / (static_cast<double>(g.m()) * g.m());
  CVector coef = w * (basis.vectors.adjoint() * u);  // <u, e_k>
  FriedrichsReport rep;
  rep.truncation = basis.size();
  rep.tail = g.norm(u - basis.vectors * coef);
  double unorm = g.norm(u);
  if (s > 0.0 && rep.tail > tail_tol * unorm) {
    std::ostringstream os;
    os << "tail mass " << rep.tail << " exceeds " << tail_tol << " * |u| = " << tail_tol * unorm
       << " with K = " << basis.size();
    throw InsufficientBasis(os.str());
  }
  double sum = 0.0;
  for (int k = 0; k < basis.size(); ++k)
    sum += std::pow(1.0 + std::max(basis.eigenvalues(k), 0.0), s) * std::norm(coef(k));
  rep.value = std::sqrt(sum);
  return rep;
}

double friedrichs_norm(const GridField& u, double s, const EigenBasis& basis, const Grid& g,
                       double tail_tol) {
  return friedrichs_report(u, s, basis, g, tail_tol).value;
}

double weighted_norm(const GridField& u, int k, const SparseOperator& S, const SparseOperator& T,
                     const Grid& g) {
  if (k < 0) throw DimensionMismatch("weighted norm order must be nonnegative");
  double sum = 0.0;
  // st[j] holds T^j u, then S^i T^j u as i grows; ts likewise with roles swapped.
  std::vector<GridField> st(k + 1), ts(k + 1);
  st[0] = u;
  ts[0] = u;
  for (int j = 1; j <= k; ++j) {
    st[j] = T.apply(st[j - 1]);
    ts[j] = S.apply(ts[j - 1]);
  }
  for (int i = 0; i <= k; ++i) {
    for (int j = 0; i + j <= k; ++j) {
      double a = g.norm(st[j]);
      double b = g.norm(ts[j]);
      sum += 0.5 * (a * a + b * b);
    }
    for (int j = 0; i + j + 1 <= k; ++j) {
      st[j] = S.apply(st[j]);
      ts[j] = T.apply(ts[j]);
    }
  }
  return std::sqrt(sum);
}

NormEquivalence norm_equivalence_report(const std::vector<GridField>& samples, int k,
                                        const SparseOperator& S, const SparseOperator& T,
                                        const EigenBasis& basis, const Grid& g) {
  NormEquivalence rep;
  rep.max_ratio = 0.0;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (const GridField& u : samples) {
    double a = weighted_norm(u, k, S, T, g);
    double b = friedrichs_norm(u, static_cast<double>(k), basis, g);
    if (b == 0.0) continue;
    double r = a / b;
    rep.max_ratio = std::max(rep.max_ratio, r);
    rep.min_ratio = std::min(rep.min_ratio, r);
    ++rep.samples;
  }
  if (rep.samples == 0) rep.min_ratio = 0.0;
  return rep;
}

}  // namespace twistlab
