// Lowest eigenpairs of the Dirichlet form, Weyl counting and Sobolev norms.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twistlab/grid.hpp"
#include "twistlab/types.hpp"

namespace twistlab {

struct EigenBasis {
  RVector eigenvalues;     // ascending
  CMatrix vectors;         // columns orthonormal in the grid inner product
  RVector residuals;       // |Q e_k - lambda_k e_k| in the grid norm
  double residual_bound = 0.0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  int m = 0;
  int n_squares = 0;
  int subspace_dim = 0;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  // Number of eigenvalues below `tol_zero`, i.e. the numerical kernel of Q.
  int kernel_dimension(double tol_zero = 1e-8) const;
};

// K lowest eigenpairs of a hermitian positive semi-definite operator.
// Real operators are solved in real arithmetic. Throws NoConvergence.
EigenBasis lowest_eigenpairs(const SparseOperator& Q, const Grid& g, int K, double tol,
                             std::uint64_t seed = 0);

struct WeylPoint {
  double lambda = 0.0;
  long count = 0;
  double ratio = 0.0;
};

// Counts eigenvalues <= Lambda. Lambda must lie strictly below the largest
// resolved eigenvalue and be positive. Throws LambdaOutOfRange.
WeylPoint weyl_ratio(const EigenBasis& basis, double lambda);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Fits N(Lambda) against Lambda over n_points equally spaced Lambda in [lo, hi].
LinearFit weyl_fit(const EigenBasis& basis, double lo, double hi, int n_points,
                   std::vector<WeylPoint>* points = nullptr);

struct FriedrichsReport {
  double value = 0.0;
  double tail = 0.0;   // grid norm of u - Pi_K u
  int truncation = 0;  // K
};

// (sum_k (1 + lambda_k)^s |<u, e_k>|^2)^{1/2}. For s > 0 the tail mass
// must not exceed tail_tol * |u| (InsufficientBasis otherwise); for s <= 0
// the sum is truncated to the resolved basis.
FriedrichsReport friedrichs_report(const GridField& u, double s, const EigenBasis& basis,
                                   const Grid& g, double tail_tol = 1e-8);
double friedrichs_norm(const GridField& u, double s, const EigenBasis& basis, const Grid& g,
                       double tail_tol = 1e-8);

// (1/2 sum_{i+j<=k} |S^i T^j u|^2 + |T^i S^j u|^2)^{1/2}.
double weighted_norm(const GridField& u, int k, const SparseOperator& S, const SparseOperator& T,
                     const Grid& g);

struct NormEquivalence {
  double max_ratio = 0.0;  // max of |u|_k / ||u||_k
  double min_ratio = 0.0;
  int samples = 0;
};

NormEquivalence norm_equivalence_report(const std::vector<GridField>& samples, int k,
                                        const SparseOperator& S, const SparseOperator& T,
                                        const EigenBasis& basis, const Grid& g);

// Binary cache file: "FLTB", u32 version, u64 N, m, K, K float64
// eigenvalues, N*m*m*K interleaved (re, im) float64 vector entries, then a
// u64 CRC-64/XZ of everything before it. All little-endian.
void write_eigenbasis(const std::string& path, const EigenBasis& basis);
// Throws CacheError on a malformed file or checksum mismatch.
EigenBasis read_eigenbasis(const std::string& path);

}  // namespace twistlab
