// Twisted Cauchy-Riemann operators (S + i sigma) +- iT, the twisted form
// Q_sigma, joint kernels and deficiency spaces.
//
// Bases returned by this module are orthonormal in the Euclidean inner
// product of the DOF vector; multiplying by m makes them grid-orthonormal.
#pragma once

#include <cstdint>
#include <vector>

#include "twistlab/grid.hpp"
#include "twistlab/spectral.hpp"
#include "twistlab/types.hpp"

namespace twistlab {

struct TwistParams {
  double sigma = 0.0;
  double theta = 0.0;
  double sigma_theta() const;  // sigma * cos(theta)
};

enum class CRSign { Plus, Minus };

// (S + i sigma I) + iT for Plus, (S + i sigma I) - iT for Minus.
SparseOperator assemble_cr(const SparseOperator& S, const SparseOperator& T, double sigma,
                           CRSign sign);

// Hermitian matrix of the form Q_sigma: (S + i sigma)^H (S + i sigma) + T^H T.
SparseOperator q_form_matrix(const SparseOperator& S, const SparseOperator& T, double sigma);

// Q_sigma(u, u) = |(S + i sigma) u|^2 + |T u|^2 in the grid norm.
double q_form_twisted(const GridField& u, double sigma, const SparseOperator& S,
                      const SparseOperator& T, const Grid& g);

struct KernelK {
  CMatrix basis;        // Euclidean-orthonormal columns
  int dim = 0;
  RVector form_values;  // lowest computed eigenvalues of the Q_sigma matrix
  double threshold = 0.0;
};

// Joint kernel {(S + i sigma) u = T u = 0} as the span of eigenvectors of
// the Q_sigma matrix with eigenvalue <= tol^2.
KernelK kernel_K(double sigma, const SparseOperator& S, const SparseOperator& T, double tol = 1e-6,
                 std::uint64_t seed = 0);

struct DeficiencyData {
  CMatrix basis_plus;   // kernel of (d-_sigma)^H, which equals ker d+_sigma
  CMatrix basis_minus;  // kernel of (d+_sigma)^H, which equals ker d-_sigma
  int d_plus = 0;
  int d_minus = 0;
  double rank_tol = 1e-8;
  double sigma = 0.0;
  double gap = 0.0;     // smaller of the two singular-value gaps at the threshold
  RVector singular_plus, singular_minus;
};

// Numerical null spaces of the adjoint twisted operators. Throws
// Unsupported above 20000 unknowns and RankAmbiguous on unclear rank.
DeficiencyData deficiency_spaces(double sigma, const SparseOperator& S, const SparseOperator& T,
                                 double rank_tol = 1e-8, std::uint64_t seed = 0);

// | |d+- u|^2 - Q_sigma(u, u) | in the grid norm.
double isometry_residual(const GridField& u, double sigma, CRSign sign, const SparseOperator& S,
                         const SparseOperator& T, const Grid& g);

struct FormComparison {
  double c_lower = 0.0;  // min of Q_sigma / Q_0 over the restricted subspace
  double c_upper = 0.0;  // max
  int subspace_dim = 0;
  int kernel_dim = 0;    // dim K_sigma that was projected out
};

// Extreme generalized Rayleigh quotients Q_sigma(u,u) / Q_0(u,u) over the
// span of the nonzero modes of `basis`, projected off K_sigma.
FormComparison form_comparison_scan(double sigma, const SparseOperator& S, const SparseOperator& T,
                                    const EigenBasis& basis, double kernel_tol = 1e-6,
                                    double zero_tol = 1e-8);

// One row of the twisted scan table.
struct TwistedScanRow {
  double sigma = 0.0;
  int dim_K = 0;
  int d_plus = 0;
  int d_minus = 0;
  double c_lower = 0.0;
  double c_upper = 0.0;
  double gap = 0.0;
};

// Joint kernel, deficiency dimensions and form comparison at one sigma.
TwistedScanRow twisted_scan_row(double sigma, const SparseOperator& S, const SparseOperator& T,
                                const EigenBasis& basis, double kernel_tol = 1e-6,
                                double rank_tol = 1e-8, std::uint64_t seed = 0);

}  // namespace twistlab
