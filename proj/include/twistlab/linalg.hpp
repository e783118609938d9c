// Sparse linear-algebra kernels: a shift-invert block Krylov eigensolver
// for hermitian positive semi-definite matrices, numerical null spaces and
// a bordered sparse LU for minimal-norm solves of rank-deficient square
// systems. All bases here are orthonormal in the Euclidean inner product.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>

#include <Eigen/SparseLU>

#include "twistlab/types.hpp"

namespace twistlab {

struct KrylovOptions {
  double tol = 1e-8;           // absolute residual bound |A y - lambda y| for unit y
  double rel_tol = 0.0;        // plus rel_tol * |lambda| per pair
  double shift = 1.0;          // factorizes A + shift*I
  std::uint64_t seed = 0;
  int block = 0;               // 0 picks a size from the number of wanted pairs
  int extra = -1;              // extra Ritz pairs carried along; -1 picks a default
  int max_dim = 0;             // 0 picks a default
  int dense_cutoff = 400;      // at or below this size use a dense eigensolver
};

template <typename Scalar>
struct EigenPairs {
  RVector values;                                            // ascending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;  // unit columns
  RVector residuals;
  int subspace_dim = 0;
};

// k smallest eigenpairs of a hermitian positive semi-definite matrix.
// Throws NoConvergence if the residual bound is not met within max_dim.
template <typename Scalar>
EigenPairs<Scalar> lowest_eigs(const Eigen::SparseMatrix<Scalar>& a, int k,
                               const KrylovOptions& opt);

// Applies (A + shift I)^{-1} to a block of vectors.
using ShiftedSolve = std::function<CMatrix(const CMatrix&)>;

// Same iteration with a caller-supplied shifted solver instead of a sparse
// LDL^T factorization.
EigenPairs<Complex> lowest_eigs_with_solver(const CSparse& a, int k, const KrylovOptions& opt,
                                            const ShiftedSolve& shifted_solve);

// Seeded standard complex Gaussian fields (real and imaginary parts N(0,1)).
CMatrix random_complex(int rows, int cols, std::uint64_t seed);
RMatrix random_real(int rows, int cols, std::uint64_t seed);

// Estimate of the largest singular value by power iteration on A^H A.
double spectral_norm_estimate(const CSparse& a, std::uint64_t seed = 0, int iterations = 60);

struct NullSpace {
  CMatrix basis;           // Euclidean-orthonormal columns
  int dim = 0;
  RVector singular_values; // smallest computed singular values, ascending
  double threshold = 0.0;  // rank_tol * norm_estimate
  double norm_estimate = 0.0;
  // Ratio of the smallest retained nonzero singular value to the largest
  // discarded one (infinite if nothing was discarded).
  double gap = 0.0;
};

// Numerical null space {x : |A x| <= rank_tol * |A|_2 |x|}.
// Operators with A^H = -A exactly are handled through a sparse LU of A - mu I.
// Throws RankAmbiguous when a singular value lies within a factor
// `ambiguity` of the threshold.
NullSpace null_space(const CSparse& a, double rank_tol, std::uint64_t seed = 0,
                     double ambiguity = 10.0);

// Minimal-norm least-squares solver for a square matrix A with known
// orthonormal kernel basis N and cokernel basis C (kernel of A^H):
// solve() returns x with A x = P b, where P projects off span(C), and
// N^H x = 0. Built on one sparse LU of the bordered matrix
//   [ A    C ]
//   [ N^H  0 ].
// Solving is const and safe to call concurrently.
class MinNormSolver {
 public:
  MinNormSolver() = default;
  MinNormSolver(const CSparse& a, const CMatrix& kernel, const CMatrix& cokernel,
                int refinement_steps = 2);

  bool valid() const { return n_ > 0; }
  int size() const { return n_; }
  // Minimal-norm solution of A x = P b.
  CVector solve(const CVector& b) const;
  // Minimal-norm solution of A^H x = P' b with P' projecting off span(N).
  CVector solve_adjoint(const CVector& b) const;

  const CMatrix& kernel() const { return kernel_; }
  const CMatrix& cokernel() const { return cokernel_; }
  const CSparse& matrix() const { return a_; }

 private:
  CSparse a_;
  CMatrix kernel_, cokernel_;
  int n_ = 0, d_ = 0, refine_ = 2;
  std::shared_ptr<Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>>> lu_;
};

// Sparse matrix built from the columns of a dense block, for bordering.
CSparse bordered(const CSparse& a, const CMatrix& right, const CMatrix& bottom_adjoint);

// Orthonormalizes the columns of m in place (two passes of classical
// Gram-Schmidt against `against` first); returns the numerical rank kept.
CMatrix orthonormalize(const CMatrix& m, const CMatrix* against = nullptr, double drop = 1e-10);

}  // namespace twistlab
