#include "twistlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include "twistlab/errors.hpp"

#include <lapacke.h>

namespace twistlab {

namespace {

// Eigen-decomposition of a dense hermitian matrix by LAPACK's
// divide-and-conquer driver; eigenvalues ascending, vectors overwrite `a`.
void dense_hermitian_eig(RMatrix& a, RVector& w) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  w.resize(n);
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
  if (info != 0) throw NoConvergence("dsyevd failed with info " + std::to_string(info));
}

void dense_hermitian_eig(CMatrix& a, RVector& w) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  w.resize(n);
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                   reinterpret_cast<lapack_complex_double*>(a.data()), n, w.data());
  if (info != 0) throw NoConvergence("zheevd failed with info " + std::to_string(info));
}

RVector dense_hermitian_eigenvalues(RMatrix a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  RVector w(n);
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
  if (info != 0) throw NoConvergence("dsyevd failed with info " + std::to_string(info));
  return w;
}

RVector dense_hermitian_eigenvalues(CMatrix a) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  RVector w(n);
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n,
                                   reinterpret_cast<lapack_complex_double*>(a.data()), n, w.data());
  if (info != 0) throw NoConvergence("zheevd failed with info " + std::to_string(info));
  return w;
}

}  // namespace

CMatrix random_complex(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      double re = nd(rng);
      double im = nd(rng);
      m(r, c) = Complex(re, im);
    }
  return m;
}

RMatrix random_real(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  RMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = nd(rng);
  return m;
}

namespace {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> random_block(int rows, int cols,
                                                                  std::uint64_t seed) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return random_real(rows, cols, seed);
  } else {
    return random_complex(rows, cols, seed);
  }
}

// Orthonormalizes the columns of x against the first `dim` columns of v
// and among themselves. Columns that collapse are replaced by fresh random
// directions so the block keeps its width.
template <typename Scalar>
void orthonormalize_block(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x,
                          const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v, int dim,
                          std::uint64_t& refill_seed) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int b = static_cast<int>(x.cols());
  if (dim > 0) {
    // Block Gram-Schmidt, repeated when any column lost most of its norm.
    RVector before = x.colwise().norm();
    Mat coef = v.leftCols(dim).adjoint() * x;
    x.noalias() -= v.leftCols(dim) * coef;
    RVector after = x.colwise().norm();
    if ((after.array() < 0.7 * before.array()).any()) {
      coef = v.leftCols(dim).adjoint() * x;
      x.noalias() -= v.leftCols(dim) * coef;
    }
  }
  for (int j = 0; j < b; ++j) {
    for (int attempt = 0;; ++attempt) {
      double before = x.col(j).norm();
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i < j; ++i) {
          Scalar c = x.col(i).dot(x.col(j));
          x.col(j) -= c * x.col(i);
        }
      }
      double after = x.col(j).norm();
      if (after > 1e-3 * before && after > 0.0) {
        x.col(j) /= after;
        break;
      }
      if (after > 1e-10 * before && after > 0.0) {
        // Heavy cancellation: repeat the projection against the basis too.
        x.col(j) /= after;
        if (dim > 0) {
          Mat c = v.leftCols(dim).adjoint() * x.col(j);
          x.col(j).noalias() -= v.leftCols(dim) * c;
        }
        continue;
      }
      if (attempt > 5) throw NoConvergence("Krylov block lost rank repeatedly");
      x.col(j) = random_block<Scalar>(static_cast<int>(x.rows()), 1, refill_seed++).col(0);
    }
  }
}

template <typename Scalar>
EigenPairs<Scalar> dense_lowest(const Eigen::SparseMatrix<Scalar>& a, int k) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat dense = Mat(a);
  dense = (0.5 * (dense + dense.adjoint())).eval();
  RVector evals;
  dense_hermitian_eig(dense, evals);
  EigenPairs<Scalar> out;
  out.values = evals.head(k);
  out.vectors = dense.leftCols(k);
  out.residuals.resize(k);
  Mat r = a * out.vectors - out.vectors * out.values.asDiagonal();
  for (int i = 0; i < k; ++i) out.residuals(i) = r.col(i).norm();
  out.subspace_dim = static_cast<int>(a.rows());
  return out;
}


// Block shift-invert Lanczos-type iteration; `solve` applies (A + shift I)^{-1},
// or nullptr to factorize A + shift I here.
template <typename Scalar, typename Solve>
EigenPairs<Scalar> krylov_lowest(const Eigen::SparseMatrix<Scalar>& a, int k,
                                 const KrylovOptions& opt, const Solve* solve) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Sp = Eigen::SparseMatrix<Scalar>;
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw DimensionMismatch("eigensolver needs a square matrix");
  if (k < 0 || k > n) {
    throw DimensionMismatch("requested " + std::to_string(k) + " eigenpairs of a " +
                            std::to_string(n) + "-dimensional operator");
  }
  if (k == 0) return {};

  const int b = opt.block > 0 ? opt.block : std::clamp(k, 4, 16);
  const int extra = opt.extra >= 0 ? opt.extra : std::max(b, k / 10);
  const int target = std::min(n, k + extra);
  int max_dim = opt.max_dim > 0 ? opt.max_dim : std::max({6 * target, target + 10 * b, 200});
  max_dim = std::min(max_dim, n);

  if (n <= opt.dense_cutoff || (max_dim >= n && n <= 3000) || target + 2 * b > max_dim) {
    if (n > 4000) throw NoConvergence("subspace budget too small for the requested pairs");
    return dense_lowest(a, k);
  }

  Eigen::SimplicialLDLT<Sp, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  if (solve == nullptr) {
    Sp id(n, n);
    id.setIdentity();
    Sp shifted = a + Scalar(opt.shift) * id;
    ldlt.compute(shifted);
    if (ldlt.info() != Eigen::Success) throw NoConvergence("shifted factorization failed");
  }
  auto inverse = [&](const Mat& rhs) -> Mat {
    if (solve != nullptr) return (*solve)(rhs);
    return ldlt.solve(rhs);
  };

  int capacity = std::min(max_dim, 2 * target + 4 * b);
  Mat v(n, capacity), av(n, capacity), h(capacity, capacity);
  h.setZero();
  int dim = 0;
  std::uint64_t refill_seed = opt.seed * 0x9E3779B97F4A7C15ULL + 1;
  Mat x = random_block<Scalar>(n, b, opt.seed);
  int next_check = std::min(max_dim, target + b);
  double worst = std::numeric_limits<double>::infinity();
  RVector previous;

  while (true) {
    if (dim + b > capacity) {
      int grown = std::min(max_dim, std::max(capacity * 3 / 2, dim + b));
      v.conservativeResize(n, grown);
      av.conservativeResize(n, grown);
      Mat h2 = Mat::Zero(grown, grown);
      h2.topLeftCorner(dim, dim) = h.topLeftCorner(dim, dim);
      h.swap(h2);
      capacity = grown;
    }
    orthonormalize_block<Scalar>(x, v, dim, refill_seed);
    v.middleCols(dim, b) = x;
    Mat ax = a * x;
    av.middleCols(dim, b) = ax;
    Mat col = v.leftCols(dim + b).adjoint() * ax;
    h.block(0, dim, dim + b, b) = col;
    h.block(dim, 0, b, dim) = col.topRows(dim).adjoint();
    dim += b;

    if (dim >= next_check || dim + b > max_dim) {
      Mat hd = h.topLeftCorner(dim, dim);
      hd = (0.5 * (hd + hd.adjoint())).eval();
      const bool last_chance = dim + b > max_dim;
      if (!last_chance) {
        // Cheap test first: the wanted Ritz values must have settled.
        RVector now = dense_hermitian_eigenvalues(Mat(hd)).head(k);
        bool settled = previous.size() == k;
        if (settled) {
          for (int i = 0; i < k; ++i) {
            double scale = std::max(1.0, std::abs(now(i)));
            if (std::abs(now(i) - previous(i)) > 1e-9 * scale + opt.tol) settled = false;
          }
        }
        previous = now;
        if (!settled) {
          next_check = dim + std::max(b, dim / 5);
          x = inverse(x);
          continue;
        }
      }
      RVector evals;
      dense_hermitian_eig(hd, evals);
      Mat c = hd.leftCols(k);
      RVector theta = evals.head(k);
      Mat y = v.leftCols(dim) * c;
      Mat r = av.leftCols(dim) * c - y * theta.asDiagonal();
      RVector res(k);
      bool converged = true;
      worst = 0.0;
      for (int i = 0; i < k; ++i) {
        res(i) = r.col(i).norm();
        double excess = res(i) - opt.rel_tol * std::abs(theta(i));
        worst = std::max(worst, excess);
        if (excess > opt.tol) converged = false;
      }
      if (converged) {
        EigenPairs<Scalar> out;
        out.values = theta;
        out.vectors = y;
        out.residuals = res;
        out.subspace_dim = dim;
        return out;
      }
      next_check = dim + std::max(b, dim / 3);
      if (dim + b > max_dim) {
        std::ostringstream os;
        os << "eigensolver reached subspace dimension " << dim << " with residual excess " << worst
           << " > tol " << opt.tol;
        throw NoConvergence(os.str());
      }
    }
    x = inverse(x);
  }
}

}  // namespace

template <typename Scalar>
EigenPairs<Scalar> lowest_eigs(const Eigen::SparseMatrix<Scalar>& a, int k,
                               const KrylovOptions& opt) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Fn = std::function<Mat(const Mat&)>;
  return krylov_lowest<Scalar, Fn>(a, k, opt, nullptr);
}

EigenPairs<Complex> lowest_eigs_with_solver(const CSparse& a, int k, const KrylovOptions& opt,
                                            const ShiftedSolve& shifted_solve) {
  return krylov_lowest<Complex, ShiftedSolve>(a, k, opt, &shifted_solve);
}

template EigenPairs<double> lowest_eigs<double>(const RSparse&, int, const KrylovOptions&);
template EigenPairs<Complex> lowest_eigs<Complex>(const CSparse&, int, const KrylovOptions&);

double spectral_norm_estimate(const CSparse& a, std::uint64_t seed, int iterations) {
  CVector x = random_complex(static_cast<int>(a.cols()), 1, seed ^ 0x5DEECE66DULL).col(0);
  x.normalize();
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    CVector y = a * x;
    CVector z = a.adjoint() * y;
    double nz = z.norm();
    if (nz == 0.0) return 0.0;
    est = std::sqrt(std::abs(x.dot(z)));
    x = z / nz;
  }
  return est;
}

CMatrix orthonormalize(const CMatrix& m, const CMatrix* against, double drop) {
  CMatrix x = m;
  if (against != nullptr && against->cols() > 0) {
    for (int pass = 0; pass < 2; ++pass) x -= (*against) * (against->adjoint() * x);
  }
  std::vector<int> keep;
  for (int j = 0; j < x.cols(); ++j) {
    double before = m.col(j).norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (int i : keep) x.col(j) -= x.col(i).dot(x.col(j)) * x.col(i);
      if (against != nullptr && against->cols() > 0)
        x.col(j) -= (*against) * (against->adjoint() * x.col(j));
    }
    double after = x.col(j).norm();
    if (after > drop * before && after > 0.0) {
      x.col(j) /= after;
      keep.push_back(j);
    }
  }
  CMatrix out(x.rows(), static_cast<int>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<int>(i)) = x.col(keep[i]);
  return out;
}

namespace {

void finish_null_space(NullSpace& ns, const RVector& s, double ambiguity) {
  double max_zero = 0.0;
  double min_nonzero = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) <= ns.threshold) max_zero = std::max(max_zero, s(i));
    else min_nonzero = std::min(min_nonzero, s(i));
  }
  ns.gap = max_zero > 0.0 ? min_nonzero / max_zero
                          : (std::isinf(min_nonzero) ? min_nonzero : min_nonzero / std::max(ns.threshold, 1e-300));
  if (ambiguity > 1.0 && ns.threshold > 0.0) {
    for (int i = 0; i < s.size(); ++i) {
      if (s(i) > ns.threshold / ambiguity && s(i) < ns.threshold * ambiguity) {
        std::ostringstream os;
        os << "singular value " << s(i) << " lies within a factor " << ambiguity
           << " of the rank threshold " << ns.threshold << " (gap " << ns.gap << ")";
        throw RankAmbiguous(os.str());
      }
    }
  }
}

}  // namespace

NullSpace null_space(const CSparse& a, double rank_tol, std::uint64_t seed, double ambiguity) {
  const int n = static_cast<int>(a.cols());
  NullSpace ns;
  if (n <= 600) {
    CMatrix dense = CMatrix(a);
    Eigen::BDCSVD<CMatrix> svd(dense, Eigen::ComputeFullV);
    RVector sv = svd.singularValues();  // descending
    ns.norm_estimate = sv.size() > 0 ? sv(0) : 0.0;
    ns.threshold = rank_tol * ns.norm_estimate;
    RVector asc = sv.reverse();
    ns.singular_values = asc;
    int d = 0;
    for (int i = 0; i < asc.size(); ++i)
      if (asc(i) <= ns.threshold) ++d;
    ns.dim = d;
    ns.basis = svd.matrixV().rightCols(d).rowwise().reverse();
    finish_null_space(ns, asc, ambiguity);
    return ns;
  }

  ns.norm_estimate = spectral_norm_estimate(a, seed);
  ns.threshold = rank_tol * ns.norm_estimate;
  CSparse gram = CSparse(a.adjoint()) * a;
  const double scale = ns.norm_estimate * ns.norm_estimate;

  // For A^H = -A and real mu, (A - mu)^H (A - mu) = A^H A + mu^2.
  std::shared_ptr<Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>>> lu;
  ShiftedSolve shifted_solve;
  double shift = 1e-6 * scale;
  if (CSparse(a + CSparse(a.adjoint())).norm() == 0.0) {
    // A - mu stays invertible for any real mu > 0, so a small shift is safe
    // and separates the lowest singular values well.
    shift = 1e-10 * scale;
    const double mu = std::sqrt(shift);
    CSparse id(n, n);
    id.setIdentity();
    CSparse shifted = a - Complex(mu) * id;
    lu = std::make_shared<Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>>>();
    lu->analyzePattern(shifted);
    lu->factorize(shifted);
    if (lu->info() != Eigen::Success) shift = 1e-6 * scale;
    if (lu->info() == Eigen::Success) {
      shifted_solve = [lu](const CMatrix& b) -> CMatrix {
        CMatrix y = lu->adjoint().solve(b);
        return lu->solve(y);
      };
    }
  }
  int k_try = 2;
  while (true) {
    KrylovOptions opt;
    opt.tol = 1e-12 * scale;
    opt.rel_tol = 1e-2;
    opt.shift = shift;
    opt.seed = seed;
    opt.block = std::min(n, k_try + 2);
    opt.extra = 4;
    auto eig = shifted_solve ? lowest_eigs_with_solver(gram, std::min(k_try, n), opt, shifted_solve)
                             : lowest_eigs<Complex>(gram, std::min(k_try, n), opt);
    const int got = static_cast<int>(eig.values.size());
    RVector s(got);
    for (int i = 0; i < got; ++i) s(i) = (a * eig.vectors.col(i)).norm();
    int d = 0;
    for (int i = 0; i < got; ++i)
      if (s(i) <= ns.threshold) ++d;
    if (d < got || got == n) {
      std::vector<int> order(got);
      for (int i = 0; i < got; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return s(x) < s(y); });
      RVector sorted(got);
      CMatrix vecs(n, got);
      for (int i = 0; i < got; ++i) {
        sorted(i) = s(order[i]);
        vecs.col(i) = eig.vectors.col(order[i]);
      }
      if (shifted_solve && d > 0) {
        // Block inverse iteration with the factorized shift polishes the
        // null vectors far below the Krylov stopping tolerance.
        CMatrix block = vecs.leftCols(d);
        for (int sweep = 0; sweep < 2; ++sweep) {
          Eigen::HouseholderQR<CMatrix> qr(shifted_solve(block));
          block = qr.householderQ() * CMatrix::Identity(n, d);
        }
        vecs.leftCols(d) = block;
        for (int i = 0; i < d; ++i) sorted(i) = (a * block.col(i)).norm();
      }
      ns.singular_values = sorted;
      ns.dim = d;
      ns.basis = vecs.leftCols(d);
      finish_null_space(ns, sorted, ambiguity);
      return ns;
    }
    k_try *= 2;
  }
}

CSparse bordered(const CSparse& a, const CMatrix& right, const CMatrix& bottom_adjoint) {
  const int n = static_cast<int>(a.rows());
  const int d = static_cast<int>(right.cols());
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros()) + 2 * static_cast<std::size_t>(n) * d);
  for (int k = 0; k < a.outerSize(); ++k)
    for (CSparse::InnerIterator it(a, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < n; ++i) {
      if (right(i, j) != Complex(0.0)) trips.emplace_back(i, n + j, right(i, j));
      Complex b = std::conj(bottom_adjoint(i, j));
      if (b != Complex(0.0)) trips.emplace_back(n + j, i, b);
    }
  CSparse out(n + d, n + d);
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

MinNormSolver::MinNormSolver(const CSparse& a, const CMatrix& kernel, const CMatrix& cokernel,
                             int refinement_steps)
    : a_(a), kernel_(kernel), cokernel_(cokernel), n_(static_cast<int>(a.rows())),
      d_(static_cast<int>(kernel.cols())), refine_(refinement_steps) {
  if (a.rows() != a.cols()) throw DimensionMismatch("minimal-norm solver needs a square matrix");
  if (kernel.cols() != cokernel.cols()) {
    throw DimensionMismatch("kernel dimension " + std::to_string(kernel.cols()) +
                            " differs from cokernel dimension " + std::to_string(cokernel.cols()));
  }
  CSparse big = d_ > 0 ? bordered(a, cokernel, kernel) : a;
  lu_ = std::make_shared<Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>>>();
  lu_->analyzePattern(big);
  lu_->factorize(big);
  if (lu_->info() != Eigen::Success) {
    n_ = 0;
    throw LsqNoConvergence("sparse LU of the bordered system failed: " + lu_->lastErrorMessage());
  }
}

namespace {
// Refinement stops once the bordered residual is at rounding level.
constexpr double kRefineStop = 1e-14;
}  // namespace

CVector MinNormSolver::solve(const CVector& b) const {
  CVector rhs = CVector::Zero(n_ + d_);
  rhs.head(n_) = b;
  CVector sol = lu_->solve(rhs);
  for (int step = 0; step < refine_; ++step) {
    CVector r = rhs;
    r.head(n_) -= a_ * sol.head(n_);
    if (d_ > 0) {
      r.head(n_) -= cokernel_ * sol.tail(d_);
      r.tail(d_) -= kernel_.adjoint() * sol.head(n_);
    }
    if (r.norm() <= kRefineStop * rhs.norm()) break;
    sol += lu_->solve(r);
  }
  return sol.head(n_);
}

CVector MinNormSolver::solve_adjoint(const CVector& b) const {
  CVector rhs = CVector::Zero(n_ + d_);
  rhs.head(n_) = b;
  CVector sol = lu_->adjoint().solve(rhs);
  for (int step = 0; step < refine_; ++step) {
    CVector r = rhs;
    r.head(n_) -= a_.adjoint() * sol.head(n_);
    if (d_ > 0) {
      r.head(n_) -= kernel_ * sol.tail(d_);
      r.tail(d_) -= cokernel_.adjoint() * sol.head(n_);
    }
    if (r.norm() <= kRefineStop * rhs.norm()) break;
    sol += lu_->adjoint().solve(r);
  }
  return sol.head(n_);
}

}  // namespace twistlab
