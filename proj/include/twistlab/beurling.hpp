// Beurling-type operators built from the twisted Cauchy-Riemann pair:
// the partial isometry d+ (d-)^{-1}, its unitary extension by a finite
// rank isometry J between deficiency spaces, the resolvent, and boundary
// analytics of Cauchy integrals on the unit disk.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "twistlab/grid.hpp"
#include "twistlab/linalg.hpp"
#include "twistlab/twisted.hpp"
#include "twistlab/types.hpp"

namespace twistlab {

// Matrix-free U_sigma w = d+ v with d- v = pi- w and v orthogonal to ker d-.
// pi- projects onto Ran d- = (ker d+)^perp.
class PartialIsometry {
 public:
  PartialIsometry(const SparseOperator& S, const SparseOperator& T, const DeficiencyData& def);
  GridField apply(const GridField& w) const;
  // Projection onto Ran d-.
  GridField project_domain(const GridField& w) const;
  const SparseOperator& plus() const { return plus_; }
  const SparseOperator& minus() const { return minus_; }
  const MinNormSolver& solver_plus() const { return solve_plus_; }
  const MinNormSolver& solver_minus() const { return solve_minus_; }
  const DeficiencyData& deficiency() const { return def_; }
  int size() const { return plus_.size(); }

 private:
  SparseOperator plus_, minus_;
  DeficiencyData def_;
  MinNormSolver solve_plus_, solve_minus_;
};

// One-shot form: builds deficiency data and solvers, then applies.
GridField apply_partial_isometry(const GridField& w, double sigma, const SparseOperator& S,
                                 const SparseOperator& T, double rank_tol = 1e-8);

// Unitary U_J = U pi- + J (I - pi-). Where [S, T] != 0 the grid partial
// isometry misses exact isometry by a finite-rank defect; U is its polar
// factor U_sigma (U_sigma^H U_sigma)^{-1/2} on Ran d-, computed from a
// low-rank eigendecomposition supported on the commutator cells.
class UnitaryExtension {
 public:
  UnitaryExtension(const SparseOperator& S, const SparseOperator& T, const DeficiencyData& def,
                   std::uint64_t J_seed = 0, int probes = 8);

  GridField apply(const GridField& u) const;
  GridField apply_adjoint(const GridField& u) const;

  int size() const { return iso_.size(); }
  int deficiency_dim() const { return static_cast<int>(J_.rows()); }
  double sigma() const { return iso_.deficiency().sigma; }
  std::uint64_t J_seed() const { return J_seed_; }
  // d x d unitary coefficient matrix of J in the deficiency bases.
  const CMatrix& J_matrix() const { return J_; }
  // Max over random probes of |U^H U u - u| / |u|.
  double unitarity_defect() const { return unitarity_defect_; }
  // Rank of the polar correction and its largest deviation |(1+d)^{-1/2} - 1|.
  int correction_rank() const { return static_cast<int>(Y_.cols()); }
  double correction_size() const;
  // Dense matrix; only for sizes up to 2000 (throws Unsupported above).
  CMatrix dense() const;

  const PartialIsometry& partial_isometry() const { return iso_; }
  // Pieces used by the resolvent: U = U_base + P diag(delta) Y^H.
  const CMatrix& correction_basis() const { return Y_; }
  const RVector& correction_weights() const { return delta_; }
  const CMatrix& correction_image() const { return P_; }
  GridField apply_base(const GridField& u) const;

 private:
  PartialIsometry iso_;
  std::uint64_t J_seed_ = 0;
  CMatrix J_;      // d x d
  CMatrix Y_;      // n x r, orthonormal, inside Ran d-
  RVector delta_;  // (1 + d_i)^{-1/2} - 1
  CMatrix P_;      // U_sigma Y
  double unitarity_defect_ = 0.0;
};

UnitaryExtension extend_unitary(const SparseOperator& S, const SparseOperator& T,
                                const DeficiencyData& def, std::uint64_t J_seed = 0);

// Seeded Haar-distributed unitary d x d; seed 0 gives the identity.
CMatrix seeded_unitary(int d, std::uint64_t seed);

// (U - z)^{-1} for a fixed z off the unit circle. The base part is one
// sparse LU of a bordered system; the polar correction enters by a
// Woodbury update. Solves are refined against U itself.
class Resolvent {
 public:
  Resolvent(const UnitaryExtension& U, Complex z);
  // Relative residual target tol; the refinement budget grows like
  // 1/dist(z, unit circle). Throws NoConvergence.
  GridField apply(const GridField& f, double tol = 1e-10) const;
  Complex z() const { return z_; }
  int last_iterations() const { return last_iterations_; }

 private:
  GridField apply_inverse_approx(const GridField& f) const;
  GridField solve_base(const GridField& f) const;
  const UnitaryExtension* U_;
  Complex z_;
  std::shared_ptr<Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>>> lu_;
  CMatrix BinvP_;   // (U_base - z)^{-1} P
  CMatrix cap_;     // (I + Y^H B^{-1} P Delta)^{-1}
  int n_ = 0, d_ = 0;
  mutable int last_iterations_ = 0;
};

GridField resolvent_apply(const UnitaryExtension& U, Complex z, const GridField& u,
                          double tol = 1e-10);

// ---- boundary analytics on the unit disk ----

struct Atom {
  double t = 0.0;   // position e^{it} on the circle, t in [0, 2 pi)
  Complex weight;
};

class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  explicit AtomicMeasure(std::vector<Atom> atoms);
  const std::vector<Atom>& atoms() const { return atoms_; }
  double total_mass() const { return total_mass_; }
  AtomicMeasure scaled(Complex c) const;
  // n_atoms atoms at uniform positions with complex Gaussian weights.
  static AtomicMeasure random(int n_atoms, std::uint64_t seed);

 private:
  std::vector<Atom> atoms_;
  double total_mass_ = 0.0;
};

// I_mu(z) = sum_j a_j / (z - e^{i t_j}); intended for |z| < 1 and, as a
// boundary value, for |z| = 1 away from the atoms.
Complex cauchy_integral(const AtomicMeasure& mu, Complex z);
Complex cauchy_boundary_value(const AtomicMeasure& mu, double theta);

using DiskFunction = std::function<Complex(Complex)>;

// Sample points of the cone Omega_alpha(theta), the convex hull of e^{i theta}
// and the disk of radius alpha. Points are e^{i theta}(1 - delta e^{i psi})
// with delta = 2^{-j}, j = 1..radial_samples, and psi on a fixed grid of
// spacing pi/64 restricted to |psi| <= arcsin(alpha), delta kept inside the
// cone. The ray psi = 0 is always included.
std::vector<Complex> cone_samples(double alpha, double theta, int radial_samples);

// N_alpha(Phi)(theta) on each theta, as the sampled maximum of |Phi|.
std::vector<double> maximal_function_scan(const DiskFunction& eval, double alpha,
                                          const std::vector<double>& theta_grid,
                                          int radial_samples);

struct WeakTypeReport {
  double constant = 0.0;     // max_t t * L{|I*| > t} / |mu|
  double worst_t = 0.0;
};

// L is the normalized Lebesgue measure, estimated by the fraction of grid
// points. Atoms should not sit on theta_grid points.
WeakTypeReport weak_type_check(const AtomicMeasure& mu, const std::vector<double>& t_grid,
                               const std::vector<double>& theta_grid);

// sup over r in r_grid of (mean over theta of |Phi(r e^{i theta})|^p)^{1/p}.
double hardy_pnorm(const DiskFunction& eval, double p, const std::vector<double>& r_grid,
                   const std::vector<double>& theta_grid);

std::vector<double> uniform_grid(int n, double lo = 0.0, double hi = kTwoPi, bool shift_half = true);

}  // namespace twistlab
