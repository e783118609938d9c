// The twisted cohomological equation (S_theta + i sigma) u = f on the grid:
// operator assembly, invariant distributions (the cokernel), minimal-norm
// and resolvent-based solvers, and theta scans.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twistlab/beurling.hpp"
#include "twistlab/grid.hpp"
#include "twistlab/linalg.hpp"
#include "twistlab/spectral.hpp"
#include "twistlab/types.hpp"

namespace twistlab {

enum class TwistMode { Raw, CosScaled };
enum class SolveMethod { Lsq, Resolvent };

const char* to_string(TwistMode m);
const char* to_string(SolveMethod m);
TwistMode parse_twist_mode(const std::string& s);    // "raw" | "cos_scaled"
SolveMethod parse_solve_method(const std::string& s);  // "lsq" | "resolvent"

std::vector<double> default_rho_schedule();

struct SolveConfig {
  double theta = 0.0;
  double sigma = 0.0;
  TwistMode twist_mode = TwistMode::Raw;
  SolveMethod method = SolveMethod::Lsq;
  double lsq_tol = 1e-10;
  double rank_tol = 1e-8;
  std::vector<double> rho_schedule = default_rho_schedule();
  double boundary_tol = 1e-6;  // Cauchy criterion on w_rho, relative
  double sobolev_r = 0.0;
  double sobolev_s = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t J_seed = 0;

  // sigma or sigma cos(theta) according to twist_mode.
  double twist() const;
  // Throws ConfigError if the rho schedule is not strictly increasing in (0, 1).
  void validate() const;
};

// cos(theta) S + sin(theta) T + i twist I.
SparseOperator assemble_Ltheta(const SparseOperator& S, const SparseOperator& T,
                               const SolveConfig& cfg);

struct InvariantDistributions {
  CMatrix basis;           // Euclidean-orthonormal basis of ker L^H
  int dim = 0;
  RVector singular_values; // smallest singular values of L^H, ascending
  double threshold = 0.0;
  double gap = 0.0;
};

InvariantDistributions invariant_distributions(const SparseOperator& L, double rank_tol = 1e-8,
                                               std::uint64_t seed = 0);

struct RhoStep {
  double rho = 0.0;
  double w_norm = 0.0;      // grid norm of w_rho
  double increment = 0.0;   // grid norm of w_rho - w_previous
};

struct SolveReport {
  GridField solution;
  double residual = 0.0;          // grid norm of P f - L u, P projecting off the cokernel
  int obstruction_dim = 0;
  double obstruction_mass = 0.0;  // grid norm of the cokernel component of f
  int kernel_dim = 0;
  double norm_u_r = 0.0;
  double norm_f_s = 0.0;
  double ratio = 0.0;             // norm_u_r / norm_f_s (0 when f = 0)
  bool norms_computed = false;
  double obstruction_gap = 0.0;
  SolveMethod method = SolveMethod::Lsq;
  double theta = 0.0, sigma = 0.0, twist = 0.0;
  TwistMode twist_mode = TwistMode::Raw;
  std::vector<RhoStep> rho_trace;
};

// Sobolev norm used for the ratio: weighted norm for nonnegative integer
// orders, Friedrichs norm (needs a basis) otherwise.
double sobolev_norm(const GridField& u, double s, const SparseOperator& S, const SparseOperator& T,
                    const Grid& g, const EigenBasis* basis);

// Minimal-norm solver for one (theta, sigma): the kernel, cokernel and a
// bordered sparse LU are computed once and reused for every right side.
class CohomologicalSolver {
 public:
  CohomologicalSolver(const SparseOperator& S, const SparseOperator& T, const Grid& g,
                      const SolveConfig& cfg);
  SolveReport solve(const GridField& f, const EigenBasis* basis = nullptr) const;
  const SparseOperator& L() const { return L_; }
  const InvariantDistributions& cokernel() const { return coker_; }
  const CMatrix& kernel() const { return kernel_; }
  const SolveConfig& config() const { return cfg_; }

 private:
  const SparseOperator* S_;
  const SparseOperator* T_;
  const Grid* g_;
  SolveConfig cfg_;
  SparseOperator L_;
  CMatrix kernel_;
  InvariantDistributions coker_;
  double kernel_gap_ = 0.0;
  MinNormSolver solver_;
};

SolveReport solve_lsq(const GridField& f, const SparseOperator& S, const SparseOperator& T,
                      const Grid& g, const SolveConfig& cfg, const EigenBasis* basis = nullptr);

// Resolvent route: w_rho = 2 e^{i theta} R(-rho e^{2 i theta}) f along the
// rho schedule, then d- u = w with u orthogonal to ker d-. Requires the
// cos_scaled twist. Throws BoundaryDivergence when w_rho is not Cauchy.
SolveReport solve_resolvent(const GridField& f, const UnitaryExtension& U, const SparseOperator& S,
                            const SparseOperator& T, const Grid& g, const SolveConfig& cfg,
                            const EigenBasis* basis = nullptr);

struct ThetaScanRow {
  double theta = 0.0;
  double ratio = 0.0;
  int obstruction_dim = 0;
  double obstruction_mass = 0.0;
  double residual = 0.0;
  SolveMethod method = SolveMethod::Lsq;
  std::string error;  // empty on success, otherwise "Kind: message"
};

struct PStatistic {
  double p = 0.0;
  double value = 0.0;         // (mean A^p)^{1/p} over successful rows
  double coarse_value = 0.0;  // same on every second theta
  double relative_change = 0.0;
  bool regime_ok = false;     // p * r > 2
};

struct ThetaScan {
  std::vector<ThetaScanRow> rows;   // sorted by theta
  std::vector<PStatistic> stats;
  bool regime_ok = false;           // s - r > 3
  int failures = 0;
};

// Per-theta solves on `threads` workers; per-theta errors are recorded in
// the row and do not abort the scan.
ThetaScan theta_scan(const GridField& f, const SparseOperator& S, const SparseOperator& T,
                     const Grid& g, const SolveConfig& cfg, const std::vector<double>& theta_grid,
                     const std::vector<double>& p_list, const EigenBasis* basis = nullptr,
                     int threads = 1);

}  // namespace twistlab
