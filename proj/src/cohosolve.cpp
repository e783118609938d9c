#include "twistlab/cohosolve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twistlab/errors.hpp"
#include "twistlab/parallel.hpp"

namespace twistlab {

const char* to_string(TwistMode m) { return m == TwistMode::Raw ? "raw" : "cos_scaled"; }
const char* to_string(SolveMethod m) { return m == SolveMethod::Lsq ? "lsq" : "resolvent"; }

TwistMode parse_twist_mode(const std::string& s) {
  if (s == "raw") return TwistMode::Raw;
  if (s == "cos_scaled") return TwistMode::CosScaled;
  throw ConfigError("unknown twist_mode '" + s + "' (expected raw or cos_scaled)");
}

SolveMethod parse_solve_method(const std::string& s) {
  if (s == "lsq") return SolveMethod::Lsq;
  if (s == "resolvent") return SolveMethod::Resolvent;
  throw ConfigError("unknown method '" + s + "' (expected lsq or resolvent)");
}

std::vector<double> default_rho_schedule() {
  std::vector<double> r;
  for (int k = 1; k <= 9; ++k) r.push_back(1.0 - std::pow(10.0, -k));
  return r;
}

double SolveConfig::twist() const {
  return twist_mode == TwistMode::Raw ? sigma : sigma * std::cos(theta);
}

void SolveConfig::validate() const {
  if (!std::isfinite(theta) || !std::isfinite(sigma)) throw ConfigError("theta and sigma must be finite");
  if (method == SolveMethod::Resolvent) {
    if (rho_schedule.empty()) throw ConfigError("rho_schedule must not be empty");
    for (std::size_t i = 0; i < rho_schedule.size(); ++i) {
      double r = rho_schedule[i];
      if (!(r > 0.0 && r < 1.0)) {
        std::ostringstream os;
        os << "rho_schedule entry " << r << " is not in (0, 1)";
        throw ConfigError(os.str());
      }
      if (i > 0 && !(r > rho_schedule[i - 1])) {
        throw ConfigError("rho_schedule must be strictly increasing");
      }
    }
  }
  if (!(lsq_tol > 0.0) || !(rank_tol > 0.0) || !(boundary_tol > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
}

SparseOperator assemble_Ltheta(const SparseOperator& S, const SparseOperator& T,
                               const SolveConfig& cfg) {
  const int n = S.size();
  if (T.size() != n) throw DimensionMismatch("S and T sizes differ");
  CSparse id(n, n);
  id.setIdentity();
  SparseOperator L;
  L.matrix = std::cos(cfg.theta) * S.matrix + std::sin(cfg.theta) * T.matrix +
             Complex(0.0, cfg.twist()) * id;
  L.matrix.prune(Complex(0.0, 0.0));
  L.matrix.makeCompressed();
  const bool skew = S.symmetry == Symmetry::Skew && T.symmetry == Symmetry::Skew;
  L.symmetry = skew ? Symmetry::Skew : Symmetry::None;
  return L;
}

InvariantDistributions invariant_distributions(const SparseOperator& L, double rank_tol,
                                               std::uint64_t seed) {
  CSparse adj = L.matrix.adjoint();
  NullSpace ns = null_space(adj, rank_tol, seed);
  InvariantDistributions out;
  out.basis = ns.basis;
  out.dim = ns.dim;
  out.singular_values = ns.singular_values;
  out.threshold = ns.threshold;
  out.gap = ns.gap;
  return out;
}

double sobolev_norm(const GridField& u, double s, const SparseOperator& S, const SparseOperator& T,
                    const Grid& g, const EigenBasis* basis) {
  if (s >= 0.0 && std::floor(s) == s) return weighted_norm(u, static_cast<int>(s), S, T, g);
  if (basis == nullptr) throw InsufficientBasis("a fractional Sobolev order needs an eigenbasis");
  return friedrichs_norm(u, s, *basis, g);
}

namespace {

void fill_norms(SolveReport& rep, const GridField& f, const SparseOperator& S,
                const SparseOperator& T, const Grid& g, const SolveConfig& cfg,
                const EigenBasis* basis) {
  const bool fractional = std::floor(cfg.sobolev_r) != cfg.sobolev_r || cfg.sobolev_r < 0.0 ||
                          std::floor(cfg.sobolev_s) != cfg.sobolev_s || cfg.sobolev_s < 0.0;
  if (fractional && basis == nullptr) return;
  rep.norm_u_r = sobolev_norm(rep.solution, cfg.sobolev_r, S, T, g, basis);
  rep.norm_f_s = sobolev_norm(f, cfg.sobolev_s, S, T, g, basis);
  rep.ratio = rep.norm_f_s > 0.0 ? rep.norm_u_r / rep.norm_f_s : 0.0;
  rep.norms_computed = true;
}

void fill_header(SolveReport& rep, const SolveConfig& cfg) {
  rep.method = cfg.method;
  rep.theta = cfg.theta;
  rep.sigma = cfg.sigma;
  rep.twist = cfg.twist();
  rep.twist_mode = cfg.twist_mode;
}

}  // namespace

CohomologicalSolver::CohomologicalSolver(const SparseOperator& S, const SparseOperator& T,
                                         const Grid& g, const SolveConfig& cfg)
    : S_(&S), T_(&T), g_(&g), cfg_(cfg) {
  cfg_.validate();
  if (S.size() != g.size()) throw DimensionMismatch("operator size does not match the grid");
  L_ = assemble_Ltheta(S, T, cfg_);
  coker_ = invariant_distributions(L_, cfg_.rank_tol, cfg_.seed);
  if (L_.symmetry == Symmetry::Skew) {
    // L^H = -L, so the kernel and the cokernel coincide.
    kernel_ = coker_.basis;
    kernel_gap_ = coker_.gap;
  } else {
    NullSpace ns = null_space(L_.matrix, cfg_.rank_tol, cfg_.seed);
    kernel_ = ns.basis;
    kernel_gap_ = ns.gap;
  }
  solver_ = MinNormSolver(L_.matrix, kernel_, coker_.basis);
}

SolveReport CohomologicalSolver::solve(const GridField& f, const EigenBasis* basis) const {
  if (f.size() != L_.size()) throw DimensionMismatch("right-hand side size does not match the grid");
  SolveReport rep;
  fill_header(rep, cfg_);
  rep.method = SolveMethod::Lsq;
  rep.obstruction_dim = coker_.dim;
  rep.kernel_dim = static_cast<int>(kernel_.cols());
  rep.obstruction_gap = coker_.gap;
  GridField pf = f;
  if (coker_.dim > 0) {
    CVector c = coker_.basis.adjoint() * f;
    rep.obstruction_mass = c.norm() / g_->m();
    pf -= coker_.basis * c;
  }
  rep.solution = solver_.solve(f);
  rep.residual = g_->norm(pf - L_.apply(rep.solution));
  const double fnorm = g_->norm(f);
  if (!(rep.residual <= cfg_.lsq_tol * std::max(fnorm, 1e-300)) && fnorm > 0.0) {
    std::ostringstream os;
    os << "relative residual " << rep.residual / fnorm << " exceeds lsq_tol " << cfg_.lsq_tol
       << " at theta = " << cfg_.theta;
    throw LsqNoConvergence(os.str());
  }
  fill_norms(rep, f, *S_, *T_, *g_, cfg_, basis);
  return rep;
}

SolveReport solve_lsq(const GridField& f, const SparseOperator& S, const SparseOperator& T,
                      const Grid& g, const SolveConfig& cfg, const EigenBasis* basis) {
  return CohomologicalSolver(S, T, g, cfg).solve(f, basis);
}

SolveReport solve_resolvent(const GridField& f, const UnitaryExtension& U, const SparseOperator& S,
                            const SparseOperator& T, const Grid& g, const SolveConfig& cfg,
                            const EigenBasis* basis) {
  cfg.validate();
  if (cfg.twist_mode != TwistMode::CosScaled) {
    throw ConfigError("the resolvent method requires twist_mode = cos_scaled");
  }
  if (std::abs(U.sigma() - cfg.sigma) > 1e-15 * std::max(1.0, std::abs(cfg.sigma))) {
    throw DimensionMismatch("unitary extension was built for a different sigma");
  }
  if (f.size() != U.size()) throw DimensionMismatch("right-hand side size does not match the grid");
  SolveReport rep;
  fill_header(rep, cfg);
  rep.method = SolveMethod::Resolvent;

  const Complex e1 = std::polar(1.0, cfg.theta);
  const Complex e2 = std::polar(1.0, 2.0 * cfg.theta);
  GridField w_prev;
  GridField w;
  std::vector<double> increments;
  for (double rho : cfg.rho_schedule) {
    try {
      Resolvent R(U, -rho * e2);
      w = 2.0 * e1 * R.apply(f);
    } catch (const NoConvergence& e) {
      std::ostringstream os;
      os << "resolvent blows up at rho = " << rho << ", theta = " << cfg.theta << ": " << e.what();
      throw BoundaryDivergence(os.str());
    }
    RhoStep step;
    step.rho = rho;
    step.w_norm = g.norm(w);
    step.increment = w_prev.size() == 0 ? 0.0 : g.norm(w - w_prev);
    rep.rho_trace.push_back(step);
    if (w_prev.size() != 0) increments.push_back(step.increment);
    w_prev = w;
  }
  const double wn = g.norm(w);
  if (!increments.empty()) {
    const double last = increments.back();
    const bool shrinking = increments.size() < 2 || last == 0.0 || last < increments[increments.size() - 2];
    if (!(last <= cfg.boundary_tol * std::max(wn, 1e-300)) || !shrinking) {
      std::ostringstream os;
      os << "w_rho is not Cauchy as rho -> 1 at theta = " << cfg.theta << ": last increment "
         << last << " against |w| = " << wn;
      throw BoundaryDivergence(os.str());
    }
  }
  const PartialIsometry& iso = U.partial_isometry();
  rep.solution = iso.solver_minus().solve(w);
  rep.kernel_dim = iso.deficiency().d_minus;
  SparseOperator L = assemble_Ltheta(S, T, cfg);
  rep.residual = g.norm(f - L.apply(rep.solution));
  fill_norms(rep, f, S, T, g, cfg, basis);
  return rep;
}

namespace {

double p_mean(const std::vector<double>& a, double p) {
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (double x : a) acc += std::pow(x, p);
  return std::pow(acc / static_cast<double>(a.size()), 1.0 / p);
}

}  // namespace

ThetaScan theta_scan(const GridField& f, const SparseOperator& S, const SparseOperator& T,
                     const Grid& g, const SolveConfig& cfg, const std::vector<double>& theta_grid,
                     const std::vector<double>& p_list, const EigenBasis* basis, int threads) {
  std::vector<double> thetas = theta_grid;
  std::sort(thetas.begin(), thetas.end());
  ThetaScan scan;
  scan.rows.resize(thetas.size());

  // One shared unitary extension for the resolvent route; it does not depend on theta.
  std::unique_ptr<DeficiencyData> def;
  std::unique_ptr<UnitaryExtension> U;
  if (cfg.method == SolveMethod::Resolvent) {
    def = std::make_unique<DeficiencyData>(deficiency_spaces(cfg.sigma, S, T, cfg.rank_tol, cfg.seed));
    U = std::make_unique<UnitaryExtension>(S, T, *def, cfg.J_seed);
  }

  parallel_for(static_cast<int>(thetas.size()), threads, [&](int i) {
    ThetaScanRow& row = scan.rows[i];
    row.theta = thetas[i];
    row.method = cfg.method;
    SolveConfig c = cfg;
    c.theta = thetas[i];
    try {
      SolveReport rep = cfg.method == SolveMethod::Lsq ? solve_lsq(f, S, T, g, c, basis)
                                                       : solve_resolvent(f, *U, S, T, g, c, basis);
      row.obstruction_dim = rep.obstruction_dim;
      row.obstruction_mass = rep.obstruction_mass;
      row.residual = rep.residual;
      if (!rep.norms_computed) throw InsufficientBasis("norms need an eigenbasis");
      row.ratio = rep.ratio;
    } catch (const Error& e) {
      row.error = std::string(e.kind()) + ": " + e.what();
    }
  });

  std::vector<double> all, coarse;
  for (std::size_t i = 0; i < scan.rows.size(); ++i) {
    const auto& row = scan.rows[i];
    if (!row.error.empty()) {
      ++scan.failures;
      continue;
    }
    all.push_back(row.ratio);
    if (i % 2 == 0) coarse.push_back(row.ratio);
  }
  scan.regime_ok = cfg.sobolev_s - cfg.sobolev_r > 3.0;
  for (double p : p_list) {
    if (!(p > 0.0)) throw ConfigError("p values must be positive");
    PStatistic st;
    st.p = p;
    st.value = p_mean(all, p);
    st.coarse_value = p_mean(coarse, p);
    st.relative_change = st.value > 0.0 ? std::abs(st.value - st.coarse_value) / st.value : 0.0;
    st.regime_ok = p * cfg.sobolev_r > 2.0;
    scan.stats.push_back(st);
  }
  return scan;
}

}  // namespace twistlab
