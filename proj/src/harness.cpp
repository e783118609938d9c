// Experiment commands and the eigenbasis cache.
#include "twistlab/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "twistlab/beurling.hpp"
#include "twistlab/cohosolve.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/linalg.hpp"
#include "twistlab/parallel.hpp"
#include "twistlab/product.hpp"
#include "twistlab/surface_io.hpp"
#include "twistlab/twisted.hpp"

namespace twistlab {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open surface file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string surface_file(const ExperimentConfig& cfg) {
  const std::string& file = cfg.raw("surface", "file");
  if (file.empty()) throw ConfigError("[surface] file is required");
  return cfg.resolve_path(file);
}

int grid_size(const ExperimentConfig& cfg) {
  long long m = cfg.get_int("grid", "m");
  if (m < 1 || m > 10001) throw ConfigError("[grid] m must lie in 1..10001");
  return static_cast<int>(m);
}

json complex_array(const GridField& u) {
  json a = json::array();
  for (Eigen::Index i = 0; i < u.size(); ++i) a.push_back({u(i).real(), u(i).imag()});
  return a;
}

json header(const RunContext& ctx, const std::string& command) {
  json j;
  j["command"] = command;
  j["surface_hash"] = ctx.surface_hash;
  j["config"] = ctx.cfg.echo();
  return j;
}

void write_json(const RunContext& ctx, const std::string& file, const json& j) {
  write_text_file(ctx.output(file), j.dump(2));
  ctx.info("wrote " + ctx.output(file));
}

SolveConfig solve_config(const ExperimentConfig& cfg) {
  SolveConfig sc;
  sc.theta = cfg.get_real("solve", "theta");
  sc.sigma = cfg.get_real("solve", "sigma");
  sc.twist_mode = parse_twist_mode(cfg.raw("solve", "twist_mode"));
  sc.method = parse_solve_method(cfg.raw("solve", "method"));
  sc.lsq_tol = cfg.get_real("solve", "lsq_tol");
  sc.rank_tol = cfg.get_real("solve", "rank_tol");
  sc.boundary_tol = cfg.get_real("solve", "boundary_tol");
  sc.rho_schedule = cfg.get_reals("solve", "rho_schedule");
  sc.sobolev_r = cfg.get_real("solve", "r");
  sc.sobolev_s = cfg.get_real("solve", "s");
  sc.seed = cfg.get_seed("solve", "seed");
  sc.J_seed = cfg.get_seed("solve", "J_seed");
  sc.validate();
  return sc;
}

std::vector<double> theta_grid(const ExperimentConfig& cfg) {
  std::vector<double> grid = cfg.get_reals("scan", "theta_list");
  if (!grid.empty()) {
    std::sort(grid.begin(), grid.end());
    return grid;
  }
  long long n = cfg.get_int("scan", "theta_n");
  if (n < 1) throw ConfigError("[scan] theta_n must be positive");
  return uniform_grid(static_cast<int>(n), cfg.get_real("scan", "theta_lo"), cfg.get_real("scan", "theta_hi"));
}

int positive_int(const ExperimentConfig& cfg, const std::string& section, const std::string& key) {
  long long v = cfg.get_int(section, key);
  if (v < 1) throw ConfigError("[" + section + "] " + key + " must be positive");
  return static_cast<int>(v);
}

std::string error_text(const Error& e) { return std::string(e.kind()) + ": " + e.what(); }

// Norms of a finished solve; fractional orders need the eigenbasis and may
// run out of resolved modes.
json solve_norms(const RunContext& ctx, SolveReport& rep, const GridField& f, const SolveConfig& sc) {
  json j;
  j["r"] = sc.sobolev_r;
  j["s"] = sc.sobolev_s;
  if (!rep.norms_computed) {
    try {
      EigenBasis basis = cached_eigenbasis(ctx);
      rep.norm_u_r = sobolev_norm(rep.solution, sc.sobolev_r, ctx.S, ctx.T, ctx.grid, &basis);
      rep.norm_f_s = sobolev_norm(f, sc.sobolev_s, ctx.S, ctx.T, ctx.grid, &basis);
      rep.ratio = rep.norm_f_s > 0.0 ? rep.norm_u_r / rep.norm_f_s : 0.0;
      rep.norms_computed = true;
    } catch (const InsufficientBasis& e) {
      j["error"] = error_text(e);
    }
  }
  j["computed"] = rep.norms_computed;
  j["norm_u_r"] = rep.norm_u_r;
  j["norm_f_s"] = rep.norm_f_s;
  j["ratio"] = rep.ratio;
  return j;
}

}  // namespace

RunContext::RunContext(const ExperimentConfig& config, const RunOptions& options)
    : cfg(config),
      opt(options),
      out_dir(options.out_dir.empty() ? config.raw("output", "dir") : options.out_dir),
      surface_hash(hex64(crc64(read_file(surface_file(config))))),
      origami(parse_surface(read_file(surface_file(config)), surface_file(config))),
      grid(origami, grid_size(config)),
      S(assemble_S(grid)),
      T(assemble_T(grid)) {
  if (opt.threads < 1) throw ConfigError("--threads must be positive");
  fs::create_directories(out_dir);
}

Provenance RunContext::provenance(const std::string& command) const {
  return Provenance{command, cfg.echo(), surface_hash};
}

std::string RunContext::output(const std::string& file) const { return (fs::path(out_dir) / file).string(); }

std::ostream& RunContext::log() const { return opt.log ? *opt.log : std::cerr; }

void RunContext::info(const std::string& msg) const {
  if (opt.verbose) log() << "twistlab: " << msg << "\n";
}

GridField make_field(const ExperimentConfig& cfg, const Grid& g) {
  const std::string kind = cfg.raw("field", "kind");
  const int m = g.m();
  const int N = g.origami().n_squares();
  GridField f = GridField::Zero(g.size());
  auto mode = [&](int k, int l) {
    GridField u(g.size());
    for (int s = 0; s < N; ++s)
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
          u(g.index({s, i, j})) = std::exp(Complex(0.0, kTwoPi * (k * g.x_center(i) + l * g.x_center(j))));
    return u;
  };
  if (kind == "mode") {
    f = mode(static_cast<int>(cfg.get_int("field", "k")), static_cast<int>(cfg.get_int("field", "l")));
  } else if (kind == "constant") {
    f = g.constant(Complex(cfg.get_real("field", "value_re"), cfg.get_real("field", "value_im")));
  } else if (kind == "random") {
    const long long band = cfg.get_int("field", "band");
    if (band < 0) throw ConfigError("[field] band must be nonnegative");
    std::mt19937_64 rng(cfg.get_seed("field", "seed"));
    std::normal_distribution<double> normal;
    for (long long k = -band; k <= band; ++k)
      for (long long l = -band; l <= band; ++l) {
        const double re = normal(rng);
        const double im = normal(rng);
        f += Complex(re, im) * mode(static_cast<int>(k), static_cast<int>(l));
      }
  } else {
    const long long sq = cfg.get_int("field", "square");
    const double cx = cfg.get_real("field", "center_x"), cy = cfg.get_real("field", "center_y");
    const double rad = cfg.get_real("field", "radius");
    if (sq < 0 || sq >= N) throw ConfigError("[field] square out of range");
    if (!(rad > 0.0) || cx - rad < 0.0 || cx + rad > 1.0 || cy - rad < 0.0 || cy + rad > 1.0)
      throw ConfigError("[field] bump must lie inside its square");
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const double q = std::hypot(g.x_center(i) - cx, g.x_center(j) - cy) / rad;
        if (q < 1.0) f(g.index({static_cast<int>(sq), i, j})) = std::exp(-1.0 / (1.0 - q * q));
      }
  }
  return f;
}

std::string cache_path(const RunContext& ctx) {
  std::string dir = ctx.cfg.raw("eigen", "cache_dir");
  dir = dir.empty() ? (fs::path(ctx.out_dir) / "cache").string() : ctx.cfg.resolve_path(dir);
  std::ostringstream name;
  name << "eig_" << hex64(surface_hash(ctx.origami)) << "_m" << ctx.grid.m() << "_K"
       << ctx.cfg.get_int("eigen", "K") << "_tol" << format_double(ctx.cfg.get_real("eigen", "tol")) << "_seed"
       << ctx.cfg.get_seed("eigen", "seed") << ".fltb";
  return (fs::path(dir) / name.str()).string();
}

EigenBasis cached_eigenbasis(const RunContext& ctx) {
  const int K = positive_int(ctx.cfg, "eigen", "K");
  const double tol = ctx.cfg.get_real("eigen", "tol");
  const std::uint64_t seed = ctx.cfg.get_seed("eigen", "seed");
  const bool use_cache = ctx.cfg.get_bool("eigen", "cache");
  const std::string path = cache_path(ctx);
  if (use_cache && fs::exists(path)) {
    try {
      EigenBasis b = read_eigenbasis(path);
      if (b.m != ctx.grid.m() || b.size() != K || b.n_squares != ctx.origami.n_squares())
        throw CacheError(path + ": dimensions do not match the configuration");
      b.tol = tol;
      b.seed = seed;
      ctx.log() << "twistlab: eigenbasis cache hit " << path << "\n";
      return b;
    } catch (const CacheError& e) {
      ctx.log() << "twistlab: warning: discarding eigenbasis cache (" << e.what() << "); recomputing\n";
    }
  }
  ctx.info("computing " + std::to_string(K) + " eigenpairs");
  EigenBasis b = lowest_eigenpairs(assemble_Q(ctx.S, ctx.T), ctx.grid, K, tol, seed);
  if (use_cache) {
    fs::create_directories(fs::path(path).parent_path());
    write_eigenbasis(path, b);
    ctx.info("stored eigenbasis in " + path);
  }
  return b;
}

int cmd_spectrum(const RunContext& ctx) {
  EigenBasis b = cached_eigenbasis(ctx);
  CsvWriter csv(ctx.output("spectrum.csv"), ctx.provenance("spectrum"), {"k", "lambda"});
  for (int k = 0; k < b.size(); ++k) {
    csv.add(k).add(b.eigenvalues(k));
    csv.end_row();
  }
  csv.close();
  return kExitOk;
}

int cmd_weyl(const RunContext& ctx) {
  EigenBasis b = cached_eigenbasis(ctx);
  std::vector<WeylPoint> pts;
  LinearFit fit = weyl_fit(b, ctx.cfg.get_real("weyl", "lambda_lo"), ctx.cfg.get_real("weyl", "lambda_hi"),
                           positive_int(ctx.cfg, "weyl", "points"), &pts);
  CsvWriter csv(ctx.output("weyl.csv"), ctx.provenance("weyl"), {"lambda", "count", "ratio"});
  for (const auto& p : pts) {
    csv.add(p.lambda).add(static_cast<long long>(p.count)).add(p.ratio);
    csv.end_row();
  }
  csv.close();
  json j = header(ctx, "weyl");
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r_squared"] = fit.r_squared;
  j["n_points"] = fit.n_points;
  j["area"] = ctx.grid.area();
  j["area_over_4pi"] = ctx.grid.area() / (4.0 * kPi);
  write_json(ctx, "weyl.json", j);
  return kExitOk;
}

int cmd_solve(const RunContext& ctx) {
  SolveConfig sc = solve_config(ctx.cfg);
  GridField f = make_field(ctx.cfg, ctx.grid);
  SolveReport rep;
  if (sc.method == SolveMethod::Lsq) {
    rep = solve_lsq(f, ctx.S, ctx.T, ctx.grid, sc);
  } else {
    DeficiencyData def = deficiency_spaces(sc.sigma, ctx.S, ctx.T, sc.rank_tol, sc.seed);
    UnitaryExtension U(ctx.S, ctx.T, def, sc.J_seed);
    rep = solve_resolvent(f, U, ctx.S, ctx.T, ctx.grid, sc);
  }
  json j = header(ctx, "solve");
  j["theta"] = rep.theta;
  j["sigma"] = rep.sigma;
  j["twist"] = rep.twist;
  j["twist_mode"] = to_string(rep.twist_mode);
  j["method"] = to_string(rep.method);
  j["residual"] = rep.residual;
  j["obstruction_dim"] = rep.obstruction_dim;
  j["obstruction_mass"] = rep.obstruction_mass;
  j["obstruction_gap"] = rep.obstruction_gap;
  j["kernel_dim"] = rep.kernel_dim;
  j["norms"] = solve_norms(ctx, rep, f, sc);
  json trace = json::array();
  for (const auto& st : rep.rho_trace) trace.push_back({{"rho", st.rho}, {"w_norm", st.w_norm}, {"increment", st.increment}});
  j["rho_trace"] = trace;
  j["f"] = complex_array(f);
  j["solution"] = complex_array(rep.solution);
  write_json(ctx, "solve.json", j);
  return kExitOk;
}

int cmd_scan(const RunContext& ctx) {
  SolveConfig sc = solve_config(ctx.cfg);
  GridField f = make_field(ctx.cfg, ctx.grid);
  EigenBasis basis = cached_eigenbasis(ctx);
  ThetaScan scan = theta_scan(f, ctx.S, ctx.T, ctx.grid, sc, theta_grid(ctx.cfg), ctx.cfg.get_reals("scan", "p_list"),
                              &basis, ctx.opt.threads);
  CsvWriter csv(ctx.output("scan.csv"), ctx.provenance("scan"),
                {"theta", "A", "obstruction_dim", "residual", "method", "error"});
  for (const auto& r : scan.rows) {
    csv.add(r.theta);
    if (r.error.empty()) {
      csv.add(r.ratio).add(r.obstruction_dim).add(r.residual);
    } else {
      csv.add(std::string()).add(std::string()).add(std::string());
    }
    csv.add(std::string(to_string(r.method))).add(r.error);
    csv.end_row();
  }
  csv.close();
  json j = header(ctx, "scan");
  j["regime_ok"] = scan.regime_ok;
  json stats = json::array();
  for (const auto& p : scan.stats)
    stats.push_back({{"p", p.p},
                     {"value", p.value},
                     {"coarse_value", p.coarse_value},
                     {"relative_change", p.relative_change},
                     {"regime_ok", p.regime_ok}});
  j["stats"] = stats;
  json defects = json::array();
  for (const auto& r : scan.rows)
    if (!r.error.empty()) {
      defects.push_back({{"theta", r.theta}, {"error", r.error}});
      ctx.log() << "twistlab: scan defect at theta = " << format_double(r.theta) << ": " << r.error << "\n";
    }
  j["failures"] = scan.failures;
  j["defects"] = defects;
  write_json(ctx, "scan.json", j);
  return scan.failures == 0 ? kExitOk : kExitPartial;
}

int cmd_invariants(const RunContext& ctx) {
  SolveConfig sc = solve_config(ctx.cfg);
  const std::vector<double> sigmas = ctx.cfg.get_reals("scan", "sigma_list");
  const std::vector<double> thetas = theta_grid(ctx.cfg);
  EigenBasis basis = cached_eigenbasis(ctx);

  struct Item {
    double theta, sigma;
    InvariantDistributions inv;
    std::string error;
  };
  std::vector<Item> items;
  for (double s : sigmas)
    for (double t : thetas) items.push_back({t, s, {}, {}});
  parallel_for(static_cast<int>(items.size()), ctx.opt.threads, [&](int i) {
    SolveConfig c = sc;
    c.theta = items[i].theta;
    c.sigma = items[i].sigma;
    try {
      items[i].inv = invariant_distributions(assemble_Ltheta(ctx.S, ctx.T, c), c.rank_tol, c.seed);
    } catch (const Error& e) {
      items[i].error = error_text(e);
    }
  });
  std::vector<TwistedScanRow> rows(sigmas.size());
  std::vector<std::string> row_errors(sigmas.size());
  parallel_for(static_cast<int>(sigmas.size()), ctx.opt.threads, [&](int i) {
    try {
      rows[i] = twisted_scan_row(sigmas[i], ctx.S, ctx.T, basis, 1e-6, sc.rank_tol, sc.seed);
    } catch (const Error& e) {
      rows[i].sigma = sigmas[i];
      row_errors[i] = error_text(e);
    }
  });

  std::vector<std::string> failures;
  CsvWriter inv(ctx.output("invariants.csv"), ctx.provenance("invariants"),
                {"theta", "sigma", "twist", "dim", "threshold", "gap", "error"});
  for (const auto& it : items) {
    SolveConfig c = sc;
    c.theta = it.theta;
    c.sigma = it.sigma;
    inv.add(it.theta).add(it.sigma).add(c.twist());
    if (it.error.empty()) {
      inv.add(it.inv.dim).add(it.inv.threshold).add(it.inv.gap);
    } else {
      inv.add(std::string()).add(std::string()).add(std::string());
      failures.push_back(it.error);
    }
    inv.add(it.error);
    inv.end_row();
  }
  inv.close();
  CsvWriter tw(ctx.output("twisted.csv"), ctx.provenance("invariants"),
               {"sigma", "dim_K", "d_plus", "d_minus", "c_lower", "c_upper", "gap", "error"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    tw.add(r.sigma);
    if (row_errors[i].empty()) {
      tw.add(r.dim_K).add(r.d_plus).add(r.d_minus).add(r.c_lower).add(r.c_upper).add(r.gap);
    } else {
      for (int k = 0; k < 6; ++k) tw.add(std::string());
      failures.push_back(row_errors[i]);
    }
    tw.add(row_errors[i]);
    tw.end_row();
  }
  tw.close();
  for (const auto& d : failures) ctx.log() << "twistlab: invariants defect: " << d << "\n";
  return failures.empty() ? kExitOk : kExitPartial;
}

int cmd_beurling(const RunContext& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  const double sigma = c.get_real("beurling", "sigma");
  const double rank_tol = c.get_real("solve", "rank_tol");
  const std::uint64_t seed = c.get_seed("solve", "seed");
  DeficiencyData def = deficiency_spaces(sigma, ctx.S, ctx.T, rank_tol, seed);
  DeficiencyData mirror = deficiency_spaces(-sigma, ctx.S, ctx.T, rank_tol, seed);
  UnitaryExtension U(ctx.S, ctx.T, def, c.get_seed("beurling", "J_seed"));
  const int probes = positive_int(c, "beurling", "probes");
  CMatrix probe = random_complex(ctx.grid.size(), probes, c.get_seed("beurling", "probe_seed"));
  double lo = 1e300, hi = 0.0;
  for (int k = 0; k < probes; ++k) {
    const double r = ctx.grid.norm(U.apply(probe.col(k))) / ctx.grid.norm(probe.col(k));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }

  AtomicMeasure mu = AtomicMeasure::random(positive_int(c, "beurling", "n_atoms"), c.get_seed("beurling", "measure_seed"));
  const std::vector<double> thetas = uniform_grid(positive_int(c, "beurling", "theta_n"));
  const double alpha = c.get_real("beurling", "alpha");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("[beurling] alpha must lie in (0, 1)");
  std::vector<double> N = maximal_function_scan([&](Complex z) { return cauchy_integral(mu, z); }, alpha, thetas,
                                                positive_int(c, "beurling", "radial_samples"));
  CsvWriter csv(ctx.output("beurling_scan.csv"), ctx.provenance("beurling"),
                {"theta", "N_alpha", "boundary_value_re", "boundary_value_im"});
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    Complex bv = cauchy_boundary_value(mu, thetas[i]);
    csv.add(thetas[i]).add(N[i]).add(bv.real()).add(bv.imag());
    csv.end_row();
  }
  csv.close();
  const int t_n = positive_int(c, "beurling", "t_n");
  std::vector<double> ts;
  for (int k = 0; k < t_n; ++k) ts.push_back(mu.total_mass() * 0.25 * std::pow(1.3, k));
  WeakTypeReport weak = weak_type_check(mu, ts, uniform_grid(8192));

  json j = header(ctx, "beurling");
  j["sigma"] = sigma;
  j["d_plus"] = def.d_plus;
  j["d_minus"] = def.d_minus;
  j["d_plus_at_minus_sigma"] = mirror.d_plus;
  j["d_minus_at_minus_sigma"] = mirror.d_minus;
  j["deficiency_gap"] = def.gap;
  j["J_seed"] = U.J_seed();
  j["unitarity_defect"] = U.unitarity_defect();
  j["correction_rank"] = U.correction_rank();
  j["correction_size"] = U.correction_size();
  j["probe_ratio_min"] = lo;
  j["probe_ratio_max"] = hi;
  j["measure_total_mass"] = mu.total_mass();
  j["weak_type_constant"] = weak.constant;
  j["weak_type_worst_t"] = weak.worst_t;
  write_json(ctx, "beurling.json", j);
  return kExitOk;
}

namespace {

Bump product_bump(const ExperimentConfig& c) {
  return Bump(c.get_real("product", "chi_center"), c.get_real("product", "chi_width"));
}

}  // namespace

int cmd_product(const RunContext& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  SolveConfig sc = solve_config(c);
  const int n_max = static_cast<int>(c.get_int("product", "n_max"));
  if (n_max < 0) throw ConfigError("[product] n_max must be nonnegative");
  const double speed = c.get_real("product", "c");
  const ProductConvention conv = parse_product_convention(c.raw("product", "convention"));
  Bump chi = product_bump(c);
  GridField f = make_field(c, ctx.grid);
  ProductField F(n_max, ctx.grid.size());
  for (int n = -n_max; n <= n_max; ++n) F.mode(n) = chi.fourier(n) * f;
  double tail = 0.0;
  for (int n = n_max + 1; n <= 2 * n_max + 8; ++n) tail += 2.0 * std::norm(chi.fourier(n));
  F.tail_norm = std::sqrt(tail) * ctx.grid.norm(f);

  ProductSolveResult res = product_solve(F, sc.theta, speed, ctx.S, ctx.T, ctx.grid, sc, conv, nullptr, ctx.opt.threads);
  ProductNormSpec spec{static_cast<double>(c.get_int("product", "norm_s")), static_cast<int>(c.get_int("product", "norm_nu"))};

  json j = header(ctx, "product");
  j["theta"] = sc.theta;
  j["c"] = speed;
  j["n_max"] = n_max;
  j["convention"] = to_string(conv);
  j["input_tail_norm"] = F.tail_norm;
  j["input_norm"] = product_norm(F, spec, ctx.S, ctx.T, ctx.grid);
  j["solution_norm"] = product_norm(res.solution, spec, ctx.S, ctx.T, ctx.grid);
  j["norm_s"] = spec.s;
  j["norm_nu"] = spec.nu;
  json modes = json::array();
  for (std::size_t i = 0; i < res.reports.size(); ++i) {
    const SolveReport& r = res.reports[i];
    modes.push_back({{"n", res.mode_index[i]},
                     {"twist", r.twist},
                     {"residual", r.residual},
                     {"obstruction_dim", r.obstruction_dim},
                     {"obstruction_mass", r.obstruction_mass},
                     {"kernel_dim", r.kernel_dim}});
  }
  j["modes"] = modes;
  j["defects"] = res.defects;
  j["max_obstruction_dim"] = res.max_obstruction_dim;
  j["max_obstruction_mass"] = res.max_obstruction_mass;
  j["max_residual"] = res.max_residual;
  json sections = json::array();
  CsvWriter csv(ctx.output("product_sections.csv"), ctx.provenance("product"), {"phi", "cell", "re", "im"});
  for (double phi : c.get_reals("product", "section_phi")) {
    GridField u = res.solution.section(phi);
    sections.push_back({{"phi", phi}, {"norm", ctx.grid.norm(u)}});
    for (Eigen::Index k = 0; k < u.size(); ++k) {
      csv.add(phi).add(static_cast<long long>(k)).add(u(k).real()).add(u(k).imag());
      csv.end_row();
    }
  }
  csv.close();
  j["sections"] = sections;
  write_json(ctx, "product.json", j);
  for (const auto& d : res.defects) ctx.log() << "twistlab: product defect: " << d << "\n";
  return res.defects.empty() ? kExitOk : kExitPartial;
}

int cmd_timetau(const RunContext& ctx) {
  const ExperimentConfig& c = ctx.cfg;
  SolveConfig sc = solve_config(c);
  const double speed = c.get_real("product", "c");
  const ProductConvention conv = parse_product_convention(c.raw("product", "convention"));
  const double phi0 = c.get_real("timetau", "phi0");
  Bump chi = product_bump(c);
  const std::vector<long long> ms = c.get_ints("timetau", "levels_m");
  const std::vector<long long> ns = c.get_ints("timetau", "levels_n");
  if (ms.size() != ns.size() || ms.empty())
    throw ConfigError("[timetau] levels_m and levels_n must be nonempty lists of equal length");

  std::mt19937_64 rng(c.get_seed("timetau", "sample_seed"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<SurfacePoint> pts;
  const int samples = positive_int(c, "timetau", "samples");
  for (int k = 0; k < samples; ++k) {
    int sq = static_cast<int>(unit(rng) * ctx.origami.n_squares()) % ctx.origami.n_squares();
    double x = unit(rng), y = unit(rng);
    pts.push_back({sq, x, y});
  }

  std::vector<std::string> failures;
  CsvWriter csv(ctx.output("timetau.csv"), ctx.provenance("timetau"),
                {"level", "m", "n_max", "residual", "normalization_error", "input_tail_norm", "max_obstruction_dim",
                 "error"});
  for (std::size_t lv = 0; lv < ms.size(); ++lv) {
    csv.add(static_cast<long long>(lv)).add(ms[lv]).add(ns[lv]);
    try {
      if (ms[lv] < 1 || ns[lv] < 0) throw ConfigError("refinement level out of range");
      Grid g(ctx.origami, static_cast<int>(ms[lv]));
      SparseOperator S = assemble_S(g), T = assemble_T(g);
      GridField f = make_field(c, g);
      TimeTauSetup setup = time_tau_setup(f, g, sc.theta, speed, phi0, chi, static_cast<int>(ns[lv]), conv);
      ProductSolveResult res = product_solve(setup.F, sc.theta, speed, S, T, g, sc, conv, nullptr, ctx.opt.threads);
      if (!res.defects.empty()) throw LsqNoConvergence(res.defects.front());
      TimeTauReport rep = time_tau_check(res.solution, f, g, sc.theta, speed, phi0, pts, conv);
      csv.add(rep.residual).add(setup.normalization_error).add(setup.F.tail_norm).add(res.max_obstruction_dim);
      csv.add(std::string());
      ctx.info("time-tau level " + std::to_string(lv) + " residual " + format_double(rep.residual));
    } catch (const BumpOverlapsSection&) {
      throw;
    } catch (const Error& e) {
      for (int k = 0; k < 4; ++k) csv.add(std::string());
      csv.add(error_text(e));
      failures.push_back(error_text(e));
    }
    csv.end_row();
  }
  csv.close();
  for (const auto& d : failures) ctx.log() << "twistlab: timetau defect: " << d << "\n";
  return failures.empty() ? kExitOk : kExitPartial;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"spectrum", "weyl", "solve", "scan",
                                                 "invariants", "beurling", "product", "timetau"};
  return names;
}

int run_command(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opt) {
  std::ostream& log = opt.log ? *opt.log : std::cerr;
  static const std::map<std::string, int (*)(const RunContext&)> table = {
      {"spectrum", cmd_spectrum}, {"weyl", cmd_weyl},         {"solve", cmd_solve},     {"scan", cmd_scan},
      {"invariants", cmd_invariants}, {"beurling", cmd_beurling}, {"product", cmd_product}, {"timetau", cmd_timetau}};
  auto it = table.find(name);
  if (it == table.end()) {
    log << "twistlab: error: unknown command '" << name << "'\n";
    return kExitFatal;
  }
  try {
    RunContext ctx(cfg, opt);
    ctx.info("running " + name + " into " + ctx.out_dir);
    return it->second(ctx);
  } catch (const Error& e) {
    log << "twistlab: error: " << e.kind() << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    log << "twistlab: error: " << e.what() << "\n";
  }
  return kExitFatal;
}

}  // namespace twistlab
