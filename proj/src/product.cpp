#include "twistlab/product.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "twistlab/errors.hpp"
#include "twistlab/parallel.hpp"

namespace twistlab {

ProductField::ProductField(int n_max, int size) : n_max_(n_max), size_(size) {
  if (n_max < 0) throw DimensionMismatch("n_max must be nonnegative");
  modes_.assign(2 * n_max + 1, GridField::Zero(size));
}

GridField& ProductField::mode(int n) {
  if (n < -n_max_ || n > n_max_) throw DimensionMismatch("mode index out of range");
  return modes_[n + n_max_];
}

const GridField& ProductField::mode(int n) const {
  if (n < -n_max_ || n > n_max_) throw DimensionMismatch("mode index out of range");
  return modes_[n + n_max_];
}

GridField ProductField::section(double phi) const {
  GridField out = GridField::Zero(size_);
  for (int n = -n_max_; n <= n_max_; ++n) out += std::polar(1.0, kTwoPi * n * phi) * mode(n);
  return out;
}

double product_norm(const ProductField& F, const ProductNormSpec& spec, const SparseOperator& S,
                    const SparseOperator& T, const Grid& g, const EigenBasis* basis) {
  if (spec.s < 0.0 || spec.nu < 0) throw ConfigError("product norm needs s >= 0 and nu >= 0");
  double acc = 0.0;
  for (int n = -F.n_max(); n <= F.n_max(); ++n) {
    const GridField& fn = F.mode(n);
    if (fn.size() == 0 || fn.isZero(0.0)) continue;
    double surf = basis != nullptr ? friedrichs_norm(fn, spec.s, *basis, g)
                                   : sobolev_norm(fn, spec.s, S, T, g, nullptr);
    double weight = 0.0;
    for (int l = 0; l <= spec.nu; ++l) weight += std::pow(kTwoPi * n, 2.0 * l);
    acc += weight * surf * surf;
  }
  return std::sqrt(acc);
}

const char* to_string(ProductConvention c) {
  return c == ProductConvention::CosScaled ? "cos_scaled" : "plain";
}

ProductConvention parse_product_convention(const std::string& s) {
  if (s == "cos_scaled") return ProductConvention::CosScaled;
  if (s == "plain") return ProductConvention::Plain;
  throw ConfigError("unknown product convention '" + s + "' (expected cos_scaled or plain)");
}

double circle_speed(double theta, double c, ProductConvention conv) {
  return conv == ProductConvention::CosScaled ? c * std::cos(theta) : c;
}

double mode_twist(int n, double theta, double c, ProductConvention conv) {
  return kTwoPi * n * circle_speed(theta, c, conv);
}

ProductSolveResult product_solve(const ProductField& F, double theta, double c,
                                 const SparseOperator& S, const SparseOperator& T, const Grid& g,
                                 const SolveConfig& base, ProductConvention conv,
                                 const EigenBasis* basis, int threads) {
  const int n_max = F.n_max();
  const int count = 2 * n_max + 1;
  ProductSolveResult out;
  out.convention = conv;
  out.solution = ProductField(n_max, g.size());
  std::vector<std::optional<SolveReport>> reports(count);
  std::vector<std::string> errors(count);

  parallel_for(count, threads, [&](int idx) {
    const int n = idx - n_max;
    SolveConfig cfg = base;
    cfg.theta = theta;
    cfg.method = SolveMethod::Lsq;
    // sigma is stored so that cfg.twist() equals the mode twist in either convention.
    cfg.sigma = kTwoPi * c * n;
    cfg.twist_mode = conv == ProductConvention::CosScaled ? TwistMode::CosScaled : TwistMode::Raw;
    try {
      reports[idx] = solve_lsq(F.mode(n), S, T, g, cfg, basis);
    } catch (const Error& e) {
      errors[idx] = std::string(e.kind()) + ": " + e.what();
    }
  });

  for (int idx = 0; idx < count; ++idx) {
    const int n = idx - n_max;
    if (!errors[idx].empty()) {
      out.defects.push_back("n=" + std::to_string(n) + " " + errors[idx]);
      continue;
    }
    SolveReport& rep = *reports[idx];
    out.solution.mode(n) = rep.solution;
    out.max_obstruction_dim = std::max(out.max_obstruction_dim, rep.obstruction_dim);
    out.max_obstruction_mass = std::max(out.max_obstruction_mass, rep.obstruction_mass);
    out.max_residual = std::max(out.max_residual, rep.residual);
    out.mode_index.push_back(n);
    out.reports.push_back(std::move(rep));
  }
  return out;
}

namespace {

double wrap01(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

// Signed distance from center on the circle, in [-1/2, 1/2).
double circle_offset(double phi, double center) {
  double d = wrap01(phi - center + 0.5) - 0.5;
  return d;
}

double raw_bump(double q) { return std::abs(q) < 1.0 ? std::exp(-1.0 / (1.0 - q * q)) : 0.0; }

}  // namespace

Bump::Bump(double center, double width) : center_(wrap01(center)), width_(width) {
  if (!(width > 0.0 && width < 1.0)) throw ConfigError("bump width must lie in (0, 1)");
  std::vector<double> x, w;
  gauss_legendre(200, x, w);
  double integral = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) integral += w[k] * raw_bump(x[k]);
  scale_ = 1.0 / (0.5 * width_ * integral);
}

double Bump::operator()(double phi) const {
  return scale_ * raw_bump(circle_offset(phi, center_) / (0.5 * width_));
}

bool Bump::contains(double phi) const {
  return std::abs(circle_offset(phi, center_)) <= 0.5 * width_;
}

void Bump::quadrature(int quad_n, std::vector<double>& nodes, std::vector<double>& weights) const {
  std::vector<double> x, w;
  gauss_legendre(quad_n, x, w);
  nodes.resize(quad_n);
  weights.resize(quad_n);
  const double half = 0.5 * width_;
  for (int k = 0; k < quad_n; ++k) {
    nodes[k] = wrap01(center_ + half * x[k]);
    weights[k] = half * w[k];
  }
}

Complex Bump::fourier(int n, int quad_n) const {
  std::vector<double> x, w;
  quadrature(quad_n, x, w);
  Complex acc = 0.0;
  for (int k = 0; k < quad_n; ++k) acc += w[k] * (*this)(x[k]) * std::polar(1.0, -kTwoPi * n * x[k]);
  return acc;
}

TimeTauSetup time_tau_setup(const GridField& f, const Grid& g, double theta, double c,
                            double phi0, const Bump& chi, int n_max, ProductConvention conv,
                            int quad_n) {
  if (f.size() != g.size()) throw DimensionMismatch("field size does not match the grid");
  if (chi.contains(phi0)) {
    std::ostringstream os;
    os << "section phi0 = " << phi0 << " lies in the bump support centred at " << chi.center()
       << " with width " << chi.width();
    throw BumpOverlapsSection(os.str());
  }
  const double speed = circle_speed(theta, c, conv);
  if (!(std::abs(speed) > 0.0)) throw ConfigError("the circle speed of the flow must be nonzero");

  TimeTauSetup out;
  out.phi0 = phi0;
  out.speed = speed;
  {
    const int n = 4096;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += chi((k + 0.5) / n);
    out.normalization_error = std::abs(acc / n - 1.0);
  }

  const int wide = 2 * n_max;
  ProductField wideF(wide, g.size());
  std::vector<double> nodes, weights;
  chi.quadrature(quad_n, nodes, weights);
  const Origami& o = g.origami();
  VertexMap vm(o);
  const int N = g.size();
  GridField shifted(N);
  for (int q = 0; q < quad_n; ++q) {
    const double phi = nodes[q];
    const double chi_val = chi(phi);
    if (chi_val == 0.0) continue;
    // The backward flow time from the section to phi.
    double tau = speed > 0.0 ? wrap01(phi - phi0) / speed : wrap01(phi0 - phi) / (-speed);
    for (int k = 0; k < N; ++k) {
      Cell cl = g.cell(k);
      SurfacePoint p{cl.square, g.x_center(cl.i), g.x_center(cl.j)};
      SurfacePoint src = flow_trajectory(o, vm, p, theta + kPi, tau).end;
      shifted(k) = interpolate(g, f, src, Interpolation::Cubic);
    }
    const double base = weights[q] * std::abs(speed) * chi_val;
    for (int n = -wide; n <= wide; ++n) wideF.mode(n) += (base * std::polar(1.0, -kTwoPi * n * phi)) * shifted;
  }

  out.F = ProductField(n_max, N);
  double tail = 0.0;
  for (int n = -wide; n <= wide; ++n) {
    if (std::abs(n) <= n_max) out.F.mode(n) = wideF.mode(n);
    else tail += std::pow(g.norm(wideF.mode(n)), 2);
  }
  out.F.tail_norm = std::sqrt(tail);
  return out;
}

TimeTauReport time_tau_check(const ProductField& u, const GridField& f, const Grid& g,
                             double theta, double c, double phi0,
                             const std::vector<SurfacePoint>& sample_points,
                             ProductConvention conv) {
  const double speed = circle_speed(theta, c, conv);
  if (!(std::abs(speed) > 0.0)) throw ConfigError("the circle speed of the flow must be nonzero");
  TimeTauReport rep;
  rep.return_time = 1.0 / std::abs(speed);
  GridField sec = u.section(phi0);
  const Origami& o = g.origami();
  VertexMap vm(o);
  for (const auto& x : sample_points) {
    SurfacePoint y = flow_trajectory(o, vm, x, theta, rep.return_time).end;
    Complex r = interpolate(g, sec, y, Interpolation::Cubic) -
                interpolate(g, sec, x, Interpolation::Cubic) -
                interpolate(g, f, x, Interpolation::Cubic);
    rep.residual = std::max(rep.residual, std::abs(r));
    ++rep.samples;
  }
  return rep;
}

}  // namespace twistlab
