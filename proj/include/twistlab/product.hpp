// Cohomological equation for the product flow on M x T by circle-mode
// reduction, and the time-tau map construction on the section phi = phi0.
#pragma once

#include <string>
#include <vector>

#include "twistlab/cohosolve.hpp"
#include "twistlab/flow.hpp"
#include "twistlab/grid.hpp"
#include "twistlab/spectral.hpp"
#include "twistlab/types.hpp"

namespace twistlab {

// Fourier modes n = -n_max..n_max in the circle variable phi.
class ProductField {
 public:
  ProductField() = default;
  ProductField(int n_max, int size);  // all modes zero

  int n_max() const { return n_max_; }
  int size() const { return size_; }
  GridField& mode(int n);
  const GridField& mode(int n) const;
  // Sum_n F_n e^{2 pi i n phi}.
  GridField section(double phi) const;

  // Norm of the modes beyond n_max, when the producer measured it.
  double tail_norm = 0.0;

 private:
  int n_max_ = 0;
  int size_ = 0;
  std::vector<GridField> modes_;
};

struct ProductNormSpec {
  double s = 0.0;
  int nu = 0;
};

// (sum_n sum_{l <= nu} (2 pi n)^{2l} |F_n|_s^2)^{1/2}. The surface norm is the
// Friedrichs norm when a basis is given, otherwise the weighted norm
// (integer s only).
double product_norm(const ProductField& F, const ProductNormSpec& spec, const SparseOperator& S,
                    const SparseOperator& T, const Grid& g, const EigenBasis* basis = nullptr);

// Circle speed of the product vector field: CosScaled uses S_theta + c cos(theta) d/dphi,
// so mode n carries the twist 2 pi c n cos(theta); Plain drops the cos(theta) factor.
enum class ProductConvention { CosScaled, Plain };
const char* to_string(ProductConvention c);
ProductConvention parse_product_convention(const std::string& s);

// Twist of mode n and the circle speed of the flow under a convention.
double mode_twist(int n, double theta, double c, ProductConvention conv);
double circle_speed(double theta, double c, ProductConvention conv);

struct ProductSolveResult {
  ProductField solution;
  std::vector<int> mode_index;          // n for each entry of reports
  std::vector<SolveReport> reports;     // successful modes
  std::vector<std::string> defects;     // "n=<n> <Kind>: <message>"
  int max_obstruction_dim = 0;
  double max_obstruction_mass = 0.0;
  double max_residual = 0.0;
  ProductConvention convention = ProductConvention::CosScaled;
};

// Solves (S_theta + i sigma_n) u_n = F_n mode by mode; failed modes are left
// zero and listed as defects. `base` supplies tolerances and norm orders.
ProductSolveResult product_solve(const ProductField& F, double theta, double c,
                                 const SparseOperator& S, const SparseOperator& T, const Grid& g,
                                 const SolveConfig& base,
                                 ProductConvention conv = ProductConvention::CosScaled,
                                 const EigenBasis* basis = nullptr, int threads = 1);

// Standard C-infinity bump on the arc |phi - center| < width/2 of the
// circle R/Z, normalized to unit integral.
class Bump {
 public:
  Bump(double center, double width);
  double operator()(double phi) const;
  double center() const { return center_; }
  double width() const { return width_; }
  bool contains(double phi) const;  // phi inside the closed support
  // Fourier coefficient int chi(phi) e^{-2 pi i n phi} dphi.
  Complex fourier(int n, int quad_n = 256) const;
  // Quadrature nodes and weights covering the support.
  void quadrature(int quad_n, std::vector<double>& nodes, std::vector<double>& weights) const;

 private:
  double center_, width_, scale_ = 1.0;
};

struct TimeTauSetup {
  ProductField F;
  double normalization_error = 0.0;  // |int chi - 1| by an independent trapezoid rule
  double phi0 = 0.0;
  double speed = 0.0;                // circle speed of the flow
};

// F(y, phi) = speed chi(phi) f(Phi_theta^{-tau(phi)} y) with
// tau(phi) = ((phi - phi0) mod 1) / speed, so that the flow integral of F
// over one return time from (x, phi0) equals f(x). Modes are computed by
// quadrature over supp chi; the input tail is measured up to 2 n_max.
// Throws BumpOverlapsSection when phi0 lies in supp chi.
TimeTauSetup time_tau_setup(const GridField& f, const Grid& g, double theta, double c,
                            double phi0, const Bump& chi, int n_max,
                            ProductConvention conv = ProductConvention::Plain, int quad_n = 128);

struct TimeTauReport {
  double residual = 0.0;  // max over samples
  int samples = 0;
  double return_time = 0.0;
};

// max over sample points x of |u(Phi^{1/speed} x) - u(x) - f(x)| on the
// section phi = phi0, with point values by cubic interpolation.
TimeTauReport time_tau_check(const ProductField& u, const GridField& f, const Grid& g,
                             double theta, double c, double phi0,
                             const std::vector<SurfacePoint>& sample_points,
                             ProductConvention conv = ProductConvention::Plain);

}  // namespace twistlab
