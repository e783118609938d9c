// Cauchy integrals of atomic measures, non-tangential maximal functions,
// weak-type constants and Hardy quasi-norms on the unit disk.
#include <algorithm>
#include <cmath>
#include <random>

#include "twistlab/beurling.hpp"
#include "twistlab/errors.hpp"

namespace twistlab {

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  for (const Atom& a : atoms_) total_mass_ += std::abs(a.weight);
}

AtomicMeasure AtomicMeasure::scaled(Complex c) const {
  std::vector<Atom> out = atoms_;
  for (Atom& a : out) a.weight *= c;
  return AtomicMeasure(std::move(out));
}

AtomicMeasure AtomicMeasure::random(int n_atoms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, kTwoPi);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Atom> atoms(n_atoms);
  for (Atom& a : atoms) {
    a.t = pos(rng);
    double re = nd(rng);
    double im = nd(rng);
    a.weight = Complex(re, im);
  }
  return AtomicMeasure(std::move(atoms));
}

Complex cauchy_integral(const AtomicMeasure& mu, Complex z) {
  Complex sum = 0.0;
  for (const Atom& a : mu.atoms()) sum += a.weight / (z - std::polar(1.0, a.t));
  return sum;
}

Complex cauchy_boundary_value(const AtomicMeasure& mu, double theta) {
  return cauchy_integral(mu, std::polar(1.0, theta));
}

std::vector<Complex> cone_samples(double alpha, double theta, int radial_samples) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DimensionMismatch("alpha must lie in (0, 1)");
  const double half_angle = std::asin(alpha);
  const double step = kPi / 64.0;
  const int kmax = static_cast<int>(std::floor(half_angle / step));
  const Complex vertex = std::polar(1.0, theta);
  std::vector<Complex> out;
  for (int k = -kmax; k <= kmax; ++k) {
    const double psi = k * step;
    const double s = std::sin(psi);
    const double far = std::cos(psi) + std::sqrt(std::max(0.0, alpha * alpha - s * s));
    double delta = 0.5;
    for (int j = 1; j <= radial_samples; ++j, delta *= 0.5) {
      if (delta > far) continue;
      out.push_back(vertex * (1.0 - delta * std::polar(1.0, psi)));
    }
  }
  return out;
}

std::vector<double> maximal_function_scan(const DiskFunction& eval, double alpha,
                                          const std::vector<double>& theta_grid,
                                          int radial_samples) {
  std::vector<double> out;
  out.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    double best = 0.0;
    for (Complex z : cone_samples(alpha, theta, radial_samples)) best = std::max(best, std::abs(eval(z)));
    out.push_back(best);
  }
  return out;
}

WeakTypeReport weak_type_check(const AtomicMeasure& mu, const std::vector<double>& t_grid,
                               const std::vector<double>& theta_grid) {
  WeakTypeReport rep;
  if (mu.total_mass() == 0.0 || theta_grid.empty()) return rep;
  std::vector<double> values;
  values.reserve(theta_grid.size());
  for (double theta : theta_grid) values.push_back(std::abs(cauchy_boundary_value(mu, theta)));
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (double t : t_grid) {
    auto above = values.end() - std::upper_bound(values.begin(), values.end(), t);
    double c = t * (static_cast<double>(above) / n) / mu.total_mass();
    if (c > rep.constant) {
      rep.constant = c;
      rep.worst_t = t;
    }
  }
  return rep;
}

double hardy_pnorm(const DiskFunction& eval, double p, const std::vector<double>& r_grid,
                   const std::vector<double>& theta_grid) {
  if (!(p > 0.0)) throw DimensionMismatch("p must be positive");
  double best = 0.0;
  for (double r : r_grid) {
    double sum = 0.0;
    for (double theta : theta_grid) sum += std::pow(std::abs(eval(std::polar(r, theta))), p);
    best = std::max(best, std::pow(sum / static_cast<double>(theta_grid.size()), 1.0 / p));
  }
  return best;
}

std::vector<double> uniform_grid(int n, double lo, double hi, bool shift_half) {
  std::vector<double> g(n);
  const double h = (hi - lo) / n;
  for (int k = 0; k < n; ++k) g[k] = lo + (k + (shift_half ? 0.5 : 0.0)) * h;
  return g;
}

}  // namespace twistlab
