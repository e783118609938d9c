#include "twistlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "twistlab/errors.hpp"

namespace twistlab {

namespace {

constexpr double kEdgeEps = 1e-13;

bool near(double a, double b) { return std::abs(a - b) <= kEdgeEps; }

// Cone order of the vertex at local corner (cx, cy) in {0,1}^2 of square s.
int corner_order(const VertexMap& vm, int s, int cx, int cy) {
  Corner c = cx == 0 ? (cy == 0 ? Corner::BottomLeft : Corner::TopLeft)
                     : (cy == 0 ? Corner::BottomRight : Corner::TopRight);
  return vm.order(vm.vertex(s, c));
}

void check_not_cone(const VertexMap& vm, int s, double x, double y, double t) {
  const bool cx = near(x, 0.0) || near(x, 1.0);
  const bool cy = near(y, 0.0) || near(y, 1.0);
  if (!(cx && cy)) return;
  int ix = near(x, 1.0) ? 1 : 0;
  int iy = near(y, 1.0) ? 1 : 0;
  if (corner_order(vm, s, ix, iy) > 0) {
    std::ostringstream os;
    os << "trajectory meets a cone point at square " << s << " corner (" << ix << ", " << iy
       << ") at time " << t;
    throw SingularHit(os.str());
  }
}

}  // namespace

SurfacePoint Trajectory::at(double t) const {
  if (segments.empty()) return end;
  t = std::clamp(t, 0.0, length);
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double v, const FlowSegment& s) { return v < s.t1; });
  const FlowSegment& s = it == segments.end() ? segments.back() : *it;
  double span = s.t1 - s.t0;
  double a = span > 0.0 ? (t - s.t0) / span : 0.0;
  return {s.square, s.x0 + a * (s.x1 - s.x0), s.y0 + a * (s.y1 - s.y0)};
}

Trajectory flow_trajectory(const Origami& o, SurfacePoint p, double theta, double length) {
  VertexMap vm(o);
  return flow_trajectory(o, vm, p, theta, length);
}

Trajectory flow_trajectory(const Origami& o, const VertexMap& vm, SurfacePoint p, double theta,
                           double length) {
  if (p.square < 0 || p.square >= o.n_squares()) throw DimensionMismatch("square index out of range");
  if (!(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0)) {
    throw DimensionMismatch("local coordinates must lie in [0, 1]");
  }
  if (!(length >= 0.0)) throw DimensionMismatch("flow length must be nonnegative");
  check_not_cone(vm, p.square, p.x, p.y, 0.0);
  const double c = std::cos(theta), s = std::sin(theta);
  const double dx = std::abs(c) < 1e-15 ? 0.0 : c;
  const double dy = std::abs(s) < 1e-15 ? 0.0 : s;

  // Move points sitting on an outgoing edge into the adjacent square.
  auto normalize = [&](SurfacePoint q) {
    if (dx > 0.0 && q.x >= 1.0 - kEdgeEps) { q.square = o.right(q.square); q.x = 0.0; }
    if (dx < 0.0 && q.x <= kEdgeEps) { q.square = o.left(q.square); q.x = 1.0; }
    if (dy > 0.0 && q.y >= 1.0 - kEdgeEps) { q.square = o.up(q.square); q.y = 0.0; }
    if (dy < 0.0 && q.y <= kEdgeEps) { q.square = o.down(q.square); q.y = 1.0; }
    return q;
  };

  Trajectory tr;
  tr.length = length;
  double t = 0.0;
  SurfacePoint q = normalize(p);
  while (t < length) {
    double tx = dx > 0.0 ? (1.0 - q.x) / dx : dx < 0.0 ? -q.x / dx : INFINITY;
    double ty = dy > 0.0 ? (1.0 - q.y) / dy : dy < 0.0 ? -q.y / dy : INFINITY;
    const bool last = length - t <= std::min(tx, ty);
    double step = last ? length - t : std::min(tx, ty);
    FlowSegment seg;
    seg.square = q.square;
    seg.x0 = q.x;
    seg.y0 = q.y;
    seg.x1 = std::clamp(q.x + step * dx, 0.0, 1.0);
    seg.y1 = std::clamp(q.y + step * dy, 0.0, 1.0);
    seg.t0 = t;
    seg.t1 = last ? length : t + step;
    if (step > 0.0) tr.segments.push_back(seg);
    t = seg.t1;
    if (last) {
      q = {seg.square, seg.x1, seg.y1};
      break;
    }
    check_not_cone(vm, seg.square, seg.x1, seg.y1, t);
    SurfacePoint next{seg.square, seg.x1, seg.y1};
    if (std::abs(tx - ty) <= kEdgeEps * std::max(1.0, tx)) {
      // Through a regular vertex: both gluings agree there.
      next.x = dx > 0.0 ? 1.0 : 0.0;
      next.y = dy > 0.0 ? 1.0 : 0.0;
    } else if (tx < ty) {
      next.x = dx > 0.0 ? 1.0 : 0.0;
    } else {
      next.y = dy > 0.0 ? 1.0 : 0.0;
    }
    q = normalize(next);
  }
  // Report the end point in [0, 1) coordinates.
  if (q.x >= 1.0) { q.square = o.right(q.square); q.x = 0.0; }
  if (q.y >= 1.0) { q.square = o.up(q.square); q.y = 0.0; }
  tr.end = q;
  return tr;
}

namespace {

// Cell at local indices (i, j) relative to square s, with i, j allowed to
// leave [0, m) by a few cells: walk horizontally first, then vertically.
Cell cell_at(const Grid& g, int s, int i, int j) {
  const int m = g.m();
  Cell c{s, std::clamp(i, 0, m - 1), std::clamp(j, 0, m - 1)};
  for (int k = c.i; k < i; ++k) c = g.neighbor(c, Direction::Right);
  for (int k = c.i; k > i; --k) c = g.neighbor(c, Direction::Left);
  int cj = std::clamp(j, 0, m - 1);
  for (int k = cj; k < j; ++k) c = g.neighbor(c, Direction::Up);
  for (int k = cj; k > j; --k) c = g.neighbor(c, Direction::Down);
  return c;
}

void lagrange4(double t, double w[4]) {
  // Nodes -1, 0, 1, 2.
  w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
  w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
  w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
}

}  // namespace

Complex interpolate(const Grid& g, const GridField& u, SurfacePoint p, Interpolation kind) {
  const int m = g.m();
  double X = p.x * m - 0.5, Y = p.y * m - 0.5;
  int i0 = static_cast<int>(std::floor(X)), j0 = static_cast<int>(std::floor(Y));
  double fx = X - i0, fy = Y - j0;
  if (kind == Interpolation::Bilinear) {
    double wx[2] = {1.0 - fx, fx}, wy[2] = {1.0 - fy, fy};
    Complex acc = 0.0;
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) acc += wx[a] * wy[b] * u(g.index(cell_at(g, p.square, i0 + a, j0 + b)));
    return acc;
  }
  double wx[4], wy[4];
  lagrange4(fx, wx);
  lagrange4(fy, wy);
  Complex acc = 0.0;
  for (int b = 0; b < 4; ++b)
    for (int a = 0; a < 4; ++a)
      acc += wx[a] * wy[b] * u(g.index(cell_at(g, p.square, i0 - 1 + a, j0 - 1 + b)));
  return acc;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw DimensionMismatch("Gauss-Legendre needs at least one node");
  // Golub-Welsch: eigenvalues of the Jacobi matrix.
  RMatrix J = RMatrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(J);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    nodes[k] = es.eigenvalues()(k);
    double v = es.eigenvectors()(0, k);
    weights[k] = 2.0 * v * v;
  }
}

BirkhoffReport twisted_birkhoff_check(const Grid& g, const GridField& u, const GridField& f,
                                      double theta, double twist, SurfacePoint x0, double time_T,
                                      int quad_n, Interpolation kind) {
  if (u.size() != g.size() || f.size() != g.size()) throw DimensionMismatch("field size mismatch");
  if (quad_n < 1) throw DimensionMismatch("quad_n must be positive");
  Trajectory tr = flow_trajectory(g.origami(), x0, theta, time_T);
  BirkhoffReport rep;
  std::vector<double> xs, ws;
  for (const auto& seg : tr.segments) {
    const double len = seg.t1 - seg.t0;
    const int n = std::max(2, static_cast<int>(std::ceil(quad_n * len)));
    gauss_legendre(n, xs, ws);
    for (int k = 0; k < n; ++k) {
      double a = 0.5 * (xs[k] + 1.0);
      double t = seg.t0 + a * len;
      SurfacePoint q{seg.square, seg.x0 + a * (seg.x1 - seg.x0), seg.y0 + a * (seg.y1 - seg.y0)};
      rep.integral += 0.5 * len * ws[k] * std::polar(1.0, twist * t) * interpolate(g, f, q, kind);
    }
    rep.nodes += n;
  }
  SurfacePoint start = tr.segments.empty() ? x0 : SurfacePoint{tr.segments.front().square,
                                                               tr.segments.front().x0,
                                                               tr.segments.front().y0};
  rep.lhs = std::polar(1.0, twist * time_T) * interpolate(g, u, tr.end, kind) -
            interpolate(g, u, start, kind);
  rep.residual = std::abs(rep.lhs - rep.integral);
  return rep;
}

}  // namespace twistlab
