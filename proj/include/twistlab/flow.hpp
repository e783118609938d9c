// Straight-line flow on square-tiled surfaces, point evaluation of grid
// fields and the flow-integral check of solutions of the twisted
// cohomological equation.
#pragma once

#include <vector>

#include "twistlab/grid.hpp"
#include "twistlab/origami.hpp"
#include "twistlab/types.hpp"

namespace twistlab {

struct SurfacePoint {
  int square = 0;
  double x = 0.0;  // local coordinates in [0, 1)
  double y = 0.0;
};

struct FlowSegment {
  int square = 0;
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double t0 = 0.0, t1 = 0.0;
};

struct Trajectory {
  std::vector<FlowSegment> segments;
  SurfacePoint end;
  double length = 0.0;
  // Point at time t in [0, length].
  SurfacePoint at(double t) const;
};

// Flow in direction (cos theta, sin theta) for the given length. Edge
// crossings follow the gluing permutations; passing exactly through a
// regular vertex is allowed. Throws SingularHit when the path starts at or
// runs into a cone point.
Trajectory flow_trajectory(const Origami& o, SurfacePoint x0, double theta, double length);
// Same, reusing a vertex map of o across many calls.
Trajectory flow_trajectory(const Origami& o, const VertexMap& vm, SurfacePoint x0, double theta,
                           double length);

enum class Interpolation { Bilinear, Cubic };

// Point value of a cell-centred field; stencils cross square edges through
// the gluings.
Complex interpolate(const Grid& g, const GridField& u, SurfacePoint p,
                    Interpolation kind = Interpolation::Bilinear);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

struct BirkhoffReport {
  double residual = 0.0;
  Complex lhs;       // e^{i twist T} u(Phi^T x0) - u(x0)
  Complex integral;  // int_0^T e^{i twist t} f(Phi^t x0) dt
  int nodes = 0;
};

// | e^{i twist T} u(Phi^T x0) - u(x0) - int_0^T e^{i twist t} f(Phi^t x0) dt |
// with Gauss-Legendre quadrature on each trajectory segment, using at
// least quad_n nodes per unit time.
BirkhoffReport twisted_birkhoff_check(const Grid& g, const GridField& u, const GridField& f,
                                      double theta, double twist, SurfacePoint x0, double time_T,
                                      int quad_n = 32,
                                      Interpolation kind = Interpolation::Bilinear);

}  // namespace twistlab
