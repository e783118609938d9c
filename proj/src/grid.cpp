#include "twistlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "twistlab/errors.hpp"

namespace twistlab {

Grid::Grid(Origami origami, int m) : origami_(std::move(origami)), m_(m) {
  if (m <= 0 || m % 2 == 0) {
    throw EvenGridSize("grid size m = " + std::to_string(m) + " must be odd and positive");
  }
}

Cell Grid::cell(int index) const {
  Cell c;
  c.i = index % m_;
  index /= m_;
  c.j = index % m_;
  c.square = index / m_;
  return c;
}

Cell neighbor(const Origami& o, int m, const Cell& c, Direction d) {
  Cell n = c;
  switch (d) {
    case Direction::Right:
      if (c.i + 1 < m) ++n.i;
      else { n.i = 0; n.square = o.right(c.square); }
      break;
    case Direction::Left:
      if (c.i > 0) --n.i;
      else { n.i = m - 1; n.square = o.left(c.square); }
      break;
    case Direction::Up:
      if (c.j + 1 < m) ++n.j;
      else { n.j = 0; n.square = o.up(c.square); }
      break;
    case Direction::Down:
      if (c.j > 0) --n.j;
      else { n.j = m - 1; n.square = o.down(c.square); }
      break;
  }
  return n;
}

Cell Grid::neighbor(const Cell& c, Direction d) const { return twistlab::neighbor(origami_, m_, c, d); }

Complex Grid::inner(const GridField& u, const GridField& v) const {
  return v.dot(u) / static_cast<double>(m_) / static_cast<double>(m_);
}

double Grid::norm(const GridField& u) const { return u.norm() / m_; }

double symmetry_defect(const CSparse& a, Symmetry s) {
  if (s == Symmetry::None) return 0.0;
  CSparse t = a.adjoint();
  CSparse d = s == Symmetry::Skew ? CSparse(a + t) : CSparse(a - t);
  double worst = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (CSparse::InnerIterator it(d, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

namespace {

SparseOperator assemble_difference(const Grid& g, Direction forward, Direction backward) {
  const int n = g.size();
  const double half = 0.5 * g.m();  // 1/(2h)
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(2 * static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Cell c = g.cell(k);
    trips.emplace_back(k, g.index(g.neighbor(c, forward)), Complex(half, 0.0));
    trips.emplace_back(k, g.index(g.neighbor(c, backward)), Complex(-half, 0.0));
  }
  SparseOperator op;
  op.matrix.resize(n, n);
  // With m odd and at least 3 the two neighbours are distinct cells; for
  // m = 1 they may coincide and the entries cancel to an explicit zero.
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.prune(Complex(0.0, 0.0));
  op.matrix.makeCompressed();
  op.symmetry = Symmetry::Skew;
  if (symmetry_defect(op.matrix, Symmetry::Skew) != 0.0) {
    throw Error("assembled difference operator is not exactly skew");
  }
  return op;
}

}  // namespace

SparseOperator assemble_S(const Grid& g) { return assemble_difference(g, Direction::Right, Direction::Left); }

SparseOperator assemble_T(const Grid& g) { return assemble_difference(g, Direction::Up, Direction::Down); }

SparseOperator assemble_Q(const SparseOperator& S, const SparseOperator& T) {
  SparseOperator q;
  q.matrix = CSparse(S.matrix.adjoint()) * S.matrix + CSparse(T.matrix.adjoint()) * T.matrix;
  q.matrix.prune(Complex(0.0, 0.0));
  q.matrix.makeCompressed();
  q.symmetry = Symmetry::Hermitian;
  double scale = 0.0;
  for (int k = 0; k < q.matrix.outerSize(); ++k)
    for (CSparse::InnerIterator it(q.matrix, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  if (symmetry_defect(q.matrix, Symmetry::Hermitian) > 1e-14 * scale) {
    throw Error("assembled Q is not hermitian");
  }
  return q;
}

double dirichlet_form(const GridField& u, const SparseOperator& S, const SparseOperator& T,
                      const Grid& g) {
  double a = g.norm(S.apply(u));
  double b = g.norm(T.apply(u));
  return a * a + b * b;
}

CommutatorReport commutator_report(const SparseOperator& S, const SparseOperator& T,
                                   const Grid& g) {
  CSparse c = S.matrix * T.matrix - T.matrix * S.matrix;
  c.prune(Complex(0.0, 0.0));
  CSparse rows = c.transpose();  // column k of rows is row k of c
  CommutatorReport rep;
  const int m = g.m();
  for (int k = 0; k < rows.outerSize(); ++k) {
    double sum = 0.0;
    for (CSparse::InnerIterator it(rows, k); it; ++it) sum += std::abs(it.value());
    if (sum > 0.0) {
      rep.support.push_back(k);
      rep.norm = std::max(rep.norm, sum);
      Cell cl = g.cell(k);
      int di = std::min(cl.i, m - 1 - cl.i);
      int dj = std::min(cl.j, m - 1 - cl.j);
      rep.max_corner_distance = std::max(rep.max_corner_distance, static_cast<double>(std::max(di, dj)));
    }
  }
  std::sort(rep.support.begin(), rep.support.end());
  return rep;
}

void write_coo(std::ostream& os, const SparseOperator& op) {
  const CSparse& a = op.matrix;
  os << "% " << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  os.precision(17);
  CSparse rowmajor = a.transpose();
  for (int r = 0; r < rowmajor.outerSize(); ++r)
    for (CSparse::InnerIterator it(rowmajor, r); it; ++it)
      os << r << ' ' << it.index() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
}

}  // namespace twistlab
