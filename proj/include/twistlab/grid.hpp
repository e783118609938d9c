// Cell-centred grids on square-tiled surfaces and the finite-difference
// operators S, T (horizontal and vertical derivatives) built on them.
#pragma once

#include <iosfwd>
#include <vector>

#include "twistlab/origami.hpp"
#include "twistlab/types.hpp"

namespace twistlab {

struct Cell {
  int square = 0;
  int i = 0;  // column, 0..m-1, left to right
  int j = 0;  // row, 0..m-1, bottom to top
  bool operator==(const Cell&) const = default;
};

enum class Direction { Right, Left, Up, Down };

// Grid of m x m cells per square (m odd) together with the global DOF map
// index = square*m*m + j*m + i.
class Grid {
 public:
  Grid(Origami origami, int m);  // throws EvenGridSize

  const Origami& origami() const { return origami_; }
  int m() const { return m_; }
  double h() const { return 1.0 / m_; }
  int size() const { return origami_.n_squares() * m_ * m_; }
  double area() const { return origami_.n_squares(); }

  int index(const Cell& c) const { return (c.square * m_ + c.j) * m_ + c.i; }
  Cell cell(int index) const;
  Cell neighbor(const Cell& c, Direction d) const;
  // Cell centre in the local coordinates of its square.
  double x_center(int i) const { return (i + 0.5) / m_; }

  // Grid inner product <u, v> = (1/m^2) sum u conj(v) and its norm.
  Complex inner(const GridField& u, const GridField& v) const;
  double norm(const GridField& u) const;

  GridField constant(Complex c) const { return GridField::Constant(size(), c); }

 private:
  Origami origami_;
  int m_;
};

Cell neighbor(const Origami& o, int m, const Cell& c, Direction d);

enum class Symmetry { None, Skew, Hermitian };

struct SparseOperator {
  CSparse matrix;
  Symmetry symmetry = Symmetry::None;

  GridField apply(const GridField& u) const { return matrix * u; }
  int size() const { return static_cast<int>(matrix.rows()); }
};

// Largest entrywise deviation from the tagged symmetry.
double symmetry_defect(const CSparse& a, Symmetry s);

SparseOperator assemble_S(const Grid& g);
SparseOperator assemble_T(const Grid& g);
// Q = S^H S + T^H T.
SparseOperator assemble_Q(const SparseOperator& S, const SparseOperator& T);

// Dirichlet form Q(u, u) = |Su|^2 + |Tu|^2 in the grid norm.
double dirichlet_form(const GridField& u, const SparseOperator& S, const SparseOperator& T,
                      const Grid& g);

struct CommutatorReport {
  double norm = 0.0;            // max row-sum norm of ST - TS
  std::vector<int> support;     // cells with a nonzero row, ascending
  double max_corner_distance = 0.0;  // max stencil distance of the support from corner cells
};

CommutatorReport commutator_report(const SparseOperator& S, const SparseOperator& T,
                                   const Grid& g);

// Writes "row col re im" lines, one per stored nonzero, preceded by a
// "% rows cols nnz" header.
void write_coo(std::ostream& os, const SparseOperator& op);

}  // namespace twistlab
