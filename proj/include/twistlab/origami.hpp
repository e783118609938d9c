// Square-tiled translation surfaces and their singularity data.
//
// A surface with N unit squares is described by two permutations of
// {0..N-1}: right(s) is the square glued to the right edge of s and up(s)
// the square glued to its top edge. Both gluings are translations.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace twistlab {

using Permutation = std::vector<int>;

class Origami {
 public:
  // Validates both permutations and connectivity.
  // Throws NotAPermutation or DisconnectedSurface.
  Origami(int n_squares, Permutation right, Permutation up);

  int n_squares() const { return static_cast<int>(right_.size()); }
  int right(int s) const { return right_[s]; }
  int up(int s) const { return up_[s]; }
  int left(int s) const { return right_inv_[s]; }
  int down(int s) const { return up_inv_[s]; }

  const Permutation& perm_right() const { return right_; }
  const Permutation& perm_up() const { return up_; }

  // True when right and up commute at square s, i.e. right(up(s)) == up(right(s)).
  bool commutes_at(int s) const;

  // Canonical one-line text used for hashing and provenance.
  std::string describe() const;

  bool operator==(const Origami& other) const = default;

 private:
  Permutation right_, up_, right_inv_, up_inv_;
};

Origami build_origami(int n, Permutation r, Permutation u);

struct ConePoint {
  int vertex_id = 0;
  int order = 0;  // cone angle 2*pi*(order+1)
};

struct SingularityData {
  std::vector<ConePoint> cone_points;  // only vertices with order > 0
  int genus = 0;
  double area = 0.0;
  int n_vertices = 0;
  bool has_odd_order = false;
};

// Corners of a square in counter-clockwise order starting bottom-left.
enum class Corner { BottomLeft = 0, BottomRight = 1, TopRight = 2, TopLeft = 3 };

// Vertex classes of the tiling. Every vertex is the bottom-left corner of
// some square; squares sharing a bottom-left vertex form one cycle of the
// commutator c = r u r^{-1} u^{-1} ... see singularities().
class VertexMap {
 public:
  explicit VertexMap(const Origami& o);

  int n_vertices() const { return static_cast<int>(order_.size()); }
  // Vertex id of the given corner of square s.
  int vertex(int s, Corner c) const;
  // Order k of the vertex (0 for a regular point).
  int order(int vertex_id) const { return order_[vertex_id]; }

 private:
  const Origami* origami_;
  std::vector<int> bl_vertex_;  // vertex id of the bottom-left corner of each square
  std::vector<int> order_;
};

SingularityData singularities(const Origami& o);

// Parses a permutation given in cycle notation "(0 1)(2)" or array
// notation "[1, 0, 2]". Fixed points may be omitted in cycle notation.
Permutation parse_permutation(const std::string& text, int n);

// Cycle notation with every fixed point written out, e.g. "(0 1)(2)".
std::string format_cycles(const Permutation& p);

namespace surfaces {
Origami torus();
Origami l_shaped();
// Two squares side by side, glued into a horizontal cylinder of length 2.
Origami two_square_cover();
// Eight squares labelled by the quaternion group, right = g -> g*i, up = g -> g*j.
Origami quaternion();
}  // namespace surfaces

}  // namespace twistlab
