#include "twistlab/origami.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

#include "twistlab/errors.hpp"

namespace twistlab {

namespace {

void check_permutation(const Permutation& p, int n, const char* name) {
  if (static_cast<int>(p.size()) != n) {
    throw NotAPermutation(std::string(name) + " has " + std::to_string(p.size()) +
                          " entries, expected " + std::to_string(n));
  }
  std::vector<char> seen(n, 0);
  for (int i = 0; i < n; ++i) {
    int v = p[i];
    if (v < 0 || v >= n) {
      throw NotAPermutation(std::string(name) + "(" + std::to_string(i) + ") = " +
                            std::to_string(v) + " is out of range");
    }
    if (seen[v]) {
      throw NotAPermutation(std::string(name) + " maps two squares to " + std::to_string(v));
    }
    seen[v] = 1;
  }
}

Permutation inverse(const Permutation& p) {
  Permutation inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = static_cast<int>(i);
  return inv;
}

}  // namespace

Origami::Origami(int n_squares, Permutation right, Permutation up)
    : right_(std::move(right)), up_(std::move(up)) {
  if (n_squares <= 0) throw NotAPermutation("n_squares must be positive");
  check_permutation(right_, n_squares, "perm_right");
  check_permutation(up_, n_squares, "perm_up");
  right_inv_ = inverse(right_);
  up_inv_ = inverse(up_);

  // Orbit of square 0 under the group generated by right and up.
  std::vector<char> seen(n_squares, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int t : {right_[s], up_[s], right_inv_[s], up_inv_[s]}) {
      if (!seen[t]) {
        seen[t] = 1;
        ++reached;
        stack.push_back(t);
      }
    }
  }
  if (reached != n_squares) {
    throw DisconnectedSurface("the gluing reaches only " + std::to_string(reached) + " of " +
                              std::to_string(n_squares) + " squares from square 0");
  }
}

bool Origami::commutes_at(int s) const { return right_[up_[s]] == up_[right_[s]]; }

std::string Origami::describe() const {
  std::ostringstream os;
  os << "n_squares=" << n_squares() << ";perm_right=" << format_cycles(right_)
     << ";perm_up=" << format_cycles(up_);
  return os.str();
}

Origami build_origami(int n, Permutation r, Permutation u) {
  return Origami(n, std::move(r), std::move(u));
}

VertexMap::VertexMap(const Origami& o) : origami_(&o), bl_vertex_(o.n_squares(), -1) {
  // Walking counter-clockwise around the bottom-left corner of s visits
  // left(s) (as bottom-right), down(left(s)) (as top-right), then
  // right(down(left(s))) (as top-left), and finally the square
  // c(s) = up(right(down(left(s)))) which again has the vertex bottom-left.
  // Each full turn adds an angle of 2*pi, so a cycle of length l of c is a
  // vertex of total angle 2*pi*l and order l - 1.
  const int n = o.n_squares();
  for (int s = 0; s < n; ++s) {
    if (bl_vertex_[s] >= 0) continue;
    int id = static_cast<int>(order_.size());
    int length = 0;
    int t = s;
    do {
      bl_vertex_[t] = id;
      ++length;
      t = o.up(o.right(o.down(o.left(t))));
    } while (t != s);
    order_.push_back(length - 1);
  }
}

int VertexMap::vertex(int s, Corner c) const {
  const Origami& o = *origami_;
  switch (c) {
    case Corner::BottomLeft: return bl_vertex_[s];
    case Corner::BottomRight: return bl_vertex_[o.right(s)];
    case Corner::TopLeft: return bl_vertex_[o.up(s)];
    case Corner::TopRight: return bl_vertex_[o.up(o.right(s))];
  }
  return -1;
}

SingularityData singularities(const Origami& o) {
  VertexMap vm(o);
  SingularityData d;
  d.n_vertices = vm.n_vertices();
  d.area = static_cast<double>(o.n_squares());
  // Euler characteristic V - E + F with F = N, E = 2N.
  int chi = d.n_vertices - o.n_squares();
  d.genus = (2 - chi) / 2;
  for (int v = 0; v < vm.n_vertices(); ++v) {
    int k = vm.order(v);
    if (k > 0) {
      d.cone_points.push_back({v, k});
      if (k % 2 == 1) d.has_odd_order = true;
    }
  }
  return d;
}

namespace {

[[noreturn]] void parse_fail(const std::string& msg, std::size_t pos) {
  throw ParseError("column " + std::to_string(pos + 1) + ": " + msg);
}

int parse_int(const std::string& text, std::size_t& pos) {
  std::size_t start = pos;
  long value = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    value = value * 10 + (text[pos] - '0');
    if (value > 1000000000L) parse_fail("integer too large", start);
    ++pos;
  }
  if (pos == start) parse_fail("expected a square index", start);
  return static_cast<int>(value);
}

void skip_space(const std::string& text, std::size_t& pos, bool allow_comma) {
  while (pos < text.size() &&
         (std::isspace(static_cast<unsigned char>(text[pos])) || (allow_comma && text[pos] == ',')))
    ++pos;
}

}  // namespace

Permutation parse_permutation(const std::string& text, int n) {
  std::size_t pos = 0;
  skip_space(text, pos, false);
  if (pos == text.size()) parse_fail("empty permutation", pos);

  Permutation p;
  if (text[pos] == '[') {
    ++pos;
    skip_space(text, pos, false);
    while (pos < text.size() && text[pos] != ']') {
      std::size_t at = pos;
      int v = parse_int(text, pos);
      if (v >= n) parse_fail("index " + std::to_string(v) + " out of range for n = " +
                             std::to_string(n), at);
      p.push_back(v);
      skip_space(text, pos, true);
    }
    if (pos == text.size()) parse_fail("missing closing ']'", pos);
    ++pos;
    if (static_cast<int>(p.size()) != n) {
      parse_fail("array has " + std::to_string(p.size()) + " entries, expected " +
                 std::to_string(n), 0);
    }
  } else if (text[pos] == '(') {
    p.assign(n, -1);
    while (pos < text.size() && text[pos] == '(') {
      ++pos;
      std::vector<std::pair<int, std::size_t>> cycle;
      skip_space(text, pos, true);
      while (pos < text.size() && text[pos] != ')') {
        std::size_t at = pos;
        int v = parse_int(text, pos);
        if (v >= n) parse_fail("index " + std::to_string(v) + " out of range for n = " +
                               std::to_string(n), at);
        cycle.emplace_back(v, at);
        skip_space(text, pos, true);
      }
      if (pos == text.size()) parse_fail("missing closing ')'", pos);
      ++pos;
      if (cycle.empty()) parse_fail("empty cycle", pos - 1);
      for (std::size_t k = 0; k < cycle.size(); ++k) {
        int from = cycle[k].first;
        if (p[from] != -1) parse_fail("index " + std::to_string(from) + " repeated", cycle[k].second);
        p[from] = cycle[(k + 1) % cycle.size()].first;
      }
      skip_space(text, pos, false);
    }
    for (int i = 0; i < n; ++i)
      if (p[i] == -1) p[i] = i;
  } else {
    parse_fail(std::string("unexpected character '") + text[pos] + "'", pos);
  }
  skip_space(text, pos, false);
  if (pos != text.size()) parse_fail("trailing characters", pos);
  return p;
}

std::string format_cycles(const Permutation& p) {
  std::string out;
  std::vector<char> seen(p.size(), 0);
  for (std::size_t s = 0; s < p.size(); ++s) {
    if (seen[s]) continue;
    out += '(';
    std::size_t t = s;
    bool first = true;
    do {
      if (!first) out += ' ';
      out += std::to_string(t);
      seen[t] = 1;
      first = false;
      t = static_cast<std::size_t>(p[t]);
    } while (t != s);
    out += ')';
  }
  return out;
}

namespace surfaces {

Origami torus() { return Origami(1, {0}, {0}); }

Origami l_shaped() { return Origami(3, {1, 0, 2}, {2, 1, 0}); }

Origami two_square_cover() { return Origami(2, {1, 0}, {0, 1}); }

Origami quaternion() {
  // Index order: 1, i, j, k, -1, -i, -j, -k.
  // Right multiplication by i: 1->i, i->-1, j->-k, k->j, and negatives.
  Permutation r{1, 4, 7, 2, 5, 0, 3, 6};
  // Right multiplication by j: 1->j, i->k, j->-1, k->-i, and negatives.
  Permutation u{2, 3, 4, 5, 6, 7, 0, 1};
  return Origami(8, r, u);
}

}  // namespace surfaces

}  // namespace twistlab
