// Square-tiled surfaces: validation, singularities, parsing and hashing.
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/origami.hpp"
#include "twistlab/surface_io.hpp"

using namespace twistlab;

TEST_CASE("build_origami validates permutations and connectivity") {
  CHECK_NOTHROW(build_origami(1, {0}, {0}));
  CHECK_NOTHROW(build_origami(3, {1, 0, 2}, {2, 1, 0}));
  CHECK_THROWS_AS(build_origami(2, {0, 1}, {0, 1}), DisconnectedSurface);
  CHECK_THROWS_AS(build_origami(2, {0, 0}, {0, 1}), NotAPermutation);
  CHECK_THROWS_AS(build_origami(2, {0, 2}, {1, 0}), NotAPermutation);
  CHECK_THROWS_AS(build_origami(2, {0}, {1, 0}), NotAPermutation);
}

TEST_CASE("torus and L-shaped singularity data") {
  auto t = singularities(surfaces::torus());
  CHECK(t.genus == 1);
  CHECK(t.cone_points.empty());
  CHECK(t.area == 1.0);

  auto l = singularities(surfaces::l_shaped());
  CHECK(l.genus == 2);
  REQUIRE(l.cone_points.size() == 1);
  CHECK(l.cone_points[0].order == 2);
  CHECK(l.area == 3.0);
  CHECK_FALSE(l.has_odd_order);

  auto q = singularities(surfaces::quaternion());
  CHECK(q.genus == 3);
  CHECK(q.cone_points.size() == 4);
  CHECK(q.has_odd_order);
}

TEST_CASE("vertex orders agree with a union-find corner oracle") {
  std::mt19937_64 rng(7);
  int tested = 0;
  while (tested < 300) {
    int n = 1 + static_cast<int>(rng() % 12);
    auto r = oracle::random_permutation(n, rng);
    auto u = oracle::random_permutation(n, rng);
    Origami o = [&]() -> Origami {
      try {
        return build_origami(n, r, u);
      } catch (const DisconnectedSurface&) {
        return surfaces::torus();
      }
    }();
    if (o.n_squares() != n) continue;
    ++tested;
    auto sizes = oracle::corner_class_sizes(o);
    std::vector<int> expected;
    for (int c : sizes) {
      REQUIRE(c % 4 == 0);
      if (c / 4 - 1 > 0) expected.push_back(c / 4 - 1);
    }
    std::sort(expected.begin(), expected.end());
    auto sd = singularities(o);
    std::vector<int> got;
    for (auto& cp : sd.cone_points) got.push_back(cp.order);
    std::sort(got.begin(), got.end());
    CHECK(got == expected);
    int chi = static_cast<int>(sizes.size()) - n;
    CHECK(2 - 2 * sd.genus == chi);
    int sum = 0;
    for (int k : got) sum += k;
    CHECK(sum == 2 * sd.genus - 2);
  }
}

TEST_CASE("singularities are invariant under relabelling") {
  std::mt19937_64 rng(11);
  Origami o = surfaces::quaternion();
  for (int trial = 0; trial < 20; ++trial) {
    auto p = oracle::random_permutation(8, rng);
    Permutation r(8), u(8);
    for (int s = 0; s < 8; ++s) {
      r[p[s]] = p[o.right(s)];
      u[p[s]] = p[o.up(s)];
    }
    auto a = singularities(o), b = singularities(build_origami(8, r, u));
    CHECK(a.genus == b.genus);
    std::vector<int> ka, kb;
    for (auto& c : a.cone_points) ka.push_back(c.order);
    for (auto& c : b.cone_points) kb.push_back(c.order);
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    CHECK(ka == kb);
  }
}

TEST_CASE("permutation parsing") {
  CHECK(parse_permutation("(0 1)(2)", 3) == Permutation{1, 0, 2});
  CHECK(parse_permutation("(0,2)", 3) == Permutation{2, 1, 0});
  CHECK(parse_permutation("[2, 0, 1]", 3) == Permutation{2, 0, 1});
  CHECK(format_cycles({1, 0, 2}) == "(0 1)(2)");
  CHECK_THROWS_AS(parse_permutation("(0 3)", 3), ParseError);
  CHECK_THROWS_AS(parse_permutation("(0 1)(1 2)", 3), ParseError);
  CHECK_THROWS_AS(parse_permutation("[0, 1]", 3), ParseError);
  CHECK_THROWS_AS(parse_permutation("(0 x)", 3), ParseError);
}

TEST_CASE("surface files report line and column") {
  Origami o = parse_surface("# L shape\nn_squares = 3\nperm_right = (0 1)(2)\nperm_up = [2,1,0]\n");
  CHECK(o == surfaces::l_shaped());
  try {
    parse_surface("n_squares = 3\nperm_right = (0 1)(2)\nperm_up = (0 7)\n", "bad.surf");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("bad.surf:3:") == 0);
  }
  CHECK_THROWS_AS(parse_surface("n_squares = 1\nperm_right = (0)\nperm_up = (0)\ncolour = 3\n"),
                  ParseError);
  CHECK_THROWS_AS(parse_surface("n_squares = 1\nperm_right = (0)\n"), ParseError);
}

TEST_CASE("CRC-64/XZ check value and surface hash") {
  CHECK(crc64(std::string_view("123456789")) == 0x995DC9BBDF1939FAULL);
  CHECK(surface_hash(surfaces::l_shaped()) ==
        surface_hash(parse_surface("n_squares=3\nperm_up=(0 2)\nperm_right=[1,0,2]\n")));
  CHECK(surface_hash(surfaces::l_shaped()) != surface_hash(surfaces::torus()));
}
