#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "veer/triangulation.hpp"

using namespace veer;

TEST_CASE("torus fixture parses to one switch and two branches") {
  auto tm = load_fixture("torus_s4.tt");
  CHECK(tm.track.num_live_switches() == 1);
  CHECK(tm.track.num_live_branches() == 2);
  CHECK(tm.track.boundary.size() == 1);
  CHECK(tm.track.euler_characteristic() == -1);
  auto rep = validate(tm.track, &tm.map);
  CHECK(rep.all_pass());
}

TEST_CASE("empty tangent side is a parse error") {
  std::string text = R"([switches]
s: a+ a- b+ b- |
[branches]
a
b
[boundary]
0: a+ b+ a- b-
)";
  CHECK_THROWS_WITH_AS(parse_trainmap(text), doctest::Contains("empty tangent side"),
                       ParseError);
}

TEST_CASE("chi >= 0 rejected at parse time") {
  // Single loop through a degree-2 switch: chi = 0.
  std::string text = R"([switches]
s: a+ | a-
[branches]
a
[boundary]
0: a+
1: a-
)";
  CHECK_THROWS(parse_trainmap(text));
}

TEST_CASE("directed-branch slots and reversal involution") {
  auto tm = load_fixture("torus_s4.tt");
  const auto& t = tm.track;
  for (int b : t.live_branch_ids()) {
    DirB d = DirB::fwd(b);
    CHECK(d.reversed().reversed() == d);
    CHECK(t.tail(d).sw == t.head(d.reversed()).sw);
    CHECK(t.tail(d).slot == t.head(d.reversed()).slot);
  }
}

TEST_CASE("boundary mismatch reported by validate") {
  std::string text = R"([switches]
s: a+ b+ | a- b-
[branches]
a
b
[boundary]
0: a+ b- a- b+
[map]
a: a+ b+ a+
b: b+ a+
)";
  CHECK_THROWS_WITH_AS(parse_trainmap(text), doctest::Contains("boundary"), ParseError);
}

TEST_CASE("trainmap round trip") {
  auto tm = load_fixture("torus_s4.tt");
  std::string once = write_trainmap(tm.track, tm.map);
  auto tm2 = parse_trainmap(once);
  std::string twice = write_trainmap(tm2.track, tm2.map);
  CHECK(once == twice);
}

namespace {

IdealTriangulation random_closed_triangulation(int n, std::mt19937& rng) {
  // Random face pairing with random odd permutations (hence orientable).
  for (;;) {
    IdealTriangulation tri;
    tri.tets.assign(n, {});
    std::vector<std::pair<int, int>> faces;
    for (int t = 0; t < n; ++t)
      for (int f = 0; f < 4; ++f) faces.push_back({t, f});
    std::shuffle(faces.begin(), faces.end(), rng);
    bool ok = true;
    for (size_t i = 0; i + 1 < faces.size(); i += 2) {
      auto [t0, f0] = faces[i];
      auto [t1, f1] = faces[i + 1];
      if (t0 == t1 && f0 == f1) {
        ok = false;
        break;
      }
      // random odd permutation carrying f0 to f1
      std::array<int, 3> rest0{}, rest1{};
      int k = 0;
      for (int v = 0; v < 4; ++v)
        if (v != f0) rest0[k++] = v;
      k = 0;
      for (int v = 0; v < 4; ++v)
        if (v != f1) rest1[k++] = v;
      std::array<int, 3> perm_rest = rest1;
      std::shuffle(perm_rest.begin(), perm_rest.end(), rng);
      Perm4 p;
      p.image[f0] = f1;
      for (int i2 = 0; i2 < 3; ++i2) p.image[rest0[i2]] = perm_rest[i2];
      if (!p.is_odd()) std::swap(p.image[rest0[0]], p.image[rest0[1]]);
      if (tri.tets[t0].glue[f0].glued() || tri.tets[t1].glue[f1].glued()) {
        ok = false;
        break;
      }
      tri.set_gluing(t0, f0, t1, f1, p);
    }
    if (ok && tri.fully_glued() && tri.gluing_involutive()) return tri;
  }
}

}  // namespace

TEST_CASE("triangulation round trip on random gluings") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto tri = random_closed_triangulation(5, rng);
    std::string once = write_triangulation(tri);
    auto tri2 = parse_triangulation(once);
    CHECK(write_triangulation(tri2) == once);
    CHECK(isomorphic_up_to_relabeling(tri, tri2));
  }
}

TEST_CASE("empty triangulation rejected") {
  CHECK_THROWS_WITH_AS(parse_triangulation("tets 0\n"), doctest::Contains("N must be >= 1"),
                       ParseError);
}

TEST_CASE("non-involutive gluing rejected") {
  std::string text =
      "tets 2\n"
      "tet 0 face 0 -> tet 1 face 0 perm 0123\n"
      "tet 1 face 0 -> tet 0 face 1 perm 1023\n";
  CHECK_THROWS(parse_triangulation(text));
}
