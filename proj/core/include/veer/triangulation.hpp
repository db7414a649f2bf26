#ifndef VEER_TRIANGULATION_HPP
#define VEER_TRIANGULATION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace veer {

// Permutation of {0,1,2,3}.
struct Perm4 {
  std::array<int, 4> image{0, 1, 2, 3};

  Perm4() = default;
  Perm4(int a, int b, int c, int d) : image{a, b, c, d} {}

  int operator[](int i) const { return image[i]; }
  Perm4 inverse() const {
    Perm4 p;
    for (int i = 0; i < 4; ++i) p.image[image[i]] = i;
    return p;
  }
  Perm4 of(const Perm4& other) const {  // composition: this after other
    Perm4 p;
    for (int i = 0; i < 4; ++i) p.image[i] = image[other.image[i]];
    return p;
  }
  bool is_odd() const {
    int inv = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (image[i] > image[j]) ++inv;
    return inv % 2 == 1;
  }
  friend bool operator==(const Perm4& a, const Perm4& b) { return a.image == b.image; }
};

// Tetrahedron edges indexed 0..5 as 01,02,03,12,13,23. Opposite edges pair up
// as e <-> 5-e; the pair index min(e,5-e) in 0..2 names an opposite-edge pair.
// Edge parameters attach to pairs: pair 0 carries z, pair 1 carries
// z' = 1/(1-z), pair 2 carries z'' = 1-1/z (for a positively oriented
// vertex ordering).
int edge_index(int v, int w);                 // v != w
std::array<int, 2> edge_vertices(int e);      // increasing
inline int opposite_edge(int e) { return 5 - e; }
inline int edge_pair(int e) { return e < 3 ? e : 5 - e; }

struct FaceGluing {
  int tet = -1;
  int face = -1;
  Perm4 perm;  // vertex labels of this tet -> vertex labels of the other
  bool glued() const { return tet >= 0; }
};

enum class EdgeColour : uint8_t { none, red, blue };

// Ideal triangulation given by face pairings. Edge and cusp classes are
// recomputed from the gluing table on demand.
class IdealTriangulation {
 public:
  struct Tet {
    std::array<FaceGluing, 4> glue;
  };

  std::vector<Tet> tets;
  std::vector<int> pi_pair;           // optional taut angles: pair index 0..2 per tet
  std::vector<EdgeColour> colours;    // optional: per edge class

  int size() const { return static_cast<int>(tets.size()); }
  bool has_angles() const { return !pi_pair.empty(); }
  bool has_colours() const { return !colours.empty(); }

  void set_gluing(int t0, int f0, int t1, int f1, const Perm4& p);
  bool fully_glued() const;
  bool gluing_involutive() const;

  // Edge classes: orbit id for each (tet, edge 0..5), numbered by first
  // occurrence in (tet asc, edge asc) order.
  struct EdgeClasses {
    std::vector<std::array<int, 6>> id;  // per tet
    int count = 0;
    std::vector<int> degree;             // incidences per class
  };
  EdgeClasses edge_classes() const;

  // Cusp classes: orbit id per (tet, vertex).
  struct CuspClasses {
    std::vector<std::array<int, 4>> id;
    int count = 0;
  };
  CuspClasses cusp_classes() const;

  // Consistent tet orientation signs (+1/-1) from gluing parities; nullopt
  // when the gluing data is non-orientable. Odd permutations preserve
  // orientation.
  std::optional<std::vector<int>> orientation_signs() const;

  // Neighbour across a face, as (tet, face, perm this->other).
  const FaceGluing& across(int t, int f) const { return tets[t].glue[f]; }
};

IdealTriangulation parse_triangulation(const std::string& text);
std::string write_triangulation(const IdealTriangulation& tri);

// Relabels vertices (swapping labels 2 and 3 of reversed tetrahedra) so that
// every gluing permutation is odd. Throws on non-orientable data. Returns
// which tets were flipped.
std::vector<bool> normalize_orientation(IdealTriangulation& tri);

// True when the two triangulations are equal up to renumbering tetrahedra
// (vertex labels fixed). Angles/colours compared when both carry them.
bool isomorphic_up_to_relabeling(const IdealTriangulation& a, const IdealTriangulation& b);

}  // namespace veer

#endif
