#ifndef VEER_LAYERING_HPP
#define VEER_LAYERING_HPP

#include <array>
#include <map>
#include <vector>

#include "veer/equivalence.hpp"
#include "veer/moves.hpp"
#include "veer/train_track.hpp"
#include "veer/triangulation.hpp"

namespace veer {

// Ideal triangulation of the punctured surface dual to a trivalent filling
// track: one triangle per switch, one edge per branch, one ideal vertex per
// complementary region.
struct LayerTriangulation {
  int triangles = 0;
  int edges = 0;
  int vertices = 0;
  std::vector<int> triangle_switch;  // triangle index -> switch id
};

LayerTriangulation dual_triangulation(const MeasuredTrainTrack& track);

// Square-picture vertex labels: each tetrahedron is a flattened square whose
// corners sit in the four complementary regions around the split branch.
// The bottom diagonal (dual to the old branch) joins N and S, the top
// diagonal (dual to the new branch) joins W and E; both carry the pi angles.
struct SquareLabels {
  int n, e, s, w;
};

// Builds the layered complex for one period of maximal splits. Exposed
// stepwise so tests can drive individual diagonal exchanges.
class LayeredBuilder {
 public:
  explicit LayeredBuilder(const MeasuredTrainTrack& base);

  // Attach one tetrahedron for the diagonal exchange described by rec.
  void attach_split(const SplitRecord& rec);

  // Glue the bottom layer to the current top layer through phi (an
  // equivalence from the base track to the final track) and return the
  // closed triangulation with its taut angles.
  IdealTriangulation close_up(const MeasuredTrainTrack& base, const MeasuredTrainTrack& top,
                              const CombinatorialEquivalence& phi);

  int tetrahedra() const { return static_cast<int>(tri_.tets.size()); }

 private:
  struct FaceSlot {
    int tet = -1;  // -1: still the virtual bottom-layer triangle
    int face = -1;
    std::array<int, 3> vert_of_gap{-1, -1, -1};  // gap k -> tet vertex label
  };

  IdealTriangulation tri_;
  std::map<int, FaceSlot> layer_;                 // switch id -> exposed face
  std::map<int, FaceSlot> bottom_;                // base switch id -> face glued from below
  friend struct LayeredBuilderTestAccess;
};

// Convenience wrapper: run the period's splits against the stored layers and
// close up with the certificate equivalence.
IdealTriangulation build_layered(const SplitSequence& seq);

}  // namespace veer

#endif
