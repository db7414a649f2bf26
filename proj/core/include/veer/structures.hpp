#ifndef VEER_STRUCTURES_HPP
#define VEER_STRUCTURES_HPP

#include <optional>
#include <vector>

#include "veer/triangulation.hpp"

namespace veer {

// True iff every edge class has angle sum 2*pi (exactly two pi incidences).
bool check_taut_angle(const IdealTriangulation& tri, const std::vector<int>& pi_pair);

// Face coorientations promoting a taut angle structure to a taut structure:
// per (tet, face), true = cooriented outwards. Absent when the propagation
// meets a contradiction.
std::optional<std::vector<std::array<bool, 4>>> promote_taut(const IdealTriangulation& tri,
                                                             const std::vector<int>& pi_pair);

struct VeeringStructure {
  std::vector<int> pi_pair;
  std::vector<EdgeColour> colours;  // per edge class; none when unconstrained
};

// For an oriented tetrahedron with the given pi pair, the colour forced on a
// zero-angle edge of pair `zero_pair`. sign is the tet's orientation (+1/-1).
EdgeColour forced_colour(int pi_pair, int zero_pair, int sign);

// Complete list of veering structures, found by depth-first search over the
// 3^N taut choices with eager colour forcing and angle-sum pruning.
// Deterministic order (lexicographic in the pi-pair vector).
std::vector<VeeringStructure> find_veering(const IdealTriangulation& tri);

}  // namespace veer

#endif
