#ifndef VEER_MOVES_HPP
#define VEER_MOVES_HPP

#include <optional>
#include <string>
#include <vector>

#include "veer/train_track.hpp"

namespace veer {

// Record of a single split at a large branch E.
//
// Quadrant convention (clockwise slot order, oriented surface): with E
// directed from u to v, the two ends at u after E's slot in clockwise order
// are p then q, and at v after E's reversed slot they are r then s. In the
// flattened picture q,p sit top-left/bottom-left and r,s top-right/
// bottom-right, so {q,s} and {p,r} are the diagonal pairs. A split requires
// max(w_q,w_s) != max(w_p,w_r); the surviving diagonal determines the
// handedness and the new branch reuses E's id with weight
// |max(w_q,w_s) - max(w_p,w_r)|.
struct SplitRecord {
  int branch = -1;      // E
  bool qs_dominant = false;
  DirB p, q, r, s;      // corner branches, directed away from the split site
  DirB e1, e4;          // moved corners: h(e1) = E-bar e1, h(e4) = E e4
  bool folded_pair = false;  // e1 == reversed(e4)
  int sw_u = -1, sw_v = -1;  // switches at E's initial/terminal end (indices reused after)
  int slot_u = -1, slot_v = -1;  // E's slot at each, before the split
};

struct MoveResult {
  MeasuredTrainTrack track;
  GraphMap map;
};

// Comb the two consecutive same-side ends at slots (slot, slot+1) of the
// given switch into a new branch. Returns the new branch id.
MoveResult comb(const MeasuredTrainTrack& t, const GraphMap& g, int sw, int slot,
                int* new_branch = nullptr);

// Remove one degree-2 switch (the lowest-index one); no-op when none exists.
MoveResult remove_degree2(const MeasuredTrainTrack& t, const GraphMap& g, bool* changed = nullptr);

// Comb and merge until the track is trivalent. Branch ids are compacted;
// the returned map corresponds to the compacted ids.
MoveResult trivalentize(const MeasuredTrainTrack& t, const GraphMap& g);

// Split the given large branch. eps_w is the relative tolerance for the
// degenerate-tie test. forced_qs overrides the weight comparison (used by
// combinatorial searches); weights are still updated from the formula.
MoveResult split(const MeasuredTrainTrack& t, const GraphMap& g, int branch, SplitRecord& rec,
                 double eps_w = 1e-9, std::optional<bool> forced_qs = std::nullopt);

// Split every branch within relative eps_w of the maximum weight, in id
// order, then renormalize so the maximum weight is 1.
MoveResult maximal_split(const MeasuredTrainTrack& t, const GraphMap& g,
                         std::vector<SplitRecord>& records, double eps_w = 1e-9);

// Fold map h : tau_{k+1} -> tau_k undoing the splits described by records.
GraphMap fold_map(size_t num_branches, const std::vector<SplitRecord>& records);

// Freely reduce every image path.
GraphMap tighten(const GraphMap& g);

}  // namespace veer

#endif
