#ifndef VEER_MEASURES_HPP
#define VEER_MEASURES_HPP

#include <vector>

#include "veer/train_track.hpp"

namespace veer {

// Nonnegative integer transition matrix over the live branches of a track:
// entry (i,j) counts occurrences of branch j (either direction) in the image
// of branch i.
struct TransitionMatrix {
  std::vector<int> branch_ids;       // row/column order
  std::vector<std::vector<long>> m;  // m[i][j]

  int size() const { return static_cast<int>(branch_ids.size()); }
};

TransitionMatrix transition_matrix(const MeasuredTrainTrack& track, const GraphMap& map);

struct PerronData {
  double lambda = 0.0;
  std::vector<double> weights;  // max-entry normalized, indexed like branch_ids
  double residual = 0.0;        // ||Mv - lambda v||_inf
};

// True when some power M^k (k <= dim^2) is strictly positive.
bool is_primitive(const TransitionMatrix& m);

// Deterministic power iteration from the all-ones vector followed by one
// Rayleigh refinement. Throws on non-primitive input, non-convergence, or
// lambda <= 1 + eps.
PerronData perron(const TransitionMatrix& m, double eps = 1e-12, int max_iter = 20000);

}  // namespace veer

#endif
