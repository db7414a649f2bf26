#ifndef VEER_TRAIN_TRACK_HPP
#define VEER_TRAIN_TRACK_HPP

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "veer/dirb.hpp"
#include "veer/errors.hpp"

namespace veer {

// Conventions used throughout:
//  * Slots at a switch are listed in clockwise cyclic order as seen in the
//    oriented surface. The tangent line splits them into two contiguous
//    sides; side A is slots [0, side_split), side B the rest.
//  * Boundary cycles are traversed clockwise as seen from the puncture,
//    i.e. the complementary region lies to the right of each directed branch.

struct BranchEnd {
  int branch = -1;
  int end = -1;  // 0 = initial end, 1 = terminal end

  DirB outgoing() const { return DirB::make(branch, end == 0); }
  friend bool operator==(const BranchEnd& a, const BranchEnd& b) {
    return a.branch == b.branch && a.end == b.end;
  }
};

struct EndRef {
  int sw = -1;
  int slot = -1;
};

struct Switch {
  std::vector<BranchEnd> slots;  // clockwise cyclic order
  int side_split = 0;            // side A = slots[0..side_split)
  bool alive = true;

  int degree() const { return static_cast<int>(slots.size()); }
  bool on_side_a(int slot) const { return slot < side_split; }
};

struct Branch {
  std::string name;
  std::array<EndRef, 2> ends;  // ends[0] = initial, ends[1] = terminal
  double weight = 0.0;
  bool alive = true;
};

struct BoundaryCycle {
  std::string puncture;
  EdgePath steps;  // clockwise, region on the right of every step
};

struct InvariantCheck {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<InvariantCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const InvariantCheck* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// Measured train track: fat graph with tangent-side smoothings, weighted
// branches and labelled boundary cycles. Value type; moves return new tracks.
class MeasuredTrainTrack {
 public:
  std::vector<Switch> switches;
  std::vector<Branch> branches;
  std::vector<BoundaryCycle> boundary;
  double log_scale = 0.0;  // accumulated renormalization: true weight = weight * exp(log_scale)

  int num_live_switches() const;
  int num_live_branches() const;
  int euler_characteristic() const;  // live switches - live branches

  const Branch& branch(int b) const { return branches[b]; }
  const Switch& sw(int s) const { return switches[s]; }

  // Switch and slot a directed branch departs from / arrives at.
  EndRef tail(DirB d) const { return branches[d.branch()].ends[d.tail_end()]; }
  EndRef head(DirB d) const { return branches[d.branch()].ends[d.head_end()]; }

  BranchEnd slot_at(int s, int slot) const { return switches[s].slots[slot]; }
  int find_slot(int s, BranchEnd e) const;

  bool weights_installed() const;  // any nonzero weight
  void install_weights(const std::vector<double>& w);  // indexed by branch
  void renormalize_max_one();

  // Side (A/B) the given end sits on; sides as stored.
  bool end_on_side_a(const EndRef& ref) const { return switches[ref.sw].on_side_a(ref.slot); }

  // An end is large when it is alone on its side. A branch is large/small
  // when both its ends are.
  bool end_is_large(const EndRef& ref) const;
  bool branch_is_large(int b) const;
  bool branch_is_small(int b) const;
  bool is_trivalent() const;

  // Boundary cycles derived from the fat-graph structure (region on the
  // right); used to validate the declared [boundary] section.
  std::vector<EdgePath> derived_faces() const;
  // Number of cusps (same-side corner passages) along a face.
  int face_cusp_count(const EdgePath& face) const;

  // Step of the face traversal: directed branch arriving at its head switch
  // continues along the previous slot in clockwise order.
  DirB face_next(DirB d) const;

  std::vector<int> live_branch_ids() const;
  std::vector<int> live_switch_ids() const;

  // Reindex so that live switches/branches occupy [0..n) in id order.
  // Branch ids are preserved whenever no branch died.
  void compact();
};

// Graph map: image edge path for every (forward) directed branch. The image
// of a reversed branch is the reversed image, so reversal equivariance holds
// by construction.
struct GraphMap {
  std::vector<EdgePath> images;  // indexed by branch id

  EdgePath image_of(DirB d) const {
    const EdgePath& p = images[d.branch()];
    return d.forward() ? p : reversed(p);
  }
  void tighten_images() {
    for (auto& p : images) free_reduce(p);
  }
};

// Image of the given switch under the map, read off from incident branches.
// Throws when the map gives inconsistent answers (not a graph map).
int map_switch_image(const MeasuredTrainTrack& t, const GraphMap& g, int s);

// g1 after g2: (g1 . g2)(e) = g1 applied letterwise to g2(e).
GraphMap compose(const MeasuredTrainTrack& carrier, const GraphMap& g1, const GraphMap& g2);

ValidationReport validate(const MeasuredTrainTrack& track, const GraphMap* map,
                          double eps_w = 1e-9);

struct TrainMapFile {
  MeasuredTrainTrack track;
  GraphMap map;
};

TrainMapFile parse_trainmap(const std::string& text);
std::string write_trainmap(const MeasuredTrainTrack& track, const GraphMap& map);

}  // namespace veer

#endif
