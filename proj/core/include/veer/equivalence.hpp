#ifndef VEER_EQUIVALENCE_HPP
#define VEER_EQUIVALENCE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "veer/moves.hpp"
#include "veer/train_track.hpp"
#include "veer/words.hpp"

namespace veer {

enum class WeightMode { scaled, ignore };

// Bijection of directed branches between two tracks satisfying the
// combinatorial-equivalence conditions: graph isomorphism, clockwise cyclic
// orders, smoothings, weights up to one scale factor (in scaled mode), and
// complementary regions. The induced puncture permutation is recorded; it
// need not be the identity.
struct CombinatorialEquivalence {
  std::vector<DirB> branch_map;        // indexed by DirB code of the source
  std::vector<int> switch_map;         // source switch -> target switch
  std::map<std::string, std::string> puncture_map;
  double scale = 1.0;                  // target weight = scale * source weight

  DirB operator()(DirB d) const { return branch_map[d.code]; }
  bool same_branch_bijection(const CombinatorialEquivalence& o) const {
    return branch_map == o.branch_map;
  }
};

std::vector<CombinatorialEquivalence> enumerate_equivalences(const MeasuredTrainTrack& t1,
                                                             const MeasuredTrainTrack& t2,
                                                             WeightMode mode,
                                                             double eps_w = 1e-9);

// Checks an existing directed-branch bijection against conditions (i)-(v)
// on the given pair of tracks; recomputes the scale and puncture map.
bool verify_equivalence(const MeasuredTrainTrack& t1, const MeasuredTrainTrack& t2,
                        CombinatorialEquivalence& eq, WeightMode mode, double eps_w = 1e-9);

// Fundamental group machinery. Generators are indexed from 1; each is a
// non-tree branch together with tree paths to and from the basepoint.
struct Pi1Basis {
  int basepoint = -1;
  std::vector<int> tree_parent_branch;  // per switch: DirB code of tree edge toward parent, -1 at root
  std::vector<int> gen_of_branch;       // per branch: generator index (1..n) or 0 for tree branches
  std::vector<EdgePath> gen_loops;      // loop at basepoint per generator
  int rank() const { return static_cast<int>(gen_loops.size()); }
};

Pi1Basis pi1_basis(const MeasuredTrainTrack& t, int basepoint);

// Deterministic basepoint: terminal switch of the lowest-id branch.
int default_basepoint(const MeasuredTrainTrack& t);

struct FreeGroupEndo {
  int rank = 0;
  std::vector<Word> images;  // per generator 1..rank
};

// Endomorphism induced on pi1 by a graph map, with the basepoint moved back
// along the spanning tree when the map does not fix it.
FreeGroupEndo induced_endo(const MeasuredTrainTrack& t, const GraphMap& g, const Pi1Basis& basis);

// Paper-style bounded search for x with f(a_i) = x g(a_i) x^-1 for all i.
// Requires rank > 1. Sound for automorphisms (images form a basis).
std::optional<Word> outer_equal(const FreeGroupEndo& f, const FreeGroupEndo& g);

// One layer of the splitting sequence.
struct SplitLayer {
  MeasuredTrainTrack track;             // weights normalized to max 1
  GraphMap map;                         // graph map representing the monodromy on this layer
  std::vector<SplitRecord> records;     // splits that produced this layer (empty for layer 0)
};

struct PeriodicityCertificate {
  int n = 0;  // period start
  int m = 0;  // period length
  CombinatorialEquivalence phi;  // lambda^-1 tau_n ~ tau_{n+m}
  Word conjugator;               // witness for the outer-automorphism equality
};

struct SplitSequence {
  std::vector<SplitLayer> layers;  // 0 .. n+m
  PeriodicityCertificate cert;
  double lambda = 0.0;
};

// Run maximal splits until the sequence becomes periodic: candidate earlier
// layers are filtered by branch count and normalized weight multiset, each
// candidate equivalence is certified by the outer-automorphism test, and the
// first acceptance wins.
SplitSequence detect_period(const MeasuredTrainTrack& t, const GraphMap& g, double lambda,
                            int max_splits = 400, double eps_w = 1e-9);

}  // namespace veer

#endif
