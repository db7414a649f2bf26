#ifndef VEER_CONJUGACY_HPP
#define VEER_CONJUGACY_HPP

#include <string>
#include <vector>

#include "veer/equivalence.hpp"

namespace veer {

// Periodic part of a splitting sequence: layers 0..m with the monodromy
// equivalence phi(lambda^-1 tau_0) = tau_m.
struct SplittingSequenceRecord {
  std::vector<SplitLayer> layers;
  CombinatorialEquivalence monodromy;
  double lambda = 0.0;
};

SplittingSequenceRecord make_record(const SplitSequence& seq);

enum class ConjugacyVerdict { conjugate, not_conjugate, numerically_uncertain };

struct ConjugacyResult {
  ConjugacyVerdict verdict = ConjugacyVerdict::not_conjugate;
  std::string reason;
  CombinatorialEquivalence witness;  // valid when verdict == conjugate
  int witness_layer = -1;            // j with tau_0 ~ tau'_j
  double lambda_a = 0.0, lambda_b = 0.0;
};

// Decides conjugacy of the underlying mapping classes: rejects on period or
// dilatation mismatch, then tests every weight-free equivalence tau_0 ~
// tau'_j by propagating it through simultaneous maximal splits and checking
// the commuting square against both monodromies. Accepted witnesses always
// pass the exact directed-edge square and the post-hoc weight agreement.
ConjugacyResult conjugate(const SplittingSequenceRecord& a, const SplittingSequenceRecord& b,
                          double eps_lambda = 1e-9, double eps_w = 1e-6);

}  // namespace veer

#endif
