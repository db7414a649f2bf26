#include "veer/conjugacy.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace veer {

SplittingSequenceRecord make_record(const SplitSequence& seq) {
  SplittingSequenceRecord rec;
  rec.lambda = seq.lambda;
  rec.monodromy = seq.cert.phi;
  rec.layers.assign(seq.layers.begin() + seq.cert.n, seq.layers.end());
  rec.layers[0].records.clear();  // layer 0 of the period carries no splits
  return rec;
}

namespace {

// Split sites of the step into layer `records`, as branch id set.
std::set<int> split_sites(const std::vector<SplitRecord>& records) {
  std::set<int> s;
  for (const auto& r : records) s.insert(r.branch);
  return s;
}

const SplitRecord* record_for(const std::vector<SplitRecord>& records, int branch) {
  for (const auto& r : records)
    if (r.branch == branch) return &r;
  return nullptr;
}

}  // namespace

ConjugacyResult conjugate(const SplittingSequenceRecord& a, const SplittingSequenceRecord& b,
                          double eps_lambda, double eps_w) {
  ConjugacyResult res;
  res.lambda_a = a.lambda;
  res.lambda_b = b.lambda;
  int m = static_cast<int>(a.layers.size()) - 1;
  int mb = static_cast<int>(b.layers.size()) - 1;
  if (m < 1 || mb < 1) throw std::runtime_error("malformed splitting sequence record");

  if (m != mb) {
    res.verdict = ConjugacyVerdict::not_conjugate;
    res.reason = "period length mismatch (" + std::to_string(m) + " vs " + std::to_string(mb) + ")";
    return res;
  }
  double dl = std::abs(a.lambda - b.lambda);
  if (dl > eps_lambda) {
    if (dl <= 1e3 * eps_lambda) {
      res.verdict = ConjugacyVerdict::numerically_uncertain;
      res.reason = "dilatations agree only marginally; rerun at higher precision";
      return res;
    }
    res.verdict = ConjugacyVerdict::not_conjugate;
    res.reason = "dilatation mismatch";
    return res;
  }

  // Extend b's sequence to 2m layers so every window j..j+m is available.
  std::vector<SplitLayer> ext = b.layers;
  while (static_cast<int>(ext.size()) < 2 * m + 1) {
    std::vector<SplitRecord> records;
    const SplitLayer& prev = ext.back();
    MoveResult next = maximal_split(prev.track, prev.map, records, 1e-9);
    SplitLayer layer;
    layer.track = std::move(next.track);
    layer.map = tighten(next.map);
    layer.records = std::move(records);
    ext.push_back(std::move(layer));
  }

  const MeasuredTrainTrack& a0 = a.layers[0].track;

  for (int j = 0; j < m; ++j) {
    auto candidates = enumerate_equivalences(a0, ext[j].track, WeightMode::ignore);
    for (auto& phi : candidates) {
      // Propagate phi through m simultaneous maximal splits. Branch ids and
      // directions persist through splits, so the table stays fixed; each
      // step must match split sites and handedness and remain an
      // equivalence of the new tracks.
      bool ok = true;
      for (int t = 0; t < m && ok; ++t) {
        const auto& recs_a = a.layers[t + 1].records;
        const auto& recs_b = ext[j + t + 1].records;
        if (split_sites(recs_a).size() != split_sites(recs_b).size()) {
          ok = false;
          break;
        }
        for (const auto& ra : recs_a) {
          DirB image = phi(DirB::fwd(ra.branch));
          const SplitRecord* rb = record_for(recs_b, image.branch());
          if (!rb || rb->qs_dominant != ra.qs_dominant) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
        CombinatorialEquivalence step = phi;
        if (!verify_equivalence(a.layers[t + 1].track, ext[j + t + 1].track, step,
                                WeightMode::ignore))
          ok = false;
      }
      if (!ok) continue;

      // Commuting square phi'_* . phi_0 == phi_m . phi_* on directed edges.
      bool square = true;
      for (size_t bi = 0; bi < a0.branches.size() && square; ++bi) {
        if (!a0.branches[bi].alive) continue;
        for (int dir = 0; dir < 2 && square; ++dir) {
          DirB d = DirB::make(static_cast<int>(bi), dir == 0);
          DirB lhs = b.monodromy(phi(d));
          DirB rhs = phi(a.monodromy(d));
          if (lhs != rhs) square = false;
        }
      }
      if (!square) continue;

      // Post-hoc weight agreement (guaranteed for genuine witnesses).
      {
        double c = -1;
        for (size_t bi = 0; bi < a0.branches.size(); ++bi) {
          if (!a0.branches[bi].alive) continue;
          double w1 = a0.branches[bi].weight;
          double w2 = ext[j].track.branches[phi(DirB::fwd(static_cast<int>(bi))).branch()].weight;
          if (w1 <= 0 || w2 <= 0)
            throw std::logic_error("conjugacy witness with non-positive weights");
          double ratio = w2 / w1;
          if (c < 0)
            c = ratio;
          else if (std::abs(ratio - c) > eps_w * std::max(1.0, c))
            throw std::logic_error(
                "conjugacy witness accepted but weights disagree; split misidentification");
        }
      }

      res.verdict = ConjugacyVerdict::conjugate;
      res.witness = phi;
      res.witness_layer = j;
      res.reason = "commuting square verified at layer " + std::to_string(j);
      return res;
    }
  }
  res.verdict = ConjugacyVerdict::not_conjugate;
  res.reason = "no combinatorial equivalence conjugates the splitting sequences";
  return res;
}

}  // namespace veer
