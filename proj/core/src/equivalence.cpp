#include "veer/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

namespace veer {

namespace {

bool partition_pattern_matches(const Switch& s1, int k1, const Switch& s2, int k2) {
  int deg = s1.degree();
  for (int i = 0; i < deg; ++i) {
    bool same1 = s1.on_side_a((k1 + i) % deg) == s1.on_side_a((k1 + i + 1) % deg);
    bool same2 = s2.on_side_a((k2 + i) % deg) == s2.on_side_a((k2 + i + 1) % deg);
    if (same1 != same2) return false;
  }
  return true;
}

// Propagate a seed assignment d0 -> d through cyclic orders; returns the
// completed candidate or nullopt on conflict.
std::optional<CombinatorialEquivalence> propagate(const MeasuredTrainTrack& t1,
                                                  const MeasuredTrainTrack& t2, DirB d0, DirB dt) {
  size_t nb1 = t1.branches.size();
  CombinatorialEquivalence eq;
  eq.branch_map.assign(2 * nb1, DirB());
  eq.switch_map.assign(t1.switches.size(), -1);

  std::deque<std::pair<DirB, DirB>> queue;
  auto assign_dir = [&](DirB a, DirB b) -> bool {
    if (eq.branch_map[a.code].valid()) return eq.branch_map[a.code] == b;
    eq.branch_map[a.code] = b;
    eq.branch_map[a.reversed().code] = b.reversed();
    queue.emplace_back(a, b);
    queue.emplace_back(a.reversed(), b.reversed());
    return true;
  };
  if (!assign_dir(d0, dt)) return std::nullopt;

  while (!queue.empty()) {
    auto [a, b] = queue.front();
    queue.pop_front();
    EndRef ta = t1.tail(a), tb = t2.tail(b);
    const Switch& s1 = t1.switches[ta.sw];
    const Switch& s2 = t2.switches[tb.sw];
    if (s1.degree() != s2.degree()) return std::nullopt;
    if (eq.switch_map[ta.sw] >= 0 && eq.switch_map[ta.sw] != tb.sw) return std::nullopt;
    if (eq.switch_map[ta.sw] < 0) {
      if (!partition_pattern_matches(s1, ta.slot, s2, tb.slot)) return std::nullopt;
      eq.switch_map[ta.sw] = tb.sw;
      int deg = s1.degree();
      for (int i = 0; i < deg; ++i) {
        DirB o1 = s1.slots[(ta.slot + i) % deg].outgoing();
        DirB o2 = s2.slots[(tb.slot + i) % deg].outgoing();
        if (!assign_dir(o1, o2)) return std::nullopt;
      }
    } else {
      // Slot alignment must agree with the recorded switch map.
      int deg = s1.degree();
      int k2 = eq.switch_map[ta.sw] == tb.sw ? tb.slot : -1;
      if (k2 < 0) return std::nullopt;
      // Verify this directed branch lands on the slot the cyclic order demands:
      // find the first assigned anchor at this switch and compare offsets.
      // (Cheap re-check: all slots were assigned when the switch was mapped.)
      DirB expect = eq.branch_map[s1.slots[ta.slot].outgoing().code];
      if (!(expect == s2.slots[tb.slot].outgoing())) return std::nullopt;
    }
  }

  // Complete and injective.
  std::set<int> targets;
  for (size_t bi = 0; bi < nb1; ++bi) {
    if (!t1.branches[bi].alive) continue;
    DirB f = eq.branch_map[DirB::fwd(static_cast<int>(bi)).code];
    if (!f.valid()) return std::nullopt;  // disconnected source
    if (!t2.branches[f.branch()].alive) return std::nullopt;
    if (!targets.insert(f.branch()).second) return std::nullopt;
  }
  return eq;
}

bool check_regions(const MeasuredTrainTrack& t1, const MeasuredTrainTrack& t2,
                   CombinatorialEquivalence& eq) {
  auto map_cycle = [&](const EdgePath& c) {
    EdgePath out;
    out.reserve(c.size());
    for (DirB d : c) out.push_back(eq.branch_map[d.code]);
    return out;
  };
  std::vector<bool> used(t2.boundary.size(), false);
  for (const auto& c1 : t1.boundary) {
    EdgePath image = map_cycle(c1.steps);
    bool found = false;
    for (size_t j = 0; j < t2.boundary.size() && !found; ++j) {
      if (used[j] || t2.boundary[j].steps.size() != image.size()) continue;
      const EdgePath& c2 = t2.boundary[j].steps;
      for (size_t rot = 0; rot < c2.size() && !found; ++rot) {
        bool eqc = true;
        for (size_t k = 0; k < c2.size(); ++k)
          if (c2[(rot + k) % c2.size()] != image[k]) {
            eqc = false;
            break;
          }
        if (eqc) {
          used[j] = true;
          eq.puncture_map[c1.puncture] = t2.boundary[j].puncture;
          found = true;
        }
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

std::vector<CombinatorialEquivalence> enumerate_equivalences(const MeasuredTrainTrack& t1,
                                                             const MeasuredTrainTrack& t2,
                                                             WeightMode mode, double eps_w) {
  std::vector<CombinatorialEquivalence> out;
  if (t1.num_live_branches() != t2.num_live_branches() ||
      t1.num_live_switches() != t2.num_live_switches())
    return out;
  int first = -1;
  for (size_t bi = 0; bi < t1.branches.size(); ++bi)
    if (t1.branches[bi].alive) {
      first = static_cast<int>(bi);
      break;
    }
  if (first < 0) return out;
  DirB d0 = DirB::fwd(first);

  bool use_weights = mode == WeightMode::scaled && t1.weights_installed() && t2.weights_installed();

  for (size_t bj = 0; bj < t2.branches.size(); ++bj) {
    if (!t2.branches[bj].alive) continue;
    for (int dir = 0; dir < 2; ++dir) {
      DirB dt = DirB::make(static_cast<int>(bj), dir == 0);
      auto cand = propagate(t1, t2, d0, dt);
      if (!cand) continue;
      if (use_weights) {
        double c = -1;
        bool ok = true;
        for (size_t bi = 0; bi < t1.branches.size() && ok; ++bi) {
          if (!t1.branches[bi].alive) continue;
          double w1 = t1.branches[bi].weight;
          double w2 = t2.branches[cand->branch_map[DirB::fwd(bi).code].branch()].weight;
          if (w1 <= 0 || w2 <= 0) {
            ok = false;
            break;
          }
          double ratio = w2 / w1;
          if (c < 0)
            c = ratio;
          else if (std::abs(ratio - c) > eps_w * std::max(1.0, c))
            ok = false;
        }
        if (!ok) continue;
        cand->scale = c;
      }
      if (!check_regions(t1, t2, *cand)) continue;
      out.push_back(std::move(*cand));
    }
  }
  return out;
}

bool verify_equivalence(const MeasuredTrainTrack& t1, const MeasuredTrainTrack& t2,
                        CombinatorialEquivalence& eq, WeightMode mode, double eps_w) {
  if (eq.branch_map.size() < 2 * t1.branches.size()) return false;
  eq.switch_map.assign(t1.switches.size(), -1);
  // Reversal equivariance and liveness.
  for (size_t bi = 0; bi < t1.branches.size(); ++bi) {
    if (!t1.branches[bi].alive) continue;
    DirB f = eq.branch_map[DirB::fwd(bi).code];
    DirB r = eq.branch_map[DirB::rev(bi).code];
    if (!f.valid() || !r.valid() || r != f.reversed()) return false;
    if (f.branch() >= static_cast<int>(t2.branches.size()) || !t2.branches[f.branch()].alive)
      return false;
  }
  // Cyclic orders, partitions, switch map.
  for (size_t si = 0; si < t1.switches.size(); ++si) {
    if (!t1.switches[si].alive) continue;
    const Switch& s1 = t1.switches[si];
    DirB o0 = eq.branch_map[s1.slots[0].outgoing().code];
    EndRef tgt = t2.tail(o0);
    const Switch& s2 = t2.switches[tgt.sw];
    if (s1.degree() != s2.degree()) return false;
    if (!partition_pattern_matches(s1, 0, s2, tgt.slot)) return false;
    int deg = s1.degree();
    for (int i = 0; i < deg; ++i) {
      DirB oi = eq.branch_map[s1.slots[i].outgoing().code];
      EndRef ti = t2.tail(oi);
      if (ti.sw != tgt.sw || ti.slot != (tgt.slot + i) % deg) return false;
    }
    eq.switch_map[si] = tgt.sw;
  }
  // Injectivity on branches.
  {
    std::set<int> targets;
    for (size_t bi = 0; bi < t1.branches.size(); ++bi) {
      if (!t1.branches[bi].alive) continue;
      if (!targets.insert(eq.branch_map[DirB::fwd(bi).code].branch()).second) return false;
    }
  }
  if (mode == WeightMode::scaled && t1.weights_installed() && t2.weights_installed()) {
    double c = -1;
    for (size_t bi = 0; bi < t1.branches.size(); ++bi) {
      if (!t1.branches[bi].alive) continue;
      double w1 = t1.branches[bi].weight;
      double w2 = t2.branches[eq.branch_map[DirB::fwd(bi).code].branch()].weight;
      if (w1 <= 0 || w2 <= 0) return false;
      double ratio = w2 / w1;
      if (c < 0)
        c = ratio;
      else if (std::abs(ratio - c) > eps_w * std::max(1.0, c))
        return false;
    }
    eq.scale = c;
  }
  eq.puncture_map.clear();
  return check_regions(t1, t2, eq);
}

int default_basepoint(const MeasuredTrainTrack& t) {
  for (size_t bi = 0; bi < t.branches.size(); ++bi)
    if (t.branches[bi].alive) return t.head(DirB::fwd(static_cast<int>(bi))).sw;
  throw std::runtime_error("track has no live branches");
}

Pi1Basis pi1_basis(const MeasuredTrainTrack& t, int basepoint) {
  Pi1Basis out;
  out.basepoint = basepoint;
  size_t ns = t.switches.size(), nb = t.branches.size();
  out.tree_parent_branch.assign(ns, -1);
  out.gen_of_branch.assign(nb, 0);
  std::vector<bool> in_tree_switch(ns, false), in_tree_branch(nb, false);
  in_tree_switch[basepoint] = true;

  // Lowest-id-first growth: repeatedly adopt the smallest branch that joins a
  // new switch to the tree.
  for (;;) {
    bool grew = false;
    for (size_t bi = 0; bi < nb && !grew; ++bi) {
      if (!t.branches[bi].alive || in_tree_branch[bi]) continue;
      int s0 = t.branches[bi].ends[0].sw, s1 = t.branches[bi].ends[1].sw;
      if (in_tree_switch[s0] == in_tree_switch[s1]) continue;
      in_tree_branch[bi] = true;
      int fresh = in_tree_switch[s0] ? s1 : s0;
      in_tree_switch[fresh] = true;
      // Directed edge from the fresh switch toward the tree.
      DirB toward = in_tree_switch[s0] && fresh == s1 ? DirB::rev(static_cast<int>(bi))
                                                      : DirB::fwd(static_cast<int>(bi));
      // toward departs `fresh`: fwd departs ends[0].sw.
      if (t.tail(toward).sw != fresh) toward = toward.reversed();
      out.tree_parent_branch[fresh] = toward.code;
      grew = true;
    }
    if (!grew) break;
  }
  for (size_t si = 0; si < ns; ++si)
    if (t.switches[si].alive && !in_tree_switch[si])
      throw std::runtime_error("pi1_basis: track not connected");

  auto path_to_base = [&](int s) {
    EdgePath p;
    while (s != basepoint) {
      DirB d(out.tree_parent_branch[s]);
      p.push_back(d);
      s = t.head(d).sw;
    }
    return p;
  };

  for (size_t bi = 0; bi < nb; ++bi) {
    if (!t.branches[bi].alive || in_tree_branch[bi]) continue;
    DirB d = DirB::fwd(static_cast<int>(bi));
    EdgePath loop = reversed(path_to_base(t.tail(d).sw));
    loop.push_back(d);
    EdgePath back = path_to_base(t.head(d).sw);
    loop.insert(loop.end(), back.begin(), back.end());
    free_reduce(loop);
    out.gen_of_branch[bi] = static_cast<int>(out.gen_loops.size()) + 1;
    out.gen_loops.push_back(std::move(loop));
  }
  return out;
}

namespace {

Word word_of_loop(const Pi1Basis& basis, const EdgePath& loop) {
  Word w;
  for (DirB d : loop) {
    int g = basis.gen_of_branch[d.branch()];
    if (g == 0) continue;
    w.push_back(d.forward() ? g : -g);
  }
  return reduced(w);
}

}  // namespace

FreeGroupEndo induced_endo(const MeasuredTrainTrack& t, const GraphMap& g, const Pi1Basis& basis) {
  int v = basis.basepoint;
  int w = map_switch_image(t, g, v);
  // Tail homotopy along the spanning tree when the basepoint moves.
  EdgePath rho;  // path v -> w
  if (w != v) {
    EdgePath wb;
    int s = w;
    while (s != v) {
      DirB d(basis.tree_parent_branch[s]);
      wb.push_back(d);
      s = t.head(d).sw;
    }
    rho = reversed(wb);
  }
  FreeGroupEndo out;
  out.rank = basis.rank();
  for (const EdgePath& gen : basis.gen_loops) {
    EdgePath img = rho;
    for (DirB d : gen) {
      EdgePath piece = g.image_of(d);
      img.insert(img.end(), piece.begin(), piece.end());
    }
    EdgePath back = reversed(rho);
    img.insert(img.end(), back.begin(), back.end());
    free_reduce(img);
    if (!img.empty() && (t.tail(img.front()).sw != v || t.head(img.back()).sw != v))
      throw std::logic_error("induced_endo: image is not a loop at the basepoint");
    out.images.push_back(word_of_loop(basis, img));
  }
  return out;
}

std::optional<Word> outer_equal(const FreeGroupEndo& f, const FreeGroupEndo& g) {
  if (f.rank != g.rank) return std::nullopt;
  if (f.rank < 2) throw std::runtime_error("outer_equal requires rank > 1");

  auto verify = [&](const Word& x) {
    for (int i = 0; i < f.rank; ++i) {
      Word rhs = concat(concat(x, g.images[i]), inverse(x));
      if (reduced(f.images[i]) != rhs) return false;
    }
    return true;
  };

  // Degenerate images: fall back to the direct comparison.
  CyclicForm cf1 = cyclic_form(f.images[0]);
  CyclicForm cf2 = cyclic_form(f.images[1]);
  if (cf1.core.empty() || cf2.core.empty()) {
    Word empty;
    if (verify(empty)) return empty;
    return std::nullopt;
  }

  // Necessary: cyclically reduced parts agree up to rotation, for every
  // generator.
  for (int i = 0; i < f.rank; ++i) {
    CyclicForm a = cyclic_form(f.images[i]);
    CyclicForm b = cyclic_form(g.images[i]);
    if (!cyclic_rotation_of(b.core, a.core)) return std::nullopt;
  }

  // x1 with f(a1) = x1 g(a1) x1^-1, and likewise x2.
  auto conjugating = [&](const Word& fw, const Word& gw) -> std::optional<Word> {
    CyclicForm a = cyclic_form(fw), b = cyclic_form(gw);
    size_t rot = 0;
    if (!cyclic_rotation_of(b.core, a.core, &rot)) return std::nullopt;
    // a.core = rotation of b.core by rot: a.core = u^-1 b.core u with
    // u = b.core[0..rot).
    Word u(b.core.begin(), b.core.begin() + rot);
    return concat(concat(a.tail, inverse(u)), inverse(b.tail));
  };
  auto x1o = conjugating(f.images[0], g.images[0]);
  auto x2o = conjugating(f.images[1], g.images[1]);
  if (!x1o || !x2o) return std::nullopt;
  const Word& x1 = *x1o;
  const Word& x2 = *x2o;

  Word w = concat(x2, inverse(x1));

  // Solve f(a2)^-m f(a1)^k = w by scanning m and testing whether
  // f(a2)^m w is a power of f(a1).
  const Word& u1 = f.images[0];
  const Word& u2 = f.images[1];
  long c1 = static_cast<long>(cf1.core.size());
  long t1 = static_cast<long>(cf1.tail.size());
  long bound = static_cast<long>(w.size() + 2 * u1.size() + 2 * u2.size()) /
                   std::max<long>(1, static_cast<long>(cf2.core.size())) +
               2;
  auto power_exponent = [&](const Word& target) -> std::optional<long> {
    if (target.empty()) return 0;
    long m0 = (static_cast<long>(target.size()) - 2 * t1 + c1 / 2) / c1;
    for (long m : {m0, -m0, m0 + 1, m0 - 1, -m0 - 1, -m0 + 1}) {
      if (power(u1, m) == target) return m;
    }
    return std::nullopt;
  };
  for (long mm = 0; mm <= bound; ++mm) {
    for (int sign = 0; sign < (mm == 0 ? 1 : 2); ++sign) {
      long m = sign == 0 ? mm : -mm;
      Word target = concat(power(u2, m), w);
      auto k = power_exponent(target);
      if (!k) continue;
      // x = f(a2)^m x2 (equivalently f(a1)^k x1).
      Word x = concat(power(u2, m), x2);
      if (verify(x)) return reduced(x);
    }
  }
  return std::nullopt;
}

SplitSequence detect_period(const MeasuredTrainTrack& t0, const GraphMap& g0, double lambda,
                            int max_splits, double eps_w) {
  SplitSequence seq;
  seq.lambda = lambda;
  {
    SplitLayer l0;
    l0.track = t0;
    l0.track.renormalize_max_one();
    l0.map = tighten(g0);
    seq.layers.push_back(std::move(l0));
  }

  auto sorted_weights = [](const MeasuredTrainTrack& t) {
    std::vector<double> w;
    for (const auto& b : t.branches)
      if (b.alive) w.push_back(b.weight);
    std::sort(w.begin(), w.end());
    return w;
  };

  for (int j = 1; j <= max_splits; ++j) {
    std::vector<SplitRecord> records;
    const SplitLayer& prev = seq.layers.back();
    MoveResult next = maximal_split(prev.track, prev.map, records, eps_w);
    SplitLayer layer;
    layer.track = std::move(next.track);
    layer.map = tighten(next.map);
    layer.records = std::move(records);
    seq.layers.push_back(std::move(layer));

    const SplitLayer& lj = seq.layers[j];
    auto wj = sorted_weights(lj.track);
    for (int i = 0; i < j; ++i) {
      const SplitLayer& li = seq.layers[i];
      if (li.track.num_live_branches() != lj.track.num_live_branches()) continue;
      auto wi = sorted_weights(li.track);
      bool close = wi.size() == wj.size();
      for (size_t k = 0; close && k < wi.size(); ++k)
        if (std::abs(wi[k] - wj[k]) > 1e-6) close = false;
      if (!close) continue;

      auto eqs = enumerate_equivalences(li.track, lj.track, WeightMode::scaled, 1e-6);
      if (eqs.empty()) continue;

      // Fold composition f = h_i o ... o h_{j-1}.
      GraphMap f = fold_map(lj.track.branches.size(), seq.layers[j].records);
      for (int k = j - 1; k > i; --k)
        f = compose(li.track, fold_map(seq.layers[k].track.branches.size(),
                                       seq.layers[k].records),
                    f);

      Pi1Basis basis = pi1_basis(li.track, default_basepoint(li.track));
      FreeGroupEndo base_endo = induced_endo(li.track, li.map, basis);

      for (const auto& phi : eqs) {
        // The equivalence must realize scaling by lambda^-(j-i) on the true
        // (unnormalized) measures.
        double true_log_c = (lj.track.log_scale - li.track.log_scale) + std::log(phi.scale);
        if (std::abs(true_log_c + (j - i) * std::log(lambda)) > 1e-6 * (j - i + 1)) continue;

        GraphMap candidate;
        candidate.images.resize(li.track.branches.size());
        for (size_t b = 0; b < li.track.branches.size(); ++b) {
          if (!li.track.branches[b].alive) continue;
          candidate.images[b] = f.image_of(phi(DirB::fwd(static_cast<int>(b))));
        }
        candidate = tighten(candidate);
        FreeGroupEndo cand_endo = induced_endo(li.track, candidate, basis);
        auto witness = outer_equal(cand_endo, base_endo);
        if (!witness) continue;

        seq.cert.n = i;
        seq.cert.m = j - i;
        seq.cert.phi = phi;
        seq.cert.conjugator = *witness;
        seq.layers.resize(j + 1);
        return seq;
      }
    }
  }
  throw std::runtime_error("period not found within " + std::to_string(max_splits) +
                           " maximal splits (raise limit or precision)");
}

}  // namespace veer
