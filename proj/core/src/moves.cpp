#include "veer/moves.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace veer {

namespace {

void sync_switch(MeasuredTrainTrack& t, int si) {
  auto& s = t.switches[si];
  for (int k = 0; k < s.degree(); ++k) {
    const BranchEnd& e = s.slots[k];
    t.branches[e.branch].ends[e.end] = {si, k};
  }
}

std::string fresh_name(const MeasuredTrainTrack& t) {
  std::set<std::string> used;
  for (const auto& b : t.branches)
    if (b.alive) used.insert(b.name);
  for (char c = 'a'; c <= 'z'; ++c) {
    std::string cand(1, c);
    if (!used.count(cand)) return cand;
  }
  for (int i = 0;; ++i) {
    std::string cand = "e" + std::to_string(i);
    if (!used.count(cand)) return cand;
  }
}

// Transfer puncture labels from the old cycles to the freshly derived faces.
// Directed branches whose meaning did not change anchor the correspondence.
void relabel_boundary(MeasuredTrainTrack& t, const std::vector<BoundaryCycle>& old_cycles,
                      const std::set<int>& changed_branches) {
  std::map<int, std::string> label_of_step;
  for (const auto& c : old_cycles)
    for (DirB d : c.steps)
      if (!changed_branches.count(d.branch())) label_of_step[d.code] = c.puncture;
  auto faces = t.derived_faces();
  std::vector<BoundaryCycle> fresh;
  std::set<std::string> assigned;
  for (auto& f : faces) {
    std::string label;
    for (DirB d : f) {
      auto it = label_of_step.find(d.code);
      if (it == label_of_step.end()) continue;
      if (label.empty())
        label = it->second;
      else if (label != it->second)
        throw std::logic_error("boundary relabeling conflict after move");
    }
    if (label.empty()) throw std::logic_error("complementary region lost its anchor after move");
    if (assigned.count(label)) throw std::logic_error("two regions claim the same puncture");
    assigned.insert(label);
    fresh.push_back({label, std::move(f)});
  }
  std::sort(fresh.begin(), fresh.end(),
            [](const BoundaryCycle& a, const BoundaryCycle& b) { return a.puncture < b.puncture; });
  t.boundary = std::move(fresh);
}

// Per-letter rewrite used by combing: prefix before matching letters and the
// reversed suffix after reversed ones.
EdgePath rewrite_prefix(const EdgePath& path, DirB pre, const std::vector<DirB>& targets) {
  EdgePath out;
  out.reserve(path.size() * 2);
  for (DirB x : path) {
    bool pref = false, suff = false;
    for (DirB tgt : targets) {
      if (x == tgt) pref = true;
      if (x == tgt.reversed()) suff = true;
    }
    if (pref) out.push_back(pre);
    out.push_back(x);
    if (suff) out.push_back(pre.reversed());
  }
  return out;
}

}  // namespace

MoveResult comb(const MeasuredTrainTrack& t0, const GraphMap& g0, int sw, int slot,
                int* new_branch) {
  MoveResult res{t0, g0};
  MeasuredTrainTrack& t = res.track;
  GraphMap& g = res.map;

  const Switch& s0 = t.switches[sw];
  if (!s0.alive) throw std::runtime_error("comb: dead switch");
  if (slot < 0 || slot + 1 >= s0.degree())
    throw std::runtime_error("comb: slot pair out of range");
  if (s0.on_side_a(slot) != s0.on_side_a(slot + 1))
    throw std::runtime_error("comb: ends not on the same tangent side");

  std::vector<BoundaryCycle> old_cycles = t.boundary;

  BranchEnd e1 = s0.slots[slot];
  BranchEnd e2 = s0.slots[slot + 1];
  DirB e1_out = e1.outgoing();
  DirB e2_out = e2.outgoing();

  // New branch E from the old switch to the new one.
  int eb = static_cast<int>(t.branches.size());
  Branch nb;
  nb.name = fresh_name(t);
  nb.weight = t.branches[e1.branch].weight + t.branches[e2.branch].weight;
  t.branches.push_back(nb);

  // New switch: clockwise (e1, e2, E-bar end), sides {e1,e2} | {E}.
  int wi = static_cast<int>(t.switches.size());
  Switch w;
  w.slots = {e1, e2, BranchEnd{eb, 1}};
  w.side_split = 2;
  t.switches.push_back(w);

  // Old switch: slots (slot, slot+1) collapse to E's initial end.
  Switch& s = t.switches[sw];
  s.slots[slot] = BranchEnd{eb, 0};
  s.slots.erase(s.slots.begin() + slot + 1);
  if (slot < s.side_split) s.side_split -= 1;

  t.branches[eb].ends[0] = {sw, slot};
  t.branches[eb].ends[1] = {wi, 2};
  sync_switch(t, sw);
  sync_switch(t, wi);

  // Map rewrite: each occurrence of e_i becomes E e_i (and mirrored for
  // reversals); the new branch maps to the empty path.
  for (auto& img : g.images) img = rewrite_prefix(img, DirB::fwd(eb), {e1_out, e2_out});
  g.images.resize(t.branches.size());
  g.images[eb] = {};

  relabel_boundary(t, old_cycles, {});
  if (new_branch) *new_branch = eb;
  return res;
}

MoveResult remove_degree2(const MeasuredTrainTrack& t0, const GraphMap& g0, bool* changed) {
  MoveResult res{t0, g0};
  MeasuredTrainTrack& t = res.track;
  GraphMap& g = res.map;
  if (changed) *changed = false;

  int target = -1;
  for (size_t si = 0; si < t.switches.size(); ++si)
    if (t.switches[si].alive && t.switches[si].degree() == 2) {
      target = static_cast<int>(si);
      break;
    }
  if (target < 0) return res;

  std::vector<BoundaryCycle> old_cycles = t.boundary;

  const Switch& s = t.switches[target];
  BranchEnd end3 = s.slots[0];
  BranchEnd end4 = s.slots[1];
  if (end3.branch == end4.branch)
    throw std::runtime_error("remove_degree2: isolated circle component");

  DirB e3_out = end3.outgoing();
  DirB e4_out = end4.outgoing();
  int b3 = end3.branch, b4 = end4.branch;

  // Far end of e3 becomes the new near end of the merged branch (which keeps
  // b4's id and orientation).
  EndRef far3 = t.branches[b3].ends[1 - end3.end];
  int near_idx = end4.end;  // b4's end at the dying switch
  t.branches[b4].ends[near_idx] = far3;
  t.switches[far3.sw].slots[far3.slot] = BranchEnd{b4, near_idx};

  // Merged image: path of (e3-bar then e4) oriented along b4's forward
  // direction.
  EdgePath merged;
  if (e4_out.forward()) {
    merged = g.image_of(e3_out.reversed());
    EdgePath tailp = g.image_of(e4_out);
    merged.insert(merged.end(), tailp.begin(), tailp.end());
  } else {
    merged = g.image_of(e4_out.reversed());
    EdgePath tailp = g.image_of(e3_out);
    merged.insert(merged.end(), tailp.begin(), tailp.end());
  }
  g.images[b4] = std::move(merged);

  // Drop every occurrence of e3 from every image, then delete it.
  for (auto& img : g.images) {
    EdgePath out;
    out.reserve(img.size());
    for (DirB d : img)
      if (d.branch() != b3) out.push_back(d);
    img = std::move(out);
  }
  g.images[b3] = {};
  t.branches[b3].alive = false;
  t.switches[target].alive = false;

  relabel_boundary(t, old_cycles, {b3, b4});
  if (changed) *changed = true;
  return res;
}

namespace {

void compact_with_map(MeasuredTrainTrack& t, GraphMap& g) {
  std::vector<int> bmap(t.branches.size(), -1);
  int nb = 0;
  for (size_t i = 0; i < t.branches.size(); ++i)
    if (t.branches[i].alive) bmap[i] = nb++;
  t.compact();
  std::vector<EdgePath> imgs(nb);
  for (size_t i = 0; i < g.images.size() && i < bmap.size(); ++i) {
    if (bmap[i] < 0) continue;
    EdgePath p;
    p.reserve(g.images[i].size());
    for (DirB d : g.images[i]) p.push_back(DirB::make(bmap[d.branch()], d.forward()));
    imgs[bmap[i]] = std::move(p);
  }
  g.images = std::move(imgs);
}

}  // namespace

MoveResult trivalentize(const MeasuredTrainTrack& t0, const GraphMap& g0) {
  MoveResult res{t0, g0};
  for (;;) {
    bool changed = false;
    res = remove_degree2(res.track, res.map, &changed);
    if (!changed) break;
  }
  for (;;) {
    int sw = -1;
    for (size_t si = 0; si < res.track.switches.size(); ++si)
      if (res.track.switches[si].alive && res.track.switches[si].degree() > 3) {
        sw = static_cast<int>(si);
        break;
      }
    if (sw < 0) break;
    const Switch& s = res.track.switches[sw];
    int slot = s.side_split >= 2 ? 0 : s.side_split;  // first same-side pair
    res = comb(res.track, res.map, sw, slot);
  }
  compact_with_map(res.track, res.map);
  return res;
}

MoveResult split(const MeasuredTrainTrack& t0, const GraphMap& g0, int branch, SplitRecord& rec,
                 double eps_w, std::optional<bool> forced_qs) {
  MoveResult res{t0, g0};
  MeasuredTrainTrack& t = res.track;
  GraphMap& g = res.map;

  if (!t.branches[branch].alive) throw std::runtime_error("split: dead branch");
  DirB E = DirB::fwd(branch);
  EndRef tu = t.tail(E), tv = t.head(E);
  const Switch& su = t.switches[tu.sw];
  const Switch& sv = t.switches[tv.sw];
  if (su.degree() != 3 || sv.degree() != 3)
    throw std::runtime_error("split: endpoints not trivalent");
  if (!t.end_is_large(tu) || !t.end_is_large(tv))
    throw std::runtime_error("split: branch " + t.branches[branch].name + " is not large");

  BranchEnd pe = su.slots[(tu.slot + 1) % 3];
  BranchEnd qe = su.slots[(tu.slot + 2) % 3];
  BranchEnd re = sv.slots[(tv.slot + 1) % 3];
  BranchEnd se = sv.slots[(tv.slot + 2) % 3];

  double wp = t.branches[pe.branch].weight, wq = t.branches[qe.branch].weight;
  double wr = t.branches[re.branch].weight, ws = t.branches[se.branch].weight;
  double dq = std::max(wq, ws), dp = std::max(wp, wr);

  bool qs;
  if (forced_qs.has_value()) {
    qs = *forced_qs;
  } else {
    if (std::abs(dq - dp) <= eps_w * std::max({dq, dp, 1e-300}))
      throw std::runtime_error("degenerate split at branch " + t.branches[branch].name +
                               " (diagonal weights tie)");
    qs = dq > dp;
  }

  rec = SplitRecord{};
  rec.branch = branch;
  rec.qs_dominant = qs;
  rec.sw_u = tu.sw;
  rec.sw_v = tv.sw;
  rec.slot_u = tu.slot;
  rec.slot_v = tv.slot;
  rec.p = pe.outgoing();
  rec.q = qe.outgoing();
  rec.r = re.outgoing();
  rec.s = se.outgoing();
  if (qs) {
    rec.e1 = rec.p;
    rec.e4 = rec.r;
  } else {
    rec.e1 = rec.q;
    rec.e4 = rec.s;
  }
  rec.folded_pair = rec.e1 == rec.e4.reversed();

  std::vector<BoundaryCycle> old_cycles = t.boundary;

  // Rebuild the two switches in place. A holds E's initial end.
  int A = tu.sw, B = tv.sw;
  Switch sa, sb;
  if (qs) {
    sa.slots = {qe, re, BranchEnd{branch, 0}};
    sb.slots = {se, pe, BranchEnd{branch, 1}};
  } else {
    sa.slots = {pe, BranchEnd{branch, 0}, se};
    sb.slots = {re, BranchEnd{branch, 1}, qe};
  }
  sa.side_split = 1;
  sb.side_split = 1;
  t.switches[A] = std::move(sa);
  t.switches[B] = std::move(sb);
  sync_switch(t, A);
  sync_switch(t, B);
  t.branches[branch].weight = std::abs(dq - dp);

  if (!g.images.empty()) {
    // g'(e1) = g(E-bar e1), g'(e4) = g(E e4); e1 == e4-bar folds both into
    // g(E-bar e1 E-bar).
    EdgePath imgE = g.images[branch];  // forward image of E (unchanged row)
    auto img_of = [&](DirB d) { return g.image_of(d); };
    EdgePath Ebar_img = reversed(imgE);

    auto set_image = [&](DirB d, EdgePath word) {
      if (d.forward())
        g.images[d.branch()] = std::move(word);
      else
        g.images[d.branch()] = reversed(word);
    };

    if (rec.folded_pair) {
      EdgePath w = Ebar_img;
      EdgePath mid = img_of(rec.e1);
      w.insert(w.end(), mid.begin(), mid.end());
      w.insert(w.end(), Ebar_img.begin(), Ebar_img.end());
      set_image(rec.e1, std::move(w));
    } else {
      EdgePath w1 = Ebar_img;
      EdgePath mid1 = img_of(rec.e1);
      w1.insert(w1.end(), mid1.begin(), mid1.end());
      EdgePath w4 = imgE;
      EdgePath mid4 = img_of(rec.e4);
      w4.insert(w4.end(), mid4.begin(), mid4.end());
      set_image(rec.e1, std::move(w1));
      set_image(rec.e4, std::move(w4));
    }

    // Step 2: occurrences of e1 gain an E prefix, occurrences of e4 an E-bar
    // prefix (suffixes for their reversals).
    DirB Enew = DirB::fwd(branch);
    for (auto& img : g.images) {
      EdgePath out;
      out.reserve(img.size() * 2);
      for (DirB x : img) {
        if (x == rec.e1) out.push_back(Enew);
        if (x == rec.e4) out.push_back(Enew.reversed());
        out.push_back(x);
        if (x == rec.e1.reversed()) out.push_back(Enew.reversed());
        if (x == rec.e4.reversed()) out.push_back(Enew);
      }
      img = std::move(out);
    }
  }

  relabel_boundary(t, old_cycles, {branch});
  return res;
}

MoveResult maximal_split(const MeasuredTrainTrack& t0, const GraphMap& g0,
                         std::vector<SplitRecord>& records, double eps_w) {
  if (!t0.weights_installed()) throw std::runtime_error("maximal_split: weights not installed");
  double wmax = 0;
  for (const auto& b : t0.branches)
    if (b.alive) wmax = std::max(wmax, b.weight);
  std::vector<int> targets;
  for (size_t bi = 0; bi < t0.branches.size(); ++bi)
    if (t0.branches[bi].alive && std::abs(t0.branches[bi].weight - wmax) <= eps_w * wmax)
      targets.push_back(static_cast<int>(bi));

  MoveResult res{t0, g0};
  records.clear();
  for (int b : targets) {
    if (!res.track.branch_is_large(b))
      throw std::runtime_error("not a splitting track: maximal branch " +
                               res.track.branches[b].name + " is not large");
    SplitRecord rec;
    res = split(res.track, res.map, b, rec, eps_w);
    records.push_back(rec);
  }
  res.track.renormalize_max_one();
  return res;
}

GraphMap fold_map(size_t num_branches, const std::vector<SplitRecord>& records) {
  GraphMap h;
  h.images.resize(num_branches);
  for (size_t b = 0; b < num_branches; ++b) h.images[b] = {DirB::fwd(static_cast<int>(b))};
  // h = h_1 . h_2 ... ; the innermost (last) fold applies to letters first,
  // so accumulate rewrites from the last record back to the first.
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    const SplitRecord& rec = *it;
    DirB E = DirB::fwd(rec.branch);
    for (auto& img : h.images) {
      EdgePath out;
      out.reserve(img.size() * 2);
      for (DirB x : img) {
        if (x == rec.e1) out.push_back(E.reversed());
        if (x == rec.e4) out.push_back(E);
        out.push_back(x);
        if (x == rec.e1.reversed()) out.push_back(E);
        if (x == rec.e4.reversed()) out.push_back(E.reversed());
      }
      img = std::move(out);
    }
  }
  return h;
}

GraphMap tighten(const GraphMap& g) {
  GraphMap out = g;
  out.tighten_images();
  return out;
}

}  // namespace veer
