#include "veer/layering.hpp"

#include <stdexcept>

namespace veer {

namespace {
// Calibrated against the worked once-punctured-torus example so the closed
// complex reproduces its published face-pairing table literally.
constexpr SquareLabels kSquare{0, 3, 1, 2};  // N=0, E=3, S=1, W=2
}  // namespace

LayerTriangulation dual_triangulation(const MeasuredTrainTrack& track) {
  if (!track.is_trivalent())
    throw std::runtime_error("dual triangulation requires a trivalent track");
  LayerTriangulation out;
  out.triangle_switch = track.live_switch_ids();
  out.triangles = static_cast<int>(out.triangle_switch.size());
  out.edges = track.num_live_branches();
  out.vertices = static_cast<int>(track.derived_faces().size());
  return out;
}

LayeredBuilder::LayeredBuilder(const MeasuredTrainTrack& base) {
  if (!base.is_trivalent()) throw std::runtime_error("layering requires a trivalent track");
  for (int s : base.live_switch_ids()) {
    FaceSlot slot;
    slot.tet = -1;
    slot.face = s;
    slot.vert_of_gap = {0, 1, 2};
    layer_[s] = slot;
  }
}

void LayeredBuilder::attach_split(const SplitRecord& rec) {
  auto itu = layer_.find(rec.sw_u);
  auto itv = layer_.find(rec.sw_v);
  if (itu == layer_.end() || itv == layer_.end() || rec.sw_u == rec.sw_v)
    throw std::runtime_error("attach_split: branch is not a diagonal of the current layer");
  FaceSlot tu = itu->second;
  FaceSlot tv = itv->second;

  // Region of each slot gap around the split branch (gap k lies between
  // slots k and k+1). At u: gap(slot_u) = S, +1 = W, +2 = N. At v:
  // gap(slot_v) = N, +1 = E, +2 = S.
  int uS = tu.vert_of_gap[rec.slot_u % 3];
  int uW = tu.vert_of_gap[(rec.slot_u + 1) % 3];
  int uN = tu.vert_of_gap[(rec.slot_u + 2) % 3];
  int vN = tv.vert_of_gap[rec.slot_v % 3];
  int vE = tv.vert_of_gap[(rec.slot_v + 1) % 3];
  int vS = tv.vert_of_gap[(rec.slot_v + 2) % 3];

  int T = static_cast<int>(tri_.tets.size());
  tri_.tets.push_back({});
  tri_.pi_pair.resize(tri_.tets.size(), -1);
  tri_.pi_pair[T] = edge_pair(edge_index(kSquare.n, kSquare.s));

  auto glue_bottom = [&](const FaceSlot& below, int face_label, int va, int a, int vb, int b,
                         int vc, int c, int base_switch) {
    // va..vc: labels of T; a..c: matching vertex labels on the face below.
    if (below.tet < 0) {
      // Virtual face of the base layer: remember how T sits on it.
      FaceSlot rec_slot;
      rec_slot.tet = T;
      rec_slot.face = face_label;
      // vert_of_gap for the base triangle: gap k held vertex k of the
      // virtual face; find which T-vertex matched it.
      for (int k = 0; k < 3; ++k) {
        int virt = k;
        int tvert = -1;
        if (a == virt) tvert = va;
        if (b == virt) tvert = vb;
        if (c == virt) tvert = vc;
        rec_slot.vert_of_gap[k] = tvert;
      }
      bottom_[base_switch] = rec_slot;
    } else {
      Perm4 perm;
      perm.image[face_label] = below.face;
      perm.image[va] = a;
      perm.image[vb] = b;
      perm.image[vc] = c;
      tri_.set_gluing(T, face_label, below.tet, below.face, perm);
    }
  };

  // Bottom faces: the face omitting E sits on triangle(u) = (N,W,S); the
  // face omitting W sits on triangle(v) = (N,E,S).
  glue_bottom(tu, kSquare.e, kSquare.n, uN, kSquare.w, uW, kSquare.s, uS,
              tu.tet < 0 ? tu.face : -1);
  glue_bottom(tv, kSquare.w, kSquare.n, vN, kSquare.e, vE, kSquare.s, vS,
              tv.tet < 0 ? tv.face : -1);

  // New exposed top faces.
  FaceSlot fa, fb;
  if (rec.qs_dominant) {
    // A = (q,r,E) switch: gaps (q,r)=N, (r,E)=E, (E,q)=W; exposed face
    // omits S. B = (s,p,E): gaps (s,p)=S, (p,E)=W, (E,s)=E; omits N.
    fa.tet = T;
    fa.face = kSquare.s;
    fa.vert_of_gap = {kSquare.n, kSquare.e, kSquare.w};
    fb.tet = T;
    fb.face = kSquare.n;
    fb.vert_of_gap = {kSquare.s, kSquare.w, kSquare.e};
  } else {
    // A = (p,E,s): gaps (p,E)=W, (E,s)=E, (s,p)=S; omits N.
    // B = (r,E,q): gaps (r,E)=E, (E,q)=W, (q,r)=N; omits S.
    fa.tet = T;
    fa.face = kSquare.n;
    fa.vert_of_gap = {kSquare.w, kSquare.e, kSquare.s};
    fb.tet = T;
    fb.face = kSquare.s;
    fb.vert_of_gap = {kSquare.e, kSquare.w, kSquare.n};
  }
  layer_[rec.sw_u] = fa;
  layer_[rec.sw_v] = fb;
}

IdealTriangulation LayeredBuilder::close_up(const MeasuredTrainTrack& base,
                                            const MeasuredTrainTrack& top,
                                            const CombinatorialEquivalence& phi) {
  for (int s : base.live_switch_ids()) {
    auto bit = bottom_.find(s);
    if (bit == bottom_.end())
      throw std::runtime_error(
          "close_up: a base triangle was never consumed by a diagonal exchange");
    int s2 = phi.switch_map[s];
    auto tit = layer_.find(s2);
    if (tit == layer_.end() || tit->second.tet < 0)
      throw std::runtime_error("close_up: equivalence image is not exposed on the top layer");
    const FaceSlot& bot = bit->second;
    const FaceSlot& topf = tit->second;

    // Gap k of s (between slots k,k+1) maps to the gap of phi(s) starting at
    // the image slot of slot k.
    const Switch& sw1 = base.switches[s];
    Perm4 perm;
    perm.image[bot.face] = topf.face;
    for (int k = 0; k < 3; ++k) {
      DirB out1 = sw1.slots[k].outgoing();
      DirB out2 = phi.branch_map[out1.code];
      int slot2 = top.tail(out2).slot;
      perm.image[bot.vert_of_gap[k]] = topf.vert_of_gap[slot2];
    }
    tri_.set_gluing(bot.tet, bot.face, topf.tet, topf.face, perm);
  }
  if (!tri_.fully_glued()) throw std::runtime_error("close_up: unglued faces remain");
  if (!tri_.gluing_involutive()) throw std::runtime_error("close_up: non-involutive gluings");
  return tri_;
}

IdealTriangulation build_layered(const SplitSequence& seq) {
  const auto& layers = seq.layers;
  int n = seq.cert.n, m = seq.cert.m;
  LayeredBuilder builder(layers[n].track);
  for (int k = n + 1; k <= n + m; ++k)
    for (const auto& rec : layers[k].records) builder.attach_split(rec);
  return builder.close_up(layers[n].track, layers[n + m].track, seq.cert.phi);
}

}  // namespace veer
