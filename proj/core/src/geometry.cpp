#include "veer/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace veer {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// ---------------------------------------------------------------------------
// Volume
// ---------------------------------------------------------------------------

double lobachevsky(double theta) {
  // Reduce mod pi into [-pi/2, pi/2]; the function is odd and pi-periodic.
  theta = std::fmod(theta, kPi);
  if (theta > kPi / 2) theta -= kPi;
  if (theta < -kPi / 2) theta += kPi;
  if (theta == 0.0) return 0.0;
  double sign = theta < 0 ? -1.0 : 1.0;
  double t = std::abs(theta);
  // L(t) = t - t log(2t) + sum_{n>=1} zeta(2n)/(n(2n+1)) (t/pi)^{2n} t.
  static const std::vector<double> zeta2n = [] {
    std::vector<double> zs;
    for (int n = 1; n <= 40; ++n) {
      double s = 0;
      for (int k = 1; k <= 200000; ++k) {
        double term = std::pow(static_cast<double>(k), -2.0 * n);
        s += term;
        if (term < 1e-19 * s) break;
      }
      zs.push_back(s);
    }
    return zs;
  }();
  double sum = 0;
  double ratio = t / kPi;
  double pw = ratio * ratio;
  for (size_t n = 1; n <= zeta2n.size(); ++n) {
    double term = zeta2n[n - 1] / (n * (2.0 * n + 1.0)) * pw;
    sum += term;
    if (term < 1e-18) break;
    pw *= ratio * ratio;
  }
  return sign * (t - t * std::log(2 * t) + t * sum);
}

double tet_volume(cx z, double eps_z) {
  if (std::abs(z) < eps_z || std::abs(z - 1.0) < eps_z)
    throw std::runtime_error("tet_volume: degenerate edge parameter");
  double im = z.imag();
  if (im == 0.0) return 0.0;
  cx w = im > 0 ? z : std::conj(z);
  double a1 = std::arg(w);
  double a2 = std::arg(1.0 / (1.0 - w));
  double a3 = std::arg(1.0 - 1.0 / w);
  double v = lobachevsky(a1) + lobachevsky(a2) + lobachevsky(a3);
  return im > 0 ? v : -v;
}

double volume(const ShapeAssignment& shapes, double eps_z) {
  double v = 0;
  for (cx z : shapes.z) v += tet_volume(z, eps_z);
  return v;
}

// ---------------------------------------------------------------------------
// Cusp link machinery
// ---------------------------------------------------------------------------

namespace {

// Even vertex orders: corner cvs such that (v, cv[0], cv[1], cv[2]) is an
// even permutation; the corner-vertex cycle is then anticlockwise viewed
// from the cusp and carries parameters (z, z', z'') in order.
constexpr int kCornerOrder[4][3] = {{1, 2, 3}, {0, 3, 2}, {3, 0, 1}, {2, 1, 0}};

struct Corner {
  int tet, vertex;
  std::array<int, 3> cv;       // other tet vertices in cyclic order
  std::array<int, 3> pair;     // parameter pair index per corner-vertex
  std::array<int, 3> glue_corner;  // corner id across side k
  std::array<int, 3> glue_side;
};

int corner_id(int t, int v) { return 4 * t + v; }

struct CuspComplex {
  std::vector<Corner> corners;
  std::vector<int> cusp_of_corner;
  int num_cusps = 0;
};

void require_positive_labels(const IdealTriangulation& tri) {
  auto signs = tri.orientation_signs();
  if (!signs) throw std::runtime_error("non-orientable gluing data");
  for (int s : *signs)
    if (s != (*signs)[0])
      throw std::runtime_error("internal: inconsistent orientation signs");
  for (const auto& t : tri.tets)
    for (const auto& g : t.glue)
      if (g.glued() && !g.perm.is_odd())
        throw std::runtime_error(
            "tetrahedron labelings are not consistently oriented; normalize first");
}

CuspComplex build_cusp_complex(const IdealTriangulation& tri) {
  CuspComplex cc;
  int n = tri.size();
  cc.corners.resize(4 * n);
  for (int t = 0; t < n; ++t)
    for (int v = 0; v < 4; ++v) {
      Corner& c = cc.corners[corner_id(t, v)];
      c.tet = t;
      c.vertex = v;
      for (int k = 0; k < 3; ++k) {
        c.cv[k] = kCornerOrder[v][k];
        c.pair[k] = edge_pair(edge_index(v, c.cv[k]));
      }
    }
  for (int t = 0; t < n; ++t)
    for (int v = 0; v < 4; ++v) {
      Corner& c = cc.corners[corner_id(t, v)];
      for (int k = 0; k < 3; ++k) {
        int f = c.cv[k];  // side k lies in the face opposite cv[k]
        const auto& g = tri.tets[t].glue[f];
        int t2 = g.tet, v2 = g.perm[v], f2 = g.perm[f];
        const Corner& c2 = cc.corners[corner_id(t2, v2)];
        int k2 = -1;
        for (int i = 0; i < 3; ++i)
          if (c2.cv[i] == f2) k2 = i;
        c.glue_corner[k] = corner_id(t2, v2);
        c.glue_side[k] = k2;
      }
    }
  // Cusp components.
  cc.cusp_of_corner.assign(4 * n, -1);
  auto cusps = tri.cusp_classes();
  cc.num_cusps = cusps.count;
  for (int t = 0; t < n; ++t)
    for (int v = 0; v < 4; ++v) cc.cusp_of_corner[corner_id(t, v)] = cusps.id[t][v];
  return cc;
}

// Symbolic similarity ratio: product of +-(corner parameter)^{+-1} terms.
struct SymRatio {
  std::map<std::pair<int, int>, int> expo;  // (tet, pair) -> exponent
  int pi_count = 0;                         // extra factors of -1 = e^{i pi}

  void mul_param(int tet, int pair, int e) {
    auto key = std::make_pair(tet, pair);
    expo[key] += e;
    if (expo[key] == 0) expo.erase(key);
  }
  void mul(const SymRatio& o, int sgn = 1) {
    for (const auto& [k, e] : o.expo) {
      expo[k] += sgn * e;
      if (expo[k] == 0) expo.erase(k);
    }
    pi_count += sgn * o.pi_count;
  }
};

// Within a triangle, transition factor from directed side a to directed side
// b: s_b = -u_c^{eps} s_a with c the shared corner. eps = +1 when a follows b
// cyclically (a == b+1 mod 3).
void within_transition(const Corner& c, int a, int b, SymRatio& r) {
  if (a == b) return;
  int pivot = 3 - a - b;
  int eps = (a == (b + 1) % 3) ? 1 : -1;
  r.mul_param(c.tet, c.pair[pivot], eps);
  r.pi_count += 1;
}

cx param_value(int kind, cx z) {
  switch (kind) {
    case 0: return z;
    case 1: return 1.0 / (1.0 - z);
    default: return 1.0 - 1.0 / z;
  }
}

cx param_dlog(int kind, cx z) {
  switch (kind) {
    case 0: return 1.0 / z;
    case 1: return 1.0 / (1.0 - z);
    default: return 1.0 / (z * (z - 1.0));
  }
}

// Spanning tree of one cusp component plus symbolic ratios of each corner's
// reference side (side 0) against the root's.
struct CuspTree {
  int root = -1;
  std::vector<int> order;                       // BFS order of corner ids
  std::map<int, SymRatio> ratio;                // corner -> ratio
  std::map<int, std::pair<int, int>> parent;    // corner -> (parent corner, side into parent)
  std::map<int, int> parent_side_here;          // corner -> side toward parent
  std::vector<std::array<bool, 3>> tree_side;   // per corner id (global), is side in tree
  std::vector<std::pair<int, int>> chords;      // non-tree gluings (corner, side), canonical rep
};

CuspTree cusp_tree(const CuspComplex& cc, int cusp) {
  CuspTree tr;
  tr.tree_side.assign(cc.corners.size(), {false, false, false});
  for (size_t c = 0; c < cc.corners.size(); ++c)
    if (cc.cusp_of_corner[c] == cusp) {
      tr.root = static_cast<int>(c);
      break;
    }
  if (tr.root < 0) throw std::logic_error("empty cusp");
  std::set<int> seen{tr.root};
  tr.ratio[tr.root] = SymRatio{};
  std::deque<int> queue{tr.root};
  tr.order.push_back(tr.root);
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    const Corner& cor = cc.corners[c];
    for (int k = 0; k < 3; ++k) {
      int c2 = cor.glue_corner[k];
      int k2 = cor.glue_side[k];
      if (!seen.count(c2)) {
        seen.insert(c2);
        tr.tree_side[c][k] = true;
        tr.tree_side[c2][k2] = true;
        // ratio of c2's side 0 relative to root: ratio(c) * (0 -> k in c) *
        // crossing * (k2 -> 0 in c2).
        SymRatio r = tr.ratio[c];
        within_transition(cor, 0, k, r);
        r.pi_count += 1;  // shared side reverses
        within_transition(cc.corners[c2], k2, 0, r);
        tr.ratio[c2] = r;
        tr.parent[c2] = {c, k2};
        tr.parent_side_here[c2] = k2;
        tr.order.push_back(c2);
        queue.push_back(c2);
      }
    }
  }
  // Chords: each non-tree gluing once.
  std::set<std::pair<int, int>> used;
  for (int c : tr.order) {
    const Corner& cor = cc.corners[c];
    for (int k = 0; k < 3; ++k) {
      if (tr.tree_side[c][k]) continue;
      auto mate = std::make_pair(cor.glue_corner[k], cor.glue_side[k]);
      if (used.count({c, k}) || used.count(mate)) continue;
      used.insert({c, k});
      tr.chords.push_back({c, k});
    }
  }
  return tr;
}

// Holonomy-derivative ratio of the fundamental loop of a chord.
SymRatio chord_ratio(const CuspComplex& cc, const CuspTree& tr, std::pair<int, int> chord) {
  auto [c, k] = chord;
  int c2 = cc.corners[c].glue_corner[k];
  int k2 = cc.corners[c].glue_side[k];
  SymRatio r = tr.ratio.at(c);
  within_transition(cc.corners[c], 0, k, r);
  r.pi_count += 1;
  within_transition(cc.corners[c2], k2, 0, r);
  r.mul(tr.ratio.at(c2), -1);
  return r;
}

// --- H1 class machinery -----------------------------------------------------

// Delta-complex data for one cusp: edges are side-gluing orbits, vertices are
// corner-vertex orbits.
struct CuspH1 {
  std::map<std::pair<int, int>, int> edge_of_side;  // (corner, side) -> edge id, both reps
  std::vector<std::pair<int, int>> edge_rep;        // edge id -> (corner, side)
  std::vector<int> vertex_of;                       // (corner*3 + cvert index) -> vertex id
  int num_edges = 0;
  int num_vertices = 0;
  Eigen::MatrixXd d2;  // edges x faces boundary matrix
};

CuspH1 cusp_h1(const CuspComplex& cc, const std::vector<int>& corners_in) {
  CuspH1 h;
  std::map<int, int> face_index;
  for (size_t i = 0; i < corners_in.size(); ++i) face_index[corners_in[i]] = static_cast<int>(i);

  for (int c : corners_in)
    for (int k = 0; k < 3; ++k) {
      if (h.edge_of_side.count({c, k})) continue;
      int c2 = cc.corners[c].glue_corner[k];
      int k2 = cc.corners[c].glue_side[k];
      int id = h.num_edges++;
      h.edge_of_side[{c, k}] = id;
      h.edge_of_side[{c2, k2}] = id;
      h.edge_rep.push_back({c, k});
    }

  // Corner-vertex orbits via side gluings: side k of corner c has endpoints
  // cvert (k+1) and (k+2); across the gluing they match reversed.
  std::map<std::pair<int, int>, int> uf;  // (corner, cvert) -> index
  std::vector<int> parent;
  std::vector<std::pair<int, int>> keys;
  auto key_id = [&](int c, int m) {
    auto it = uf.find({c, m});
    if (it != uf.end()) return it->second;
    int id = static_cast<int>(parent.size());
    uf[{c, m}] = id;
    parent.push_back(id);
    keys.push_back({c, m});
    return id;
  };
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int c : corners_in)
    for (int k = 0; k < 3; ++k) {
      int c2 = cc.corners[c].glue_corner[k];
      int k2 = cc.corners[c].glue_side[k];
      // endpoints reverse across the side
      int a1 = key_id(c, (k + 1) % 3), a2 = key_id(c, (k + 2) % 3);
      int b1 = key_id(c2, (k2 + 1) % 3), b2 = key_id(c2, (k2 + 2) % 3);
      parent[find(a1)] = find(b2);
      parent[find(a2)] = find(b1);
    }
  std::map<int, int> root_to_vertex;
  h.vertex_of.assign(cc.corners.size() * 3, -1);
  for (size_t i = 0; i < keys.size(); ++i) {
    int r = find(static_cast<int>(i));
    auto it = root_to_vertex.find(r);
    if (it == root_to_vertex.end()) it = root_to_vertex.emplace(r, h.num_vertices++).first;
    h.vertex_of[keys[i].first * 3 + keys[i].second] = it->second;
  }

  // Boundary matrix d2 (edges x faces): face boundary traverses side 2,0,1
  // in its forward direction (cvert m+1 -> m+2 for side m).
  h.d2 = Eigen::MatrixXd::Zero(h.num_edges, corners_in.size());
  for (int c : corners_in) {
    int fi = face_index[c];
    for (int k = 0; k < 3; ++k) {
      int e = h.edge_of_side[{c, k}];
      auto rep = h.edge_rep[e];
      double sign = (rep == std::make_pair(c, k)) ? 1.0 : -1.0;
      h.d2(e, fi) += sign;
    }
  }
  return h;
}

// 1-chain of the fundamental loop of a chord, in edge coordinates.
Eigen::VectorXd chord_chain(const CuspComplex& cc, const CuspTree& tr, const CuspH1& h,
                            std::pair<int, int> chord) {
  // Crossing sequence of the reduced loop: root -> c (tree), chord, c2 ->
  // root (tree), with the common tree prefix cancelled.
  auto path_from_root = [&](int c) {
    std::vector<int> nodes;  // corners from root to c
    int cur = c;
    while (cur != tr.root) {
      nodes.push_back(cur);
      cur = tr.parent.at(cur).first;
    }
    nodes.push_back(tr.root);
    std::reverse(nodes.begin(), nodes.end());
    return nodes;
  };
  auto [c, k] = chord;
  int c2 = cc.corners[c].glue_corner[k];
  std::vector<int> pa = path_from_root(c), pb = path_from_root(c2);
  size_t common = 0;
  while (common + 1 < pa.size() && common + 1 < pb.size() && pa[common + 1] == pb[common + 1])
    ++common;
  // Loop corners: pa[common..] then pb reversed [.. common].
  std::vector<int> loop_nodes(pa.begin() + common, pa.end());
  for (size_t i = pb.size(); i-- > common;) loop_nodes.push_back(pb[i]);
  // Crossing sides along the loop: between consecutive corners use the tree
  // side; between c and c2 the chord side.
  struct Crossing {
    int corner_out, side_out;
  };
  std::vector<Crossing> crossings;
  for (size_t i = 0; i + 1 < loop_nodes.size(); ++i) {
    int from = loop_nodes[i], to = loop_nodes[i + 1];
    if (i == pa.size() - common - 1) {
      crossings.push_back({from, k});  // the chord
      continue;
    }
    // tree edge between from/to: one is parent of the other
    if (tr.parent.count(to) && tr.parent.at(to).first == from) {
      // from -> to via to's parent side: side on from's side?
      int side_to = tr.parent_side_here.at(to);
      int side_from = -1;
      const Corner& cor = cc.corners[from];
      for (int s = 0; s < 3; ++s)
        if (cor.glue_corner[s] == to && cor.glue_side[s] == side_to) side_from = s;
      crossings.push_back({from, side_from});
    } else {
      int side_from = tr.parent_side_here.at(from);
      crossings.push_back({from, side_from});
    }
  }
  // Last node equals first (loop closes): pivot chain over cyclic crossings.
  Eigen::VectorXd chain = Eigen::VectorXd::Zero(h.num_edges);
  size_t L = crossings.size();
  for (size_t i = 0; i < L; ++i) {
    const Crossing& cr = crossings[i];
    const Crossing& prev = crossings[(i + L - 1) % L];
    // Entering side of cr.corner_out: the side through which the previous
    // crossing arrived.
    int c_prev = prev.corner_out, s_prev = prev.side_out;
    int enter_side = cc.corners[c_prev].glue_side[s_prev];
    int exit_side = cr.side_out;
    if (enter_side == exit_side) continue;  // immediate backtrack, no pivot
    int pivot = 3 - enter_side - exit_side;  // shared cvert of the two sides
    // Chain contribution on the exit side: from pivot to the other endpoint
    // hit next. The exit side s has endpoints (s+1),(s+2); the pivot is one
    // of them; orient the edge from pivot to the other endpoint and compare
    // with the edge rep orientation (rep side oriented (k+1)->(k+2)).
    int s = exit_side;
    int e = h.edge_of_side.at({cr.corner_out, s});
    auto rep = h.edge_rep[e];
    // Does the rep side traverse from our pivot first?
    int from_v = h.vertex_of[cr.corner_out * 3 + pivot];
    int rep_from = h.vertex_of[rep.first * 3 + (rep.second + 1) % 3];
    int rep_to = h.vertex_of[rep.first * 3 + (rep.second + 2) % 3];
    if (rep_from == rep_to) continue;  // side with identified endpoints: closed already
    double sgn = (from_v == rep_from) ? 1.0 : -1.0;
    chain(e) += sgn;
  }
  return chain;
}

bool chain_is_boundary(const CuspH1& h, const Eigen::VectorXd& chain) {
  Eigen::MatrixXd A(h.d2.rows(), h.d2.cols() + 1);
  A.leftCols(h.d2.cols()) = h.d2;
  A.rightCols(1) = chain;
  Eigen::FullPivLU<Eigen::MatrixXd> lu1(h.d2), lu2(A);
  lu1.setThreshold(1e-8);
  lu2.setThreshold(1e-8);
  return lu1.rank() == lu2.rank();
}

bool chains_dependent(const CuspH1& h, const Eigen::VectorXd& c1, const Eigen::VectorXd& c2) {
  Eigen::MatrixXd A(h.d2.rows(), h.d2.cols() + 1);
  A.leftCols(h.d2.cols()) = h.d2;
  A.rightCols(1) = c1;
  Eigen::MatrixXd B(h.d2.rows(), h.d2.cols() + 2);
  B.leftCols(h.d2.cols()) = h.d2;
  B.col(h.d2.cols()) = c1;
  B.col(h.d2.cols() + 1) = c2;
  Eigen::FullPivLU<Eigen::MatrixXd> luA(A), luB(B);
  luA.setThreshold(1e-8);
  luB.setThreshold(1e-8);
  return luA.rank() == luB.rank();
}

Equation equation_from_ratio(int n, const SymRatio& r, cx base, const std::string& label) {
  Equation eq;
  eq.coeff.assign(n, {0, 0, 0});
  for (const auto& [key, e] : r.expo) eq.coeff[key.first][key.second] += e;
  eq.pi_extra = r.pi_count;
  eq.base = base;
  eq.label = label;
  return eq;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gluing system
// ---------------------------------------------------------------------------

GluingSystem gluing_system(const IdealTriangulation& tri, const std::vector<Filling>& fillings) {
  require_positive_labels(tri);
  GluingSystem sys;
  sys.tri = &tri;
  int n = tri.size();
  sys.tet_sign.assign(n, 1);

  auto ec = tri.edge_classes();
  for (int c = 0; c < ec.count; ++c) {
    Equation eq;
    eq.coeff.assign(n, {0, 0, 0});
    eq.base = cx(0, 2 * kPi);
    eq.label = "edge " + std::to_string(c);
    sys.equations.push_back(eq);
  }
  for (int t = 0; t < n; ++t)
    for (int e = 0; e < 6; ++e) sys.equations[ec.id[t][e]].coeff[t][edge_pair(e)] += 1;
  sys.num_edge_equations = ec.count;

  CuspComplex cc = build_cusp_complex(tri);
  sys.num_cusps = cc.num_cusps;
  if (!fillings.empty() && static_cast<int>(fillings.size()) != cc.num_cusps)
    throw std::runtime_error("fillings list does not match cusp count");

  for (int cusp = 0; cusp < cc.num_cusps; ++cusp) {
    std::vector<int> corners_in;
    for (size_t c = 0; c < cc.corners.size(); ++c)
      if (cc.cusp_of_corner[c] == cusp) corners_in.push_back(static_cast<int>(c));
    // Euler characteristic check: torus link.
    CuspH1 h = cusp_h1(cc, corners_in);
    int chi = h.num_vertices - h.num_edges + static_cast<int>(corners_in.size());
    if (chi != 0) throw std::runtime_error("cusp link is not a torus");

    CuspTree tr = cusp_tree(cc, cusp);

    // Pick the first homologically nontrivial chord loop, and for fillings a
    // second independent one.
    int first = -1, second = -1;
    Eigen::VectorXd chain1;
    for (size_t i = 0; i < tr.chords.size(); ++i) {
      Eigen::VectorXd ch = chord_chain(cc, tr, h, tr.chords[i]);
      if (first < 0) {
        if (!chain_is_boundary(h, ch)) {
          first = static_cast<int>(i);
          chain1 = ch;
        }
      } else if (!chains_dependent(h, chain1, ch)) {
        second = static_cast<int>(i);
        break;
      }
    }
    if (first < 0) throw std::runtime_error("no nontrivial cusp loop found");

    bool filled = !fillings.empty() && fillings[cusp].filled;
    if (!filled) {
      SymRatio r = chord_ratio(cc, tr, tr.chords[first]);
      sys.equations.push_back(
          equation_from_ratio(n, r, cx(0, 0), "completeness cusp " + std::to_string(cusp)));
      sys.cusp_equation_kind.push_back("complete");
    } else {
      long p = fillings[cusp].p, q = fillings[cusp].q;
      if (std::gcd(std::labs(p), std::labs(q)) != 1)
        throw std::runtime_error("surgery coefficients must be coprime");
      if (second < 0) throw std::runtime_error("could not find two independent cusp loops");
      SymRatio r1 = chord_ratio(cc, tr, tr.chords[first]);
      SymRatio r2 = chord_ratio(cc, tr, tr.chords[second]);
      SymRatio combo;
      for (long i = 0; i < std::labs(p); ++i) combo.mul(r1, p > 0 ? 1 : -1);
      for (long i = 0; i < std::labs(q); ++i) combo.mul(r2, q > 0 ? 1 : -1);
      std::ostringstream lbl;
      lbl << "surgery cusp " << cusp << " (" << p << "," << q << ")";
      sys.equations.push_back(equation_from_ratio(n, combo, cx(0, 2 * kPi), lbl.str()));
      sys.cusp_equation_kind.push_back(lbl.str());
    }
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Newton solver
// ---------------------------------------------------------------------------

namespace {

cx eval_equation_log(const Equation& eq, const std::vector<cx>& z) {
  cx v(0, 0);
  for (size_t t = 0; t < z.size(); ++t)
    for (int p = 0; p < 3; ++p) {
      int c = eq.coeff[t][p];
      if (c == 0) continue;
      v += static_cast<double>(c) * std::log(param_value(p, z[t]));
    }
  v += cx(0, kPi) * static_cast<double>(eq.pi_extra);
  return v;
}

cx eval_equation_product(const Equation& eq, const std::vector<cx>& z) {
  cx v(1, 0);
  for (size_t t = 0; t < z.size(); ++t)
    for (int p = 0; p < 3; ++p) {
      int c = eq.coeff[t][p];
      if (c == 0) continue;
      cx u = param_value(p, z[t]);
      for (int i = 0; i < std::abs(c); ++i) v = c > 0 ? v * u : v / u;
    }
  if (eq.pi_extra % 2 != 0) v = -v;
  return v;
}

}  // namespace

GeometrySolution solve_shapes(const GluingSystem& sys, const ShapeAssignment& seed_in,
                              double eps_solve, double eps_z, int max_iter) {
  int n = sys.tri->size();
  std::vector<cx> z(n, cx(0, 1));
  if (!seed_in.z.empty()) {
    if (static_cast<int>(seed_in.z.size()) != n)
      throw std::runtime_error("seed size does not match triangulation");
    z = seed_in.z;
  }
  int m = static_cast<int>(sys.equations.size());

  // Branch integers fixed from the seed.
  std::vector<cx> target(m);
  for (int e = 0; e < m; ++e) {
    cx val = eval_equation_log(sys.equations[e], z);
    double k = std::round((val.imag() - sys.equations[e].base.imag()) / (2 * kPi));
    target[e] = sys.equations[e].base + cx(0, 2 * kPi * k);
  }

  auto residual = [&](const std::vector<cx>& zz, Eigen::VectorXcd& F) {
    double sup = 0;
    for (int e = 0; e < m; ++e) {
      cx v = eval_equation_log(sys.equations[e], zz) - target[e];
      F(e) = v;
      sup = std::max(sup, std::abs(v));
    }
    return sup;
  };

  Eigen::VectorXcd F(m);
  double sup = residual(z, F);
  bool converged = sup <= eps_solve;
  for (int it = 0; it < max_iter && !converged; ++it) {
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(m, n);
    for (int e = 0; e < m; ++e)
      for (int t = 0; t < n; ++t) {
        cx d(0, 0);
        for (int p = 0; p < 3; ++p) {
          int c = sys.equations[e].coeff[t][p];
          if (c) d += static_cast<double>(c) * param_dlog(p, z[t]);
        }
        J(e, t) = d;
      }
    Eigen::VectorXcd delta = J.colPivHouseholderQr().solve(-F);
    if (!delta.allFinite()) throw std::runtime_error("Jacobian singular at iterate");
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h < 40; ++h) {
      std::vector<cx> znew(n);
      bool valid = true;
      for (int t = 0; t < n; ++t) {
        znew[t] = z[t] + alpha * delta(t);
        if (std::abs(znew[t]) < 1e-12 || std::abs(znew[t] - 1.0) < 1e-12 ||
            !std::isfinite(znew[t].real()) || !std::isfinite(znew[t].imag()))
          valid = false;
      }
      if (valid) {
        Eigen::VectorXcd Fnew(m);
        double snew = residual(znew, Fnew);
        if (snew < sup * (1 - 1e-4 * alpha) || snew <= eps_solve) {
          z = std::move(znew);
          F = Fnew;
          sup = snew;
          accepted = true;
          break;
        }
      }
      alpha /= 2;
    }
    if (!accepted) throw std::runtime_error("shape solve stalled (Newton step rejected)");
    converged = sup <= eps_solve;
  }
  if (!converged)
    throw std::runtime_error("gluing equations did not converge (residual " +
                             std::to_string(sup) + ")");

  GeometrySolution sol;
  sol.shapes.z = z;
  sol.residual = sup;
  double prod_res = 0;
  for (int e = 0; e < m; ++e)
    prod_res = std::max(prod_res, std::abs(eval_equation_product(sys.equations[e], z) - cx(1, 0)));
  sol.product_residual = prod_res;
  for (int t = 0; t < n; ++t) {
    double im = z[t].imag();
    if (im > eps_z)
      sol.classes.push_back(TetClass::positive);
    else if (im < -eps_z) {
      sol.classes.push_back(TetClass::negative);
      sol.negative_count++;
    } else {
      sol.classes.push_back(TetClass::flat);
      sol.flat_count++;
    }
  }
  sol.volume = 0;
  for (int t = 0; t < n; ++t)
    if (sol.classes[t] != TetClass::flat) sol.volume += tet_volume(z[t], eps_z);
  return sol;
}

// ---------------------------------------------------------------------------
// Pachner moves with shape propagation
// ---------------------------------------------------------------------------

namespace {

// Points of CP^1 in homogeneous coordinates.
struct PointH {
  cx a, b;  // point a/b
};

cx det2(const PointH& p, const PointH& q) { return p.a * q.b - q.a * p.b; }

// Shape convention: z(w0,w1,w2,w3) = ((w3-w1)(w2-w0)) / ((w2-w1)(w3-w0)).
cx cross_ratio(const PointH& w0, const PointH& w1, const PointH& w2, const PointH& w3) {
  return (det2(w3, w1) * det2(w2, w0)) / (det2(w2, w1) * det2(w3, w0));
}

// Solve for the point at index `idx` given the other three and the shape z.
PointH solve_fourth(std::array<PointH, 4> w, int idx, cx z) {
  // Rearranged cross-ratio: z * det(w2,w1) * det(w3,w0) = det(w3,w1) * det(w2,w0).
  // Each det involving idx is linear in (a, b).
  auto lin = [&](int i, int j, cx& ca, cx& cb, cx& cval, bool& has_idx) {
    // det(wi, wj) as ca*a + cb*b when one of them is idx, else constant.
    if (i == idx) {
      ca = w[j].b;
      cb = -w[j].a;
      has_idx = true;
    } else if (j == idx) {
      ca = -w[i].b;
      cb = w[i].a;
      has_idx = true;
    } else {
      cval = det2(w[i], w[j]);
      has_idx = false;
    }
  };
  // Terms: LHS = z * det(2,1) * det(3,0), RHS = det(3,1) * det(2,0).
  struct Term {
    int i, j;
  };
  Term lhs[2] = {{2, 1}, {3, 0}};
  Term rhs[2] = {{3, 1}, {2, 0}};
  cx lconst = z, la = 0, lb = 0;
  bool lfound = false;
  for (auto [i, j] : lhs) {
    cx ca, cb, cval;
    bool has;
    lin(i, j, ca, cb, cval, has);
    if (has) {
      la = ca;
      lb = cb;
      lfound = true;
    } else {
      lconst *= cval;
    }
  }
  cx rconst = 1, ra = 0, rb = 0;
  bool rfound = false;
  for (auto [i, j] : rhs) {
    cx ca, cb, cval;
    bool has;
    lin(i, j, ca, cb, cval, has);
    if (has) {
      ra = ca;
      rb = cb;
      rfound = true;
    } else {
      rconst *= cval;
    }
  }
  if (!lfound || !rfound) throw std::logic_error("solve_fourth: index not in both sides");
  // lconst*(la*a + lb*b) = rconst*(ra*a + rb*b)
  cx A = lconst * la - rconst * ra;
  cx B = lconst * lb - rconst * rb;
  // A*a = -B*b -> (a, b) = (-B, A)
  return PointH{-B, A};
}

void check_shape(cx z, double eps_z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) < eps_z ||
      std::abs(z - 1.0) < eps_z || std::abs(z) > 1.0 / eps_z)
    throw std::runtime_error("degenerate Pachner shapes");
}

}  // namespace

PachnerResult pachner23(const IdealTriangulation& tri, const ShapeAssignment& shapes, int t1,
                        int f1, double eps_z) {
  require_positive_labels(tri);
  if (t1 < 0 || t1 >= tri.size() || f1 < 0 || f1 > 3) throw std::runtime_error("bad face");
  const FaceGluing& g = tri.tets[t1].glue[f1];
  int t2 = g.tet;
  if (t2 == t1) throw std::runtime_error("pachner23: face glued to the same tetrahedron");

  // Equatorial vertices in t1 labels.
  std::array<int, 3> eq{};
  int idx = 0;
  for (int v = 0; v < 4; ++v)
    if (v != f1) eq[idx++] = v;

  // Realize the five ideal points: t1's equator at fixed generic positions.
  std::array<PointH, 4> w1;  // indexed by t1 labels
  w1[eq[0]] = {cx(0, 0), cx(1, 0)};
  w1[eq[1]] = {cx(1, 0), cx(0, 0)};
  w1[eq[2]] = {cx(1, 0), cx(1, 0)};
  w1[f1] = solve_fourth(w1, f1, shapes.z[t1]);
  std::array<PointH, 4> w2;  // indexed by t2 labels
  for (int v = 0; v < 4; ++v)
    if (v != f1) w2[g.perm[v]] = w1[v];
  w2[g.face] = solve_fourth(w2, g.face, shapes.z[t2]);

  PointH P = w1[f1], Q = w2[g.face];

  // New tetrahedra: newtet[k] = (P, Q, eq[k+1], eq[k+2]).
  IdealTriangulation out;
  int n = tri.size();
  std::vector<int> remap(n, -1);
  int keep = 0;
  for (int t = 0; t < n; ++t)
    if (t != t1 && t != t2) remap[t] = keep++;
  out.tets.assign(keep + 3, {});
  int base = keep;

  auto positions = [&](int k) {
    return std::array<PointH, 4>{P, Q, w1[eq[(k + 1) % 3]], w1[eq[(k + 2) % 3]]};
  };

  // Copy untouched gluings.
  for (int t = 0; t < n; ++t) {
    if (remap[t] < 0) continue;
    for (int f = 0; f < 4; ++f) {
      const auto& gg = tri.tets[t].glue[f];
      if (!gg.glued() || remap[gg.tet] < 0) continue;
      out.tets[remap[t]].glue[f] = {remap[gg.tet], gg.face, gg.perm};
    }
  }
  // Internal gluings between the new tets: newtet[k].face2 <-> newtet[k+1].face3.
  for (int k = 0; k < 3; ++k) {
    Perm4 p(0, 1, 3, 2);
    out.set_gluing(base + k, 2, base + (k + 1) % 3, 3, p);
  }
  // External faces: top (from t1) and bottom (from t2).
  struct Ext {
    int old_tet, old_face;  // where the face was glued before
    Perm4 old_perm;
    int new_tet, new_face;
    Perm4 m;                      // old-tet labels -> new-tet labels
    int my_old_tet, my_old_face;  // identity of this face in the old complex
  };
  std::vector<Ext> exts;
  for (int k = 0; k < 3; ++k) {
    {
      Ext e;
      const auto& og = tri.tets[t1].glue[eq[k]];
      e.old_tet = og.tet;
      e.old_face = og.face;
      e.old_perm = og.perm;
      e.new_tet = base + k;
      e.new_face = 1;
      Perm4 m;
      m.image[f1] = 0;
      m.image[eq[k]] = 1;
      m.image[eq[(k + 1) % 3]] = 2;
      m.image[eq[(k + 2) % 3]] = 3;
      e.m = m;
      e.my_old_tet = t1;
      e.my_old_face = eq[k];
      exts.push_back(e);
    }
    {
      Ext e;
      int face2 = g.perm[eq[k]];
      const auto& og = tri.tets[t2].glue[face2];
      e.old_tet = og.tet;
      e.old_face = og.face;
      e.old_perm = og.perm;
      e.new_tet = base + k;
      e.new_face = 0;
      Perm4 m;
      m.image[g.face] = 1;
      m.image[g.perm[eq[k]]] = 0;
      m.image[g.perm[eq[(k + 1) % 3]]] = 2;
      m.image[g.perm[eq[(k + 2) % 3]]] = 3;
      e.m = m;
      e.my_old_tet = t2;
      e.my_old_face = face2;
      exts.push_back(e);
    }
  }
  std::map<std::pair<int, int>, const Ext*> slot_of;
  for (const auto& e : exts) slot_of[{e.my_old_tet, e.my_old_face}] = &e;
  for (const auto& e : exts) {
    if (e.old_tet != t1 && e.old_tet != t2) {
      Perm4 nu = e.old_perm.of(e.m.inverse());
      out.set_gluing(e.new_tet, e.new_face, remap[e.old_tet], e.old_face, nu);
    } else {
      // Glued to another external face of the bipyramid.
      auto it = slot_of.find({e.old_tet, e.old_face});
      if (it == slot_of.end())
        throw std::runtime_error("pachner23: face of the bipyramid glued to the removed face");
      const Ext& o = *it->second;
      if (out.tets[e.new_tet].glue[e.new_face].glued()) continue;  // set from the mate
      Perm4 nu = o.m.of(e.old_perm.of(e.m.inverse()));
      out.set_gluing(e.new_tet, e.new_face, o.new_tet, o.new_face, nu);
    }
  }

  // Shapes: old kept, new from positions; orientation fixed afterwards.
  std::vector<bool> flipped;
  flipped = normalize_orientation(out);
  PachnerResult res;
  res.tri = out;
  res.shapes.z.assign(keep + 3, cx(0, 0));
  for (int t = 0; t < n; ++t)
    if (remap[t] >= 0) res.shapes.z[remap[t]] = flipped[remap[t]]
                                                    ? 1.0 / shapes.z[t]
                                                    : shapes.z[t];
  double vol_old = 0;
  for (int t = 0; t < n; ++t) vol_old += tet_volume(shapes.z[t], 1e-14);
  // Candidate shapes for the two orientation classes of the new tets.
  auto new_shape = [&](int k) {
    auto wps = positions(k);
    if (flipped[base + k]) std::swap(wps[2], wps[3]);
    return cross_ratio(wps[0], wps[1], wps[2], wps[3]);
  };
  double vol_keep = 0;
  for (int t = 0; t < n; ++t)
    if (remap[t] >= 0) vol_keep += tet_volume(shapes.z[t], 1e-14);
  double cand = vol_keep;
  std::array<cx, 3> zn;
  for (int k = 0; k < 3; ++k) {
    zn[k] = new_shape(k);
    check_shape(zn[k], eps_z);
    cand += tet_volume(zn[k], 1e-14);
  }
  double cand_flip = vol_keep;
  for (int k = 0; k < 3; ++k) cand_flip += tet_volume(1.0 / zn[k], 1e-14);
  if (std::abs(cand - vol_old) <= std::abs(cand_flip - vol_old)) {
    for (int k = 0; k < 3; ++k) res.shapes.z[base + k] = zn[k];
  } else {
    for (int k = 0; k < 3; ++k) res.shapes.z[base + k] = 1.0 / zn[k];
  }
  return res;
}

PachnerResult pachner32(const IdealTriangulation& tri, const ShapeAssignment& shapes,
                        int edge_class, double eps_z) {
  require_positive_labels(tri);
  auto ec = tri.edge_classes();
  if (edge_class < 0 || edge_class >= ec.count) throw std::runtime_error("bad edge class");
  if (ec.degree[edge_class] != 3)
    throw std::runtime_error("pachner32: edge class degree is not 3");

  // Walk around the edge starting from its first incidence.
  int t0 = -1, e0 = -1;
  for (int t = 0; t < tri.size() && t0 < 0; ++t)
    for (int e = 0; e < 6; ++e)
      if (ec.id[t][e] == edge_class) {
        t0 = t;
        e0 = e;
        break;
      }
  auto [x0, y0] = edge_vertices(e0);

  struct Around {
    int tet;
    int vx, vy;  // labels of the shared edge endpoints in this tet
    int enter_face;
  };
  std::vector<Around> ring;
  int ct = t0, cx_ = x0, cy = y0;
  // Cross the face that is not an endpoint of the edge: two choices; fix one
  // and walk until we return.
  int cface = -1;
  for (int f = 0; f < 4; ++f)
    if (f != cx_ && f != cy) {
      cface = f;
      break;
    }
  for (int step = 0; step < 4; ++step) {
    ring.push_back({ct, cx_, cy, cface});
    const auto& gg = tri.tets[ct].glue[cface];
    int nt = gg.tet;
    int nx = gg.perm[cx_], ny = gg.perm[cy];
    int entered = gg.face;
    // Next crossing face: the other non-edge face.
    int nf = -1;
    for (int f = 0; f < 4; ++f)
      if (f != nx && f != ny && f != entered) nf = f;
    ct = nt;
    cx_ = nx;
    cy = ny;
    cface = nf;
    if (ct == t0 && step == 2) break;
  }
  if (ring.size() != 3 || ct != t0 || cx_ != x0 || cy != y0)
    throw std::runtime_error("pachner32: edge link does not close up through 3 tetrahedra");
  std::set<int> distinct{ring[0].tet, ring[1].tet, ring[2].tet};
  if (distinct.size() != 3)
    throw std::runtime_error("pachner32: tetrahedra around the edge are not distinct");

  // Realize positions: place ring[0] and develop across the shared faces.
  std::array<PointH, 4> pos0;
  pos0[ring[0].vx] = {cx(0, 0), cx(1, 0)};
  pos0[ring[0].vy] = {cx(1, 0), cx(0, 0)};
  // Other two vertices of ring[0]:
  std::array<int, 2> others0{};
  {
    int idx = 0;
    for (int v = 0; v < 4; ++v)
      if (v != ring[0].vx && v != ring[0].vy) others0[idx++] = v;
  }
  pos0[others0[0]] = {cx(1, 0), cx(1, 0)};
  pos0[others0[1]] = solve_fourth(pos0, others0[1], shapes.z[ring[0].tet]);

  std::array<std::array<PointH, 4>, 3> pos;
  pos[0] = pos0;
  for (int i = 0; i < 2; ++i) {
    const auto& gg = tri.tets[ring[i].tet].glue[ring[i].enter_face];
    std::array<PointH, 4> np;
    for (int v = 0; v < 4; ++v)
      if (v != ring[i].enter_face) np[gg.perm[v]] = pos[i][v];
    np[gg.face] = solve_fourth(np, gg.face, shapes.z[ring[i + 1].tet]);
    pos[i + 1] = np;
  }

  PointH P = pos[0][ring[0].vx], Q = pos[0][ring[0].vy];
  // Equatorial points A, B, C with their owning tets: in ring order, tet i
  // shares its "exit" vertex with tet i+1. Collect the three distinct ones:
  // each tet contributes the vertex opposite its enter_face... we take the
  // vertex not on the edge and not the crossing face, per tet.
  std::array<PointH, 3> eqp;
  std::array<std::array<int, 3>, 3> eq_label{};  // per ring tet: labels of A,B,C (-1 if absent)
  // A_i := vertex of ring[i] at its enter_face position... define: the two
  // non-edge vertices of ring[i] are {enter_face complement}. Name globally:
  // E_i = vertex shared between ring[i] and ring[i+1].
  std::array<int, 3> shared_label{};  // label in ring[i] of E_i
  for (int i = 0; i < 3; ++i) {
    // E_i is the non-edge vertex of ring[i] other than its crossing face.
    int lbl = -1;
    for (int v = 0; v < 4; ++v)
      if (v != ring[i].vx && v != ring[i].vy && v != ring[i].enter_face) lbl = v;
    shared_label[i] = lbl;
    eqp[i] = pos[i][lbl];
  }
  // ring[i] has equatorial vertices E_{i-1} (at its enter face... ) and E_i.
  // Verify: E_i in ring[i] is shared_label[i]; E_{i-1} in ring[i] is the
  // crossing face label of ring[i].
  for (int i = 0; i < 3; ++i) {
    eq_label[i] = {-1, -1, -1};
    eq_label[i][i] = shared_label[i];
    eq_label[i][(i + 2) % 3] = ring[i].enter_face;
  }

  // New tets: top = (P, E0, E1, E2) labels (0,1,2,3); bot = (Q, E0, E1, E2).
  IdealTriangulation out;
  int n = tri.size();
  std::vector<int> remap(n, -1);
  int keep = 0;
  for (int t = 0; t < n; ++t)
    if (!distinct.count(t)) remap[t] = keep++;
  out.tets.assign(keep + 2, {});
  int top = keep, bot = keep + 1;
  for (int t = 0; t < n; ++t) {
    if (remap[t] < 0) continue;
    for (int f = 0; f < 4; ++f) {
      const auto& gg = tri.tets[t].glue[f];
      if (!gg.glued() || remap[gg.tet] < 0) continue;
      out.tets[remap[t]].glue[f] = {remap[gg.tet], gg.face, gg.perm};
    }
  }
  // Internal: top.face0 <-> bot.face0, identity on 1,2,3.
  out.set_gluing(top, 0, bot, 0, Perm4(0, 1, 2, 3));

  // External: ring[i]'s faces at vx and vy.
  struct Ext {
    int old_tet, old_face;
    Perm4 old_perm;
    int new_tet, new_face;
    Perm4 m;  // old labels -> new labels
    int my_old_tet, my_old_face;
  };
  std::vector<Ext> exts;
  for (int i = 0; i < 3; ++i) {
    // Face at vx (omitting vx): contains Q? no: face omitting vx contains
    // vy and both equatorial vertices -> belongs to bot.
    for (int side = 0; side < 2; ++side) {
      int omit = side == 0 ? ring[i].vx : ring[i].vy;
      int pole = side == 0 ? ring[i].vy : ring[i].vx;  // remaining pole label
      const auto& og = tri.tets[ring[i].tet].glue[omit];
      Ext e;
      e.old_tet = og.tet;
      e.old_face = og.face;
      e.old_perm = og.perm;
      e.new_tet = side == 0 ? bot : top;
      Perm4 m;
      m.image[pole] = 0;
      m.image[omit] = -1;  // set below to the new face index
      // equatorial labels:
      int la = shared_label[i];            // E_i -> new label i+1
      int lb = ring[i].enter_face;         // E_{i-1} -> new label ((i+2)%3)+1
      m.image[la] = i + 1;
      m.image[lb] = ((i + 2) % 3) + 1;
      // the omitted equatorial slot: new face index = missing equatorial + 1
      int missing = ((i + 1) % 3) + 1;
      m.image[omit] = missing;
      e.new_face = missing;
      e.m = m;
      e.my_old_tet = ring[i].tet;
      e.my_old_face = omit;
      exts.push_back(e);
    }
  }
  std::map<std::pair<int, int>, const Ext*> slot_of;
  for (const auto& e : exts) slot_of[{e.my_old_tet, e.my_old_face}] = &e;
  for (const auto& e : exts) {
    if (!distinct.count(e.old_tet)) {
      Perm4 nu = e.old_perm.of(e.m.inverse());
      out.set_gluing(e.new_tet, e.new_face, remap[e.old_tet], e.old_face, nu);
    } else {
      auto it = slot_of.find({e.old_tet, e.old_face});
      if (it == slot_of.end()) throw std::runtime_error("pachner32: edge ring touches itself");
      const Ext& o = *it->second;
      if (out.tets[e.new_tet].glue[e.new_face].glued()) continue;
      Perm4 nu = o.m.of(e.old_perm.of(e.m.inverse()));
      out.set_gluing(e.new_tet, e.new_face, o.new_tet, o.new_face, nu);
    }
  }

  std::vector<bool> flipped;
  flipped = normalize_orientation(out);
  PachnerResult res;
  res.tri = out;
  res.shapes.z.assign(keep + 2, cx(0, 0));
  for (int t = 0; t < n; ++t)
    if (remap[t] >= 0)
      res.shapes.z[remap[t]] = flipped[remap[t]] ? 1.0 / shapes.z[t] : shapes.z[t];
  double vol_old = 0;
  for (int t = 0; t < n; ++t) vol_old += tet_volume(shapes.z[t], 1e-14);
  double vol_keep = 0;
  for (int t = 0; t < n; ++t)
    if (remap[t] >= 0) vol_keep += tet_volume(shapes.z[t], 1e-14);

  auto tet_points = [&](int which) {
    std::array<PointH, 4> w{which == 0 ? P : Q, eqp[0], eqp[1], eqp[2]};
    if (flipped[which == 0 ? top : bot]) std::swap(w[2], w[3]);
    return w;
  };
  std::array<cx, 2> zn;
  double cand = vol_keep, cand_flip = vol_keep;
  for (int k = 0; k < 2; ++k) {
    auto w = tet_points(k);
    zn[k] = cross_ratio(w[0], w[1], w[2], w[3]);
    check_shape(zn[k], eps_z);
    cand += tet_volume(zn[k], 1e-14);
    cand_flip += tet_volume(1.0 / zn[k], 1e-14);
  }
  if (std::abs(cand - vol_old) <= std::abs(cand_flip - vol_old)) {
    res.shapes.z[top] = zn[0];
    res.shapes.z[bot] = zn[1];
  } else {
    res.shapes.z[top] = 1.0 / zn[0];
    res.shapes.z[bot] = 1.0 / zn[1];
  }
  return res;
}

// ---------------------------------------------------------------------------
// Evidence pipeline and surgery scan
// ---------------------------------------------------------------------------

EvidenceReport nongeometric_evidence(const IdealTriangulation& tri, int depth_limit,
                                     double eps_z) {
  EvidenceReport rep;
  GluingSystem sys = gluing_system(tri);
  rep.solution = solve_shapes(sys);
  rep.nongeometric_solution = rep.solution.negative_count > 0;
  rep.inconclusive_flat = rep.solution.flat_count > 0;
  if (!rep.nongeometric_solution && !rep.inconclusive_flat) {
    rep.witness_found = true;
    rep.witness_volume = rep.solution.volume;
    rep.summary = "geometric; no chain needed";
    return rep;
  }
  if (rep.inconclusive_flat) {
    rep.summary = "inconclusive (flat tetrahedra)";
    return rep;
  }

  // Best-first search over Pachner moves, preferring larger minimum Im z.
  struct State {
    IdealTriangulation tri;
    ShapeAssignment shapes;
    std::vector<std::string> path;
    double min_im;
  };
  auto min_im = [](const ShapeAssignment& s) {
    double m = 1e300;
    for (cx z : s.z) m = std::min(m, z.imag());
    return m;
  };
  auto cmp = [](const State& a, const State& b) { return a.min_im < b.min_im; };
  std::priority_queue<State, std::vector<State>, decltype(cmp)> pq(cmp);
  pq.push({tri, rep.solution.shapes, {}, min_im(rep.solution.shapes)});
  int expansions = 0;
  const int max_expansions = 400;
  while (!pq.empty() && expansions < max_expansions) {
    State st = pq.top();
    pq.pop();
    if (st.min_im > eps_z) {
      rep.witness_found = true;
      rep.move_path = st.path;
      rep.witness_volume = volume(st.shapes, eps_z);
      std::ostringstream os;
      os << "non-geometric solution; volume matches a geometric witness after a 2-3/3-2 chain of "
         << st.path.size() << " moves";
      rep.summary = os.str();
      return rep;
    }
    if (static_cast<int>(st.path.size()) >= depth_limit) continue;
    ++expansions;
    for (int t = 0; t < st.tri.size(); ++t)
      for (int f = 0; f < 4; ++f) {
        if (st.tri.tets[t].glue[f].tet == t) continue;
        if (st.tri.tets[t].glue[f].tet < t) continue;  // each face once
        try {
          PachnerResult nxt = pachner23(st.tri, st.shapes, t, f, eps_z);
          std::ostringstream mv;
          mv << "2-3 tet " << t << " face " << f;
          auto path = st.path;
          path.push_back(mv.str());
          pq.push({nxt.tri, nxt.shapes, path, min_im(nxt.shapes)});
        } catch (const std::exception&) {
        }
      }
    auto ecs = st.tri.edge_classes();
    for (int e = 0; e < ecs.count; ++e) {
      if (ecs.degree[e] != 3) continue;
      try {
        PachnerResult nxt = pachner32(st.tri, st.shapes, e, eps_z);
        std::ostringstream mv;
        mv << "3-2 edge " << e;
        auto path = st.path;
        path.push_back(mv.str());
        pq.push({nxt.tri, nxt.shapes, path, min_im(nxt.shapes)});
      } catch (const std::exception&) {
      }
    }
  }
  rep.summary = "non-geometric solution; no all-positive witness found within the move budget";
  return rep;
}

std::vector<ScanPoint> surgery_scan(const IdealTriangulation& tri, int cusp, long p_min,
                                    long p_max, long q_min, long q_max) {
  std::vector<ScanPoint> grid;
  GluingSystem complete = gluing_system(tri);
  GeometrySolution base;
  bool have_base = false;
  try {
    base = solve_shapes(complete);
    have_base = true;
  } catch (const std::exception&) {
  }
  for (long p = p_min; p <= p_max; ++p)
    for (long q = q_min; q <= q_max; ++q) {
      if (p == 0 && q == 0) continue;
      if (std::gcd(std::labs(p), std::labs(q)) != 1) continue;
      ScanPoint pt;
      pt.p = p;
      pt.q = q;
      try {
        std::vector<Filling> fill(complete.num_cusps);
        fill[cusp] = {true, p, q};
        GluingSystem sys = gluing_system(tri, fill);
        ShapeAssignment seed;
        if (have_base) seed = base.shapes;
        GeometrySolution sol = solve_shapes(sys, seed);
        pt.volume = sol.volume;
        double mi = 1e300;
        for (cx z : sol.shapes.z) mi = std::min(mi, z.imag());
        pt.min_im = mi;
        if (sol.negative_count > 0)
          pt.status = "negative-present";
        else if (sol.flat_count > 0)
          pt.status = "flat";
        else
          pt.status = "positive";
      } catch (const std::exception&) {
        pt.status = "failed";
      }
      grid.push_back(pt);
    }
  return grid;
}

std::string scan_csv(const std::vector<ScanPoint>& grid) {
  std::ostringstream os;
  os << "p,q,status,volume,min_im\n";
  os.precision(10);
  for (const auto& pt : grid)
    os << pt.p << "," << pt.q << "," << pt.status << "," << pt.volume << "," << pt.min_im << "\n";
  return os.str();
}

}  // namespace veer
