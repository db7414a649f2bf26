#include "veer/triangulation.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "veer/errors.hpp"

namespace veer {

namespace {
constexpr int kEdgeV[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

ParseError ParseErrorAt(int line, const std::string& msg) { return ParseError(line, 0, msg); }
}  // namespace

int edge_index(int v, int w) {
  if (v > w) std::swap(v, w);
  for (int e = 0; e < 6; ++e)
    if (kEdgeV[e][0] == v && kEdgeV[e][1] == w) return e;
  throw std::logic_error("bad edge vertices");
}

std::array<int, 2> edge_vertices(int e) { return {kEdgeV[e][0], kEdgeV[e][1]}; }

void IdealTriangulation::set_gluing(int t0, int f0, int t1, int f1, const Perm4& p) {
  if (p[f0] != f1) throw std::logic_error("gluing permutation must carry face to face");
  tets[t0].glue[f0] = {t1, f1, p};
  tets[t1].glue[f1] = {t0, f0, p.inverse()};
}

bool IdealTriangulation::fully_glued() const {
  for (const auto& t : tets)
    for (const auto& g : t.glue)
      if (!g.glued()) return false;
  return true;
}

bool IdealTriangulation::gluing_involutive() const {
  for (int t = 0; t < size(); ++t)
    for (int f = 0; f < 4; ++f) {
      const auto& g = tets[t].glue[f];
      if (!g.glued()) continue;
      if (g.tet >= size() || g.face < 0 || g.face > 3) return false;
      const auto& back = tets[g.tet].glue[g.face];
      if (back.tet != t || back.face != f || !(back.perm == g.perm.inverse())) return false;
      if (g.perm[f] != g.face) return false;
    }
  return true;
}

namespace {
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};
}  // namespace

IdealTriangulation::EdgeClasses IdealTriangulation::edge_classes() const {
  int n = size();
  UnionFind uf(n * 6);
  for (int t = 0; t < n; ++t)
    for (int f = 0; f < 4; ++f) {
      const auto& g = tets[t].glue[f];
      if (!g.glued()) continue;
      for (int e = 0; e < 6; ++e) {
        auto [v, w] = edge_vertices(e);
        if (v == f || w == f) continue;  // edge not on this face
        int e2 = edge_index(g.perm[v], g.perm[w]);
        uf.unite(t * 6 + e, g.tet * 6 + e2);
      }
    }
  EdgeClasses out;
  out.id.assign(n, {});
  std::map<int, int> root_to_id;
  for (int t = 0; t < n; ++t)
    for (int e = 0; e < 6; ++e) {
      int r = uf.find(t * 6 + e);
      auto it = root_to_id.find(r);
      if (it == root_to_id.end()) it = root_to_id.emplace(r, out.count++).first;
      out.id[t][e] = it->second;
    }
  out.degree.assign(out.count, 0);
  for (int t = 0; t < n; ++t)
    for (int e = 0; e < 6; ++e) out.degree[out.id[t][e]]++;
  return out;
}

IdealTriangulation::CuspClasses IdealTriangulation::cusp_classes() const {
  int n = size();
  UnionFind uf(n * 4);
  for (int t = 0; t < n; ++t)
    for (int f = 0; f < 4; ++f) {
      const auto& g = tets[t].glue[f];
      if (!g.glued()) continue;
      for (int v = 0; v < 4; ++v) {
        if (v == f) continue;
        uf.unite(t * 4 + v, g.tet * 4 + g.perm[v]);
      }
    }
  CuspClasses out;
  out.id.assign(n, {});
  std::map<int, int> root_to_id;
  for (int t = 0; t < n; ++t)
    for (int v = 0; v < 4; ++v) {
      int r = uf.find(t * 4 + v);
      auto it = root_to_id.find(r);
      if (it == root_to_id.end()) it = root_to_id.emplace(r, out.count++).first;
      out.id[t][v] = it->second;
    }
  return out;
}

std::optional<std::vector<int>> IdealTriangulation::orientation_signs() const {
  int n = size();
  std::vector<int> sign(n, 0);
  for (int start = 0; start < n; ++start) {
    if (sign[start] != 0) continue;
    sign[start] = 1;
    std::vector<int> stack{start};
    while (!stack.empty()) {
      int t = stack.back();
      stack.pop_back();
      for (int f = 0; f < 4; ++f) {
        const auto& g = tets[t].glue[f];
        if (!g.glued()) continue;
        int s = sign[t] * (g.perm.is_odd() ? 1 : -1);
        if (sign[g.tet] == 0) {
          sign[g.tet] = s;
          stack.push_back(g.tet);
        } else if (sign[g.tet] != s) {
          return std::nullopt;
        }
      }
    }
  }
  return sign;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

IdealTriangulation parse_triangulation(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  IdealTriangulation tri;
  enum Section { kGluings, kAngles, kColours } sec = kGluings;
  int n = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::vector<std::string> toks;
    while (ls >> word) toks.push_back(word);
    if (toks.empty()) continue;
    if (toks[0] == "tets") {
      if (toks.size() != 2) throw ParseErrorAt(lineno, "expected 'tets N'");
      n = std::stoi(toks[1]);
      if (n < 1) throw ParseErrorAt(lineno, "N must be >= 1");
      tri.tets.assign(n, {});
      continue;
    }
    if (toks[0] == "[angles]") {
      sec = kAngles;
      if (n < 1) throw ParseErrorAt(lineno, "[angles] before tets");
      tri.pi_pair.assign(n, -1);
      continue;
    }
    if (toks[0] == "[colours]") {
      sec = kColours;
      continue;
    }
    if (sec == kGluings) {
      // tet T face K -> tet T' face K' perm ABCD
      if (n < 1) throw ParseErrorAt(lineno, "gluing before 'tets N'");
      if (toks.size() != 11 || toks[0] != "tet" || toks[2] != "face" || toks[4] != "->" ||
          toks[5] != "tet" || toks[7] != "face" || toks[9] != "perm")
        throw ParseErrorAt(lineno, "expected 'tet T face K -> tet T' face K' perm PPPP'");
      int t0 = std::stoi(toks[1]), f0 = std::stoi(toks[3]);
      int t1 = std::stoi(toks[6]), f1 = std::stoi(toks[8]);
      const std::string& p = toks[10];
      if (p.size() != 4) throw ParseErrorAt(lineno, "perm must have 4 digits");
      Perm4 perm(p[0] - '0', p[1] - '0', p[2] - '0', p[3] - '0');
      {
        std::array<bool, 4> seen{};
        for (int i = 0; i < 4; ++i) {
          int v = perm[i];
          if (v < 0 || v > 3 || seen[v]) throw ParseErrorAt(lineno, "not a permutation");
          seen[v] = true;
        }
      }
      if (t0 < 0 || t0 >= n || t1 < 0 || t1 >= n || f0 < 0 || f0 > 3 || f1 < 0 || f1 > 3)
        throw ParseErrorAt(lineno, "tet/face index out of range");
      if (perm[f0] != f1) throw ParseErrorAt(lineno, "perm does not carry face to face");
      tri.tets[t0].glue[f0] = {t1, f1, perm};
    } else if (sec == kAngles) {
      if (toks.size() != 2 || toks[0].back() != ':')
        throw ParseErrorAt(lineno, "expected '<tet>: <pair>'");
      int t = std::stoi(toks[0].substr(0, toks[0].size() - 1));
      int p = std::stoi(toks[1]);
      if (t < 0 || t >= n || p < 0 || p > 2) throw ParseErrorAt(lineno, "bad angle entry");
      tri.pi_pair[t] = p;
    } else {
      if (toks.size() != 2 || toks[0].back() != ':')
        throw ParseErrorAt(lineno, "expected '<edge-class>: R|B'");
      int e = std::stoi(toks[0].substr(0, toks[0].size() - 1));
      if (tri.colours.empty()) {
        auto ec = tri.edge_classes();
        tri.colours.assign(ec.count, EdgeColour::none);
      }
      if (e < 0 || e >= static_cast<int>(tri.colours.size()))
        throw ParseErrorAt(lineno, "edge class out of range");
      if (toks[1] == "R")
        tri.colours[e] = EdgeColour::red;
      else if (toks[1] == "B")
        tri.colours[e] = EdgeColour::blue;
      else
        throw ParseErrorAt(lineno, "colour must be R or B");
    }
  }
  if (n < 1) throw std::runtime_error("triangulation file has no 'tets N' header");
  if (!tri.gluing_involutive())
    throw std::runtime_error("gluing table is not involutive");
  if (!tri.fully_glued()) throw std::runtime_error("triangulation has unglued faces");
  return tri;
}

std::string write_triangulation(const IdealTriangulation& tri) {
  std::ostringstream os;
  os << "tets " << tri.size() << "\n";
  for (int t = 0; t < tri.size(); ++t)
    for (int f = 0; f < 4; ++f) {
      const auto& g = tri.tets[t].glue[f];
      if (!g.glued()) continue;
      os << "tet " << t << " face " << f << " -> tet " << g.tet << " face " << g.face << " perm "
         << g.perm[0] << g.perm[1] << g.perm[2] << g.perm[3] << "\n";
    }
  if (tri.has_angles()) {
    os << "[angles]\n";
    for (int t = 0; t < tri.size(); ++t) os << t << ": " << tri.pi_pair[t] << "\n";
  }
  if (tri.has_colours()) {
    os << "[colours]\n";
    for (size_t e = 0; e < tri.colours.size(); ++e) {
      if (tri.colours[e] == EdgeColour::none) continue;
      os << e << ": " << (tri.colours[e] == EdgeColour::red ? "R" : "B") << "\n";
    }
  }
  return os.str();
}

std::vector<bool> normalize_orientation(IdealTriangulation& tri) {
  auto signs = tri.orientation_signs();
  if (!signs) throw std::runtime_error("non-orientable gluing data");
  int n = tri.size();
  std::vector<bool> flipped(n, false);
  for (int t = 0; t < n; ++t) flipped[t] = (*signs)[t] < 0;
  Perm4 swap23(0, 1, 3, 2);
  IdealTriangulation out = tri;
  for (int t = 0; t < n; ++t)
    for (int f = 0; f < 4; ++f) out.tets[t].glue[f] = FaceGluing{};
  for (int t = 0; t < n; ++t)
    for (int f = 0; f < 4; ++f) {
      const auto& g = tri.tets[t].glue[f];
      if (!g.glued()) continue;
      Perm4 p = g.perm;
      int f2 = f;
      if (flipped[t]) {
        p = p.of(swap23);
        f2 = swap23[f];
      }
      int target_face = g.face;
      if (flipped[g.tet]) {
        p = swap23.of(p);
        target_face = swap23[g.face];
      }
      out.tets[t].glue[f2] = {g.tet, target_face, p};
    }
  if (!tri.pi_pair.empty()) {
    out.pi_pair = tri.pi_pair;
    for (int t = 0; t < n; ++t)
      if (flipped[t] && out.pi_pair[t] >= 1) out.pi_pair[t] = 3 - out.pi_pair[t];
  }
  tri = std::move(out);
  return flipped;
}

bool isomorphic_up_to_relabeling(const IdealTriangulation& a, const IdealTriangulation& b) {
  if (a.size() != b.size()) return false;
  int n = a.size();
  // Try anchoring tet 0 of a to each tet of b; propagate the tet bijection
  // through gluings (vertex labels must match exactly).
  for (int pivot = 0; pivot < n; ++pivot) {
    std::vector<int> to_b(n, -1), to_a(n, -1);
    to_b[0] = pivot;
    to_a[pivot] = 0;
    std::vector<int> stack{0};
    bool ok = true;
    while (ok && !stack.empty()) {
      int t = stack.back();
      stack.pop_back();
      for (int f = 0; f < 4 && ok; ++f) {
        const auto& ga = a.tets[t].glue[f];
        const auto& gb = b.tets[to_b[t]].glue[f];
        if (ga.glued() != gb.glued()) {
          ok = false;
          break;
        }
        if (!ga.glued()) continue;
        if (!(ga.perm == gb.perm) || ga.face != gb.face) {
          ok = false;
          break;
        }
        if (to_b[ga.tet] == -1) {
          if (to_a[gb.tet] != -1) {
            ok = false;
            break;
          }
          to_b[ga.tet] = gb.tet;
          to_a[gb.tet] = ga.tet;
          stack.push_back(ga.tet);
        } else if (to_b[ga.tet] != gb.tet) {
          ok = false;
        }
      }
    }
    if (!ok) continue;
    for (int t = 0; t < n; ++t)
      if (to_b[t] == -1) ok = false;  // disconnected: require full match
    if (!ok) continue;
    if (a.has_angles() && b.has_angles()) {
      for (int t = 0; t < n; ++t)
        if (a.pi_pair[t] != b.pi_pair[to_b[t]]) ok = false;
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace veer
