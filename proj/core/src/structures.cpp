#include "veer/structures.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace veer {

bool check_taut_angle(const IdealTriangulation& tri, const std::vector<int>& pi_pair) {
  if (static_cast<int>(pi_pair.size()) != tri.size()) return false;
  auto ec = tri.edge_classes();
  std::vector<int> pis(ec.count, 0);
  for (int t = 0; t < tri.size(); ++t) {
    if (pi_pair[t] < 0 || pi_pair[t] > 2) return false;
    for (int e = 0; e < 6; ++e)
      if (edge_pair(e) == pi_pair[t]) pis[ec.id[t][e]]++;
  }
  for (int c = 0; c < ec.count; ++c)
    if (pis[c] != 2) return false;
  return true;
}

std::optional<std::vector<std::array<bool, 4>>> promote_taut(const IdealTriangulation& tri,
                                                             const std::vector<int>& pi_pair) {
  int n = tri.size();
  // Faces split into two groups per tet: for pi pair p with edge {v1,v2}
  // (and opposite {v3,v4}), faces v1,v2 share one coorientation and v3,v4
  // the other. alpha[t] in {0,1} picks which way; propagate through gluings
  // with the constraint out(face) != out(glued face).
  auto group = [&](int t, int f) {
    auto [v1, v2] = edge_vertices(pi_pair[t]);
    return (f == v1 || f == v2) ? 0 : 1;
  };
  std::vector<int> alpha(n, -1);
  for (int start = 0; start < n; ++start) {
    if (alpha[start] >= 0) continue;
    alpha[start] = 0;
    std::deque<int> queue{start};
    while (!queue.empty()) {
      int t = queue.front();
      queue.pop_front();
      for (int f = 0; f < 4; ++f) {
        const auto& g = tri.tets[t].glue[f];
        if (!g.glued()) return std::nullopt;
        bool out_here = group(t, f) == alpha[t];
        // The other side must point inwards exactly when we point out.
        int want = group(g.tet, g.face) == 0 ? (out_here ? 1 : 0) : (out_here ? 0 : 1);
        // alpha[g.tet] such that out(g.tet, g.face) == !out_here:
        // out(g.tet,g.face) = (group==alpha); want group(g.tet,g.face)==alpha
        // iff !out_here.
        int need = (group(g.tet, g.face) == 0) == (!out_here) ? 0 : 1;
        (void)want;
        if (alpha[g.tet] < 0) {
          alpha[g.tet] = need;
          queue.push_back(g.tet);
        } else if (alpha[g.tet] != need) {
          return std::nullopt;
        }
      }
    }
  }
  std::vector<std::array<bool, 4>> out(n);
  for (int t = 0; t < n; ++t)
    for (int f = 0; f < 4; ++f) out[t][f] = group(t, f) == alpha[t];
  return out;
}

EdgeColour forced_colour(int pi, int zero_pair, int sign) {
  int next = (pi + 1) % 3;
  int next2 = (pi + 2) % 3;
  if (sign > 0) return zero_pair == next ? EdgeColour::blue : EdgeColour::red;
  return zero_pair == next2 ? EdgeColour::blue : EdgeColour::red;
  (void)next2;
}

std::vector<VeeringStructure> find_veering(const IdealTriangulation& tri) {
  int n = tri.size();
  auto signs_opt = tri.orientation_signs();
  if (!signs_opt) throw std::runtime_error("find_veering: non-orientable gluing data");
  const auto& signs = *signs_opt;
  auto ec = tri.edge_classes();

  // Breadth-first adjacency order so conflicts surface early.
  std::vector<int> order;
  {
    std::vector<bool> seen(n, false);
    for (int start = 0; start < n; ++start) {
      if (seen[start]) continue;
      std::deque<int> q{start};
      seen[start] = true;
      while (!q.empty()) {
        int t = q.front();
        q.pop_front();
        order.push_back(t);
        for (int f = 0; f < 4; ++f) {
          int u = tri.tets[t].glue[f].tet;
          if (u >= 0 && !seen[u]) {
            seen[u] = true;
            q.push_back(u);
          }
        }
      }
    }
  }

  std::vector<int> pi_assign(n, -1);
  std::vector<EdgeColour> colour(ec.count, EdgeColour::none);
  std::vector<int> pi_count(ec.count, 0), seen_count(ec.count, 0);
  std::vector<VeeringStructure> results;

  struct Undo {
    std::vector<int> coloured;  // classes whose colour this level set
  };

  // Iterative DFS over taut choices 0..2 per tet in `order`.
  std::vector<int> choice(n, -1);
  std::vector<Undo> undos(n);
  int depth = 0;

  auto try_assign = [&](int t, int p, Undo& undo) -> bool {
    pi_assign[t] = p;
    for (int e = 0; e < 6; ++e) {
      int cls = ec.id[t][e];
      seen_count[cls]++;
      if (edge_pair(e) == p) {
        pi_count[cls]++;
        if (pi_count[cls] > 2) return false;
      } else {
        EdgeColour c = forced_colour(p, edge_pair(e), signs[t]);
        if (colour[cls] == EdgeColour::none) {
          colour[cls] = c;
          undo.coloured.push_back(cls);
        } else if (colour[cls] != c) {
          return false;
        }
      }
      if (seen_count[cls] == ec.degree[cls] && pi_count[cls] != 2) return false;
    }
    return true;
  };
  auto unassign = [&](int t, Undo& undo) {
    for (int e = 0; e < 6; ++e) {
      int cls = ec.id[t][e];
      seen_count[cls]--;
      if (edge_pair(e) == pi_assign[t]) pi_count[cls]--;
    }
    for (int cls : undo.coloured) colour[cls] = EdgeColour::none;
    undo.coloured.clear();
    pi_assign[t] = -1;
  };

  while (depth >= 0) {
    if (depth == n) {
      VeeringStructure vs;
      vs.pi_pair = pi_assign;
      vs.colours = colour;
      results.push_back(std::move(vs));
      --depth;
      if (depth >= 0) unassign(order[depth], undos[depth]);
      continue;
    }
    int t = order[depth];
    int next_choice = choice[depth] + 1;
    if (next_choice > 2) {
      choice[depth] = -1;
      --depth;
      if (depth >= 0) unassign(order[depth], undos[depth]);
      continue;
    }
    choice[depth] = next_choice;
    undos[depth].coloured.clear();
    if (try_assign(t, next_choice, undos[depth])) {
      ++depth;
    } else {
      unassign(t, undos[depth]);
    }
  }

  std::sort(results.begin(), results.end(),
            [](const VeeringStructure& a, const VeeringStructure& b) { return a.pi_pair < b.pi_pair; });
  return results;
}

}  // namespace veer
