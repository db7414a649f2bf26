#include "veer/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace veer {

TransitionMatrix transition_matrix(const MeasuredTrainTrack& track, const GraphMap& map) {
  TransitionMatrix out;
  out.branch_ids = track.live_branch_ids();
  std::vector<int> col(track.branches.size(), -1);
  for (size_t i = 0; i < out.branch_ids.size(); ++i) col[out.branch_ids[i]] = static_cast<int>(i);
  int n = out.size();
  out.m.assign(n, std::vector<long>(n, 0));
  for (int i = 0; i < n; ++i) {
    if (static_cast<size_t>(out.branch_ids[i]) >= map.images.size())
      throw std::runtime_error("graph map not defined on every branch");
    for (DirB d : map.images[out.branch_ids[i]]) out.m[i][col[d.branch()]]++;
  }
  return out;
}

bool is_primitive(const TransitionMatrix& mat) {
  int n = mat.size();
  if (n == 0) return false;
  // Boolean matrix powers; strictly positive power must appear by k = n^2.
  std::vector<std::vector<bool>> p(n, std::vector<bool>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p[i][j] = mat.m[i][j] > 0;
  auto all_positive = [&](const std::vector<std::vector<bool>>& q) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (!q[i][j]) return false;
    return true;
  };
  std::vector<std::vector<bool>> base = p;
  for (int k = 1; k <= n * n; ++k) {
    if (all_positive(p)) return true;
    std::vector<std::vector<bool>> q(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l)
        if (p[i][l])
          for (int j = 0; j < n; ++j)
            if (base[l][j]) q[i][j] = true;
    p = std::move(q);
  }
  return false;
}

PerronData perron(const TransitionMatrix& mat, double eps, int max_iter) {
  int n = mat.size();
  if (n == 0) throw std::runtime_error("empty transition matrix");
  if (!is_primitive(mat)) throw std::runtime_error("transition matrix is not primitive");

  std::vector<double> v(n, 1.0), mv(n);
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int j = 0; j < n; ++j) s += static_cast<double>(mat.m[i][j]) * x[j];
      y[i] = s;
    }
  };
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    apply(v, mv);
    double mx = *std::max_element(mv.begin(), mv.end());
    if (mx <= 0) throw std::runtime_error("transition matrix has a zero row block");
    for (int i = 0; i < n; ++i) mv[i] /= mx;
    double diff = 0;
    for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(mv[i] - v[i]));
    v.swap(mv);
    lambda = mx;
    if (diff < eps * 0.01) break;
    if (it + 1 == max_iter) {
      // Residual check below decides whether this is fatal.
    }
  }
  // One Rayleigh refinement.
  apply(v, mv);
  double num = 0, den = 0;
  for (int i = 0; i < n; ++i) {
    num += v[i] * mv[i];
    den += v[i] * v[i];
  }
  lambda = num / den;

  PerronData out;
  out.lambda = lambda;
  double mx = *std::max_element(v.begin(), v.end());
  for (auto& x : v) x /= mx;
  out.weights = v;
  apply(out.weights, mv);
  double res = 0;
  for (int i = 0; i < n; ++i) res = std::max(res, std::abs(mv[i] - lambda * out.weights[i]));
  out.residual = res;
  if (res > std::max(eps, 1e-12) * std::max(1.0, lambda) * 100)
    throw std::runtime_error("power iteration did not converge");
  for (double w : out.weights)
    if (!(w > 0)) throw std::runtime_error("Perron vector has a nonpositive entry");
  if (lambda <= 1 + eps) throw std::runtime_error("not pseudo-Anosov scale (lambda <= 1)");
  return out;
}

}  // namespace veer
