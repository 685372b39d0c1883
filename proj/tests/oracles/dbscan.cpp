#include "oracles/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

namespace {

bool reach(const std::vector<double>& u, const std::vector<double>& v, double eps, double cos_threshold) {
  double d2 = 0.0, dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    d2 += (u[k] - v[k]) * (u[k] - v[k]);
    dot += u[k] * v[k];
    uu += u[k] * u[k];
    vv += v[k] * v[k];
  }
  if (uu == 0.0 || vv == 0.0) return false;
  const double cosine = std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
  return std::sqrt(d2) <= eps && cosine >= cos_threshold;
}

int find(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace

Labeling brute_force_dbscan(const std::vector<std::vector<double>>& vectors, int min_pts, double eps,
                            double cos_threshold) {
  const int n = static_cast<int>(vectors.size());
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) adj[i][j] = i == j || reach(vectors[i], vectors[j], eps, cos_threshold);
  }
  Labeling out;
  out.core.resize(n);
  for (int i = 0; i < n; ++i) {
    out.core[i] = n >= min_pts && std::count(adj[i].begin(), adj[i].end(), true) >= min_pts;
  }
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (out.core[i] && out.core[j] && adj[i][j]) parent[find(parent, i)] = find(parent, j);

  std::vector<int> component_id(n, -1);  // by root
  out.labels.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (!out.core[i]) continue;
    const int root = find(parent, i);
    if (component_id[root] < 0) component_id[root] = out.n_clusters++;
    out.labels[i] = component_id[root];
  }
  for (int i = 0; i < n; ++i) {
    if (out.core[i]) continue;
    int best = -1;
    for (int j = 0; j < n; ++j) {
      if (out.core[j] && adj[i][j] && (best < 0 || out.labels[j] < best)) best = out.labels[j];
    }
    out.labels[i] = best;
  }
  return out;
}

}  // namespace oracle
