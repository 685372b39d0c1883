#pragma once

// Reference labeling: build the full neighborhood graph, take connected
// components of core points (numbered by their smallest member index), and
// attach each border point to the smallest-numbered adjacent component.

#include <vector>

namespace oracle {

struct Labeling {
  std::vector<int> labels;  // -1 = noise
  std::vector<bool> core;
  int n_clusters = 0;
};

Labeling brute_force_dbscan(const std::vector<std::vector<double>>& vectors, int min_pts, double eps,
                            double cos_threshold);

}  // namespace oracle
