#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hydrocast {

struct SimplexOptions {
  double initial_step = 0.1;
  int max_iterations = 500;
  double tolerance = 1e-6;  // simplex diameter (max-norm from the best vertex)
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Derivative-free Nelder-Mead minimisation with reflection, expansion,
/// contraction and shrink. Non-finite objective values rank as worst.
SimplexResult nelder_mead(const Objective& f, std::vector<double> start, const SimplexOptions& options = {});

}  // namespace hydrocast
