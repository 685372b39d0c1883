#include "hydrocast/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hydrocast {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

double safe_eval(const Objective& f, std::span<const double> x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

SimplexResult nelder_mead(const Objective& f, std::vector<double> start, const SimplexOptions& options) {
  const std::size_t n = start.size();
  SimplexResult result;
  if (n == 0) {
    result.value = safe_eval(f, start);
    result.converged = true;
    return result;
  }

  std::vector<std::vector<double>> vertex(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) vertex[i + 1][i] += options.initial_step;
  std::vector<double> value(n + 1);
  for (std::size_t i = 0; i <= n; ++i) value[i] = safe_eval(f, vertex[i]);

  std::vector<std::size_t> rank(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto along = [&](double coef, const std::vector<double>& from, std::vector<double>& out) {
    for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + coef * (from[k] - centroid[k]);
  };

  int iter = 0;
  for (;; ++iter) {
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    // Stable ordering keeps ties deterministic.
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    const std::size_t best = rank.front();
    const std::size_t worst = rank.back();
    const std::size_t second = rank[n - 1];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        diameter = std::max(diameter, std::abs(vertex[i][k] - vertex[best][k]));
      }
    }
    if (diameter < options.tolerance) {
      result.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += vertex[i][k];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    along(-kReflect, vertex[worst], trial);
    const double reflected = safe_eval(f, trial);
    if (reflected < value[best]) {
      along(-kReflect * kExpand, vertex[worst], trial2);
      const double expanded = safe_eval(f, trial2);
      if (expanded < reflected) {
        vertex[worst] = trial2;
        value[worst] = expanded;
      } else {
        vertex[worst] = trial;
        value[worst] = reflected;
      }
      continue;
    }
    if (reflected < value[second]) {
      vertex[worst] = trial;
      value[worst] = reflected;
      continue;
    }
    if (reflected < value[worst]) {
      along(-kReflect * kContract, vertex[worst], trial2);  // outside contraction
      const double contracted = safe_eval(f, trial2);
      if (contracted <= reflected) {
        vertex[worst] = trial2;
        value[worst] = contracted;
        continue;
      }
    } else {
      along(kContract, vertex[worst], trial2);  // inside contraction
      const double contracted = safe_eval(f, trial2);
      if (contracted < value[worst]) {
        vertex[worst] = trial2;
        value[worst] = contracted;
        continue;
      }
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < n; ++k) {
        vertex[i][k] = vertex[best][k] + kShrink * (vertex[i][k] - vertex[best][k]);
      }
      value[i] = safe_eval(f, vertex[i]);
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(value.begin(), value.end()) - value.begin());
  result.x = vertex[best];
  result.value = value[best];
  result.iterations = iter;
  return result;
}

}  // namespace hydrocast
