#include "hydrocast/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>

#include "format.hpp"
#include "hydrocast/parallel.hpp"

namespace hydrocast {

namespace {

void check_pair(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(Errc::LengthMismatch,
                "vectors of length " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  if (u.empty()) throw Error(Errc::EmptyInput, "proximity of empty vectors");
}

bool is_zero(std::span<const double> u) {
  return std::all_of(u.begin(), u.end(), [](double x) { return x == 0.0; });
}

}  // namespace

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  check_pair(u, v);
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw Error(Errc::ZeroVector, "cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  check_pair(u, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

void ClusterParams::validate() const {
  if (min_pts < 1) throw Error(Errc::InvalidConfig, "min_pts must be at least 1");
  if (!(eps >= 0.0)) throw Error(Errc::InvalidConfig, "eps must be non-negative");
  if (!(cos_threshold >= -1.0 && cos_threshold <= 1.0)) {
    throw Error(Errc::InvalidConfig, "cos_threshold must be in [-1, 1]");
  }
}

ClusterParams preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p.params;
  }
  throw Error(Errc::ConfigError, "unknown cluster preset '" + std::string(name) + "'");
}

std::size_t Clustering::n_noise() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](const auto& kv) { return kv.second == kNoise; }));
}

ClusterWindow clustering_window(const AlignedGroup& group, double train_ratio) {
  const auto span = common_span(group);
  const auto length = static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(span.count) + 1e-9));
  return {span.first, length};
}

std::vector<std::vector<double>> window_vectors(const AlignedGroup& group, const ClusterWindow& window) {
  std::vector<std::vector<double>> out;
  out.reserve(group.members.size());
  for (const auto& member : group.members) {
    std::vector<double> v;
    if (window.length > 0) {
      const auto start = index_of(member, window.first);
      if (start == static_cast<std::size_t>(-1) || start + window.length > member.size()) {
        throw Error(Errc::ShapeMismatch, "series '" + member.id() + "' does not cover the clustering window");
      }
      const auto& obs = member.observations();
      v.reserve(window.length);
      for (std::size_t k = 0; k < window.length; ++k) v.push_back(obs[start + k].value);
    }
    out.push_back(std::move(v));
  }
  return out;
}

bool within_reach(std::span<const double> u, std::span<const double> v, const ClusterParams& params) {
  if (euclidean_distance(u, v) > params.eps) return false;
  if (is_zero(u) || is_zero(v)) return false;
  return cosine_similarity(u, v) >= params.cos_threshold;
}

std::vector<std::size_t> neighbors(const AlignedGroup& group, std::size_t idx, const ClusterParams& params,
                                   const ClusterWindow& window) {
  if (idx >= group.members.size()) throw Error(Errc::ShapeMismatch, "member index out of range");
  if (window.length == 0) return {idx};
  const auto vectors = window_vectors(group, window);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (j == idx || within_reach(vectors[idx], vectors[j], params)) out.push_back(j);
  }
  return out;
}

IndexClustering dbscan_vectors(const std::vector<std::vector<double>>& vectors, const ClusterParams& params) {
  params.validate();
  const std::size_t n = vectors.size();
  IndexClustering result;
  result.labels.assign(n, kNoise);
  result.core.assign(n, false);
  if (n < static_cast<std::size_t>(params.min_pts)) return result;

  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t i = 0; i < n; ++i) adjacency[i].push_back(i);
  // Without a shared window no pair is comparable; each point only reaches itself.
  const bool comparable = !vectors.front().empty();
  for (std::size_t i = 0; comparable && i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (within_reach(vectors[i], vectors[j], params)) {
        adjacency[i].push_back(j);
        adjacency[j].push_back(i);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    result.core[i] = adjacency[i].size() >= static_cast<std::size_t>(params.min_pts);
  }

  constexpr int kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    if (!result.core[i]) {
      label[i] = kNoise;
      continue;
    }
    const int cluster = result.n_clusters++;
    label[i] = cluster;
    std::deque<std::size_t> frontier(adjacency[i].begin(), adjacency[i].end());
    while (!frontier.empty()) {
      const std::size_t j = frontier.front();
      frontier.pop_front();
      if (label[j] == kNoise) label[j] = cluster;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      if (result.core[j]) frontier.insert(frontier.end(), adjacency[j].begin(), adjacency[j].end());
    }
  }
  result.labels.assign(label.begin(), label.end());
  return result;
}

Clustering dbscan(const AlignedGroup& group, const ClusterParams& params) {
  params.validate();
  std::vector<std::size_t> order(group.members.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return group.members[a].id() < group.members[b].id(); });

  AlignedGroup sorted{group.region_id, group.pattern, {}};
  sorted.members.reserve(order.size());
  for (auto k : order) sorted.members.push_back(group.members[k]);

  Clustering out;
  if (sorted.members.empty()) return out;
  IndexClustering idx;
  if (sorted.members.size() < static_cast<std::size_t>(params.min_pts)) {
    idx.labels.assign(sorted.members.size(), kNoise);
    idx.core.assign(sorted.members.size(), false);
  } else {
    idx = dbscan_vectors(window_vectors(sorted, clustering_window(sorted)), params);
  }
  for (std::size_t k = 0; k < sorted.members.size(); ++k) {
    const auto& id = sorted.members[k].id();
    out.labels[id] = idx.labels[k];
    if (idx.core[k]) out.core.insert(id);
  }
  out.n_clusters = idx.n_clusters;
  out.noise_fraction = static_cast<double>(out.n_noise()) / static_cast<double>(out.labels.size());
  return out;
}

Clustering cluster_dataset(const std::vector<AlignedGroup>& groups, const ClusterParams& params, unsigned workers) {
  params.validate();
  std::vector<Clustering> parts(groups.size());
  parallel_for(groups.size(), workers, [&](std::size_t g) { parts[g] = dbscan(groups[g], params); });

  Clustering out;
  for (const auto& part : parts) {
    for (const auto& [id, label] : part.labels) {
      out.labels[id] = label == kNoise ? kNoise : label + out.n_clusters;
    }
    out.core.insert(part.core.begin(), part.core.end());
    out.n_clusters += part.n_clusters;
  }
  out.noise_fraction =
      out.labels.empty() ? 0.0 : static_cast<double>(out.n_noise()) / static_cast<double>(out.labels.size());
  return out;
}

ClusterSummary summarize(const Clustering& clustering, const ClusterParams& params, std::string preset_name) {
  ClusterSummary s;
  s.preset = std::move(preset_name);
  s.params = params;
  s.n_series_clustered = clustering.labels.size() - clustering.n_noise();
  s.n_clusters = clustering.n_clusters;
  // Scale before dividing so round percentages print as such.
  const auto total = clustering.labels.size();
  s.noise_pct = total == 0 ? 0.0 : 100.0 * static_cast<double>(clustering.n_noise()) / static_cast<double>(total);
  return s;
}

void write_cluster_summary(const std::vector<ClusterSummary>& rows, std::ostream& out) {
  out << kClusterSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << r.preset << ',' << r.params.min_pts << ',' << detail::format_double(r.params.eps) << ','
        << detail::format_double(r.params.cos_threshold) << ',' << r.n_series_clustered << ',' << r.n_clusters
        << ',' << detail::format_double(r.noise_pct) << '\n';
  }
}

void write_cluster_labels(const Clustering& clustering, std::ostream& out) {
  out << kClusterLabelsHeader << '\n';
  for (const auto& [id, label] : clustering.labels) out << id << ',' << label << '\n';
}

std::map<std::string, int> read_cluster_labels(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kClusterLabelsHeader, 0) != 0) {
    throw Error(Errc::MalformedRow, "labels file lacks header '" + std::string(kClusterLabelsHeader) + "'");
  }
  std::map<std::string, int> labels;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    int label = 0;
    if (fields.size() != 2 || fields[0].empty() || !detail::parse_number(fields[1], label)) {
      throw Error(Errc::MalformedRow, "bad labels row '" + line + "'");
    }
    labels[std::string(fields[0])] = label;
  }
  return labels;
}

}  // namespace hydrocast
