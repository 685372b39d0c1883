#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hydrocast/core.hpp"

namespace hydrocast {

/// (u . v) / (|u| |v|), clamped to [-1, 1]. Throws LengthMismatch, EmptyInput,
/// ZeroVector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Throws LengthMismatch, EmptyInput.
double euclidean_distance(std::span<const double> u, std::span<const double> v);

struct ClusterParams {
  int min_pts = 10;
  double eps = 10.0;            // m^3, inclusive upper bound on euclidean distance
  double cos_threshold = 0.8;   // inclusive lower bound on cosine similarity

  /// Throws InvalidConfig.
  void validate() const;
  friend bool operator==(const ClusterParams&, const ClusterParams&) = default;
};

struct NamedPreset {
  std::string_view name;
  ClusterParams params;
};

/// The four parameter sets D1..D4, relaxed to strict.
inline constexpr NamedPreset kPresets[] = {
    {"D1", {10, 10.0, 0.80}},
    {"D2", {10, 10.0, 0.85}},
    {"D3", {10, 10.0, 0.90}},
    {"D4", {10, 5.0, 0.90}},
};

/// Throws ConfigError for unknown names.
ClusterParams preset(std::string_view name);

inline constexpr int kNoise = -1;

struct Clustering {
  std::map<std::string, int> labels;  // series id -> cluster id or kNoise
  std::set<std::string> core;         // ids of core points
  int n_clusters = 0;
  double noise_fraction = 0.0;

  std::size_t n_noise() const;
};

/// Timestamps the clustering vectors cover: the first `train_ratio` share of
/// the group's common span.
struct ClusterWindow {
  Timestamp first;
  std::size_t length = 0;
};

ClusterWindow clustering_window(const AlignedGroup& group, double train_ratio = 0.8);

/// One vector per member, restricted to `window`.
std::vector<std::vector<double>> window_vectors(const AlignedGroup& group, const ClusterWindow& window);

/// Proximity predicate shared by neighbors() and dbscan(): both thresholds
/// must hold. A zero vector has no defined direction and matches nothing but
/// itself.
bool within_reach(std::span<const double> u, std::span<const double> v, const ClusterParams& params);

/// Member indices j (idx included) within reach of member idx over `window`.
std::vector<std::size_t> neighbors(const AlignedGroup& group, std::size_t idx, const ClusterParams& params,
                                   const ClusterWindow& window);

/// DBSCAN with the dual proximity predicate. Members are scanned in series-id
/// order, so the labeling does not depend on input order. Cluster ids start at 0.
Clustering dbscan(const AlignedGroup& group, const ClusterParams& params);

/// Same algorithm over raw vectors given in scan order; labels are indices.
struct IndexClustering {
  std::vector<int> labels;
  std::vector<bool> core;
  int n_clusters = 0;
};

IndexClustering dbscan_vectors(const std::vector<std::vector<double>>& vectors, const ClusterParams& params);

struct ClusterSummary {
  std::string preset;
  ClusterParams params;
  std::size_t n_series_clustered = 0;
  int n_clusters = 0;
  double noise_pct = 0.0;
};

/// Runs dbscan per aligned group and renumbers clusters so ids are unique
/// across groups (group order, then per-group id).
Clustering cluster_dataset(const std::vector<AlignedGroup>& groups, const ClusterParams& params,
                           unsigned workers = 1);

ClusterSummary summarize(const Clustering& clustering, const ClusterParams& params, std::string preset_name);

inline constexpr const char* kClusterSummaryHeader =
    "preset,min_pts,eps,cos_threshold,n_series_clustered,n_clusters,noise_pct";
inline constexpr const char* kClusterLabelsHeader = "series_id,cluster_id";

void write_cluster_summary(const std::vector<ClusterSummary>& rows, std::ostream& out);
void write_cluster_labels(const Clustering& clustering, std::ostream& out);
/// Reads a labels CSV back; throws MalformedRow.
std::map<std::string, int> read_cluster_labels(std::istream& in);

}  // namespace hydrocast
