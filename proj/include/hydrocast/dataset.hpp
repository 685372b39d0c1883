#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hydrocast/core.hpp"

namespace hydrocast {

/// Where a dataset came from. `seed` is set only for synthetic data.
struct Provenance {
  std::optional<std::uint64_t> seed;

  bool synthetic() const noexcept { return seed.has_value(); }
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

class Dataset {
 public:
  Dataset() = default;
  /// Throws InvalidConfig on duplicate series ids.
  Dataset(std::vector<Series> series, Provenance provenance);

  const std::vector<Series>& series() const noexcept { return series_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return series_.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<Series> series_;
  Provenance provenance_;
};

inline constexpr const char* kDatasetHeader = "series_id,region_id,year,month,consumption_m3";

/// Reads the observation CSV. Series keep the order of their first row.
Dataset parse_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::istream& in, const std::string& source_name = "<stream>");

void write_dataset(const Dataset& dataset, std::ostream& out);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Partition by (region_id, month_pattern), ordered by that key; members keep
/// dataset order.
std::vector<AlignedGroup> align_groups(const Dataset& dataset);

struct Range {
  double low = 0.0;
  double high = 0.0;
};

struct SynthConfig {
  int n_series = 1000;
  int n_regions = 2;
  int first_year = 2013;
  int last_year = 2019;
  int n_month_patterns = 3;
  Range base_level{4.0, 40.0};           // m^3 per quarter
  Range seasonal_amplitude{1.0, 10.0};   // m^3
  Range trend_slope{-0.3, 0.3};          // m^3 per quarter
  double noise_sd = 0.8;                 // m^3
  double noise_spread = 0.5;             // per-series sd multiplier drawn from 1 +- spread
  int n_archetypes = 6;
  int max_aggregation = 5;               // meters aggregate 1..max users
  std::uint64_t seed = 42;

  /// Throws InvalidConfig.
  void validate() const;
};

/// Pure function of the config: equal configs give equal datasets, and each
/// series depends only on (seed, series index).
Dataset generate_synthetic(const SynthConfig& config);

}  // namespace hydrocast
