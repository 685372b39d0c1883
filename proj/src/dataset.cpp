#include "hydrocast/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "hydrocast/seeding.hpp"
#include "format.hpp"

namespace hydrocast {

Dataset::Dataset(std::vector<Series> series, Provenance provenance)
    : series_(std::move(series)), provenance_(provenance) {
  std::set<std::string_view> seen;
  for (const auto& s : series_) {
    if (!seen.insert(s.id()).second) {
      throw Error(Errc::InvalidConfig, "duplicate series id '" + s.id() + "'");
    }
  }
}

namespace {

struct PendingSeries {
  std::string region;
  std::vector<Observation> observations;
  std::set<long> seen;
};

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return source_name + ":" + std::to_string(line_no); };

  if (!std::getline(in, line)) {
    throw Error(Errc::MalformedRow, source_name + ": missing header");
  }
  ++line_no;
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDatasetHeader) {
    throw Error(Errc::MalformedRow, where() + ": expected header '" + kDatasetHeader + "'");
  }

  std::vector<std::string> order;
  std::unordered_map<std::string, PendingSeries> pending;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 5) {
      throw Error(Errc::MalformedRow, where() + ": expected 5 fields, got " + std::to_string(fields.size()));
    }
    int year = 0;
    int month = 0;
    double value = 0.0;
    if (fields[0].empty() || !detail::parse_number(fields[2], year) || !detail::parse_number(fields[3], month) ||
        !detail::parse_number(fields[4], value)) {
      throw Error(Errc::MalformedRow, where() + ": unparseable field");
    }
    if (month < 1 || month > 12) {
      throw Error(Errc::MalformedRow, where() + ": month " + std::to_string(month) + " outside 1..12");
    }
    std::string id(fields[0]);
    auto [it, inserted] = pending.try_emplace(id);
    if (inserted) {
      order.push_back(id);
      it->second.region = std::string(fields[1]);
    } else if (it->second.region != fields[1]) {
      throw Error(Errc::MalformedRow, where() + ": series '" + id + "' changes region");
    }
    const Timestamp when{year, month};
    if (!it->second.seen.insert(when.ordinal()).second) {
      throw Error(Errc::DuplicateObservation, where() + ": series '" + id + "' repeats " +
                                                  std::to_string(year) + "-" + std::to_string(month));
    }
    it->second.observations.push_back({when, value});
  }

  std::vector<Series> series;
  series.reserve(order.size());
  for (const auto& id : order) {
    auto& p = pending.at(id);
    try {
      series.push_back(validate_series(id, std::move(p.region), std::move(p.observations)));
    } catch (const Error& e) {
      throw Error(Errc::ValidationFailure, source_name + ": " + e.what());
    }
  }
  return Dataset(std::move(series), Provenance{});
}

Dataset parse_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  return parse_dataset(in, path.string());
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  out << kDatasetHeader << '\n';
  for (const auto& s : dataset.series()) {
    for (const auto& obs : s.observations()) {
      out << s.id() << ',' << s.region_id() << ',' << obs.when.year << ',' << obs.when.month << ','
          << detail::format_double(obs.value) << '\n';
    }
  }
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  write_dataset(dataset, out);
  if (!out) throw Error(Errc::IoError, "write failed for '" + path.string() + "'");
}

std::vector<AlignedGroup> align_groups(const Dataset& dataset) {
  std::map<std::pair<std::string, MonthPattern>, std::vector<Series>> buckets;
  for (const auto& s : dataset.series()) {
    buckets[{s.region_id(), month_pattern(s)}].push_back(s);
  }
  std::vector<AlignedGroup> groups;
  groups.reserve(buckets.size());
  for (auto& [key, members] : buckets) {
    groups.push_back(AlignedGroup{key.first, key.second, std::move(members)});
  }
  return groups;
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
  if (n_series < 1) fail("n_series must be positive");
  if (n_regions < 1) fail("n_regions must be positive");
  if (last_year < first_year) fail("last_year precedes first_year");
  if (n_month_patterns < 1 || n_month_patterns > 3) fail("n_month_patterns must be in 1..3");
  for (const auto* r : {&base_level, &seasonal_amplitude, &trend_slope}) {
    if (!(r->low <= r->high) || !std::isfinite(r->low) || !std::isfinite(r->high)) {
      fail("range low must not exceed high");
    }
  }
  if (base_level.low < 0.0) fail("base_level must be non-negative");
  if (seasonal_amplitude.low < 0.0) fail("seasonal_amplitude must be non-negative");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) fail("noise_sd must be non-negative");
  if (!(noise_spread >= 0.0 && noise_spread < 1.0)) fail("noise_spread must be in [0, 1)");
  if (n_archetypes < 1 || n_archetypes > n_series) fail("n_archetypes must be in 1..n_series");
  if (max_aggregation < 1) fail("max_aggregation must be at least 1");
}

namespace {

struct Archetype {
  double base = 0.0;
  double trend = 0.0;
  std::vector<double> multipliers;  // per seasonal phase, mean 1

  double at(std::size_t t) const {
    return base * multipliers[t % multipliers.size()] + trend * static_cast<double>(t);
  }
};

double draw(std::mt19937_64& rng, const Range& r) {
  if (r.low == r.high) return r.low;
  return std::uniform_real_distribution<double>(r.low, r.high)(rng);
}

Archetype make_archetype(const SynthConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Archetype a;
  a.base = draw(rng, config.base_level);
  const double amplitude = draw(rng, config.seasonal_amplitude);
  a.trend = draw(rng, config.trend_slope);

  const int phases = kQuarterly.steps;
  std::vector<double> shape(phases);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (auto& v : shape) v = unit(rng);
  double mean = 0.0;
  for (double v : shape) mean += v;
  mean /= phases;
  double peak = 0.0;
  for (auto& v : shape) {
    v -= mean;
    peak = std::max(peak, std::abs(v));
  }
  a.multipliers.resize(phases, 1.0);
  if (peak > 0.0 && a.base > 0.0) {
    for (int j = 0; j < phases; ++j) a.multipliers[j] = 1.0 + (amplitude / a.base) * shape[j] / peak;
  }
  return a;
}

std::string series_name(int index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "S" + digits;
}

}  // namespace

Dataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  const std::uint64_t archetype_root = derive_seed(config.seed, "archetypes");
  const std::uint64_t series_root = derive_seed(config.seed, "series");

  std::vector<Archetype> archetypes;
  archetypes.reserve(config.n_archetypes);
  for (int k = 0; k < config.n_archetypes; ++k) {
    archetypes.push_back(make_archetype(config, derive_seed(archetype_root, static_cast<std::uint64_t>(k))));
  }

  const auto length = static_cast<std::size_t>(config.last_year - config.first_year + 1) * kQuarterly.steps;
  // Meters serving k users are half as common as those serving k - 1.
  std::vector<double> factor_weights(static_cast<std::size_t>(config.max_aggregation));
  for (std::size_t k = 0; k < factor_weights.size(); ++k) factor_weights[k] = std::ldexp(1.0, -static_cast<int>(k));
  std::vector<Series> series;
  series.reserve(config.n_series);
  for (int i = 0; i < config.n_series; ++i) {
    std::mt19937_64 rng(derive_seed(series_root, static_cast<std::uint64_t>(i)));
    const int region = std::uniform_int_distribution<int>(0, config.n_regions - 1)(rng);
    const auto& archetype = archetypes[std::uniform_int_distribution<int>(0, config.n_archetypes - 1)(rng)];
    const int offset = std::uniform_int_distribution<int>(0, config.n_month_patterns - 1)(rng);
    const int factor = 1 + std::discrete_distribution<int>(factor_weights.begin(), factor_weights.end())(rng);
    // Each aggregated user contributes independent noise.
    const double regularity = std::uniform_real_distribution<double>(1.0 - config.noise_spread,
                                                                      1.0 + config.noise_spread)(rng);
    const double sd = config.noise_sd * regularity * std::sqrt(static_cast<double>(factor));
    std::normal_distribution<double> noise(0.0, 1.0);

    const Timestamp start{config.first_year, 1 + offset};
    std::vector<Observation> obs;
    obs.reserve(length);
    for (std::size_t t = 0; t < length; ++t) {
      double v = factor * archetype.at(t);
      if (sd > 0.0) v += sd * noise(rng);
      obs.push_back({start.plus_months(static_cast<long>(t) * kQuarterMonths), std::max(0.0, v)});
    }
    series.push_back(validate_series(series_name(i), "R" + std::to_string(region), std::move(obs)));
  }
  return Dataset(std::move(series), Provenance{config.seed});
}

}  // namespace hydrocast
