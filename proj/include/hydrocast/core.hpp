#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hydrocast/error.hpp"

namespace hydrocast {

/// Month-resolved calendar point. Quarterly reads carry no day-of-month.
struct Timestamp {
  int year = 0;
  int month = 1;

  /// Months elapsed since year 0, January.
  constexpr long ordinal() const noexcept { return static_cast<long>(year) * 12 + (month - 1); }

  static Timestamp from_ordinal(long ordinal);

  Timestamp plus_months(long months) const { return from_ordinal(ordinal() + months); }

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

/// Throws InvalidTimestamp unless month is in 1..12.
Timestamp make_timestamp(int year, int month);

struct Observation {
  Timestamp when;
  double value = 0.0;  // m^3

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct SeasonPeriod {
  int steps = 4;

  explicit constexpr SeasonPeriod(int s = 4) : steps(s) {}
  friend bool operator==(const SeasonPeriod&, const SeasonPeriod&) = default;
};

inline constexpr SeasonPeriod kQuarterly{4};
inline constexpr long kQuarterMonths = 3;

class Series;

/// Sorts the observations and checks every Series invariant. Idempotent.
Series validate_series(std::string id, std::string region_id, std::vector<Observation> observations);

/// One meter's consumption history: strictly increasing timestamps exactly one
/// quarter apart, finite non-negative values. Only constructible through
/// validate_series, so a Series in hand is always valid.
class Series {
 public:
  const std::string& id() const noexcept { return id_; }
  const std::string& region_id() const noexcept { return region_id_; }
  const std::vector<Observation>& observations() const noexcept { return observations_; }
  std::size_t size() const noexcept { return observations_.size(); }
  Timestamp first() const { return observations_.front().when; }
  Timestamp last() const { return observations_.back().when; }

  std::vector<double> values() const;

  /// Contiguous sub-range [offset, offset + count) as a new Series.
  Series slice(std::size_t offset, std::size_t count) const;

  friend bool operator==(const Series&, const Series&) = default;

 private:
  friend Series validate_series(std::string, std::string, std::vector<Observation>);
  Series() = default;

  std::string id_;
  std::string region_id_;
  std::vector<Observation> observations_;
};

struct MonthPattern {
  std::vector<int> months;  // sorted, distinct, each in 1..12

  friend auto operator<=>(const MonthPattern&, const MonthPattern&) = default;
};

MonthPattern month_pattern(const Series& series);

std::string to_string(const MonthPattern& pattern);

/// Series sharing a region and a month pattern, so their timestamps coincide
/// wherever their spans overlap.
struct AlignedGroup {
  std::string region_id;
  MonthPattern pattern;
  std::vector<Series> members;
};

/// Common [first, last] timestamps across all members; count is 0 when the
/// spans do not overlap.
struct CommonSpan {
  Timestamp first;
  std::size_t count = 0;
};

CommonSpan common_span(const AlignedGroup& group);

/// Index of `when` inside the series, or npos.
std::size_t index_of(const Series& series, Timestamp when);

}  // namespace hydrocast
