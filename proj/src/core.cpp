#include "hydrocast/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hydrocast {

Timestamp Timestamp::from_ordinal(long ordinal) {
  const long year = ordinal >= 0 ? ordinal / 12 : -((-ordinal + 11) / 12);
  return Timestamp{static_cast<int>(year), static_cast<int>(ordinal - year * 12) + 1};
}

Timestamp make_timestamp(int year, int month) {
  if (month < 1 || month > 12) {
    throw Error(Errc::InvalidTimestamp, "month " + std::to_string(month) + " outside 1..12");
  }
  return Timestamp{year, month};
}

namespace {

std::string describe(const Timestamp& t) {
  std::ostringstream os;
  os << t.year << '-' << (t.month < 10 ? "0" : "") << t.month;
  return os.str();
}

}  // namespace

Series validate_series(std::string id, std::string region_id, std::vector<Observation> observations) {
  if (observations.empty()) {
    throw Error(Errc::EmptySeries, "series '" + id + "' has no observations");
  }
  for (const auto& obs : observations) {
    make_timestamp(obs.when.year, obs.when.month);
    if (!std::isfinite(obs.value)) {
      throw Error(Errc::NonFiniteValue, "series '" + id + "' at " + describe(obs.when));
    }
    if (obs.value < 0.0) {
      throw Error(Errc::NegativeValue, "series '" + id + "' at " + describe(obs.when));
    }
  }
  std::stable_sort(observations.begin(), observations.end(),
                   [](const Observation& a, const Observation& b) { return a.when < b.when; });
  for (std::size_t k = 1; k < observations.size(); ++k) {
    const long gap = observations[k].when.ordinal() - observations[k - 1].when.ordinal();
    if (gap == 0) {
      throw Error(Errc::DuplicateTimestamp,
                  "series '" + id + "' repeats " + describe(observations[k].when));
    }
    if (gap != kQuarterMonths) {
      throw Error(Errc::NonQuarterlyGap, "series '" + id + "' jumps " + std::to_string(gap) +
                                             " months before " + describe(observations[k].when));
    }
  }
  Series series;
  series.id_ = std::move(id);
  series.region_id_ = std::move(region_id);
  series.observations_ = std::move(observations);
  return series;
}

std::vector<double> Series::values() const {
  std::vector<double> out;
  out.reserve(observations_.size());
  for (const auto& obs : observations_) out.push_back(obs.value);
  return out;
}

Series Series::slice(std::size_t offset, std::size_t count) const {
  if (offset + count > observations_.size() || count == 0) {
    throw Error(Errc::TooShort, "slice [" + std::to_string(offset) + ", +" + std::to_string(count) +
                                    ") of series '" + id_ + "' with " +
                                    std::to_string(observations_.size()) + " observations");
  }
  Series out;
  out.id_ = id_;
  out.region_id_ = region_id_;
  out.observations_.assign(observations_.begin() + static_cast<std::ptrdiff_t>(offset),
                           observations_.begin() + static_cast<std::ptrdiff_t>(offset + count));
  return out;
}

MonthPattern month_pattern(const Series& series) {
  std::set<int> months;
  for (const auto& obs : series.observations()) months.insert(obs.when.month);
  return MonthPattern{{months.begin(), months.end()}};
}

std::string to_string(const MonthPattern& pattern) {
  std::string out;
  for (std::size_t k = 0; k < pattern.months.size(); ++k) {
    if (k) out += '-';
    out += std::to_string(pattern.months[k]);
  }
  return out;
}

CommonSpan common_span(const AlignedGroup& group) {
  if (group.members.empty()) return {};
  Timestamp first = group.members.front().first();
  Timestamp last = group.members.front().last();
  for (const auto& member : group.members) {
    first = std::max(first, member.first());
    last = std::min(last, member.last());
  }
  if (last < first) return {first, 0};
  return {first, static_cast<std::size_t>((last.ordinal() - first.ordinal()) / kQuarterMonths) + 1};
}

std::size_t index_of(const Series& series, Timestamp when) {
  const long delta = when.ordinal() - series.first().ordinal();
  if (delta < 0 || delta % kQuarterMonths != 0) return static_cast<std::size_t>(-1);
  const auto idx = static_cast<std::size_t>(delta / kQuarterMonths);
  return idx < series.size() ? idx : static_cast<std::size_t>(-1);
}

}  // namespace hydrocast
