#include <doctest.h>

#include <random>

#include "hydrocast/core.hpp"

using namespace hydrocast;

namespace {

std::vector<Observation> quarterly(Timestamp start, std::vector<double> values) {
  std::vector<Observation> obs;
  for (std::size_t k = 0; k < values.size(); ++k) {
    obs.push_back({start.plus_months(static_cast<long>(3 * k)), values[k]});
  }
  return obs;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::IoError;
}

}  // namespace

TEST_CASE("timestamps order by year then month and step by quarters") {
  CHECK(Timestamp{2013, 12} < Timestamp{2014, 1});
  CHECK(Timestamp{2013, 11}.plus_months(3) == Timestamp{2014, 2});
  CHECK(Timestamp{2014, 2}.plus_months(-3) == Timestamp{2013, 11});
  CHECK(Timestamp::from_ordinal(Timestamp{-1, 7}.ordinal()) == Timestamp{-1, 7});
  CHECK(code_of([] { make_timestamp(2013, 13); }) == Errc::InvalidTimestamp);
  CHECK(code_of([] { make_timestamp(2013, 0); }) == Errc::InvalidTimestamp);
}

TEST_CASE("validate_series accepts a quarterly series") {
  const auto s = validate_series("a", "r", {{{2013, 1}, 30.0}, {{2013, 4}, 25.0}});
  CHECK(s.size() == 2);
  CHECK(s.values() == std::vector<double>{30.0, 25.0});
}

TEST_CASE("validate_series sorts its observations") {
  const auto s = validate_series("a", "r", {{{2013, 7}, 3.0}, {{2013, 1}, 1.0}, {{2013, 4}, 2.0}});
  CHECK(s.values() == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("validate_series rejects invalid input") {
  CHECK(code_of([] { validate_series("a", "r", {{{2013, 1}, 30.0}, {{2013, 3}, 25.0}}); }) == Errc::NonQuarterlyGap);
  CHECK(code_of([] { validate_series("a", "r", {{{2013, 1}, -5.0}}); }) == Errc::NegativeValue);
  CHECK(code_of([] { validate_series("a", "r", {}); }) == Errc::EmptySeries);
  CHECK(code_of([] { validate_series("a", "r", {{{2013, 1}, 1.0}, {{2013, 1}, 2.0}}); }) ==
        Errc::DuplicateTimestamp);
  CHECK(code_of([] { validate_series("a", "r", {{{2013, 1}, std::nan("")}}); }) == Errc::NonFiniteValue);
  CHECK(code_of([] { validate_series("a", "r", {{{2013, 1}, 1.0}, {{2014, 1}, 2.0}}); }) == Errc::NonQuarterlyGap);
}

TEST_CASE("validate_series is idempotent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> value(0.0, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> values(1 + trial % 20);
    for (auto& v : values) v = value(rng);
    const auto once = validate_series("s", "r", quarterly({2013, 1 + trial % 12}, values));
    const auto twice = validate_series(once.id(), once.region_id(), once.observations());
    CHECK(once == twice);
  }
}

TEST_CASE("month_pattern extracts sorted distinct months") {
  const auto jan = validate_series("a", "r", quarterly({2013, 1}, {1, 2, 3, 4, 5, 6, 7, 8}));
  CHECK(month_pattern(jan).months == std::vector<int>{1, 4, 7, 10});
  const auto mar = validate_series("b", "r", quarterly({2013, 3}, {1, 2, 3, 4}));
  CHECK(month_pattern(mar).months == std::vector<int>{3, 6, 9, 12});
  const auto single = validate_series("c", "r", {{{2013, 2}, 5.0}});
  CHECK(month_pattern(single).months == std::vector<int>{2});
  CHECK(to_string(month_pattern(jan)) == "1-4-7-10");
}

TEST_CASE("month_pattern is invariant under truncating whole cycles") {
  const auto s = validate_series("a", "r", quarterly({2013, 2}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}));
  const auto full = month_pattern(s);
  CHECK(month_pattern(s.slice(4, 8)) == full);
  CHECK(month_pattern(s.slice(0, 8)) == full);
  CHECK(month_pattern(s.slice(4, 4)) == full);
}

TEST_CASE("common_span of a group is the overlap of member spans") {
  AlignedGroup g;
  g.members.push_back(validate_series("a", "r", quarterly({2013, 1}, {1, 2, 3, 4, 5, 6})));
  g.members.push_back(validate_series("b", "r", quarterly({2013, 7}, {1, 2, 3, 4, 5, 6})));
  const auto span = common_span(g);
  CHECK(span.first == Timestamp{2013, 7});
  CHECK(span.count == 4);
  CHECK(index_of(g.members[0], span.first) == 2);
  CHECK(index_of(g.members[1], span.first) == 0);
  CHECK(index_of(g.members[0], Timestamp{2013, 2}) == static_cast<std::size_t>(-1));
  // Pairwise equal timestamps over the overlap.
  for (std::size_t k = 0; k < span.count; ++k) {
    CHECK(g.members[0].observations()[2 + k].when == g.members[1].observations()[k].when);
  }
}
