#include <doctest.h>

#include "hidden/counts.hpp"

using namespace hidden;

namespace {

EventDataset small_events() {
  EventDataset data;
  data.events = {
      {DateIndex{1}, DateIndex{1}},  {DateIndex{1}, DateIndex{3}}, {DateIndex{1}, DateIndex{3}},
      {DateIndex{2}, DateIndex{2}},  {DateIndex{2}, DateIndex{9}}, {DateIndex{5}, DateIndex{6}},
      {DateIndex{5}, DateIndex{12}},
  };
  return data;
}

}  // namespace

TEST_CASE("triangle truncates at the evaluation date") {
  const EventDataset data = small_events();
  const CountTriangle tri = triangle_from_events(data, DateIndex{6});
  CHECK(tri.total_count() == 5);  // observations on days 9 and 12 are hidden
  CHECK(tri.cell(DateIndex{1}, DateIndex{1}) == 1);
  CHECK(tri.cell(DateIndex{1}, DateIndex{3}) == 2);
  CHECK(tri.cell(DateIndex{2}, DateIndex{9}) == 0);
  CHECK(tri.rows.at(1).total == 3);
  CHECK(tri.rows.at(2).total == 1);
  CHECK(tri.rows.at(5).total == 1);
  CHECK(tri.first_occurrence() == DateIndex{1});

  // Row totals always match the sum of their cells.
  for (const auto& [t, row] : tri.rows) {
    long sum = 0;
    for (const auto& [d, n] : row.by_delay) sum += n;
    CHECK(sum == row.total);
  }
}

TEST_CASE("events occurring after the evaluation date are excluded") {
  const EventDataset data = small_events();
  const CountTriangle tri = triangle_from_events(data, DateIndex{4});
  CHECK(tri.rows.count(5) == 0);
  CHECK(tri.total_count() == 4);
}

TEST_CASE("reversed records are rejected") {
  EventDataset data;
  data.events = {{DateIndex{5}, DateIndex{3}}};
  CHECK_THROWS(triangle_from_events(data, DateIndex{10}));
}

TEST_CASE("empty triangle is flagged") {
  EventDataset data;
  const CountTriangle tri = triangle_from_events(data, DateIndex{10});
  CHECK(tri.empty());
  CHECK_THROWS(tri.first_occurrence());
}

TEST_CASE("actual hidden count matches the definition") {
  const EventDataset data = small_events();
  // Hidden at day 6: occurred <= 6, observed in (6, horizon].
  CHECK(actual_hidden_count(data, DateIndex{6}, DateIndex{20}) == 2);
  CHECK(actual_hidden_count(data, DateIndex{6}, DateIndex{9}) == 1);
  CHECK(actual_hidden_count(data, DateIndex{20}, DateIndex{30}) == 0);
  CHECK_THROWS(actual_hidden_count(data, DateIndex{6}, DateIndex{6}));
}

TEST_CASE("delay multiset pools delays across occurrence dates") {
  const EventDataset data = small_events();
  const auto delays = delay_counts(triangle_from_events(data, DateIndex{12}));
  CHECK(delays.at(0) == 2);
  CHECK(delays.at(1) == 1);
  CHECK(delays.at(2) == 2);
  CHECK(delays.at(7) == 2);
}
