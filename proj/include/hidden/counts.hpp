#pragma once

#include <map>
#include <vector>

#include "hidden/calendar.hpp"

namespace hidden {

struct EventRecord {
  DateIndex occurrence;
  DateIndex observation;  // >= occurrence
};

struct EventDataset {
  std::vector<EventRecord> events;
  long dropped_reversed = 0;  // records rejected at ingestion (observation < occurrence)
};

/// Daily counts N_{t,s}, stored sparsely per occurrence date and delay,
/// truncated at the evaluation date.
struct CountTriangle {
  DateIndex eval_date;

  struct Row {
    std::map<int, long> by_delay;  // delay -> count, observed cells only
    long total = 0;                // N_t^Obs(eval_date)
  };
  std::map<int, Row> rows;  // occurrence day -> row

  bool empty() const { return rows.empty(); }
  long total_count() const;
  long cell(DateIndex t, DateIndex s) const;
  DateIndex first_occurrence() const;
};

/// Counts events with observation <= eval_date. Events occurring after
/// eval_date are excluded as well.
CountTriangle triangle_from_events(const EventDataset& events, DateIndex eval_date);

/// Ground truth for backtests: events with occurrence <= eval_date and
/// eval_date < observation <= horizon_date.
long actual_hidden_count(const EventDataset& events, DateIndex eval_date, DateIndex horizon_date);

/// Observed delays of the triangle as a multiset (count per delay).
std::map<int, long> delay_counts(const CountTriangle& tri);

}  // namespace hidden
