#include "hidden/counts.hpp"

namespace hidden {

long CountTriangle::total_count() const {
  long n = 0;
  for (const auto& [t, row] : rows) n += row.total;
  return n;
}

long CountTriangle::cell(DateIndex t, DateIndex s) const {
  const auto rit = rows.find(t.day);
  if (rit == rows.end()) return 0;
  const auto cit = rit->second.by_delay.find(s - t);
  return cit == rit->second.by_delay.end() ? 0 : cit->second;
}

DateIndex CountTriangle::first_occurrence() const {
  if (rows.empty()) throw std::logic_error("empty triangle has no first occurrence");
  return DateIndex{rows.begin()->first};
}

CountTriangle triangle_from_events(const EventDataset& events, DateIndex eval_date) {
  CountTriangle tri;
  tri.eval_date = eval_date;
  for (const auto& e : events.events) {
    if (e.observation < e.occurrence) {
      throw std::invalid_argument("event with observation before occurrence; reject at ingestion");
    }
    if (e.observation > eval_date || e.occurrence > eval_date) continue;
    auto& row = tri.rows[e.occurrence.day];
    ++row.by_delay[e.observation - e.occurrence];
    ++row.total;
  }
  return tri;
}

long actual_hidden_count(const EventDataset& events, DateIndex eval_date,
                         DateIndex horizon_date) {
  if (!(horizon_date > eval_date)) {
    throw std::invalid_argument("horizon_date must exceed eval_date");
  }
  long n = 0;
  for (const auto& e : events.events) {
    if (e.occurrence <= eval_date && e.observation > eval_date && e.observation <= horizon_date) {
      ++n;
    }
  }
  return n;
}

std::map<int, long> delay_counts(const CountTriangle& tri) {
  std::map<int, long> out;
  for (const auto& [t, row] : tri.rows) {
    for (const auto& [d, n] : row.by_delay) out[d] += n;
  }
  return out;
}

}  // namespace hidden
