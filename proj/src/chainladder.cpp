#include "hidden/chainladder.hpp"

namespace hidden {

int AggregateTriangle::period_of(DateIndex d, const Calendar& cal) const {
  if (grid == GridKind::CalendarYear) return cal.year(d);
  const int off = d - anchor;
  return off >= 0 ? off / 28 : -((-off + 27) / 28);
}

int AggregateTriangle::last_period(const Calendar& cal) const {
  return period_of(eval_date, cal);
}

AggregateTriangle aggregate(const EventDataset& events, DateIndex eval_date, GridKind grid,
                            const Calendar& cal, DateIndex anchor) {
  AggregateTriangle tri;
  tri.grid = grid;
  tri.eval_date = eval_date;
  tri.anchor = anchor;
  const int last = tri.last_period(cal);
  for (const auto& ev : events.events) {
    if (eval_date < ev.occurrence || eval_date < ev.observation) continue;
    const int i = tri.period_of(ev.occurrence, cal);
    const int j = tri.period_of(ev.observation, cal) - i;
    auto& row = tri.cum[i];
    if (row.empty()) row.assign(last - i + 1, 0);
    row[j] += 1;  // incremental for now
  }
  for (auto& [i, row] : tri.cum) {
    for (std::size_t j = 1; j < row.size(); ++j) row[j] += row[j - 1];
  }
  return tri;
}

std::vector<std::optional<double>> development_factors(const AggregateTriangle& tri,
                                                       const Calendar& cal) {
  const int last = tri.last_period(cal);
  int max_dev = 0;
  for (const auto& [i, row] : tri.cum) max_dev = std::max(max_dev, last - i);
  std::vector<std::optional<double>> factors(max_dev);
  for (int j = 0; j + 1 <= max_dev; ++j) {
    long num = 0, den = 0;
    for (const auto& [i, row] : tri.cum) {
      if (last - i < j + 1) continue;  // next column not yet observable for this row
      num += row[j + 1];
      den += row[j];
    }
    if (den > 0) factors[j] = static_cast<double>(num) / den;
  }
  return factors;
}

ChainLadderResult ibnr_estimate(const AggregateTriangle& tri, const Calendar& cal) {
  ChainLadderResult result;
  if (tri.cum.empty()) {
    result.message = "empty triangle";
    return result;
  }
  result.factors = development_factors(tri, cal);
  const int last = tri.last_period(cal);
  const int max_dev = static_cast<int>(result.factors.size());
  result.ok = true;
  for (const auto& [i, row] : tri.cum) {
    const int observed_dev = last - i;
    const double latest = static_cast<double>(row[observed_dev]);
    double ultimate = latest;
    for (int j = observed_dev; j < max_dev; ++j) {
      if (!result.factors[j]) {
        if (ultimate > 0) {
          result.ok = false;
          result.message = "development factor undefined at period " + std::to_string(j);
        }
        break;
      }
      ultimate *= *result.factors[j];
    }
    result.ultimate[i] = ultimate;
    result.ibnr += ultimate - latest;
  }
  return result;
}

}  // namespace hidden
