#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hidden/counts.hpp"

namespace hidden {

enum class GridKind { CalendarYear, Days28 };

/// Cumulative counts by occurrence period and development period. Each row i
/// carries the cells observable at the evaluation date: j = 0 .. last_dev(i).
struct AggregateTriangle {
  GridKind grid = GridKind::CalendarYear;
  DateIndex eval_date;
  DateIndex anchor;  // first day of period 0 (28-day grid); ignored for years

  std::map<int, std::vector<long>> cum;  // origin period -> cumulative counts

  int period_of(DateIndex d, const Calendar& cal) const;
  int last_period(const Calendar& cal) const;  // period of eval_date
};

AggregateTriangle aggregate(const EventDataset& events, DateIndex eval_date, GridKind grid,
                            const Calendar& cal, DateIndex anchor = DateIndex{1});

struct ChainLadderResult {
  std::vector<std::optional<double>> factors;  // f_j, absent on zero denominator
  std::map<int, double> ultimate;              // per origin period
  double ibnr = 0.0;
  bool ok = false;
  std::string message;
};

/// f_j = sum_i cum(i, j+1) / sum_i cum(i, j) over rows with both cells
/// observable at the evaluation date.
std::vector<std::optional<double>> development_factors(const AggregateTriangle& tri,
                                                       const Calendar& cal);

/// Develops every row to the longest observed development period; no tail
/// factor beyond it.
ChainLadderResult ibnr_estimate(const AggregateTriangle& tri, const Calendar& cal);

}  // namespace hidden
