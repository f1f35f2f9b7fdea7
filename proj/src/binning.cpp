#include "hidden/binning.hpp"

#include <cmath>

namespace hidden {

HazardTable hazard_table(const std::map<int, long>& delays) {
  HazardTable table;
  if (delays.empty()) return table;
  const int max_delay = delays.rbegin()->first;
  long total = 0;
  for (const auto& [d, n] : delays) total += n;
  long at_risk = total;
  for (int d = 0; d <= max_delay; ++d) {
    const auto it = delays.find(d);
    const long n_eq = it == delays.end() ? 0 : it->second;
    HazardTable::Row row;
    row.delay = d;
    row.count_equal = n_eq;
    row.count_geq = at_risk;
    if (n_eq == at_risk && n_eq > 0) {
      row.hazard_exposure = std::numeric_limits<double>::infinity();
    } else {
      row.hazard_exposure = -std::log1p(-static_cast<double>(n_eq) / at_risk);
    }
    table.rows.push_back(row);
    at_risk -= n_eq;
  }
  return table;
}

HazardTable hazard_table(const CountTriangle& tri) {
  if (tri.empty()) throw std::invalid_argument("hazard_table: empty triangle");
  return hazard_table(delay_counts(tri));
}

DelayBins propose_bins(const HazardTable& table, const BinOptions& opts) {
  DelayBins bins;
  const int n = static_cast<int>(table.rows.size());
  if (n == 0) throw std::invalid_argument("propose_bins: empty hazard table");

  auto is_spike = [&](int d) {
    if (d <= 0 || d + 1 >= n) return false;
    const double h = table.rows[d].hazard_exposure;
    if (!std::isfinite(h) || h <= 0) return false;
    const double left = table.rows[d - 1].hazard_exposure;
    const double right = table.rows[d + 1].hazard_exposure;
    return h > opts.spike_factor * left && h > opts.spike_factor * right;
  };

  // Maximum width of a bin starting at delay b grows geometrically with b.
  auto width_cap = [&](int b) {
    const double log_cap = b * std::log(opts.width_growth);
    return log_cap > 50 ? std::numeric_limits<double>::infinity() : std::pow(opts.width_growth, b);
  };

  int bin_start = 0;
  double log_sum = 0.0;
  int log_n = 0;
  bins.starts.push_back(0);
  for (int d = 1; d < n; ++d) {
    const double h = table.rows[d].hazard_exposure;
    bool open_new = false;
    if (d <= opts.min_singleton) {
      open_new = true;  // forced singletons, plus a fresh bin right after them
    } else if (is_spike(d) || is_spike(d - 1)) {
      open_new = true;  // isolate hazard spikes in singleton bins
    } else if (d - bin_start >= width_cap(bin_start)) {
      open_new = true;
    } else if (std::isfinite(h) && h > 0 && log_n > 0 &&
               std::abs(std::log(h) - log_sum / log_n) > opts.log_threshold) {
      open_new = true;
    }
    if (open_new) {
      bins.starts.push_back(d);
      bin_start = d;
      log_sum = 0.0;
      log_n = 0;
    }
    // Infinite hazard at the final observed delay stays out of the bin mean.
    if (std::isfinite(h) && h > 0) {
      log_sum += std::log(h);
      ++log_n;
    }
  }
  return bins;
}

std::vector<double> kaplan_meier(const std::map<int, long>& delays) {
  if (delays.empty()) throw std::invalid_argument("kaplan_meier: empty delay multiset");
  const HazardTable table = hazard_table(delays);
  std::vector<double> survival;
  survival.reserve(table.rows.size());
  double s = 1.0;
  for (const auto& row : table.rows) {
    s *= 1.0 - static_cast<double>(row.count_equal) / row.count_geq;
    survival.push_back(s);
  }
  return survival;
}

double km_equivalence_check(const CountTriangle& tri) {
  const auto delays = delay_counts(tri);
  const HazardTable table = hazard_table(delays);
  const std::vector<double> km = kaplan_meier(delays);
  double max_dev = 0.0;
  double model = 1.0;
  for (std::size_t d = 0; d < table.rows.size(); ++d) {
    model *= std::exp(-table.rows[d].hazard_exposure);
    max_dev = std::max(max_dev, std::abs(model - km[d]));
  }
  return max_dev;
}

}  // namespace hidden
