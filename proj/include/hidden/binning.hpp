#pragma once

#include <limits>
#include <map>
#include <vector>

#include "hidden/counts.hpp"

namespace hidden {

/// Per-delay hazard statistics computed from observed delays, ignoring the
/// right truncation. hazard_exposure is the closed-form per-delay exposure
/// -log(1 - n_equal/n_geq); it is infinite when the risk set is exhausted.
struct HazardTable {
  struct Row {
    int delay = 0;
    long count_equal = 0;
    long count_geq = 0;
    double hazard_exposure = 0.0;
  };
  std::vector<Row> rows;  // one row per delay 0..max observed delay
};

HazardTable hazard_table(const CountTriangle& tri);
HazardTable hazard_table(const std::map<int, long>& delays);

/// Contiguous delay bins; bin b covers [starts[b], starts[b+1]) and the last
/// bin is right-open.
struct DelayBins {
  std::vector<int> starts;  // starts[0] == 0, strictly increasing
};

struct BinOptions {
  int min_singleton = 8;        // forced singleton bins for the first delays
  double log_threshold = 0.15;  // deviation of log hazard from the bin mean
  double width_growth = 1.5;    // geometric growth of the maximum bin width
  double spike_factor = 3.0;    // hazard above both neighbours by this factor -> singleton
};

/// Greedy left-to-right grouping of delays with approximately constant
/// hazard exposure. Deterministic given (table, opts).
DelayBins propose_bins(const HazardTable& table, const BinOptions& opts = {});

/// Kaplan-Meier survival S(d) for d = 0..max delay.
std::vector<double> kaplan_meier(const std::map<int, long>& delays);

/// Max |model survival - Kaplan-Meier| over observed delays, where the model
/// uses one exposure parameter per delay from the hazard table and drops the
/// truncation term. Zero (up to rounding) on untruncated data.
double km_equivalence_check(const CountTriangle& tri);

}  // namespace hidden
