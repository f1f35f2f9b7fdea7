#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hidden/counts.hpp"
#include "hidden/likelihood.hpp"
#include "hidden/timechange.hpp"

namespace hidden {

struct PredictOptions {
  double reliability_floor = 1e-4;  // p_t^Obs below this is flagged
  double tail_mass = 1e-6;          // schedule extension rule
  int max_tail_days = 3650;
};

/// Expected hidden counts lambda_t * p_{t,s} for occurrence dates t <= tau and
/// observation dates strictly after the computation date, up to the horizon.
struct PredictionReport {
  DateIndex eval_date;         // tau
  DateIndex computation_date;  // tau + gap, the last date with observed data

  std::map<int, double> lambda_hat;  // occurrence day -> intensity estimate
  std::vector<int> unreliable;       // occurrence days with p^Obs below the floor

  struct Cell {
    int t = 0;
    int s = 0;
    double expected = 0.0;
  };
  std::vector<Cell> future_cells;  // computation_date < s <= horizon

  double hidden_total = 0.0;
  double hidden_variance = 0.0;  // Poisson: equals the sum of cell means

  std::map<int, double> by_future_date;                 // s -> expected count
  std::map<std::pair<int, int>, double> by_future_month;  // (year, month) -> expected
};

/// lambda_hat_t = N_t^Obs(tau') / p_t^Obs(tau') with tau' the triangle's
/// evaluation date. `unreliable` is set when p^Obs < floor.
double estimate_lambda(const CountTriangle& tri, const ExposureModel& model,
                       const TimeChangedDistribution& dist, DateIndex t, const Calendar& cal,
                       bool* unreliable = nullptr, double floor = 1e-4);

/// `tri` must be the triangle truncated at `computation_date`, and `fit` a fit
/// of that triangle. Predicted cells cover t <= eval_date only.
PredictionReport predict_cells(const CountTriangle& tri, const FitResult& fit,
                               DateIndex eval_date, DateIndex computation_date,
                               DateIndex horizon, const Calendar& cal,
                               const PredictOptions& opts = {});

/// 100 * (actual - predicted) / actual. Positive means underestimation.
double percentage_error(double predicted, double actual);

struct BacktestOptions {
  int gap_days = 5;            // computation date = evaluation date + gap
  int horizon_days = 365;      // prediction window after the computation date
  int refit_every = 1;         // refit cadence in evaluation dates
  int threads = 1;
  DistKind kind = DistKind::Lognormal;
  FitOptions fit;
  PredictOptions predict;
};

struct BacktestRow {
  DateIndex eval_date;
  double predicted = 0.0;  // hidden_total plus the observed gap counts
  long actual = 0;
  std::optional<double> pe;  // absent when actual == 0 or the fit failed
  bool fit_ok = false;
  std::string message;
};

struct BacktestResult {
  std::vector<BacktestRow> rows;
  int valid = 0;  // rows entering the summary
  double mean_pe = 0.0;
  double sd_pe = 0.0;
};

/// Rolling evaluation: for each date tau, rebuild the triangle at tau + gap,
/// fit, predict, and compare with the actual hidden count from the events.
BacktestResult backtest(const EventDataset& events, const std::vector<DateIndex>& eval_dates,
                        const CovariateSpec& spec, const Calendar& cal,
                        const BacktestOptions& opts = {});

void summarize(BacktestResult& result);

}  // namespace hidden
