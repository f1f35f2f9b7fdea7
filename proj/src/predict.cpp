#include "hidden/predict.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace hidden {

double estimate_lambda(const CountTriangle& tri, const ExposureModel& model,
                       const TimeChangedDistribution& dist, DateIndex t, const Calendar& cal,
                       bool* unreliable, double floor) {
  if (unreliable) *unreliable = false;
  const auto it = tri.rows.find(t.day);
  if (it == tri.rows.end() || it->second.total == 0) return 0.0;
  const int span = tri.eval_date - t + 1;
  const ExposureSchedule sched = make_schedule(model, t, cal, span);
  const double p_obs = observed_probability(t, tri.eval_date, sched, dist);
  if (!(p_obs > 0)) throw std::runtime_error("estimate_lambda: zero observation probability");
  if (p_obs < floor && unreliable) *unreliable = true;
  return static_cast<double>(it->second.total) / p_obs;
}

PredictionReport predict_cells(const CountTriangle& tri, const FitResult& fit,
                               DateIndex eval_date, DateIndex computation_date,
                               DateIndex horizon, const Calendar& cal,
                               const PredictOptions& opts) {
  if (computation_date < eval_date) {
    throw std::invalid_argument("predict_cells: computation date before evaluation date");
  }
  if (tri.eval_date != computation_date) {
    throw std::invalid_argument("predict_cells: triangle not truncated at the computation date");
  }
  TimeChangedDistribution dist;
  dist.kind = fit.sigma ? DistKind::Lognormal : DistKind::UnitExponential;
  if (fit.sigma) dist.sigma = *fit.sigma;

  PredictionReport report;
  report.eval_date = eval_date;
  report.computation_date = computation_date;

  for (const auto& [tday, row] : tri.rows) {
    const DateIndex t{tday};
    if (eval_date < t) continue;  // occurred after tau: not hidden at tau
    const int observed_span = computation_date - t + 1;
    const int wanted = horizon - t + 1;
    // One schedule per occurrence date, long enough for both the observed
    // probability and every future cell.
    ExposureSchedule sched =
        make_schedule(fit.model, t, cal, std::max(observed_span, std::max(wanted, 0)));
    const double p_obs = observed_probability(t, computation_date, sched, dist);
    if (!(p_obs > 0)) throw std::runtime_error("predict_cells: zero observation probability");
    if (p_obs < opts.reliability_floor) report.unreliable.push_back(tday);
    const double lambda = static_cast<double>(row.total) / p_obs;
    report.lambda_hat[tday] = lambda;
    if (lambda == 0.0) continue;
    for (DateIndex s = computation_date + 1; !(horizon < s); s = s + 1) {
      const double p = cell_probability(t, s, sched, dist);
      const double expected = lambda * p;
      if (expected == 0.0) continue;
      report.future_cells.push_back({tday, s.day, expected});
      report.hidden_total += expected;
      report.by_future_date[s.day] += expected;
      report.by_future_month[{cal.year(s), cal.month(s)}] += expected;
    }
  }
  report.hidden_variance = report.hidden_total;  // Poisson sum
  return report;
}

double percentage_error(double predicted, double actual) {
  if (actual == 0.0) throw std::domain_error("percentage_error: actual is zero");
  return 100.0 * (actual - predicted) / actual;
}

void summarize(BacktestResult& result) {
  double sum = 0.0, sum2 = 0.0;
  int n = 0;
  for (const auto& row : result.rows) {
    if (!row.pe) continue;
    sum += *row.pe;
    sum2 += *row.pe * *row.pe;
    ++n;
  }
  result.valid = n;
  result.mean_pe = n > 0 ? sum / n : 0.0;
  result.sd_pe = n > 1 ? std::sqrt((sum2 - sum * sum / n) / (n - 1)) : 0.0;
}

BacktestResult backtest(const EventDataset& events, const std::vector<DateIndex>& eval_dates,
                        const CovariateSpec& spec, const Calendar& cal,
                        const BacktestOptions& opts) {
  BacktestResult result;
  result.rows.resize(eval_dates.size());
  const int refit_every = std::max(1, opts.refit_every);
  const int n_groups = (static_cast<int>(eval_dates.size()) + refit_every - 1) / refit_every;
  std::vector<FitResult> group_fits(n_groups);

  auto run_range = [&](auto&& body, int count) {
    const int workers = std::clamp(opts.threads, 1, count == 0 ? 1 : count);
    if (workers <= 1) {
      for (int i = 0; i < count; ++i) body(i);
      return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
      });
    }
    for (auto& th : pool) th.join();
  };

  // Each group of consecutive evaluation dates shares one fit, calibrated on
  // the triangle at the first date's computation date.
  run_range(
      [&](int g) {
        const DateIndex tau = eval_dates[g * refit_every];
        const CountTriangle tri = triangle_from_events(events, tau + opts.gap_days);
        try {
          group_fits[g] = fit(tri, spec, opts.kind, nullptr, opts.fit, cal);
        } catch (const std::exception& e) {
          group_fits[g].message = e.what();
        }
      },
      n_groups);

  run_range(
      [&](int i) {
        BacktestRow& row = result.rows[i];
        const DateIndex tau = eval_dates[i];
        row.eval_date = tau;
        const DateIndex comp = tau + opts.gap_days;
        const DateIndex horizon = comp + opts.horizon_days;
        const FitResult& f = group_fits[i / refit_every];
        row.actual = actual_hidden_count(events, tau, horizon);
        if (!f.converged) {
          row.message = f.message.empty() ? "fit did not converge" : f.message;
          return;
        }
        try {
          const CountTriangle tri = triangle_from_events(events, comp);
          const PredictionReport report =
              predict_cells(tri, f, tau, comp, horizon, cal, opts.predict);
          // Hidden events observed inside the gap are known, not predicted.
          row.predicted =
              report.hidden_total + static_cast<double>(actual_hidden_count(events, tau, comp));
          row.fit_ok = true;
          if (row.actual != 0) row.pe = percentage_error(row.predicted, row.actual);
        } catch (const std::exception& e) {
          row.message = e.what();
        }
      },
      static_cast<int>(eval_dates.size()));

  summarize(result);
  return result;
}

}  // namespace hidden
