#include "hidden/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hidden/binning.hpp"
#include "hidden/chainladder.hpp"
#include "hidden/io.hpp"
#include "hidden/likelihood.hpp"
#include "hidden/predict.hpp"
#include "hidden/simulate.hpp"

namespace hidden {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

CivilDate parse_date(const json& j, const std::string& what) {
  try {
    return parse_iso_date(j.get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception& e) {
    throw ConfigError("field '" + key + "': " + e.what());
  }
}

std::string stamp_hash(const json& config) {
  std::ostringstream hex;
  hex << std::hex << fnv1a(config.dump());
  return hex.str();
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

struct LoadedData {
  EventDataset events;
  Calendar calendar;
  json meta;
};

Calendar make_calendar(const json& config, const CivilDate& origin, int first_year,
                       int last_year) {
  const json data = config.value("data", json::object());
  const std::string holidays = get_or<std::string>(data, "holidays", "builtin-dutch");
  if (holidays == "builtin-dutch") {
    return Calendar(origin, dutch_holidays(first_year - 1, last_year + 10));
  }
  try {
    return Calendar(origin, load_holiday_file(holidays));
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

LoadedData load_data(const json& config) {
  const json data = config.value("data", json::object());
  if (!data.contains("events")) throw ConfigError("data.events path is required");
  RawEvents raw;
  try {
    raw = read_events_csv(data.at("events").get<std::string>());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  const CivilDate origin = data.contains("origin") ? parse_date(data.at("origin"), "data.origin")
                                                   : first_occurrence_date(raw);
  int first_year = origin.year, last_year = origin.year;
  for (const auto& [occ, obs] : raw.rows) {
    first_year = std::min(first_year, occ.year);
    last_year = std::max(last_year, obs.year);
  }
  Calendar cal = make_calendar(config, origin, first_year, last_year);
  LoadedData loaded{to_dataset(raw, cal), cal, json::object()};
  for (const auto& ev : loaded.events.events) {
    if (ev.occurrence.day < 1) throw DataError("event before the configured origin date");
  }
  loaded.meta["n_events"] = loaded.events.events.size();
  loaded.meta["dropped_reversed"] = loaded.events.dropped_reversed;
  loaded.meta["origin"] = format_iso_date(origin);
  return loaded;
}

DateIndex max_observation(const EventDataset& events) {
  DateIndex last{1};
  for (const auto& ev : events.events) last = std::max(last, ev.observation);
  return last;
}

EffectKind effect_kind_from_name(const std::string& name) {
  if (name == "intercept") return EffectKind::Intercept;
  if (name == "occ_day_of_month") return EffectKind::OccurrenceDayOfMonth;
  if (name == "occ_month") return EffectKind::OccurrenceMonth;
  if (name == "rep_holiday") return EffectKind::ReportingHoliday;
  if (name == "rep_month") return EffectKind::ReportingMonth;
  if (name == "rep_dow_first_week") return EffectKind::ReportingDowFirstWeek;
  if (name == "rep_dow") return EffectKind::ReportingDow;
  if (name == "delay_bins") return EffectKind::DelayBins;
  throw ConfigError("unknown effect kind: " + name);
}

DistKind dist_from_config(const json& config) {
  const std::string name =
      get_or<std::string>(config.value("model", json::object()), "distribution", "lognormal");
  if (name == "lognormal") return DistKind::Lognormal;
  if (name == "exponential") return DistKind::UnitExponential;
  throw ConfigError("unknown distribution: " + name);
}

BinOptions bin_options(const json& config) {
  const json b = config.value("binning", json::object());
  BinOptions opts;
  opts.min_singleton = get_or<int>(b, "min_singleton", opts.min_singleton);
  opts.log_threshold = get_or<double>(b, "log_threshold", opts.log_threshold);
  opts.width_growth = get_or<double>(b, "width_growth", opts.width_growth);
  opts.spike_factor = get_or<double>(b, "spike_factor", opts.spike_factor);
  return opts;
}

/// Builds the covariate spec; `delay_bins` effects marked `auto` take their
/// boundaries from the triangle's hazard table.
CovariateSpec spec_from_config(const json& config, const Calendar& cal,
                               const CountTriangle* tri) {
  const json model = config.value("model", json::object());
  if (!model.contains("effects")) throw ConfigError("model.effects is required");
  CovariateSpec spec;
  for (const json& ej : model.at("effects")) {
    Effect effect;
    effect.kind = effect_kind_from_name(get_or<std::string>(ej, "kind", ""));
    if (ej.contains("breakpoint")) {
      effect.breakpoint = cal.from_civil(parse_date(ej.at("breakpoint"), "effect breakpoint"));
    }
    if (effect.kind == EffectKind::DelayBins) {
      if (get_or<bool>(ej, "auto", false)) {
        if (!tri) throw ConfigError("auto delay bins need a fitted triangle");
        effect.bin_starts = propose_bins(hazard_table(*tri), bin_options(config)).starts;
      } else if (ej.contains("starts")) {
        effect.bin_starts = ej.at("starts").get<std::vector<int>>();
      } else {
        throw ConfigError("delay_bins effect needs 'starts' or 'auto': true");
      }
    }
    spec.effects.push_back(std::move(effect));
  }
  return spec;
}

FitOptions fit_options(const json& config) {
  const json f = config.value("fit", json::object());
  FitOptions opts;
  opts.max_iterations = get_or<int>(f, "max_iterations", opts.max_iterations);
  opts.gradient_tolerance = get_or<double>(f, "gradient_tolerance", opts.gradient_tolerance);
  opts.step_tolerance = get_or<double>(f, "step_tolerance", opts.step_tolerance);
  return opts;
}

json fit_to_json(const FitResult& result, const ConfidenceIntervals& ci) {
  json doc;
  doc["converged"] = result.converged;
  doc["iterations"] = result.iterations;
  doc["loglik"] = result.loglik;
  doc["score_norm"] = result.score_norm;
  doc["boundary_drift"] = result.boundary_drift;
  doc["collinear_columns"] = result.collinear_columns;
  doc["pinned_columns"] = result.pinned_columns;
  doc["message"] = result.message;
  if (result.sigma) doc["sigma"] = *result.sigma;
  if (ci.sigma_lower) doc["sigma_ci"] = {*ci.sigma_lower, *ci.sigma_upper};
  json coeffs = json::array();
  const auto names = result.model.spec.column_names();
  for (std::size_t i = 0; i < result.model.gamma.size(); ++i) {
    json row;
    row["name"] = names[i];
    row["gamma"] = result.model.gamma[i];
    if (ci.valid) {
      row["exp"] = ci.estimate[i];
      row["lower"] = ci.lower[i];
      row["upper"] = ci.upper[i];
      row["se"] = ci.std_error[i];
    }
    coeffs.push_back(row);
  }
  doc["coefficients"] = coeffs;
  return doc;
}

FitResult fit_from_config(const json& config, const CountTriangle& tri, const Calendar& cal) {
  const CovariateSpec spec = spec_from_config(config, cal, &tri);
  return fit(tri, spec, dist_from_config(config), nullptr, fit_options(config), cal);
}

json cmd_simulate(const json& config, const fs::path& out) {
  if (!config.contains("scenario")) throw ConfigError("scenario section is required");
  const json sj = config.at("scenario");
  ScenarioConfig cfg =
      scenario_preset(get_or<std::string>(sj, "id", "baseline"), get_or<bool>(sj, "desk_scale", false));
  if (sj.contains("start")) cfg.start = parse_date(sj.at("start"), "scenario.start");
  if (sj.contains("end")) cfg.end = parse_date(sj.at("end"), "scenario.end");
  cfg.lambda = get_or<double>(sj, "lambda", cfg.lambda);
  cfg.sigma = get_or<double>(sj, "sigma", cfg.sigma);
  cfg.seed = get_or<std::uint64_t>(config, "seed", get_or<std::uint64_t>(sj, "seed", cfg.seed));
  if (cfg.end < cfg.start) throw ConfigError("scenario end date before start date");

  const SimulatedDataset sim = simulate_scenario(cfg);
  write_events_csv((out / "events.csv").string(), sim.events, sim.calendar);
  save_holiday_file(sim.calendar.holidays(), (out / "holidays.txt").string());

  json summary;
  summary["command"] = "simulate";
  summary["scenario"] = cfg.id;
  summary["seed"] = cfg.seed;
  summary["start"] = format_iso_date(cfg.start);
  summary["end"] = format_iso_date(cfg.end);
  summary["n_events"] = sim.events.events.size();
  summary["events"] = (out / "events.csv").string();
  summary["holidays"] = (out / "holidays.txt").string();
  summary["config_echo"] = sj;
  return summary;
}

json cmd_fit(const json& config, const fs::path& out) {
  LoadedData data = load_data(config);
  const json f = config.value("fit", json::object());
  const DateIndex eval_date = f.contains("eval_date")
                                  ? data.calendar.from_civil(parse_date(f.at("eval_date"), "fit.eval_date"))
                                  : max_observation(data.events);
  const CountTriangle tri = triangle_from_events(data.events, eval_date);
  if (tri.empty()) throw DataError("no observed events at the evaluation date");
  const FitResult result = fit_from_config(config, tri, data.calendar);
  const ConfidenceIntervals ci = confidence_intervals(result);

  json summary = fit_to_json(result, ci);
  summary["command"] = "fit";
  summary["eval_date"] = format_iso_date(data.calendar.to_civil(eval_date));
  summary["data"] = data.meta;
  write_json(out / "fit.json", summary);

  std::ofstream table(out / "coefficients.csv");
  table << "name,gamma,exp,lower,upper,se\n";
  const auto names = result.model.spec.column_names();
  for (std::size_t i = 0; i < result.model.gamma.size(); ++i) {
    table << names[i] << ',' << result.model.gamma[i];
    if (ci.valid) {
      table << ',' << ci.estimate[i] << ',' << ci.lower[i] << ',' << ci.upper[i] << ','
            << ci.std_error[i];
    } else {
      table << ",,,,";
    }
    table << '\n';
  }
  if (!result.converged) {
    throw FitError(result.message.empty() ? "fit did not converge" : result.message);
  }
  return summary;
}

json cmd_bins(const json& config, const fs::path& out) {
  LoadedData data = load_data(config);
  const json f = config.value("fit", json::object());
  const DateIndex eval_date = f.contains("eval_date")
                                  ? data.calendar.from_civil(parse_date(f.at("eval_date"), "fit.eval_date"))
                                  : max_observation(data.events);
  const CountTriangle tri = triangle_from_events(data.events, eval_date);
  if (tri.empty()) throw DataError("no observed events at the evaluation date");
  const HazardTable table = hazard_table(tri);
  const DelayBins bins = propose_bins(table, bin_options(config));

  std::ofstream csv(out / "hazard.csv");
  csv << "delay,count_equal,count_geq,hazard_exposure\n";
  for (const auto& row : table.rows) {
    csv << row.delay << ',' << row.count_equal << ',' << row.count_geq << ','
        << row.hazard_exposure << '\n';
  }
  json summary;
  summary["command"] = "bins";
  summary["bin_starts"] = bins.starts;
  summary["n_bins"] = bins.starts.size();
  summary["max_delay"] = table.rows.empty() ? 0 : table.rows.back().delay;
  summary["data"] = data.meta;
  write_json(out / "bins.json", summary);
  return summary;
}

json cmd_predict(const json& config, const fs::path& out) {
  LoadedData data = load_data(config);
  const json p = config.value("predict", json::object());
  if (!p.contains("eval_date")) throw ConfigError("predict.eval_date is required");
  const DateIndex eval_date =
      data.calendar.from_civil(parse_date(p.at("eval_date"), "predict.eval_date"));
  const int gap = get_or<int>(p, "gap_days", 5);
  const int horizon_days = get_or<int>(p, "horizon_days", 365);
  const DateIndex comp = eval_date + gap;
  const DateIndex horizon = comp + horizon_days;

  json summary;
  summary["command"] = "predict";
  summary["eval_date"] = format_iso_date(data.calendar.to_civil(eval_date));
  summary["computation_date"] = format_iso_date(data.calendar.to_civil(comp));
  if (horizon < comp + 1) {
    summary["warning"] = "horizon before computation date; nothing to predict";
    summary["hidden_total"] = 0.0;
    write_json(out / "prediction.json", summary);
    return summary;
  }

  const CountTriangle tri = triangle_from_events(data.events, comp);
  if (tri.empty()) throw DataError("no observed events at the computation date");
  const FitResult result = fit_from_config(config, tri, data.calendar);
  if (!result.converged) {
    throw FitError(result.message.empty() ? "fit did not converge" : result.message);
  }
  PredictOptions popts;
  popts.reliability_floor = get_or<double>(p, "reliability_floor", popts.reliability_floor);
  const PredictionReport report =
      predict_cells(tri, result, eval_date, comp, horizon, data.calendar, popts);

  std::ofstream csv(out / "prediction_by_date.csv");
  csv << "date,expected_hidden\n";
  for (const auto& [day, expected] : report.by_future_date) {
    csv << format_iso_date(data.calendar.to_civil(DateIndex{day})) << ',' << expected << '\n';
  }
  json by_month = json::array();
  for (const auto& [ym, expected] : report.by_future_month) {
    by_month.push_back({{"year", ym.first}, {"month", ym.second}, {"expected", expected}});
  }
  summary["horizon"] = format_iso_date(data.calendar.to_civil(horizon));
  summary["hidden_total"] = report.hidden_total;
  summary["hidden_variance"] = report.hidden_variance;
  summary["unreliable_dates"] = report.unreliable.size();
  summary["by_month"] = by_month;
  summary["fit"] = {{"converged", result.converged}, {"iterations", result.iterations},
                    {"loglik", result.loglik}};
  summary["data"] = data.meta;
  write_json(out / "prediction.json", summary);
  return summary;
}

json cmd_backtest(const json& config, const fs::path& out) {
  LoadedData data = load_data(config);
  const json b = config.value("backtest", json::object());
  if (!b.contains("start") || !b.contains("end")) {
    throw ConfigError("backtest.start and backtest.end are required");
  }
  const DateIndex first = data.calendar.from_civil(parse_date(b.at("start"), "backtest.start"));
  const DateIndex last = data.calendar.from_civil(parse_date(b.at("end"), "backtest.end"));
  const int step = get_or<int>(b, "step_days", 28);
  if (step <= 0) throw ConfigError("backtest.step_days must be positive");
  std::vector<DateIndex> eval_dates;
  for (DateIndex d = first; !(last < d); d = d + step) eval_dates.push_back(d);
  if (eval_dates.empty()) throw ConfigError("backtest range contains no evaluation dates");

  BacktestOptions opts;
  opts.gap_days = get_or<int>(b, "gap_days", opts.gap_days);
  opts.horizon_days = get_or<int>(b, "horizon_days", opts.horizon_days);
  opts.refit_every = get_or<int>(b, "refit_every", opts.refit_every);
  opts.threads = get_or<int>(config, "threads", 1);
  opts.kind = dist_from_config(config);
  opts.fit = fit_options(config);

  const CountTriangle spec_tri =
      triangle_from_events(data.events, eval_dates.front() + opts.gap_days);
  if (spec_tri.empty()) throw DataError("no observed events at the first evaluation date");
  const CovariateSpec spec = spec_from_config(config, data.calendar, &spec_tri);

  const BacktestResult result = backtest(data.events, eval_dates, spec, data.calendar, opts);

  std::ofstream csv(out / "backtest.csv");
  csv << "eval_date,predicted,actual,pe,fit_ok,message\n";
  for (const auto& row : result.rows) {
    csv << format_iso_date(data.calendar.to_civil(row.eval_date)) << ',' << row.predicted << ','
        << row.actual << ',';
    if (row.pe) csv << *row.pe;
    csv << ',' << (row.fit_ok ? 1 : 0) << ',' << row.message << '\n';
  }
  json summary;
  summary["command"] = "backtest";
  summary["n_eval_dates"] = eval_dates.size();
  summary["valid"] = result.valid;
  summary["mean_pe"] = result.mean_pe;
  summary["sd_pe"] = result.sd_pe;
  summary["table"] = {{"model", "granular"},
                      {"mu_pe", result.mean_pe},
                      {"sigma_pe", result.sd_pe}};
  summary["data"] = data.meta;
  write_json(out / "backtest.json", summary);
  return summary;
}

json cmd_chainladder(const json& config, const fs::path& out) {
  LoadedData data = load_data(config);
  const json c = config.value("chainladder", json::object());
  const DateIndex eval_date =
      c.contains("eval_date")
          ? data.calendar.from_civil(parse_date(c.at("eval_date"), "chainladder.eval_date"))
          : max_observation(data.events);
  const std::string grid_name = get_or<std::string>(c, "grid", "year");
  GridKind grid;
  if (grid_name == "year") {
    grid = GridKind::CalendarYear;
  } else if (grid_name == "28day") {
    grid = GridKind::Days28;
  } else {
    throw ConfigError("chainladder.grid must be 'year' or '28day'");
  }
  DateIndex anchor{1};
  if (c.contains("anchor")) {
    anchor = data.calendar.from_civil(parse_date(c.at("anchor"), "chainladder.anchor"));
  }

  const AggregateTriangle tri = aggregate(data.events, eval_date, grid, data.calendar, anchor);
  const ChainLadderResult result = ibnr_estimate(tri, data.calendar);

  std::ofstream csv(out / "triangle.csv");
  csv << "origin_period";
  int max_dev = 0;
  for (const auto& [i, row] : tri.cum) max_dev = std::max(max_dev, static_cast<int>(row.size()));
  for (int j = 0; j < max_dev; ++j) csv << ",dev_" << j;
  csv << '\n';
  for (const auto& [i, row] : tri.cum) {
    csv << i;
    for (int j = 0; j < max_dev; ++j) {
      csv << ',';
      if (j < static_cast<int>(row.size())) csv << row[j];
    }
    csv << '\n';
  }

  json factors = json::array();
  for (const auto& f : result.factors) {
    factors.push_back(f ? json(*f) : json(nullptr));
  }
  json summary;
  summary["command"] = "chainladder";
  summary["grid"] = grid_name;
  summary["eval_date"] = format_iso_date(data.calendar.to_civil(eval_date));
  summary["factors"] = factors;
  summary["ibnr"] = result.ibnr;
  summary["ok"] = result.ok;
  summary["message"] = result.message;
  summary["data"] = data.meta;
  write_json(out / "chainladder.json", summary);
  return summary;
}

}  // namespace

json run_command(const std::string& command, const json& config, const std::string& out_dir) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  const fs::path out = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory: " + out.string());

  json summary;
  if (command == "simulate") {
    summary = cmd_simulate(config, out);
  } else if (command == "fit") {
    summary = cmd_fit(config, out);
  } else if (command == "bins") {
    summary = cmd_bins(config, out);
  } else if (command == "predict") {
    summary = cmd_predict(config, out);
  } else if (command == "backtest") {
    summary = cmd_backtest(config, out);
  } else if (command == "chainladder") {
    summary = cmd_chainladder(config, out);
  } else {
    throw ConfigError("unknown command: " + command);
  }
  summary["schema_version"] = kSchemaVersion;
  summary["config_hash"] = stamp_hash(config);
  if (config.contains("seed")) summary["seed"] = config.at("seed");
  write_json(out / (command + "_summary.json"), summary);
  return summary;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Hidden-event estimation from right-truncated observation data"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  for (const char* name :
       {"simulate", "fit", "bins", "predict", "backtest", "chainladder"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--threads", threads, "worker cap for backtests");
    sub->add_option("--out", out_dir, "output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file: " + config_path);
    json config;
    try {
      config = json::parse(in);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (seed) config["seed"] = *seed;
    if (threads) config["threads"] = *threads;
    const json summary = run_command(command, config, out_dir);
    std::cout << summary.dump(2) << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace hidden
