#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hidden/counts.hpp"
#include "hidden/timechange.hpp"

namespace hidden {

/// Counter-based generator: output i of a stream is a strong 64-bit mix of
/// (seed, stream, i), so any stream can be regenerated independently. Models
/// UniformRandomBitGenerator for use with the standard distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()();

  double uniform01();  // in (0, 1)

 private:
  std::uint64_t base_ = 0;
  std::uint64_t counter_ = 0;
};

struct MarkovOccurrence {
  double lambda_good = 100.0;
  double lambda_bad = 400.0;
  double p_good_to_bad = 0.1;
  double p_bad_to_good = 0.6;
};

struct ScenarioConfig {
  std::string id = "baseline";  // baseline | volatile | low-frequency | online-reporting
  CivilDate start{1998, 1, 1};
  CivilDate end{2004, 9, 5};  // inclusive; occurrences only, observations run past it

  double lambda = 100.0;  // constant intensity unless markov is set
  std::optional<MarkovOccurrence> markov;

  DistKind delay_kind = DistKind::Lognormal;
  double sigma = 1.0;

  // Reporting exposure alpha_s = base * sat^{[Sat] + [unofficial]} * sun^{[Sun] + [national]}.
  double base = 0.10;
  double saturday_mult = 0.20;
  double sunday_mult = 0.01;
  std::optional<CivilDate> breakpoint;  // exposure switches for s >= breakpoint
  double post_saturday_mult = 0.50;
  double post_sunday_mult = 0.20;

  std::uint64_t seed = 1;
};

/// The four named presets. `desk_scale` shrinks the intensity and date range
/// to keep repeated runs fast; the full-scale variant is the default layout.
ScenarioConfig scenario_preset(const std::string& id, bool desk_scale = false);

struct SimulatedDataset {
  EventDataset events;  // sorted by occurrence then observation date
  Calendar calendar;    // origin = config start date, Dutch holidays
};

/// Exposure of observation date s under the scenario formula. Independent of
/// the occurrence date; this is the simulator-side oracle of the fitted model.
double scenario_exposure(const ScenarioConfig& cfg, const Calendar& cal, DateIndex s);

/// Daily Poisson counts; for the Markov variant the chain starts in the good
/// state and is sampled on its own stream.
std::map<int, long> simulate_occurrences(const ScenarioConfig& cfg, const Calendar& cal,
                                         int days);

/// min{ s : sum_{v=t}^{s} alpha_v > u~ } with u~ drawn from the delay law.
DateIndex simulate_observation_date(DateIndex t, const ScenarioConfig& cfg, const Calendar& cal,
                                    CounterRng& rng);

SimulatedDataset simulate_scenario(const ScenarioConfig& cfg);

/// The covariate spec under which the scenario exposures are exactly
/// log-linear, and the matching true coefficient vector.
CovariateSpec scenario_spec(const ScenarioConfig& cfg, const Calendar& cal);
std::vector<double> scenario_truth(const ScenarioConfig& cfg, const Calendar& cal);

}  // namespace hidden
