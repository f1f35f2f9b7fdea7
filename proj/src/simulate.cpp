#include "hidden/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hidden {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kMarkovStream = 0xFFFFFFFFFFFFFFFFULL;

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : base_(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0x2545F4914F6CDD1DULL)) {}

CounterRng::result_type CounterRng::operator()() {
  return mix64(base_ + ++counter_ * kGolden);
}

double CounterRng::uniform01() {
  // 53 random bits into (0, 1), never returning the endpoints.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

ScenarioConfig scenario_preset(const std::string& id, bool desk_scale) {
  ScenarioConfig cfg;
  cfg.id = id;
  if (id == "baseline") {
    // defaults
  } else if (id == "volatile") {
    cfg.markov = MarkovOccurrence{};
  } else if (id == "low-frequency") {
    cfg.lambda = 2.0;
  } else if (id == "online-reporting") {
    cfg.breakpoint = CivilDate{2003, 1, 1};
  } else {
    throw std::invalid_argument("unknown scenario id: " + id);
  }
  if (desk_scale) {
    cfg.start = {2001, 1, 1};
    cfg.end = {2003, 9, 5};
    cfg.lambda = id == "low-frequency" ? 2.0 : 20.0;
    if (cfg.markov) {
      cfg.markov->lambda_good = 20.0;
      cfg.markov->lambda_bad = 80.0;
    }
  }
  return cfg;
}

double scenario_exposure(const ScenarioConfig& cfg, const Calendar& cal, DateIndex s) {
  const Weekday dow = cal.day_of_week(s);
  const HolidayClass hol = cal.holiday_class(s);
  int sat_class = (dow == Weekday::Saturday ? 1 : 0) + (hol == HolidayClass::Unofficial ? 1 : 0);
  int sun_class = (dow == Weekday::Sunday ? 1 : 0) + (hol == HolidayClass::National ? 1 : 0);
  double sat_mult = cfg.saturday_mult;
  double sun_mult = cfg.sunday_mult;
  if (cfg.breakpoint && !(s < cal.from_civil(*cfg.breakpoint))) {
    sat_mult = cfg.post_saturday_mult;
    sun_mult = cfg.post_sunday_mult;
  }
  return cfg.base * std::pow(sat_mult, sat_class) * std::pow(sun_mult, sun_class);
}

std::map<int, long> simulate_occurrences(const ScenarioConfig& cfg, const Calendar& cal,
                                         int days) {
  (void)cal;
  std::vector<double> intensity(days, cfg.lambda);
  if (cfg.markov) {
    const MarkovOccurrence& m = *cfg.markov;
    CounterRng chain(cfg.seed, kMarkovStream);
    bool good = true;  // the chain starts in the good state
    for (int i = 0; i < days; ++i) {
      intensity[i] = good ? m.lambda_good : m.lambda_bad;
      const double u = chain.uniform01();
      good = good ? u >= m.p_good_to_bad : u < m.p_bad_to_good;
    }
  }
  std::map<int, long> counts;
  for (int i = 0; i < days; ++i) {
    if (intensity[i] <= 0) continue;
    CounterRng rng(cfg.seed, 2 * static_cast<std::uint64_t>(i + 1));
    std::poisson_distribution<long> poisson(intensity[i]);
    const long n = poisson(rng);
    if (n > 0) counts[i + 1] = n;
  }
  return counts;
}

DateIndex simulate_observation_date(DateIndex t, const ScenarioConfig& cfg, const Calendar& cal,
                                    CounterRng& rng) {
  TimeChangedDistribution dist;
  dist.kind = cfg.delay_kind;
  dist.sigma = cfg.sigma;
  const double u = dist.quantile(rng.uniform01());
  double cum = 0.0;
  DateIndex s = t;
  for (;;) {
    cum += scenario_exposure(cfg, cal, s);
    if (cum > u) return s;
    s = s + 1;
  }
}

SimulatedDataset simulate_scenario(const ScenarioConfig& cfg) {
  if (cfg.end < cfg.start) throw std::invalid_argument("scenario: end before start");
  Calendar cal(cfg.start, dutch_holidays(cfg.start.year - 1, cfg.end.year + 10));
  const int days = static_cast<int>(serial_from_civil(cfg.end) - serial_from_civil(cfg.start)) + 1;

  SimulatedDataset out{EventDataset{}, cal};
  const std::map<int, long> counts = simulate_occurrences(cfg, cal, days);
  for (const auto& [tday, n] : counts) {
    const DateIndex t{tday};
    CounterRng rng(cfg.seed, 2 * static_cast<std::uint64_t>(tday) + 1);
    for (long k = 0; k < n; ++k) {
      out.events.events.push_back({t, simulate_observation_date(t, cfg, cal, rng)});
    }
  }
  std::sort(out.events.events.begin(), out.events.events.end(),
            [](const EventRecord& a, const EventRecord& b) {
              return a.occurrence != b.occurrence ? a.occurrence < b.occurrence
                                                  : a.observation < b.observation;
            });
  return out;
}

CovariateSpec scenario_spec(const ScenarioConfig& cfg, const Calendar& cal) {
  CovariateSpec spec;
  std::optional<DateIndex> bp;
  if (cfg.breakpoint) bp = cal.from_civil(*cfg.breakpoint);
  spec.effects.push_back({EffectKind::Intercept, {}, std::nullopt});
  spec.effects.push_back({EffectKind::ReportingDow, {}, bp});
  spec.effects.push_back({EffectKind::ReportingHoliday, {}, bp});
  return spec;
}

std::vector<double> scenario_truth(const ScenarioConfig& cfg, const Calendar& cal) {
  const CovariateSpec spec = scenario_spec(cfg, cal);
  std::vector<double> gamma(spec.columns(), 0.0);
  const bool bp = cfg.breakpoint.has_value();
  const int dow_block = 6;
  const int hol_off = 1 + (bp ? 2 : 1) * dow_block;
  auto fill = [&](double sat, double sun, int shift_dow, int shift_hol) {
    gamma[1 + shift_dow + 4] = std::log(sat);  // Saturday (Tue..Sun, zero-based from Tuesday)
    gamma[1 + shift_dow + 5] = std::log(sun);  // Sunday
    gamma[hol_off + shift_hol + 0] = std::log(sun);  // national holiday
    gamma[hol_off + shift_hol + 1] = std::log(sat);  // unofficial holiday
  };
  gamma[0] = std::log(cfg.base);
  fill(cfg.saturday_mult, cfg.sunday_mult, 0, 0);
  if (bp) fill(cfg.post_saturday_mult, cfg.post_sunday_mult, dow_block, 2);
  return gamma;
}

}  // namespace hidden
