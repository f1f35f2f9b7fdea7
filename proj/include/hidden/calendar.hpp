#pragma once

#include <compare>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hidden {

/// Proleptic Gregorian calendar date.
struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  auto operator<=>(const CivilDate&) const = default;
};

/// Days since 1970-01-01 (negative before).
long serial_from_civil(const CivilDate& c);
CivilDate civil_from_serial(long serial);

CivilDate parse_iso_date(const std::string& text);
std::string format_iso_date(const CivilDate& c);

/// Gregorian computus (anonymous algorithm).
CivilDate easter_sunday(int year);

enum class Weekday { Monday = 0, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday };
enum class HolidayClass { None, National, Unofficial };

const char* weekday_name(Weekday w);

/// Day index relative to a dataset origin; the origin date maps to index 1.
struct DateIndex {
  int day = 1;
  auto operator<=>(const DateIndex&) const = default;
};

inline DateIndex operator+(DateIndex d, int n) { return DateIndex{d.day + n}; }
inline int operator-(DateIndex a, DateIndex b) { return a.day - b.day; }

/// National and unofficial holiday dates, stored as serial day numbers.
/// The two sets are disjoint; unofficial membership loses ties to national.
struct HolidayCalendar {
  std::set<long> national;
  std::set<long> unofficial;
};

/// Dutch holidays: fixed dates plus Easter-derived dates for [first_year, last_year].
/// Unofficial days are Good Friday and New Year's Eve.
HolidayCalendar dutch_holidays(int first_year = 1996, int last_year = 2010);

/// Holiday file: one `YYYY-MM-DD,national|unofficial` per line, `#` comments allowed.
HolidayCalendar load_holiday_file(const std::string& path);
void save_holiday_file(const HolidayCalendar& cal, const std::string& path);

/// Maps DateIndex to civil-calendar features for a fixed origin date.
class Calendar {
 public:
  explicit Calendar(CivilDate origin, HolidayCalendar holidays = {});

  DateIndex from_civil(const CivilDate& c) const;
  CivilDate to_civil(DateIndex d) const;
  const CivilDate& origin() const { return origin_; }

  Weekday day_of_week(DateIndex d) const;
  int day_of_month(DateIndex d) const;
  int month(DateIndex d) const;  // 1..12
  int year(DateIndex d) const;
  HolidayClass holiday_class(DateIndex d) const;

  const HolidayCalendar& holidays() const { return holidays_; }

 private:
  CivilDate origin_;
  long origin_serial_;
  HolidayCalendar holidays_;
};

enum class EffectKind {
  Intercept,
  OccurrenceDayOfMonth,
  OccurrenceMonth,
  ReportingHoliday,
  ReportingMonth,
  ReportingDowFirstWeek,
  ReportingDow,
  DelayBins,
};

/// One covariate effect. Categorical effects encode (levels - 1) indicator
/// columns against a fixed reference level: Monday for weekday effects,
/// January for month effects, day 2 for day of month, no-holiday for the
/// holiday effect and the first bin for delay bins. When `breakpoint` is set
/// the effect's columns are duplicated into a pre block (observation date
/// before the breakpoint) and a post block.
struct Effect {
  EffectKind kind = EffectKind::Intercept;
  std::vector<int> bin_starts;  // DelayBins only: first delay of each bin, bin_starts[0] == 0
  std::optional<DateIndex> breakpoint;
};

struct CovariateSpec {
  std::vector<Effect> effects;

  int columns() const;
  std::vector<std::string> column_names() const;
};

int effect_width(const Effect& e);

struct DesignVector {
  std::vector<double> values;
};

/// Columns with value 1 for the pair (t, s), ascending. Requires s >= t.
void active_columns(const CovariateSpec& spec, const Calendar& cal, DateIndex t, DateIndex s,
                    std::vector<int>& out);

DesignVector design_vector(DateIndex t, DateIndex s, const CovariateSpec& spec,
                           const Calendar& cal);

}  // namespace hidden
