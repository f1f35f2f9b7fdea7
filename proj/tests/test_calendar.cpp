#include <doctest.h>

#include <algorithm>
#include <set>

#include "hidden/calendar.hpp"

using namespace hidden;

namespace {

Calendar default_cal() { return Calendar({2000, 1, 1}, dutch_holidays(1999, 2010)); }

}  // namespace

TEST_CASE("serial/civil round trip is lossless over a long span") {
  for (long s = serial_from_civil({1995, 1, 1}); s <= serial_from_civil({2012, 12, 31}); ++s) {
    CHECK(serial_from_civil(civil_from_serial(s)) == s);
  }
  CHECK(serial_from_civil({1970, 1, 1}) == 0);
  CHECK(serial_from_civil({2000, 3, 1}) - serial_from_civil({2000, 2, 28}) == 2);  // leap year
}

TEST_CASE("ISO parsing and formatting") {
  CHECK(parse_iso_date("2004-08-31") == CivilDate{2004, 8, 31});
  CHECK(format_iso_date({2004, 8, 31}) == "2004-08-31");
  CHECK_THROWS(parse_iso_date("2004-02-30"));
  CHECK_THROWS(parse_iso_date("2004/08/31"));
  CHECK_THROWS(parse_iso_date("not a date"));
}

TEST_CASE("day_of_week matches the civil calendar") {
  Calendar cal = default_cal();
  CHECK(cal.day_of_week(cal.from_civil({2004, 8, 31})) == Weekday::Tuesday);
  CHECK(cal.day_of_week(cal.from_civil({2007, 1, 18})) == Weekday::Thursday);
  // 7-periodicity
  const DateIndex d = cal.from_civil({2003, 5, 14});
  CHECK(cal.day_of_week(d) == cal.day_of_week(d + 7));
  CHECK(cal.day_of_week(d) == Weekday::Wednesday);
}

TEST_CASE("Easter computus against known dates") {
  CHECK(easter_sunday(2000) == CivilDate{2000, 4, 23});
  CHECK(easter_sunday(2003) == CivilDate{2003, 4, 20});
  CHECK(easter_sunday(2004) == CivilDate{2004, 4, 11});
  CHECK(easter_sunday(2008) == CivilDate{2008, 3, 23});
}

TEST_CASE("holiday classes of the default Dutch calendar") {
  Calendar cal = default_cal();
  CHECK(cal.holiday_class(cal.from_civil({2003, 1, 1})) == HolidayClass::National);
  CHECK(cal.holiday_class(cal.from_civil({2003, 12, 31})) == HolidayClass::Unofficial);
  CHECK(cal.holiday_class(cal.from_civil({2003, 4, 18})) == HolidayClass::Unofficial);  // Good Friday
  CHECK(cal.holiday_class(cal.from_civil({2003, 5, 29})) == HolidayClass::National);  // Ascension
  CHECK(cal.holiday_class(cal.from_civil({2003, 6, 9})) == HolidayClass::National);  // Pentecost Mon
  CHECK(cal.holiday_class(cal.from_civil({2003, 5, 14})) == HolidayClass::None);  // plain Wednesday
  const HolidayCalendar hc = dutch_holidays(1999, 2010);
  for (long s : hc.national) CHECK(hc.unofficial.count(s) == 0);
}

TEST_CASE("effect widths and column counts") {
  CHECK(effect_width({EffectKind::Intercept, {}, {}}) == 1);
  CHECK(effect_width({EffectKind::OccurrenceDayOfMonth, {}, {}}) == 30);
  CHECK(effect_width({EffectKind::OccurrenceMonth, {}, {}}) == 11);
  CHECK(effect_width({EffectKind::ReportingHoliday, {}, {}}) == 2);
  CHECK(effect_width({EffectKind::ReportingDowFirstWeek, {}, {}}) == 48);
  CHECK(effect_width({EffectKind::ReportingDow, {}, {}}) == 6);
  CHECK(effect_width({EffectKind::DelayBins, {0, 1, 4}, {}}) == 2);
  CHECK(effect_width({EffectKind::ReportingDow, {}, DateIndex{100}}) == 12);
  CHECK_THROWS(effect_width({EffectKind::DelayBins, {1, 4}, {}}));

  CovariateSpec spec;
  spec.effects = {{EffectKind::Intercept, {}, {}},
                  {EffectKind::ReportingDow, {}, {}},
                  {EffectKind::ReportingHoliday, {}, {}}};
  CHECK(spec.columns() == 9);
  CHECK(spec.column_names().size() == 9);
}

TEST_CASE("design vector encodes reference levels as zero") {
  Calendar cal = default_cal();
  CovariateSpec spec;
  spec.effects = {{EffectKind::ReportingDow, {}, {}},
                  {EffectKind::ReportingHoliday, {}, {}},
                  {EffectKind::DelayBins, {0, 3}, {}}};
  // Monday report, non-holiday, delay in the first bin -> all-zero vector.
  const DateIndex t = cal.from_civil({2003, 5, 12});  // Monday
  const DesignVector x = design_vector(t, t, spec, cal);
  CHECK(std::all_of(x.values.begin(), x.values.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("dow-by-first-week interaction uses per-day columns then a pooled block") {
  Calendar cal = default_cal();
  CovariateSpec spec;
  spec.effects = {{EffectKind::ReportingDowFirstWeek, {}, {}}};
  const DateIndex thu = cal.from_civil({2003, 5, 15});  // Thursday
  // s = t + 2 is a Saturday in the first week: the (delay 2, Saturday) column.
  DesignVector x = design_vector(thu, thu + 2, spec, cal);
  int active = 0, where = -1;
  for (int i = 0; i < static_cast<int>(x.values.size()); ++i) {
    if (x.values[i] != 0.0) {
      ++active;
      where = i;
    }
  }
  CHECK(active == 1);
  CHECK(where == 2 * 6 + 4);  // delay class 2, Saturday (Tue..Sun -> 4)
  // Delays of a week or more share the pooled block.
  x = design_vector(thu, thu + 9, spec, cal);  // Saturday, delay 9
  active = 0;
  for (int i = 0; i < static_cast<int>(x.values.size()); ++i) {
    if (x.values[i] != 0.0) {
      ++active;
      where = i;
    }
  }
  CHECK(active == 1);
  CHECK(where == 7 * 6 + 4);
  // Monday reference produces no column in any delay class.
  const DesignVector ref = design_vector(thu, thu + 4, spec, cal);  // Monday, delay 4
  CHECK(std::all_of(ref.values.begin(), ref.values.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("national holiday sets only the national indicator") {
  Calendar cal = default_cal();
  CovariateSpec spec;
  spec.effects = {{EffectKind::ReportingHoliday, {}, {}}};
  const DateIndex t = cal.from_civil({2002, 12, 20});
  const DesignVector x = design_vector(t, cal.from_civil({2002, 12, 25}), spec, cal);
  CHECK(x.values == std::vector<double>{1.0, 0.0});
  const DesignVector y = design_vector(t, cal.from_civil({2002, 12, 31}), spec, cal);
  CHECK(y.values == std::vector<double>{0.0, 1.0});
}

TEST_CASE("breakpoint routes columns to the pre or post block by observation date") {
  Calendar cal = default_cal();
  const DateIndex bp = cal.from_civil({2003, 1, 1});
  CovariateSpec spec;
  spec.effects = {{EffectKind::ReportingDow, {}, bp}};
  const DateIndex t = cal.from_civil({2002, 12, 27});
  const DateIndex sat_pre = cal.from_civil({2002, 12, 28});
  const DateIndex sat_post = cal.from_civil({2003, 1, 4});
  std::vector<int> cols;
  active_columns(spec, cal, t, sat_pre, cols);
  CHECK(cols == std::vector<int>{4});
  active_columns(spec, cal, t, sat_post, cols);
  CHECK(cols == std::vector<int>{6 + 4});
  const auto names = spec.column_names();
  CHECK(names[4] == "pre:dow:Sat");
  CHECK(names[10] == "post:dow:Sat");
}

TEST_CASE("occurrence effects depend on t, reporting effects on s") {
  Calendar cal = default_cal();
  CovariateSpec spec;
  spec.effects = {{EffectKind::OccurrenceMonth, {}, {}}, {EffectKind::OccurrenceDayOfMonth, {}, {}}};
  const DateIndex t = cal.from_civil({2003, 3, 2});  // March, day 2 (reference day)
  std::vector<int> cols;
  active_columns(spec, cal, t, t + 40, cols);
  CHECK(cols == std::vector<int>{1});  // March is the second non-reference month
  const DateIndex jan1 = cal.from_civil({2003, 1, 5});
  active_columns(spec, cal, jan1, jan1, cols);
  CHECK(cols == std::vector<int>{11 + 3});  // January reference month; day 5 -> local 3
}

TEST_CASE("active columns reject reversed pairs and stay sorted") {
  Calendar cal = default_cal();
  CovariateSpec spec;
  spec.effects = {{EffectKind::Intercept, {}, {}},
                  {EffectKind::ReportingDow, {}, {}},
                  {EffectKind::ReportingHoliday, {}, {}}};
  const DateIndex t = cal.from_civil({2003, 5, 12});
  std::vector<int> cols;
  CHECK_THROWS(active_columns(spec, cal, t, t + -1, cols));
  active_columns(spec, cal, t, cal.from_civil({2003, 12, 25}), cols);
  CHECK(std::is_sorted(cols.begin(), cols.end()));
  CHECK(cols.front() == 0);  // intercept always active
}

TEST_CASE("holiday file round trip") {
  const HolidayCalendar hc = dutch_holidays(2002, 2004);
  const std::string path = "test_holidays_roundtrip.txt";
  save_holiday_file(hc, path);
  const HolidayCalendar back = load_holiday_file(path);
  CHECK(back.national == hc.national);
  CHECK(back.unofficial == hc.unofficial);
  std::remove(path.c_str());
}
