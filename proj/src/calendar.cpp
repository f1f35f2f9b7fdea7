#include "hidden/calendar.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hidden {

long serial_from_civil(const CivilDate& c) {
  // Howard Hinnant's days_from_civil.
  int y = c.year - (c.month <= 2);
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (c.month + (c.month > 2 ? -3 : 9)) + 2) / 5 + c.day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097L + static_cast<long>(doe) - 719468L;
}

CivilDate civil_from_serial(long serial) {
  long z = serial + 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

CivilDate parse_iso_date(const std::string& text) {
  int y = 0, m = 0, d = 0;
  char dash1 = 0, dash2 = 0;
  std::istringstream in(text);
  in >> y >> dash1 >> m >> dash2 >> d;
  if (!in || dash1 != '-' || dash2 != '-' || m < 1 || m > 12 || d < 1 || d > 31) {
    throw std::invalid_argument("invalid ISO date: '" + text + "'");
  }
  CivilDate c{y, m, d};
  if (civil_from_serial(serial_from_civil(c)) != c) {
    throw std::invalid_argument("invalid calendar date: '" + text + "'");
  }
  return c;
}

std::string format_iso_date(const CivilDate& c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", c.year, c.month, c.day);
  return buf;
}

CivilDate easter_sunday(int year) {
  const int a = year % 19;
  const int b = year / 100;
  const int c = year % 100;
  const int d = b / 4;
  const int e = b % 4;
  const int f = (b + 8) / 25;
  const int g = (b - f + 1) / 3;
  const int h = (19 * a + b - d - g + 15) % 30;
  const int i = c / 4;
  const int k = c % 4;
  const int l = (32 + 2 * e + 2 * i - h - k) % 7;
  const int m = (a + 11 * h + 22 * l) / 451;
  const int month = (h + l - 7 * m + 114) / 31;
  const int day = ((h + l - 7 * m + 114) % 31) + 1;
  return CivilDate{year, month, day};
}

const char* weekday_name(Weekday w) {
  static const char* names[] = {"Monday", "Tuesday", "Wednesday", "Thursday",
                                "Friday", "Saturday", "Sunday"};
  return names[static_cast<int>(w)];
}

HolidayCalendar dutch_holidays(int first_year, int last_year) {
  HolidayCalendar cal;
  for (int y = first_year; y <= last_year; ++y) {
    const long easter = serial_from_civil(easter_sunday(y));
    cal.national.insert(serial_from_civil({y, 1, 1}));    // New Year
    cal.national.insert(easter);                          // Easter
    cal.national.insert(easter + 1);                      // Easter Monday
    cal.national.insert(serial_from_civil({y, 4, 30}));   // Queen's Day
    cal.national.insert(serial_from_civil({y, 5, 5}));    // Liberation Day
    cal.national.insert(easter + 39);                     // Ascension Day
    cal.national.insert(easter + 49);                     // Pentecost
    cal.national.insert(easter + 50);                     // Pentecost Monday
    cal.national.insert(serial_from_civil({y, 12, 25}));  // Christmas
    cal.national.insert(serial_from_civil({y, 12, 26}));  // Day after Christmas
    cal.unofficial.insert(easter - 2);                    // Good Friday
    cal.unofficial.insert(serial_from_civil({y, 12, 31}));  // New Year's Eve
  }
  for (long s : cal.national) cal.unofficial.erase(s);
  return cal;
}

HolidayCalendar load_holiday_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open holiday file: " + path);
  HolidayCalendar cal;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'date,class'");
    }
    const long serial = serial_from_civil(parse_iso_date(line.substr(0, comma)));
    const std::string cls = line.substr(comma + 1);
    if (cls == "national") {
      cal.national.insert(serial);
    } else if (cls == "unofficial") {
      cal.unofficial.insert(serial);
    } else {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown class '" + cls +
                               "'");
    }
  }
  for (long s : cal.national) {
    if (cal.unofficial.count(s)) {
      throw std::runtime_error(path + ": date listed as both national and unofficial: " +
                               format_iso_date(civil_from_serial(s)));
    }
  }
  return cal;
}

void save_holiday_file(const HolidayCalendar& cal, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write holiday file: " + path);
  out << "# holiday calendar: YYYY-MM-DD,national|unofficial\n";
  std::vector<std::pair<long, const char*>> rows;
  for (long s : cal.national) rows.emplace_back(s, "national");
  for (long s : cal.unofficial) rows.emplace_back(s, "unofficial");
  std::sort(rows.begin(), rows.end());
  for (const auto& [s, cls] : rows) {
    out << format_iso_date(civil_from_serial(s)) << ',' << cls << '\n';
  }
}

Calendar::Calendar(CivilDate origin, HolidayCalendar holidays)
    : origin_(origin), origin_serial_(serial_from_civil(origin)), holidays_(std::move(holidays)) {}

DateIndex Calendar::from_civil(const CivilDate& c) const {
  return DateIndex{static_cast<int>(serial_from_civil(c) - origin_serial_ + 1)};
}

CivilDate Calendar::to_civil(DateIndex d) const {
  return civil_from_serial(origin_serial_ + d.day - 1);
}

Weekday Calendar::day_of_week(DateIndex d) const {
  const long serial = origin_serial_ + d.day - 1;
  // 1970-01-01 was a Thursday.
  long w = (serial + 3) % 7;
  if (w < 0) w += 7;
  return static_cast<Weekday>(w);
}

int Calendar::day_of_month(DateIndex d) const { return to_civil(d).day; }
int Calendar::month(DateIndex d) const { return to_civil(d).month; }
int Calendar::year(DateIndex d) const { return to_civil(d).year; }

HolidayClass Calendar::holiday_class(DateIndex d) const {
  const long serial = origin_serial_ + d.day - 1;
  if (holidays_.national.count(serial)) return HolidayClass::National;
  if (holidays_.unofficial.count(serial)) return HolidayClass::Unofficial;
  return HolidayClass::None;
}

int effect_width(const Effect& e) {
  int base = 0;
  switch (e.kind) {
    case EffectKind::Intercept: base = 1; break;
    case EffectKind::OccurrenceDayOfMonth: base = 30; break;
    case EffectKind::OccurrenceMonth: base = 11; break;
    case EffectKind::ReportingHoliday: base = 2; break;
    case EffectKind::ReportingMonth: base = 11; break;
    case EffectKind::ReportingDowFirstWeek: base = 48; break;
    case EffectKind::ReportingDow: base = 6; break;
    case EffectKind::DelayBins:
      if (e.bin_starts.empty() || e.bin_starts.front() != 0) {
        throw std::invalid_argument("delay bins must start at delay 0");
      }
      base = static_cast<int>(e.bin_starts.size()) - 1;
      break;
  }
  return e.breakpoint ? 2 * base : base;
}

int CovariateSpec::columns() const {
  int n = 0;
  for (const auto& e : effects) n += effect_width(e);
  return n;
}

namespace {

const char* month_name(int m) {
  static const char* names[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  return names[m - 1];
}

// Local column index of the active level within one (non-breakpoint) block,
// or -1 when the active level is the reference.
int local_index(const Effect& e, const Calendar& cal, DateIndex t, DateIndex s) {
  switch (e.kind) {
    case EffectKind::Intercept:
      return 0;
    case EffectKind::OccurrenceDayOfMonth: {
      const int dom = cal.day_of_month(t);  // reference: day 2
      if (dom == 2) return -1;
      return dom == 1 ? 0 : dom - 2;
    }
    case EffectKind::OccurrenceMonth: {
      const int m = cal.month(t);  // reference: January
      return m == 1 ? -1 : m - 2;
    }
    case EffectKind::ReportingHoliday: {
      switch (cal.holiday_class(s)) {
        case HolidayClass::None: return -1;
        case HolidayClass::National: return 0;
        case HolidayClass::Unofficial: return 1;
      }
      return -1;
    }
    case EffectKind::ReportingMonth: {
      const int m = cal.month(s);
      return m == 1 ? -1 : m - 2;
    }
    case EffectKind::ReportingDowFirstWeek: {
      const int w = static_cast<int>(cal.day_of_week(s));  // reference: Monday per delay class
      if (w == 0) return -1;
      const int cls = std::min(s - t, 7);  // per-day classes for the first week, pooled >= 7
      return cls * 6 + (w - 1);
    }
    case EffectKind::ReportingDow: {
      const int w = static_cast<int>(cal.day_of_week(s));
      return w == 0 ? -1 : w - 1;
    }
    case EffectKind::DelayBins: {
      const int delay = s - t;
      const auto it = std::upper_bound(e.bin_starts.begin(), e.bin_starts.end(), delay);
      const int bin = static_cast<int>(it - e.bin_starts.begin()) - 1;
      return bin == 0 ? -1 : bin - 1;
    }
  }
  return -1;
}

void effect_names(const Effect& e, std::vector<std::string>& out) {
  std::vector<std::string> base;
  static const char* dows[] = {"Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
  switch (e.kind) {
    case EffectKind::Intercept:
      base.push_back("intercept");
      break;
    case EffectKind::OccurrenceDayOfMonth:
      for (int d = 1; d <= 31; ++d) {
        if (d != 2) base.push_back("occ_dom:" + std::to_string(d));
      }
      break;
    case EffectKind::OccurrenceMonth:
      for (int m = 2; m <= 12; ++m) base.push_back(std::string("occ_month:") + month_name(m));
      break;
    case EffectKind::ReportingHoliday:
      base.push_back("holiday:national");
      base.push_back("holiday:unofficial");
      break;
    case EffectKind::ReportingMonth:
      for (int m = 2; m <= 12; ++m) base.push_back(std::string("rep_month:") + month_name(m));
      break;
    case EffectKind::ReportingDowFirstWeek:
      for (int cls = 0; cls <= 7; ++cls) {
        const std::string tag = cls < 7 ? "d" + std::to_string(cls) : "d7plus";
        for (const char* w : dows) base.push_back("dow_week1:" + tag + ":" + w);
      }
      break;
    case EffectKind::ReportingDow:
      for (const char* w : dows) base.push_back(std::string("dow:") + w);
      break;
    case EffectKind::DelayBins:
      for (std::size_t b = 1; b < e.bin_starts.size(); ++b) {
        base.push_back("delay_bin:" + std::to_string(e.bin_starts[b]));
      }
      break;
  }
  if (e.breakpoint) {
    for (const auto& n : base) out.push_back("pre:" + n);
    for (const auto& n : base) out.push_back("post:" + n);
  } else {
    out.insert(out.end(), base.begin(), base.end());
  }
}

}  // namespace

std::vector<std::string> CovariateSpec::column_names() const {
  std::vector<std::string> names;
  for (const auto& e : effects) effect_names(e, names);
  return names;
}

void active_columns(const CovariateSpec& spec, const Calendar& cal, DateIndex t, DateIndex s,
                    std::vector<int>& out) {
  if (s < t) throw std::invalid_argument("active_columns: observation before occurrence");
  out.clear();
  int offset = 0;
  for (const auto& e : spec.effects) {
    const int width = effect_width(e);
    const int block = e.breakpoint ? width / 2 : width;
    int idx = local_index(e, cal, t, s);
    if (idx >= 0) {
      if (e.breakpoint && s >= *e.breakpoint) idx += block;
      out.push_back(offset + idx);
    }
    offset += width;
  }
}

DesignVector design_vector(DateIndex t, DateIndex s, const CovariateSpec& spec,
                           const Calendar& cal) {
  DesignVector x;
  x.values.assign(spec.columns(), 0.0);
  std::vector<int> cols;
  active_columns(spec, cal, t, s, cols);
  for (int c : cols) x.values[c] = 1.0;
  return x;
}

}  // namespace hidden
