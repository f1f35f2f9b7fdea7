#include "hidden/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hidden {

RawEvents read_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open events file: " + path);
  RawEvents raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line == "occurrence_date,observation_date") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected 'occurrence_date,observation_date'");
    }
    try {
      const CivilDate occ = parse_iso_date(line.substr(0, comma));
      const CivilDate obs = parse_iso_date(line.substr(comma + 1));
      if (obs < occ) {
        ++raw.dropped_reversed;
      } else {
        raw.rows.emplace_back(occ, obs);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (raw.rows.empty() && raw.dropped_reversed == 0) {
    throw std::runtime_error(path + ": no event records");
  }
  return raw;
}

EventDataset to_dataset(const RawEvents& raw, const Calendar& cal) {
  EventDataset data;
  data.dropped_reversed = raw.dropped_reversed;
  data.events.reserve(raw.rows.size());
  for (const auto& [occ, obs] : raw.rows) {
    data.events.push_back({cal.from_civil(occ), cal.from_civil(obs)});
  }
  return data;
}

void write_events_csv(const std::string& path, const EventDataset& events, const Calendar& cal) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write events file: " + path);
  out << "occurrence_date,observation_date\n";
  for (const auto& ev : events.events) {
    out << format_iso_date(cal.to_civil(ev.occurrence)) << ','
        << format_iso_date(cal.to_civil(ev.observation)) << '\n';
  }
}

CivilDate first_occurrence_date(const RawEvents& raw) {
  if (raw.rows.empty()) throw std::runtime_error("no event records");
  CivilDate first = raw.rows.front().first;
  for (const auto& [occ, obs] : raw.rows) first = std::min(first, occ);
  return first;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace hidden
