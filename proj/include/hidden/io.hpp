#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hidden/counts.hpp"

namespace hidden {

/// Events as parsed from disk, before conversion to day indices.
struct RawEvents {
  std::vector<std::pair<CivilDate, CivilDate>> rows;  // occurrence, observation
  long dropped_reversed = 0;
};

/// CSV with header `occurrence_date,observation_date`, ISO dates. Reversed
/// records (observation before occurrence) are dropped and counted; malformed
/// rows raise with the line number.
RawEvents read_events_csv(const std::string& path);

EventDataset to_dataset(const RawEvents& raw, const Calendar& cal);

void write_events_csv(const std::string& path, const EventDataset& events, const Calendar& cal);

/// Earliest occurrence date of the raw events; throws when empty.
CivilDate first_occurrence_date(const RawEvents& raw);

/// FNV-1a hash of a canonical text rendering, used to stamp artifacts.
std::uint64_t fnv1a(const std::string& text);

}  // namespace hidden
