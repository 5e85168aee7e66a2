#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxi_rhc/geo.hpp"
#include "taxi_rhc/matrix.hpp"

namespace rhc::trace {

struct TraceRecord {
  std::string taxi_id;
  geo::GeoPoint point;
  bool occupied = false;
  std::int64_t timestamp = 0;  // unix seconds
};

/// Records of each taxi, ascending by timestamp; std::map keeps taxi ids ordered.
using FleetTrace = std::map<std::string, std::vector<TraceRecord>>;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses `lat lon occupied unix_time` lines of one taxi. Output is sorted by
/// timestamp; for duplicate timestamps the last line wins.
std::vector<TraceRecord> parse_trace(std::istream& in, const std::string& taxi_id);

/// Loads every regular file in `dir` as one taxi's trace (taxi id = file name).
FleetTrace load_trace_dir(const std::filesystem::path& dir);

/// Writes one taxi's records in the same 4-column format, newest first like
/// the cabspotting files.
void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);

enum class EventKind { kPickup, kDropoff };

struct Event {
  EventKind kind;
  std::size_t region;
  std::int64_t timestamp;
  geo::GeoPoint point;
};

/// One event per occupancy transition, located at the later record.
std::vector<Event> detect_events(const std::vector<TraceRecord>& records,
                                 const geo::RegionGrid& grid);

/// Local-day bookkeeping: `utc_offset_seconds` shifts unix time to local time.
struct DayClock {
  std::int64_t utc_offset_seconds = 0;

  std::int64_t day_index(std::int64_t unix_time) const;
  std::int64_t second_of_day(std::int64_t unix_time) const;
  /// 1-based slot in 1..1440/slot_minutes; second 0 of the day is slot 1.
  int slot(std::int64_t unix_time, int slot_minutes) const;
  /// 0 = Sunday ... 6 = Saturday.
  int weekday(std::int64_t day_index) const;
  bool is_weekend(std::int64_t day_index) const;
};

/// Throws std::invalid_argument unless minutes >= 1 and divides 1440.
void check_slot_minutes(int minutes);

/// Pickup/dropoff counts of one day: rows are slots (slot h at row h-1), columns regions.
struct DayCounts {
  std::int64_t day = 0;
  Matrix pickups;
  Matrix dropoffs;
};

struct SlotCounts {
  int slot_minutes = 60;
  std::size_t num_regions = 0;
  std::vector<DayCounts> days;  // ascending by day

  int num_slots() const { return 1440 / slot_minutes; }
};

/// Bins events by local day and slot. Days that appear in `days_present` but
/// have no events still get an all-zero entry.
SlotCounts aggregate_counts(const std::vector<Event>& events, int slot_minutes,
                            std::size_t num_regions, const DayClock& clock,
                            const std::vector<std::int64_t>& days_present = {});

/// All local days touched by any record of the trace.
std::vector<std::int64_t> days_in_trace(const FleetTrace& trace, const DayClock& clock);

/// Trajectory counts T(h2) of one day: one n x n matrix per slot.
struct DayTransitions {
  std::int64_t day = 0;
  std::vector<Matrix> per_slot;
};

struct TransitionCounts {
  int slot_minutes = 60;
  std::size_t num_regions = 0;
  std::vector<DayTransitions> days;

  int num_slots() const { return 1440 / slot_minutes; }
  /// Sum over days for one 1-based slot.
  Matrix total(int slot) const;
};

/// Counts completed occupied trips (pickup region -> dropoff region) binned
/// by pickup slot. Trips still open at the end of a taxi's trace are dropped.
TransitionCounts count_transitions(const FleetTrace& trace, int slot_minutes,
                                   const geo::RegionGrid& grid, const DayClock& clock,
                                   const std::vector<std::int64_t>& days_present = {});

enum class MileageFilter { kAll, kVacant, kOccupied };

/// Sum of per-segment Manhattan degrees converted to miles. A segment counts
/// as vacant/occupied by the state of its starting record.
double trace_mileage(const std::vector<TraceRecord>& records, MileageFilter filter,
                     double miles_per_degree = geo::kMilesPerDegree);

void write_slot_counts_csv(std::ostream& out, const SlotCounts& counts);
void write_transition_counts_csv(std::ostream& out, const TransitionCounts& counts);

}  // namespace rhc::trace
