#include "taxi_rhc/trace.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace rhc::trace {

namespace {

template <typename T>
bool parse_number(const std::string& token, T& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<TraceRecord> parse_trace(std::istream& in, const std::string& taxi_id) {
  std::vector<TraceRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != 4)
      throw ParseError(taxi_id, line_no,
                       "expected 4 fields, got " + std::to_string(tokens.size()));
    TraceRecord rec;
    rec.taxi_id = taxi_id;
    if (!parse_number(tokens[0], rec.point.lat) || !parse_number(tokens[1], rec.point.lon))
      throw ParseError(taxi_id, line_no, "bad coordinate");
    try {
      geo::validate(rec.point);
    } catch (const std::invalid_argument& e) {
      throw ParseError(taxi_id, line_no, e.what());
    }
    if (tokens[2] == "0") {
      rec.occupied = false;
    } else if (tokens[2] == "1") {
      rec.occupied = true;
    } else {
      throw ParseError(taxi_id, line_no, "occupancy must be 0 or 1, got '" + tokens[2] + "'");
    }
    if (!parse_number(tokens[3], rec.timestamp))
      throw ParseError(taxi_id, line_no, "bad timestamp '" + tokens[3] + "'");
    records.push_back(std::move(rec));
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const TraceRecord& a, const TraceRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
  // Keep the last record of each run of equal timestamps.
  std::vector<TraceRecord> unique;
  unique.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i + 1 < records.size() && records[i + 1].timestamp == records[i].timestamp) continue;
    unique.push_back(std::move(records[i]));
  }
  return unique;
}

FleetTrace load_trace_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw std::runtime_error("trace directory not readable: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  FleetTrace fleet;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open trace file " + file.string());
    const std::string id = file.filename().string();
    fleet[id] = parse_trace(in, id);
  }
  return fleet;
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
  const auto old = out.precision(10);
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    out << it->point.lat << ' ' << it->point.lon << ' ' << (it->occupied ? 1 : 0) << ' '
        << it->timestamp << '\n';
  }
  out.precision(old);
}

std::vector<Event> detect_events(const std::vector<TraceRecord>& records,
                                 const geo::RegionGrid& grid) {
  std::vector<Event> events;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const auto& prev = records[k - 1];
    const auto& cur = records[k];
    if (prev.occupied == cur.occupied) continue;
    events.push_back({cur.occupied ? EventKind::kPickup : EventKind::kDropoff,
                      grid.assign_region(cur.point), cur.timestamp, cur.point});
  }
  return events;
}

std::int64_t DayClock::day_index(std::int64_t unix_time) const {
  const std::int64_t local = unix_time + utc_offset_seconds;
  return local >= 0 ? local / 86400 : -((-local + 86399) / 86400);
}

std::int64_t DayClock::second_of_day(std::int64_t unix_time) const {
  return unix_time + utc_offset_seconds - day_index(unix_time) * 86400;
}

int DayClock::slot(std::int64_t unix_time, int slot_minutes) const {
  const std::int64_t s = second_of_day(unix_time);
  const std::int64_t len = static_cast<std::int64_t>(slot_minutes) * 60;
  const std::int64_t h = (s + len - 1) / len;  // ceil, with second 0 in slot 1
  return static_cast<int>(std::max<std::int64_t>(h, 1));
}

int DayClock::weekday(std::int64_t day_index) const {
  // 1970-01-01 was a Thursday.
  const std::int64_t w = (day_index + 4) % 7;
  return static_cast<int>(w < 0 ? w + 7 : w);
}

bool DayClock::is_weekend(std::int64_t day_index) const {
  const int w = weekday(day_index);
  return w == 0 || w == 6;
}

void check_slot_minutes(int minutes) {
  if (minutes < 1 || 1440 % minutes != 0)
    throw std::invalid_argument("slot length " + std::to_string(minutes) +
                                " minutes must divide 1440");
}

SlotCounts aggregate_counts(const std::vector<Event>& events, int slot_minutes,
                            std::size_t num_regions, const DayClock& clock,
                            const std::vector<std::int64_t>& days_present) {
  check_slot_minutes(slot_minutes);
  SlotCounts counts;
  counts.slot_minutes = slot_minutes;
  counts.num_regions = num_regions;
  const auto slots = static_cast<std::size_t>(counts.num_slots());

  std::set<std::int64_t> days(days_present.begin(), days_present.end());
  for (const auto& e : events) days.insert(clock.day_index(e.timestamp));
  std::map<std::int64_t, std::size_t> position;
  for (std::int64_t d : days) {
    position[d] = counts.days.size();
    counts.days.push_back({d, Matrix(slots, num_regions), Matrix(slots, num_regions)});
  }
  for (const auto& e : events) {
    if (e.region >= num_regions) throw std::out_of_range("event region outside the grid");
    auto& day = counts.days[position.at(clock.day_index(e.timestamp))];
    const auto h = static_cast<std::size_t>(clock.slot(e.timestamp, slot_minutes)) - 1;
    (e.kind == EventKind::kPickup ? day.pickups : day.dropoffs)(h, e.region) += 1.0;
  }
  return counts;
}

std::vector<std::int64_t> days_in_trace(const FleetTrace& trace, const DayClock& clock) {
  std::set<std::int64_t> days;
  for (const auto& [id, records] : trace)
    for (const auto& r : records) days.insert(clock.day_index(r.timestamp));
  return {days.begin(), days.end()};
}

Matrix TransitionCounts::total(int slot) const {
  Matrix sum(num_regions, num_regions);
  for (const auto& day : days) {
    const auto& m = day.per_slot.at(static_cast<std::size_t>(slot) - 1);
    for (std::size_t i = 0; i < num_regions; ++i)
      for (std::size_t j = 0; j < num_regions; ++j) sum(i, j) += m(i, j);
  }
  return sum;
}

TransitionCounts count_transitions(const FleetTrace& trace, int slot_minutes,
                                   const geo::RegionGrid& grid, const DayClock& clock,
                                   const std::vector<std::int64_t>& days_present) {
  check_slot_minutes(slot_minutes);
  TransitionCounts counts;
  counts.slot_minutes = slot_minutes;
  counts.num_regions = grid.size();

  struct Trip {
    std::size_t from, to;
    std::int64_t start;
  };
  std::vector<Trip> trips;
  for (const auto& [id, records] : trace) {
    bool open = false;
    Trip current{};
    for (const auto& e : detect_events(records, grid)) {
      if (e.kind == EventKind::kPickup) {
        open = true;
        current = {e.region, 0, e.timestamp};
      } else if (open) {
        current.to = e.region;
        trips.push_back(current);
        open = false;
      }
    }
  }

  std::set<std::int64_t> days(days_present.begin(), days_present.end());
  for (const auto& t : trips) days.insert(clock.day_index(t.start));
  std::map<std::int64_t, std::size_t> position;
  const auto n = grid.size();
  for (std::int64_t d : days) {
    position[d] = counts.days.size();
    counts.days.push_back(
        {d, std::vector<Matrix>(static_cast<std::size_t>(counts.num_slots()), Matrix(n, n))});
  }
  for (const auto& t : trips) {
    auto& day = counts.days[position.at(clock.day_index(t.start))];
    const auto h = static_cast<std::size_t>(clock.slot(t.start, slot_minutes)) - 1;
    day.per_slot[h](t.from, t.to) += 1.0;
  }
  return counts;
}

double trace_mileage(const std::vector<TraceRecord>& records, MileageFilter filter,
                     double miles_per_degree) {
  double degrees = 0.0;
  for (std::size_t k = 1; k < records.size(); ++k) {
    const bool occupied = records[k - 1].occupied;
    if (filter == MileageFilter::kVacant && occupied) continue;
    if (filter == MileageFilter::kOccupied && !occupied) continue;
    degrees += geo::manhattan_deg(records[k - 1].point, records[k].point);
  }
  return geo::deg_to_miles(degrees, miles_per_degree);
}

void write_slot_counts_csv(std::ostream& out, const SlotCounts& counts) {
  out << "# taxi-rhc slot_counts v1 slot_minutes=" << counts.slot_minutes
      << " days=" << counts.days.size() << '\n';
  out << "slot,region,pickups,dropoffs\n";
  for (int h = 1; h <= counts.num_slots(); ++h) {
    for (std::size_t j = 0; j < counts.num_regions; ++j) {
      double p = 0.0, d = 0.0;
      for (const auto& day : counts.days) {
        p += day.pickups(static_cast<std::size_t>(h) - 1, j);
        d += day.dropoffs(static_cast<std::size_t>(h) - 1, j);
      }
      out << h << ',' << j + 1 << ',' << p << ',' << d << '\n';
    }
  }
}

void write_transition_counts_csv(std::ostream& out, const TransitionCounts& counts) {
  out << "# taxi-rhc transition_counts v1 slot_minutes=" << counts.slot_minutes
      << " days=" << counts.days.size() << '\n';
  out << "slot,from,to,count\n";
  for (int h = 1; h <= counts.num_slots(); ++h) {
    const Matrix total = counts.total(h);
    for (std::size_t i = 0; i < counts.num_regions; ++i)
      for (std::size_t j = 0; j < counts.num_regions; ++j)
        if (total(i, j) != 0.0) out << h << ',' << i + 1 << ',' << j + 1 << ',' << total(i, j) << '\n';
  }
}

}  // namespace rhc::trace
