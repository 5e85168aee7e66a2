#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rhc::geo {

/// Degrees-to-miles factor: 0.1 degree of lat/lon difference is about 7 miles.
inline constexpr double kMilesPerDegree = 70.0;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

/// Throws std::invalid_argument unless both coordinates are finite and in range.
void validate(const GeoPoint& p);

/// Equal-area rectangular partition of a bounding box. Regions are numbered
/// row-major starting at the (min_lat, min_lon) corner; row follows latitude.
class RegionGrid {
 public:
  RegionGrid(double min_lat, double max_lat, double min_lon, double max_lon,
             int rows, int cols);

  double min_lat() const { return min_lat_; }
  double max_lat() const { return max_lat_; }
  double min_lon() const { return min_lon_; }
  double max_lon() const { return max_lon_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_) * cols_; }

  double cell_height() const { return (max_lat_ - min_lat_) / rows_; }
  double cell_width() const { return (max_lon_ - min_lon_) / cols_; }

  /// 0-based region index. Cells are half-open except the last row/column,
  /// which are closed; points outside the box clamp to the nearest cell.
  std::size_t assign_region(const GeoPoint& p) const;

  struct Cell {
    double lat_lo, lat_hi, lon_lo, lon_hi;
  };
  Cell cell(std::size_t region) const;
  GeoPoint center(std::size_t region) const;

  bool operator==(const RegionGrid&) const = default;

 private:
  double min_lat_, max_lat_, min_lon_, max_lon_;
  int rows_, cols_;
};

double manhattan_deg(const GeoPoint& p, const GeoPoint& q);

inline double deg_to_miles(double degrees, double miles_per_degree = kMilesPerDegree) {
  return degrees * miles_per_degree;
}

/// Per-taxi dispatch destinations: station(i, j) is where taxi i is sent
/// when it is dispatched to region j.
class StationTable {
 public:
  StationTable() = default;
  StationTable(std::size_t num_taxis, std::size_t num_regions)
      : num_regions_(num_regions), stations_(num_taxis * num_regions) {}

  std::size_t num_taxis() const {
    return num_regions_ == 0 ? 0 : stations_.size() / num_regions_;
  }
  std::size_t num_regions() const { return num_regions_; }

  const GeoPoint& station(std::size_t taxi, std::size_t region) const {
    return stations_.at(taxi * num_regions_ + region);
  }
  GeoPoint& station(std::size_t taxi, std::size_t region) {
    return stations_.at(taxi * num_regions_ + region);
  }

  bool operator==(const StationTable&) const = default;

 private:
  std::size_t num_regions_ = 0;
  std::vector<GeoPoint> stations_;
};

/// Draws every station uniformly inside its region's cell. Same seed, same table.
StationTable generate_stations(const RegionGrid& grid, std::size_t num_taxis,
                               std::uint64_t seed);

/// Uniform point inside the given region's cell, drawn from `u1`, `u2` in [0,1).
GeoPoint point_in_cell(const RegionGrid& grid, std::size_t region, double u1, double u2);

}  // namespace rhc::geo
