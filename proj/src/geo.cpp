#include "taxi_rhc/geo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "taxi_rhc/seed.hpp"

namespace rhc::geo {

void validate(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon))
    throw std::invalid_argument("GeoPoint has non-finite coordinate");
  if (p.lat < -90.0 || p.lat > 90.0 || p.lon < -180.0 || p.lon > 180.0)
    throw std::invalid_argument("GeoPoint out of range: (" + std::to_string(p.lat) + ", " +
                                std::to_string(p.lon) + ")");
}

RegionGrid::RegionGrid(double min_lat, double max_lat, double min_lon, double max_lon,
                       int rows, int cols)
    : min_lat_(min_lat), max_lat_(max_lat), min_lon_(min_lon), max_lon_(max_lon),
      rows_(rows), cols_(cols) {
  if (!(std::isfinite(min_lat) && std::isfinite(max_lat) && std::isfinite(min_lon) &&
        std::isfinite(max_lon)))
    throw std::invalid_argument("grid bounds must be finite");
  if (!(min_lat < max_lat)) throw std::invalid_argument("grid requires min_lat < max_lat");
  if (!(min_lon < max_lon)) throw std::invalid_argument("grid requires min_lon < max_lon");
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid rows and cols must be >= 1");
}

namespace {

int bin(double v, double lo, double hi, int count) {
  if (!(v > lo)) return 0;
  if (v >= hi) return count - 1;
  const int k = static_cast<int>(std::floor((v - lo) / (hi - lo) * count));
  return std::clamp(k, 0, count - 1);
}

}  // namespace

std::size_t RegionGrid::assign_region(const GeoPoint& p) const {
  const int r = bin(p.lat, min_lat_, max_lat_, rows_);
  const int c = bin(p.lon, min_lon_, max_lon_, cols_);
  return static_cast<std::size_t>(r) * cols_ + c;
}

RegionGrid::Cell RegionGrid::cell(std::size_t region) const {
  if (region >= size()) throw std::out_of_range("region index out of range");
  const int r = static_cast<int>(region) / cols_;
  const int c = static_cast<int>(region) % cols_;
  return {min_lat_ + r * cell_height(), min_lat_ + (r + 1) * cell_height(),
          min_lon_ + c * cell_width(), min_lon_ + (c + 1) * cell_width()};
}

GeoPoint RegionGrid::center(std::size_t region) const {
  const Cell c = cell(region);
  return {(c.lat_lo + c.lat_hi) / 2.0, (c.lon_lo + c.lon_hi) / 2.0};
}

double manhattan_deg(const GeoPoint& p, const GeoPoint& q) {
  return std::abs(p.lat - q.lat) + std::abs(p.lon - q.lon);
}

GeoPoint point_in_cell(const RegionGrid& grid, std::size_t region, double u1, double u2) {
  const auto c = grid.cell(region);
  GeoPoint p{c.lat_lo + u1 * (c.lat_hi - c.lat_lo), c.lon_lo + u2 * (c.lon_hi - c.lon_lo)};
  // Rounding can land exactly on the upper edge, which belongs to the next cell.
  if (grid.assign_region(p) != region) p = grid.center(region);
  return p;
}

StationTable generate_stations(const RegionGrid& grid, std::size_t num_taxis,
                               std::uint64_t seed) {
  if (num_taxis < 1) throw std::invalid_argument("generate_stations needs num_taxis >= 1");
  StationTable table(num_taxis, grid.size());
  std::mt19937_64 rng(derive_seed(seed, "stations"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < num_taxis; ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double u1 = unit(rng);
      const double u2 = unit(rng);
      table.station(i, j) = point_in_cell(grid, j, u1, u2);
    }
  }
  return table;
}

}  // namespace rhc::geo
