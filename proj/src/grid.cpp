#include "eklab/grid.hpp"

#include <sstream>

#include "eklab/errors.hpp"

namespace eklab {

namespace {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

void require_periodic_axis(double length, std::size_t points) {
  if (!(length > 0.0)) throw Error(ErrorKind::domain, "grid length must be positive");
  if (!is_power_of_two(points))
    throw Error(ErrorKind::domain, "periodic axes need a power-of-two point count, got " + std::to_string(points));
}

}  // namespace

const char* to_string(GridKind kind) noexcept {
  switch (kind) {
    case GridKind::periodic_1d: return "periodic-1d";
    case GridKind::periodic_2d: return "periodic-2d";
    case GridKind::halfline_1d: return "halfline-1d";
  }
  return "?";
}

Grid Grid::periodic1d(double length, std::size_t points) {
  require_periodic_axis(length, points);
  return Grid(GridKind::periodic_1d, {length, 0.0}, {points, 1});
}

Grid Grid::periodic2d(double length_x, double length_y, std::size_t points_x, std::size_t points_y) {
  require_periodic_axis(length_x, points_x);
  require_periodic_axis(length_y, points_y);
  return Grid(GridKind::periodic_2d, {length_x, length_y}, {points_x, points_y});
}

Grid Grid::halfline(double length, std::size_t points) {
  if (!(length > 0.0)) throw Error(ErrorKind::domain, "grid length must be positive");
  if (points < 8) throw Error(ErrorKind::domain, "half-line grids need at least 8 nodes");
  return Grid(GridKind::halfline_1d, {length, 0.0}, {points, 1});
}

double Grid::spacing(int axis) const {
  if (axis < 0 || axis >= dim()) throw Error(ErrorKind::dimension, "axis out of range");
  const auto n = static_cast<double>(points_[axis]);
  return periodic() ? length_[axis] / n : length_[axis] / (n - 1.0);
}

double Grid::cell_volume() const {
  double v = spacing(0);
  if (dim() == 2) v *= spacing(1);
  return v;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << " L=" << length_[0];
  if (dim() == 2) os << "x" << length_[1];
  os << " n=" << points_[0];
  if (dim() == 2) os << "x" << points_[1];
  return os.str();
}

}  // namespace eklab
