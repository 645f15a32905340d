#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace eklab {

enum class GridKind { periodic_1d = 0, periodic_2d = 1, halfline_1d = 2 };

const char* to_string(GridKind kind) noexcept;

/// Uniform tensor grid. Periodic axes carry `points` nodes spanning one period
/// (spacing = length / points); the half-line carries a boundary node at x = 0
/// and a truncation node at x = length (spacing = length / (points - 1)).
class Grid {
 public:
  static Grid periodic1d(double length, std::size_t points);
  static Grid periodic2d(double length_x, double length_y, std::size_t points_x,
                         std::size_t points_y);
  static Grid halfline(double length, std::size_t points);

  GridKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return kind_ == GridKind::periodic_2d ? 2 : 1; }
  bool periodic() const noexcept { return kind_ != GridKind::halfline_1d; }

  std::size_t points(int axis = 0) const { return points_.at(axis); }
  double length(int axis = 0) const { return length_.at(axis); }
  double spacing(int axis = 0) const;
  std::size_t size() const noexcept { return kind_ == GridKind::periodic_2d ? points_[0] * points_[1] : points_[0]; }
  /// Product of spacings, the quadrature weight of an interior node.
  double cell_volume() const;

  /// Physical coordinate of node `i` along `axis`; periodic axes start at 0.
  double coordinate(int axis, std::size_t i) const { return spacing(axis) * static_cast<double>(i); }

  std::string describe() const;

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.kind_ == b.kind_ && a.points_ == b.points_ && a.length_ == b.length_;
  }
  friend bool operator!=(const Grid& a, const Grid& b) noexcept { return !(a == b); }

 private:
  Grid(GridKind kind, std::array<double, 2> length, std::array<std::size_t, 2> points)
      : kind_(kind), length_(length), points_(points) {}

  GridKind kind_ = GridKind::periodic_1d;
  std::array<double, 2> length_{1.0, 0.0};
  std::array<std::size_t, 2> points_{1, 1};
};

}  // namespace eklab
