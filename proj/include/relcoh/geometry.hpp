#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

namespace relcoh {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

using Vec2 = Point2;

inline bool is_finite(const Point2& p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Marker returned by point location for points outside every cell.
inline constexpr std::size_t kOutside = std::numeric_limits<std::size_t>::max();

}  // namespace relcoh
