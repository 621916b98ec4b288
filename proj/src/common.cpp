#include "zonedet/common.hpp"

#include <algorithm>
#include <cmath>

namespace zonedet {

double polygon_area(const Polygon& poly) {
  const auto& v = poly.vertices;
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % v.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * std::fabs(acc);
}

bool polygon_contains(const Polygon& poly, Point p) {
  const auto& v = poly.vertices;
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    // Edge hit counts as inside.
    const double cross =
        (v[j].x - v[i].x) * (p.y - v[i].y) - (v[j].y - v[i].y) * (p.x - v[i].x);
    if (cross == 0.0 && std::min(v[i].x, v[j].x) <= p.x && p.x <= std::max(v[i].x, v[j].x) &&
        std::min(v[i].y, v[j].y) <= p.y && p.y <= std::max(v[i].y, v[j].y)) {
      return true;
    }
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double x_int = v[i].x + (p.y - v[i].y) / (v[j].y - v[i].y) * (v[j].x - v[i].x);
      if (p.x < x_int) inside = !inside;
    }
  }
  return inside;
}

std::pair<Point, Point> polygon_bbox(const Polygon& poly) {
  Point lo = poly.vertices.front();
  Point hi = lo;
  for (const Point& p : poly.vertices) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  return {lo, hi};
}

void validate_polygon(const Polygon& poly) {
  if (poly.vertices.size() < 3) {
    throw ValidationError("polygon needs at least 3 vertices");
  }
  for (const Point& p : poly.vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ValidationError("polygon has a non-finite vertex");
    }
  }
  if (!(polygon_area(poly) > 0.0)) {
    throw ValidationError("polygon is degenerate (zero area)");
  }
}

}  // namespace zonedet
