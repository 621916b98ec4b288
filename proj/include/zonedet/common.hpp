#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zonedet {

/// Bad input or precondition violation (CLI exit code 1).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File system / parse failure (CLI exit code 2).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: non-convergence, overflow of a guard (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Simple polygon given by its vertices in order (no self-intersection check).
struct Polygon {
  std::vector<Point> vertices;
};

/// Shoelace area (absolute value).
double polygon_area(const Polygon& poly);

/// Even-odd ray-cast point-in-polygon test. Boundary points count as inside.
bool polygon_contains(const Polygon& poly, Point p);

/// Axis-aligned bounding box as {min, max}.
std::pair<Point, Point> polygon_bbox(const Polygon& poly);

/// Throws ValidationError if the polygon has fewer than 3 vertices,
/// a non-finite coordinate, or zero area.
void validate_polygon(const Polygon& poly);

/// Switch between the serial reference implementation of a kernel and the
/// OpenMP one. Both produce bit-identical output.
enum class Exec { serial, parallel };

}  // namespace zonedet
