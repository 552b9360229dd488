#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace fixcalc {

/// A point of R^n. User-facing constructors reject empty or nonfinite
/// coordinates; arithmetic results are not re-validated so that iterative
/// methods can observe overflow and report it themselves (see is_finite()).
class Point {
 public:
  explicit Point(std::vector<double> coords);
  Point(std::initializer_list<double> coords);

  static Point zeros(std::size_t dim);
  static Point unit(std::size_t dim, std::size_t axis);

  std::size_t dim() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }
  std::span<double> mutable_coords() noexcept { return coords_; }

  bool is_finite() const noexcept;

  Point& operator+=(const Point& other);
  Point& operator-=(const Point& other);
  Point& operator*=(double s) noexcept;

  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend Point operator-(Point a) { return a *= -1.0; }

  friend bool operator==(const Point&, const Point&) = default;

  std::string to_string() const;

 private:
  struct Unchecked {};
  Point(Unchecked, std::vector<double> coords) : coords_(std::move(coords)) {}
  friend class LinearMap;

  std::vector<double> coords_;
};

double inner(const Point& x, const Point& y);
double norm_sq(const Point& x) noexcept;
double norm(const Point& x) noexcept;
double distance(const Point& x, const Point& y);

/// Throws DimensionMismatch when the two dimensions differ.
void require_same_dim(std::size_t a, std::size_t b, const char* context);

/// Standard normal sample in R^dim.
Point random_normal(std::size_t dim, std::mt19937_64& rng);

/// Dense real matrix acting R^cols -> R^rows.
class LinearMap {
 public:
  LinearMap(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static LinearMap from_rows(const std::vector<std::vector<double>>& rows);
  static LinearMap identity(std::size_t dim);
  static LinearMap diagonal(const std::vector<double>& diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Point apply(const Point& x) const;
  Point apply_adjoint(const Point& y) const;
  LinearMap transpose() const;
  bool is_zero() const noexcept;

  std::optional<double> cached_norm() const noexcept { return cached_norm_; }
  void set_norm(double value);

  /// Power iteration on A*A. The estimate is the running maximum over the
  /// iterates, so it is nondecreasing in `iters` for a fixed seed and never
  /// exceeds the spectral norm. `iters == 0` selects 10 * cols.
  double estimate_norm(std::size_t iters = 0, std::uint64_t seed = 0);

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
  std::optional<double> cached_norm_;
};

/// Free-function form of LinearMap::estimate_norm.
double estimate_norm(LinearMap& a, std::size_t iters = 0, std::uint64_t seed = 0);

}  // namespace fixcalc
