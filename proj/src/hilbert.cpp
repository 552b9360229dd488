#include "fixcalc/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fixcalc/error.hpp"

namespace fixcalc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::NonFinite: return "nonfinite value";
    case ErrorKind::ZeroMap: return "zero linear map";
    case ErrorKind::MissingNorm: return "missing operator norm";
    case ErrorKind::CompositionUncertified: return "composition uncertified";
    case ErrorKind::MissingFixedPoints: return "missing fixed points";
    case ErrorKind::PreconditionViolated: return "precondition violated";
    case ErrorKind::NotFound: return "not found";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

namespace {

void validate_coords(const std::vector<double>& c) {
  if (c.empty()) throw Error(ErrorKind::InvalidArgument, "point must have dimension >= 1");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i])) {
      throw Error(ErrorKind::NonFinite, "point coordinate " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) { validate_coords(coords_); }

Point::Point(std::initializer_list<double> coords) : coords_(coords) { validate_coords(coords_); }

Point Point::zeros(std::size_t dim) {
  if (dim == 0) throw Error(ErrorKind::InvalidArgument, "point must have dimension >= 1");
  return Point(Unchecked{}, std::vector<double>(dim, 0.0));
}

Point Point::unit(std::size_t dim, std::size_t axis) {
  if (axis >= dim) throw Error(ErrorKind::InvalidArgument, "unit axis out of range");
  Point p = zeros(dim);
  p.coords_[axis] = 1.0;
  return p;
}

bool Point::is_finite() const noexcept {
  return std::all_of(coords_.begin(), coords_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_dim(std::size_t a, std::size_t b, const char* context) {
  if (a != b) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(context) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

Point& Point::operator+=(const Point& other) {
  require_same_dim(dim(), other.dim(), "point addition");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] += other.coords_[i];
  return *this;
}

Point& Point::operator-=(const Point& other) {
  require_same_dim(dim(), other.dim(), "point subtraction");
  for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] -= other.coords_[i];
  return *this;
}

Point& Point::operator*=(double s) noexcept {
  for (double& v : coords_) v *= s;
  return *this;
}

std::string Point::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < coords_.size(); ++i) os << (i ? ", " : "") << coords_[i];
  os << ')';
  return os.str();
}

double inner(const Point& x, const Point& y) {
  require_same_dim(x.dim(), y.dim(), "inner product");
  double s = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) s += x[i] * y[i];
  return s;
}

double norm_sq(const Point& x) noexcept {
  double s = 0.0;
  for (double v : x.coords()) s += v * v;
  return s;
}

double norm(const Point& x) noexcept { return std::sqrt(norm_sq(x)); }

double distance(const Point& x, const Point& y) { return norm(x - y); }

Point random_normal(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(dim);
  for (double& v : c) v = normal(rng);
  return Point(std::move(c));
}

LinearMap::LinearMap(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (rows == 0 || cols == 0) throw Error(ErrorKind::InvalidArgument, "linear map needs rows, cols >= 1");
  if (data_.size() != rows * cols) {
    throw Error(ErrorKind::DimensionMismatch, "linear map data has " + std::to_string(data_.size()) +
                                                  " entries, expected " + std::to_string(rows * cols));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "linear map entry is not finite");
  }
}

LinearMap LinearMap::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "linear map needs at least one row");
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw Error(ErrorKind::DimensionMismatch, "ragged matrix rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return LinearMap(rows.size(), cols, std::move(data));
}

LinearMap LinearMap::identity(std::size_t dim) {
  std::vector<double> data(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) data[i * dim + i] = 1.0;
  return LinearMap(dim, dim, std::move(data));
}

LinearMap LinearMap::diagonal(const std::vector<double>& diag) {
  const std::size_t n = diag.size();
  std::vector<double> data(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) data[i * n + i] = diag[i];
  return LinearMap(n, n, std::move(data));
}

Point LinearMap::apply(const Point& x) const {
  require_same_dim(cols_, x.dim(), "linear map apply");
  std::vector<double> out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) s += data_[r * cols_ + c] * x[c];
    out[r] = s;
  }
  return Point(Point::Unchecked{}, std::move(out));
}

Point LinearMap::apply_adjoint(const Point& y) const {
  require_same_dim(rows_, y.dim(), "linear map adjoint");
  std::vector<double> out(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out[c] += data_[r * cols_ + c] * y[r];
  }
  return Point(Point::Unchecked{}, std::move(out));
}

LinearMap LinearMap::transpose() const {
  std::vector<double> data(rows_ * cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) data[c * rows_ + r] = data_[r * cols_ + c];
  }
  return LinearMap(cols_, rows_, std::move(data));
}

bool LinearMap::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

void LinearMap::set_norm(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::InvalidArgument, "operator norm must be positive and finite");
  }
  cached_norm_ = value;
}

double LinearMap::estimate_norm(std::size_t iters, std::uint64_t seed) {
  if (is_zero()) throw Error(ErrorKind::ZeroMap, "cannot estimate the norm of the zero map");
  if (iters == 0) iters = 10 * cols_;
  std::mt19937_64 rng(seed);
  Point x = random_normal(cols_, rng);
  x *= 1.0 / norm(x);
  double best = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    Point y = apply_adjoint(apply(x));
    const double ny = norm(y);
    if (ny == 0.0) {
      // Landed in the kernel; restart from a fresh direction.
      x = random_normal(cols_, rng);
      x *= 1.0 / norm(x);
      continue;
    }
    // For unit x, ||A^T A x|| lower-bounds sigma_max^2.
    best = std::max(best, std::sqrt(ny));
    x = y * (1.0 / ny);
  }
  if (best == 0.0) best = norm(apply(x));
  cached_norm_ = best;
  return best;
}

double estimate_norm(LinearMap& a, std::size_t iters, std::uint64_t seed) {
  return a.estimate_norm(iters, seed);
}

}  // namespace fixcalc
