#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fixcalc/hilbert.hpp"

namespace fixcalc {

/// {x : <normal, x> = offset}
struct Hyperplane {
  Point normal;
  double offset;
};

/// {x : <normal, x> <= offset}
struct Halfspace {
  Point normal;
  double offset;
};

struct Ball {
  Point center;
  double radius;
};

struct Box {
  Point lower;
  Point upper;
};

/// Closed convex set with a closed-form metric projection.
class PrimitiveSet {
 public:
  using Shape = std::variant<Hyperplane, Halfspace, Ball, Box>;

  static PrimitiveSet hyperplane(Point normal, double offset);
  static PrimitiveSet halfspace(Point normal, double offset);
  static PrimitiveSet ball(Point center, double radius);
  static PrimitiveSet box(Point lower, Point upper);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t dim() const noexcept;
  bool is_affine() const noexcept { return std::holds_alternative<Hyperplane>(shape_); }

  Point project(const Point& x) const;
  bool contains(const Point& x, double tol = 1e-10) const;
  /// Distance from x to the set.
  double distance_to(const Point& x) const { return distance(x, project(x)); }
  /// A point of the set near which samplers should concentrate.
  Point anchor() const;
  std::string describe() const;

 private:
  explicit PrimitiveSet(Shape shape) : shape_(std::move(shape)) {}
  Shape shape_;
};

Point project(const PrimitiveSet& set, const Point& x);

/// Intersection of primitive sets; an empty list denotes the whole space.
class FixSet {
 public:
  explicit FixSet(std::size_t dim, std::vector<PrimitiveSet> sets = {});

  static FixSet whole_space(std::size_t dim) { return FixSet(dim); }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<PrimitiveSet>& sets() const noexcept { return sets_; }
  bool is_whole_space() const noexcept { return sets_.empty(); }

  bool contains(const Point& x, double tol = 1e-9) const;
  /// Approximate projection onto the intersection (Dykstra's algorithm).
  /// Returns nullopt when the result does not land in every set within tol,
  /// e.g. for an empty intersection.
  std::optional<Point> nearest(const Point& x, double tol = 1e-9, std::size_t max_sweeps = 20000) const;

  FixSet intersect(const FixSet& other) const;

 private:
  std::size_t dim_;
  std::vector<PrimitiveSet> sets_;
};

enum class CertKind { NE, FNE, Cutter, RFNE, SPC, RelaxedCutter, Demicontraction };

/// Operator-class certificate. Every kind maps to an equivalent relaxation
/// parameter: pair classes (NE, FNE, RFNE, SPC) to the RFNE lambda, and all
/// kinds to the relaxed-cutter lambda they imply when a fixed point exists.
class ClassCertificate {
 public:
  static ClassCertificate ne() { return {CertKind::NE, 2.0}; }
  static ClassCertificate fne() { return {CertKind::FNE, 1.0}; }
  static ClassCertificate cutter() { return {CertKind::Cutter, 1.0}; }
  static ClassCertificate rfne(double lambda);
  static ClassCertificate spc(double alpha);
  static ClassCertificate relaxed_cutter(double lambda);
  static ClassCertificate demicontraction(double alpha);

  CertKind kind() const noexcept { return kind_; }
  /// lambda for NE/FNE/Cutter/RFNE/RelaxedCutter, alpha for SPC/Demicontraction.
  double parameter() const noexcept { return param_; }

  bool is_pair_class() const noexcept;
  /// Equivalent relaxation parameter (RFNE lambda for pair classes,
  /// relaxed-cutter lambda otherwise).
  double relaxation() const;

  std::string to_string() const;
  friend bool operator==(const ClassCertificate&, const ClassCertificate&) = default;

 private:
  ClassCertificate(CertKind kind, double param) : kind_(kind), param_(param) {}
  CertKind kind_;
  double param_;
};

using EvalFn = std::function<Point(const Point&)>;
using RelaxationFn = std::function<double(const Point&)>;

/// Immutable evaluatable map R^n -> R^n with an optional class certificate
/// and an optional description of (a subset of) its fixed points. Copies
/// share the underlying evaluator.
class OperatorHandle {
 public:
  OperatorHandle(std::size_t dim, EvalFn eval, std::string label,
                 std::optional<ClassCertificate> certificate = std::nullopt,
                 std::optional<FixSet> fix_set = std::nullopt);

  Point operator()(const Point& x) const;

  std::size_t dim() const noexcept { return dim_; }
  const std::string& label() const noexcept { return label_; }
  const std::optional<ClassCertificate>& certificate() const noexcept { return certificate_; }
  const std::optional<FixSet>& fix_set() const noexcept { return fix_set_; }

  OperatorHandle with_certificate(std::optional<ClassCertificate> cert) const;
  OperatorHandle with_fix_set(std::optional<FixSet> fix) const;
  OperatorHandle with_label(std::string label) const;

 private:
  std::size_t dim_;
  std::shared_ptr<const EvalFn> eval_;
  std::string label_;
  std::optional<ClassCertificate> certificate_;
  std::optional<FixSet> fix_set_;
};

OperatorHandle identity(std::size_t dim);

/// Metric projection; certified FNE with the set as its fixed set.
OperatorHandle projection(const PrimitiveSet& set);

/// T_lambda = Id + lambda (T - Id). Throws InvalidArgument for lambda <= 0.
OperatorHandle relax(const OperatorHandle& t, double lambda);

/// T_sigma(x) = x + sigma(x) (T(x) - x). The certificate is dropped. Evaluation
/// throws NonFinite/InvalidArgument, naming the point, when sigma(x) is not a
/// positive finite number.
OperatorHandle generalized_relax(const OperatorHandle& t, RelaxationFn sigma);

/// outer o inner, with the certificate and fixed set derived from the
/// composition rules for relaxed operators.
OperatorHandle compose(const OperatorHandle& outer, const OperatorHandle& inner);

/// sum w_i T_i. Weights must be positive and sum to 1 within 1e-12.
OperatorHandle convex_combination(const std::vector<OperatorHandle>& ops, const std::vector<double>& weights);

/// x + A^*(S(Ax) - Ax) / ||A||^2, for S on R^rows. Requires a cached norm on A.
OperatorHandle landweber(const OperatorHandle& s, const LinearMap& a);

}  // namespace fixcalc
