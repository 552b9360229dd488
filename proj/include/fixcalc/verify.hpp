#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fixcalc/hilbert.hpp"
#include "fixcalc/operators.hpp"

namespace fixcalc {

enum class PropertyKind { NE, FNE, RFNE, SPC, Cutter, RelaxedCutter, Demicontraction, GeneralizedRelaxedCutter };

std::string_view to_string(PropertyKind kind) noexcept;
bool needs_fixed_points(PropertyKind kind) noexcept;

/// A defining inequality to be sampled. `parameter` is lambda for
/// RFNE/RelaxedCutter and alpha for SPC/Demicontraction; `tau` is used only
/// by GeneralizedRelaxedCutter.
struct PropertyClaim {
  PropertyKind kind;
  double parameter = 0.0;
  RelaxationFn tau;

  static PropertyClaim from(const ClassCertificate& cert);
  static PropertyClaim generalized(RelaxationFn tau);
  std::string to_string() const;
};

enum class Verdict { PassedSampling, ViolationFound };

std::string_view to_string(Verdict verdict) noexcept;

struct Witness {
  std::size_t index;
  Point x;
  std::optional<Point> y;  ///< second point for pair classes
  std::optional<Point> z;  ///< fixed point attaining the slack for fixed-point classes
  double slack;
};

struct CheckReport {
  std::string property;
  std::size_t samples = 0;
  double worst_slack = 0.0;
  std::vector<Witness> witnesses;  ///< up to 5 worst samples, ascending slack
  Verdict verdict = Verdict::PassedSampling;
  double tol = 1e-9;
};

inline constexpr double kViolationTolerance = 1e-9;
inline constexpr std::size_t kMaxWitnesses = 5;

/// Gaussian points around anchor points, at radii {0.1, 1, 10} by default.
class Sampler {
 public:
  Sampler(std::size_t dim, std::vector<Point> anchors, std::vector<double> radii = {0.1, 1.0, 10.0});

  /// Anchors at each set's anchor point plus a boundary-ish point of it.
  static Sampler around(const std::vector<PrimitiveSet>& sets, std::vector<double> radii = {0.1, 1.0, 10.0});

  std::size_t dim() const noexcept { return dim_; }
  Point draw(std::mt19937_64& rng) const;
  /// Second point of a pair: half the time independent of x, otherwise
  /// a perturbation of x.
  Point draw_partner(const Point& x, std::mt19937_64& rng) const;

 private:
  std::size_t dim_;
  std::vector<Point> anchors_;
  std::vector<double> radii_;
};

/// Slack of the claimed inequality (nonnegative when it holds).
double pair_slack(const OperatorHandle& t, const PropertyClaim& claim, const Point& x, const Point& y);
double fixed_point_slack(const OperatorHandle& t, const PropertyClaim& claim, const Point& x, const Point& z);

/// Samples the claimed inequality n times. Sample i uses its own generator
/// seeded from (seed, i), so the report does not depend on `threads`
/// (0 = hardware concurrency).
CheckReport check_property(const OperatorHandle& t, const PropertyClaim& claim, const Sampler& sampler,
                           const std::vector<Point>& fix_points, std::size_t n, std::uint64_t seed,
                           std::size_t threads = 0, double tol = kViolationTolerance);

CheckReport check_class(const OperatorHandle& t, const ClassCertificate& claim, const Sampler& sampler,
                        const std::vector<Point>& fix_points, std::size_t n, std::uint64_t seed,
                        std::size_t threads = 0, double tol = kViolationTolerance);

/// Recomputes a witness slack from scratch.
double reevaluate(const OperatorHandle& t, const PropertyClaim& claim, const Witness& w);

// ---------------------------------------------------------------------------
// Sharpness constructions and counterexamples

/// h(rho) for lambda*mu < 4 and rho in (lambda + mu - lambda*mu, nu*].
double optimality_h(double lambda, double mu, double rho);

/// Minimiser xi*(rho) of the limiting slack in the sharpness construction.
double sharpness_xi(double lambda, double mu, double rho);

struct SharpnessWitness {
  std::uint64_t k;
  Point x;
  double slack;
  double h;  ///< the k -> infinity limit of the slack
};

/// Scans k = 1, 2, 4, ... up to k_max for a negative rho-relaxed-cutter
/// slack of U_k T at x = (0, xi*). Throws NotFound (with h(rho)) if none.
SharpnessWitness sharpness_witness(double lambda, double mu, double rho, std::uint64_t k_max = 1'000'000);

/// rho <z_k - x, U_k T x - x> - |U_k T x - x|^2 with T = (P_H)_lambda,
/// U_k = (P_{H_k})_mu, H = {x2 = 0}, H_k = {x1 - k x2 = k}, z_k = (k, 0).
double sharpness_slack(double lambda, double mu, double rho, double k, const Point& x);

struct NotRelaxedCutterWitness {
  char regime;                   ///< 'a' for 4 < lambda*mu <= lambda+mu, 'b' for lambda*mu > lambda+mu
  std::optional<std::uint64_t> k;
  Point x;
  Point z;
  double inner;                  ///< <z - x, UTx - x>, negative
};

/// For lambda*mu > 4: a point x and a common fixed point z with
/// <z - x, UTx - x> < 0, so UT is not a relaxed cutter for any relaxation.
NotRelaxedCutterWitness not_relaxed_cutter_witness(double lambda, double mu, std::uint64_t k_max = 1'000'000);

struct FixCollapseWitness {
  OperatorHandle t;
  OperatorHandle u;
  double sigma;
  Point x;              ///< a point outside H, moved by T
  double max_residual;  ///< max |UT(x) - x| over the samples
  bool identity_holds;  ///< max_residual <= 1e-12
};

/// For lambda + mu <= lambda*mu: T = (P_H)_lambda, U = (P_H)_{sigma mu} with
/// sigma = lambda / (mu (lambda - 1)), so that UT = Id on R^dim.
FixCollapseWitness fix_collapse_witness(double lambda, double mu, std::size_t dim = 2, std::size_t samples = 100,
                                        std::uint64_t seed = 0);

struct FixVReport {
  bool sum_equals_product;          ///< lambda + mu == lambda*mu
  bool sets_intersect;
  bool fixed_point_found;
  std::optional<Point> fixed_point;
  double residual;                  ///< |V(x) - x| at the reported point
  std::vector<double> residuals;    ///< residual history of the iteration branch
  std::optional<Point> projected;   ///< P_A(fixed point) when A and B intersect
  bool consistent;                  ///< the observation matches the theory
};

/// V = (P_B)_mu (P_A)_lambda for hyperplanes A and B. If lambda + mu ==
/// lambda*mu, iterates the averaged operator V_{1/2} and compares the outcome
/// with whether A and B intersect. Otherwise, for disjoint parallel
/// hyperplanes, constructs the explicit fixed point.
FixVReport fixv_characterization(const PrimitiveSet& a, const PrimitiveSet& b, double lambda, double mu,
                                 std::size_t iters = 100);

}  // namespace fixcalc
