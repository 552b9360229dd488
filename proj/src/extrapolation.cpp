#include "fixcalc/extrapolation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fixcalc/error.hpp"
#include "fixcalc/parameter_algebra.hpp"

namespace fixcalc {

namespace {

constexpr double kFixTol = 1e-14;
constexpr double kDenominatorFloor = 1e-14;

double certified_nu_star(double lambda, double mu) {
  const CompositionVerdict v = nu_star(lambda, mu);
  if (!v.certified) {
    throw Error(ErrorKind::PreconditionViolated,
                "extrapolation needs lambda*mu < 4, got " + std::to_string(lambda * mu));
  }
  return *v.nu_star;
}

/// Quotient |a+b|^2 / ((1/l)|a|^2 + (1/m)|b|^2 + <a,b>) with the float guard:
/// returns 1 when the denominator is negligible against |a|^2 + |b|^2.
double guarded_quotient(double lambda, double mu, const Point& a, const Point& b, double nu) {
  const double aa = norm_sq(a);
  const double bb = norm_sq(b);
  const double denom = aa / lambda + bb / mu + inner(a, b);
  if (!(denom > kDenominatorFloor * (aa + bb))) return 1.0;
  const double num = norm_sq(a + b);
  if (num == 0.0) return 1.0;
  return std::min(num / denom, nu);
}

}  // namespace

bool is_numerically_fixed(const Point& residual, const Point& x) {
  return norm(residual) <= kFixTol * (1.0 + norm(x));
}

ExtrapolationState ExtrapolationState::at(const OperatorHandle& t, const OperatorHandle& u, double lambda, double mu,
                                          const Point& x, const Point& y) {
  const Point tx = t(x);
  const Point ty = t(y);
  return ExtrapolationState{tx - x, u(tx) - tx, ty - y, u(ty) - ty, lambda, mu};
}

StepRatio lemma_a_plus_b(double lambda, double mu, const Point& a, const Point& b) {
  certified_nu_star(lambda, mu);
  const double aa = norm_sq(a);
  const double bb = norm_sq(b);
  if (aa + bb == 0.0) throw Error(ErrorKind::PreconditionViolated, "step ratio needs |a|^2 + |b|^2 > 0");
  const double denom = aa / lambda + bb / mu + inner(a, b);
  const double num = norm_sq(a + b);
  return StepRatio{denom, num / denom, num == 0.0};
}

double tau_star_pair(const ExtrapolationState& s) {
  const double nu = certified_nu_star(s.lambda, s.mu);
  const Point da = s.a1 - s.a2;
  const Point db = s.b1 - s.b2;
  if (norm_sq(da) == 0.0 && norm_sq(db) == 0.0) return 1.0;
  return guarded_quotient(s.lambda, s.mu, da, db, nu);
}

double tau_star_common(const OperatorHandle& t, const OperatorHandle& u, double lambda, double mu, const Point& x) {
  const double nu = certified_nu_star(lambda, mu);
  const Point tx = t(x);
  const Point a1 = tx - x;
  const Point b1 = u(tx) - tx;
  if (norm_sq(a1) == 0.0 && norm_sq(b1) == 0.0) return 1.0;
  if (is_numerically_fixed(a1 + b1, x)) return 1.0;
  return guarded_quotient(lambda, mu, a1, b1, nu);
}

namespace {

void check_ball_affine(const PrimitiveSet& b, double lambda, const Point& x) {
  if (!b.is_affine()) throw Error(ErrorKind::PreconditionViolated, "second set must be a hyperplane");
  if (!(lambda >= 1.0 && lambda < 4.0)) {
    throw Error(ErrorKind::PreconditionViolated, "lambda must lie in [1, 4), got " + std::to_string(lambda));
  }
  if (!b.contains(x, 1e-9 * (1.0 + norm(x)))) {
    throw Error(ErrorKind::PreconditionViolated, "point " + x.to_string() + " is not in the hyperplane");
  }
}

}  // namespace

double tau_bar_ball_affine(const PrimitiveSet& a, const PrimitiveSet& b, double lambda, const Point& x) {
  check_ball_affine(b, lambda, x);
  require_same_dim(a.dim(), x.dim(), "tau_bar");
  const Point tx = x + lambda * (a.project(x) - x);
  const Point a1 = tx - x;
  const Point b1 = b.project(tx) - tx;
  if (is_numerically_fixed(a1 + b1, x)) return 1.0;
  const double aa = norm_sq(a1);
  const double bb = norm_sq(b1);
  const double denom = aa / lambda + bb + inner(a1, b1) - bb / lambda;
  if (!(denom > kDenominatorFloor * (aa + bb))) return 1.0;
  return norm_sq(a1 + b1) / denom;
}

double tau_hat_ball_affine(const PrimitiveSet& a, const PrimitiveSet& b, double lambda, const Point& x) {
  const double bar = tau_bar_ball_affine(a, b, lambda, x);
  return std::min(bar, *nu_star(lambda, 1.0).nu_star);
}

}  // namespace fixcalc
