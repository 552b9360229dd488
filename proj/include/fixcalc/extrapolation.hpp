#pragma once

#include "fixcalc/hilbert.hpp"
#include "fixcalc/operators.hpp"

namespace fixcalc {

/// Residual pieces of the composition UT at two points x and y:
/// a1 = T(x) - x, b1 = UT(x) - T(x), a2 = T(y) - y, b2 = UT(y) - T(y).
struct ExtrapolationState {
  Point a1;
  Point b1;
  Point a2;
  Point b2;
  double lambda;
  double mu;

  static ExtrapolationState at(const OperatorHandle& t, const OperatorHandle& u, double lambda, double mu,
                               const Point& x, const Point& y);
};

struct StepRatio {
  double denominator;  ///< (1/lambda)|a|^2 + (1/mu)|b|^2 + <a,b>, positive
  double ratio;        ///< |a+b|^2 / denominator, in [0, nu*]
  bool zero_sum;       ///< a + b == 0, so the ratio is the boundary value 0
};

/// Throws PreconditionViolated when lambda*mu >= 4 or a = b = 0.
StepRatio lemma_a_plus_b(double lambda, double mu, const Point& a, const Point& b);

/// Point-pair extrapolation constant. Returns 1 when both differences vanish
/// (or the numerator does), the guarded quotient otherwise, never above nu*.
double tau_star_pair(const ExtrapolationState& state);

/// Extrapolation constant usable when T and U share a fixed point:
/// |a1+b1|^2 / ((1/lambda)|a1|^2 + (1/mu)|b1|^2 + <a1,b1>), or 1 on Fix.
double tau_star_common(const OperatorHandle& t, const OperatorHandle& u, double lambda, double mu, const Point& x);

/// Upper estimate of the extrapolation constant for T = (P_A)_lambda and
/// U = P_B with B a hyperplane, valid for x in B without knowing a fixed point.
double tau_bar_ball_affine(const PrimitiveSet& a, const PrimitiveSet& b, double lambda, const Point& x);

/// min(tau_bar, nu*(lambda, 1)).
double tau_hat_ball_affine(const PrimitiveSet& a, const PrimitiveSet& b, double lambda, const Point& x);

/// The fixed-point test used by the extrapolation functions:
/// |residual| <= 1e-14 (1 + |x|).
bool is_numerically_fixed(const Point& residual, const Point& x);

}  // namespace fixcalc
