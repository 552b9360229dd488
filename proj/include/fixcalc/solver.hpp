#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fixcalc/hilbert.hpp"
#include "fixcalc/operators.hpp"

namespace fixcalc {

using Schedule = std::function<double(std::size_t k)>;

Schedule constant_schedule(double value);

/// Per-iteration relaxation x^{k+1} = x^k + lambda_k sigma(x^k) (V(x^k) - x^k).
struct StepRule {
  Schedule lambda_schedule = constant_schedule(1.0);
  std::optional<RelaxationFn> sigma;
  double epsilon = 0.05;
  /// Set when x -> x + sigma(x)(V(x) - x) is known to be a cutter, so any
  /// lambda_k in [eps, 2 - eps] yields Fejer monotone iterates.
  bool cutter_step = false;

  /// Throws InvalidArgument when epsilon is outside (0, 1).
  void validate() const;
  /// lambda_k, checked against [eps, 2 - eps].
  double lambda_at(std::size_t k) const;
};

struct StallDetection {
  std::size_t window;
  double min_decrease;
};

struct StoppingRule {
  double residual_tol = 1e-10;
  std::size_t max_iters = 1000;
  std::optional<StallDetection> stall;

  void validate() const;
};

enum class RunStatus { Converged, MaxIters, Stalled, Diverged };

std::string_view to_string(RunStatus status) noexcept;

struct TraceRow {
  std::size_t k;
  Point x;
  double residual;                   ///< |V_base(x^k) - x^k|
  std::optional<double> step;        ///< lambda_k sigma(x^k); absent on the final row
  std::optional<double> dist_to_ref;
};

struct IterationTrace {
  std::vector<TraceRow> rows;
  RunStatus status = RunStatus::MaxIters;
  /// True when a reference point was given and the step operator is a
  /// certified cutter relaxation; worst_fejer_violation is then meaningful.
  bool fejer_monitored = false;
  double worst_fejer_violation = 0.0;

  const TraceRow& last() const { return rows.back(); }
  std::size_t iterations() const { return rows.empty() ? 0 : rows.back().k; }
};

/// Fejer tolerance used when monitoring certified runs.
inline constexpr double kFejerTolerance = 1e-10;

/// Runs the relaxed fixed-point iteration. Convergence is judged on the
/// residual of `v_base`, not on the relaxed step. A nonfinite iterate or one
/// with norm above 1e12 ends the run with status Diverged.
IterationTrace iterate(const OperatorHandle& v_base, const StepRule& rule, const StoppingRule& stop, const Point& x0,
                       const std::optional<Point>& reference = std::nullopt);

/// max_k |x^{k+1} - z| - |x^k - z|, or 0 for a single-row trace.
double fejer_check(const IterationTrace& trace, const Point& z);

/// A named method: the base operator and its step rule.
struct Method {
  std::string name;
  OperatorHandle v_base;
  StepRule rule;
};

/// Krasnoselskii-Mann iteration of an FNE operator.
Method preset_km(const OperatorHandle& v, Schedule schedule = constant_schedule(1.0), double epsilon = 0.05);
/// Relaxed iteration of a cutter.
Method preset_cutter(const OperatorHandle& v, Schedule schedule = constant_schedule(1.0), double epsilon = 0.05);
/// Relaxed iteration of an alpha-demicontraction with nu_k in
/// [eps, 1 - alpha - eps], rewritten as a cutter iteration.
Method preset_maruster(const OperatorHandle& v, Schedule nu_schedule, double epsilon);

/// Douglas-Rachford: V_base is the averaged reflection operator
/// ((P_B)_2 (P_A)_2)_{1/2}, applied with lambda_k = 1.
Method preset_dr(const PrimitiveSet& a, const PrimitiveSet& b);

/// Relaxed alternating strict pseudocontraction method:
/// x^{k+1} = (UT)_{lambda_k / nu*}(x^k), T = (P_A)_lambda, U = (P_B)_mu.
Method preset_raspc(const PrimitiveSet& a, const PrimitiveSet& b, double lambda, double mu,
                    Schedule schedule = constant_schedule(1.0), double epsilon = 0.05);

/// Extrapolated alternating demicontraction method: sigma = 1 / tau*(x).
/// The caller asserts that A and B intersect.
Method preset_eadc(const PrimitiveSet& a, const PrimitiveSet& b, double lambda, double mu,
                   Schedule schedule = constant_schedule(1.0), double epsilon = 0.05);

/// Split common fixed point iteration (U_mu T_lambda)_{sigma_k / tau} with
/// T the Landweber operator of S through A.
Method preset_moudafi(const OperatorHandle& s, const OperatorHandle& u, const LinearMap& a, double lambda, double mu,
                      Schedule schedule = constant_schedule(1.0), double epsilon = 0.05);

}  // namespace fixcalc
