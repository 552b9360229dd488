#include "fixcalc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fixcalc/error.hpp"
#include "fixcalc/extrapolation.hpp"
#include "fixcalc/parameter_algebra.hpp"

namespace fixcalc {

namespace {

constexpr double kDivergenceNorm = 1e12;

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

RelaxationFn constant_sigma(double value) {
  return [value](const Point&) { return value; };
}

}  // namespace

Schedule constant_schedule(double value) {
  return [value](std::size_t) { return value; };
}

void StepRule::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, 1), got " + num(epsilon));
  }
  if (!lambda_schedule) throw Error(ErrorKind::InvalidArgument, "step rule has no schedule");
}

double StepRule::lambda_at(std::size_t k) const {
  const double l = lambda_schedule(k);
  if (!(l >= epsilon && l <= 2.0 - epsilon)) {
    throw Error(ErrorKind::InvalidArgument, "lambda_" + std::to_string(k) + " = " + num(l) + " is outside [" +
                                                num(epsilon) + ", " + num(2.0 - epsilon) + "]");
  }
  return l;
}

void StoppingRule::validate() const {
  if (!(residual_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "residual_tol must be positive");
  if (max_iters < 1) throw Error(ErrorKind::InvalidArgument, "max_iters must be >= 1");
  if (stall && stall->window < 1) throw Error(ErrorKind::InvalidArgument, "stall window must be >= 1");
}

std::string_view to_string(RunStatus status) noexcept {
  switch (status) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::MaxIters: return "MaxIters";
    case RunStatus::Stalled: return "Stalled";
    case RunStatus::Diverged: return "Diverged";
  }
  return "?";
}

IterationTrace iterate(const OperatorHandle& v_base, const StepRule& rule, const StoppingRule& stop, const Point& x0,
                       const std::optional<Point>& reference) {
  rule.validate();
  stop.validate();
  require_same_dim(v_base.dim(), x0.dim(), "iterate start point");
  if (reference) require_same_dim(v_base.dim(), reference->dim(), "iterate reference point");

  // Without sigma the step is V_{lambda_k}; for a nu-relaxed cutter V that is
  // a cutter relaxation as long as nu * lambda_k stays within (0, 2].
  const auto& cert = v_base.certificate();
  bool fejer = reference.has_value() && (rule.cutter_step || (!rule.sigma && cert.has_value()));

  IterationTrace trace;
  Point x = x0;
  for (std::size_t k = 0;; ++k) {
    const Point vx = v_base(x);
    Point delta = vx - x;
    const double residual = norm(delta);
    std::optional<double> dist;
    if (reference) dist = distance(x, *reference);
    trace.rows.push_back(TraceRow{k, x, residual, std::nullopt, dist});

    if (residual <= stop.residual_tol) {
      trace.status = RunStatus::Converged;
      break;
    }
    if (k >= stop.max_iters) {
      trace.status = RunStatus::MaxIters;
      break;
    }
    if (stop.stall && k >= stop.stall->window &&
        trace.rows[k - stop.stall->window].residual - residual < stop.stall->min_decrease) {
      trace.status = RunStatus::Stalled;
      break;
    }

    const double lambda = rule.lambda_at(k);
    const double sigma = rule.sigma ? (*rule.sigma)(x) : 1.0;
    const double step = lambda * sigma;
    if (!rule.cutter_step && !rule.sigma && cert && cert->relaxation() * lambda > 2.0) fejer = false;
    trace.rows.back().step = step;

    delta *= step;
    Point next = x + delta;
    if (!next.is_finite() || norm(next) > kDivergenceNorm) {
      trace.status = RunStatus::Diverged;
      break;
    }
    x = std::move(next);
  }

  trace.fejer_monitored = fejer;
  if (reference) trace.worst_fejer_violation = fejer_check(trace, *reference);
  return trace;
}

double fejer_check(const IterationTrace& trace, const Point& z) {
  if (trace.rows.empty()) throw Error(ErrorKind::InvalidArgument, "fejer_check needs a nonempty trace");
  double worst = 0.0;
  for (std::size_t i = 1; i < trace.rows.size(); ++i) {
    worst = std::max(worst, distance(trace.rows[i].x, z) - distance(trace.rows[i - 1].x, z));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Presets

Method preset_km(const OperatorHandle& v, Schedule schedule, double epsilon) {
  const auto& c = v.certificate();
  if (!c || !c->is_pair_class() || c->relaxation() != 1.0) {
    throw Error(ErrorKind::PreconditionViolated, "KM iteration needs an FNE-certified operator");
  }
  Method m{"KM", v, StepRule{std::move(schedule), std::nullopt, epsilon, true}};
  m.rule.validate();
  return m;
}

Method preset_cutter(const OperatorHandle& v, Schedule schedule, double epsilon) {
  const auto& c = v.certificate();
  if (!c || c->relaxation() != 1.0 || !v.fix_set()) {
    throw Error(ErrorKind::PreconditionViolated, "cutter iteration needs a cutter certificate and a fixed set");
  }
  Method m{"Cutter", v, StepRule{std::move(schedule), std::nullopt, epsilon, true}};
  m.rule.validate();
  return m;
}

Method preset_maruster(const OperatorHandle& v, Schedule nu_schedule, double epsilon) {
  const auto& c = v.certificate();
  if (!c) throw Error(ErrorKind::PreconditionViolated, "Maruster iteration needs a demicontraction certificate");
  const double alpha = relaxed_cutter_to_demicontraction(c->relaxation());
  const double half_width = (1.0 - alpha) / 2.0;
  if (!(epsilon > 0.0 && epsilon < half_width)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0, (1 - alpha)/2) = (0, " + num(half_width) + ")");
  }
  // V_{nu_k} = C_{lambda_k} with the cutter C = V_{(1-alpha)/2} and
  // lambda_k = 2 nu_k / (1 - alpha).
  auto lambda_schedule = [nu_schedule = std::move(nu_schedule), half_width](std::size_t k) {
    return nu_schedule(k) / half_width;
  };
  Method m{"Maruster", v, StepRule{lambda_schedule, constant_sigma(half_width), epsilon / half_width, true}};
  m.rule.validate();
  return m;
}

Method preset_dr(const PrimitiveSet& a, const PrimitiveSet& b) {
  require_same_dim(a.dim(), b.dim(), "DR sets");
  const OperatorHandle reflections = compose(relax(projection(b), 2.0), relax(projection(a), 2.0));
  return Method{"DR", relax(reflections, 0.5).with_label("DR"), StepRule{constant_schedule(1.0), std::nullopt, 0.05, true}};
}

Method preset_raspc(const PrimitiveSet& a, const PrimitiveSet& b, double lambda, double mu, Schedule schedule,
                    double epsilon) {
  require_same_dim(a.dim(), b.dim(), "RASPC sets");
  const CompositionVerdict v = nu_star(lambda, mu);
  if (!v.certified) {
    throw Error(ErrorKind::PreconditionViolated,
                "RASPC needs lambda*mu < 4, got lambda=" + num(lambda) + ", mu=" + num(mu));
  }
  const OperatorHandle ut = compose(relax(projection(b), mu), relax(projection(a), lambda));
  Method m{"RASPC", ut, StepRule{std::move(schedule), constant_sigma(1.0 / *v.nu_star), epsilon, true}};
  m.rule.validate();
  return m;
}

Method preset_eadc(const PrimitiveSet& a, const PrimitiveSet& b, double lambda, double mu, Schedule schedule,
                   double epsilon) {
  require_same_dim(a.dim(), b.dim(), "EADC sets");
  const CompositionVerdict v = nu_star(lambda, mu);
  if (!v.certified) {
    throw Error(ErrorKind::PreconditionViolated,
                "EADC needs lambda*mu < 4, got lambda=" + num(lambda) + ", mu=" + num(mu));
  }
  const OperatorHandle t = relax(projection(a), lambda);
  const OperatorHandle u = relax(projection(b), mu);
  const OperatorHandle ut = compose(u, t);
  RelaxationFn sigma = [t, u, lambda, mu](const Point& x) { return 1.0 / tau_star_common(t, u, lambda, mu, x); };
  Method m{"EADC", ut, StepRule{std::move(schedule), std::move(sigma), epsilon, true}};
  m.rule.validate();
  return m;
}

Method preset_moudafi(const OperatorHandle& s, const OperatorHandle& u, const LinearMap& a, double lambda, double mu,
                      Schedule schedule, double epsilon) {
  if (!s.certificate() || !u.certificate()) {
    throw Error(ErrorKind::PreconditionViolated, "split feasibility operators need demicontraction certificates");
  }
  const double alpha = relaxed_cutter_to_demicontraction(s.certificate()->relaxation());
  const double beta = relaxed_cutter_to_demicontraction(u.certificate()->relaxation());
  const double gamma = relax_demicontraction(alpha, lambda);
  const double delta = relax_demicontraction(beta, mu);
  if (!(gamma + delta < gamma * delta)) {
    throw Error(ErrorKind::PreconditionViolated,
                "split iteration needs gamma + delta < gamma * delta; got alpha=" + num(alpha) + ", beta=" +
                    num(beta) + ", lambda=" + num(lambda) + ", mu=" + num(mu) + ", gamma=" + num(gamma) +
                    ", delta=" + num(delta));
  }
  const double tau = 2.0 * (gamma + delta) / (gamma + delta - gamma * delta);
  const OperatorHandle t = landweber(s, a);
  const OperatorHandle v_base = compose(relax(u, mu), relax(t, lambda));
  Method m{"Moudafi", v_base, StepRule{std::move(schedule), constant_sigma(1.0 / tau), epsilon, true}};
  m.rule.validate();
  return m;
}

}  // namespace fixcalc
