#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixcalc/solver.hpp"
#include "testing.hpp"

using namespace fixcalc;

namespace {

const double kPi = std::numbers::pi;

// Line through the origin at the given angle from the first axis.
PrimitiveSet line(double angle) { return PrimitiveSet::hyperplane(Point{-std::sin(angle), std::cos(angle)}, 0.0); }

IterationTrace run(const Method& m, const Point& x0, double tol, std::size_t max_iters,
                   const std::optional<Point>& ref = std::nullopt) {
  return iterate(m.v_base, m.rule, StoppingRule{tol, max_iters, std::nullopt}, x0, ref);
}

// First k with g(x^k) <= threshold, or the row count when never reached.
template <class F>
std::size_t first_below(const IterationTrace& t, F g, double threshold) {
  for (const TraceRow& r : t.rows) {
    if (g(r.x) <= threshold) return r.k;
  }
  return t.rows.size();
}

}  // namespace

TEST_CASE("identity converges at k = 0") {
  const Point x0{1.5, -2.0, 0.25};
  const IterationTrace t = iterate(identity(3), StepRule{}, StoppingRule{}, x0);
  CHECK(t.status == RunStatus::Converged);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.iterations() == 0);
  CHECK(t.last().x == x0);
  CHECK(t.last().residual == 0.0);
  CHECK_FALSE(t.last().step.has_value());
}

TEST_CASE("projection converges in one step") {
  const auto h = PrimitiveSet::hyperplane(Point{1.0, 2.0, -1.0}, 0.5);
  const Point x0{3.0, -1.0, 4.0};
  const IterationTrace t = iterate(projection(h), StepRule{}, StoppingRule{1e-12, 10, std::nullopt}, x0);
  CHECK(t.status == RunStatus::Converged);
  CHECK(t.iterations() == 1);
  CHECK(distance(t.last().x, h.project(x0)) <= 1e-15 * (1.0 + norm(x0)));
  REQUIRE(t.rows[0].step.has_value());
  CHECK(*t.rows[0].step == 1.0);
}

TEST_CASE("relaxed cutter iteration on intersecting hyperplanes") {
  const OperatorHandle avg = convex_combination({projection(line(0.0)), projection(line(kPi / 5))}, {0.5, 0.5});
  REQUIRE(avg.fix_set().has_value());
  Method m = preset_cutter(avg, [](std::size_t k) { return k % 2 ? 1.6 : 0.4; });
  const Point z{0.0, 0.0};
  const IterationTrace t = run(m, Point{4.0, -3.0}, 1e-10, 2000, z);
  CHECK(t.status == RunStatus::Converged);
  CHECK(t.fejer_monitored);
  CHECK(t.worst_fejer_violation <= kFejerTolerance);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CHECK(t.rows[i].residual <= t.rows[i - 1].residual * (1 + 1e-12));
  }
  CHECK(norm(t.last().x) <= 1e-8);
}

TEST_CASE("KM and Maruster presets") {
  const auto a = line(0.3);
  const IterationTrace km = run(preset_km(projection(a), constant_schedule(1.5)), Point{2.0, 2.0}, 1e-12, 200);
  CHECK(km.status == RunStatus::Converged);
  CHECK(a.contains(km.last().x, 1e-10));
  CHECK_ERROR_KIND(preset_km(relax(projection(a), 1.5)), ErrorKind::PreconditionViolated);

  // relax(P, 4) is a 1/2-demicontraction; nu_k must stay in [eps, 1/2 - eps].
  const OperatorHandle dc = relax(projection(a), 4.0);
  const Method mar = preset_maruster(dc, constant_schedule(0.3), 0.05);
  const Point z{0.0, 0.0};
  const IterationTrace t = run(mar, Point{2.0, 2.0}, 1e-12, 500, z);
  CHECK(t.status == RunStatus::Converged);
  CHECK(t.worst_fejer_violation <= kFejerTolerance);
  REQUIRE(t.rows[0].step.has_value());
  CHECK(*t.rows[0].step == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_ERROR_KIND(run(preset_maruster(dc, constant_schedule(0.47), 0.05), Point{1.0, 1.0}, 1e-12, 5),
                   ErrorKind::InvalidArgument);
}

TEST_CASE("DR on coincident sets") {
  // Both reflections coincide, so every point is fixed and the solution is
  // read off through the shadow P_A(x).
  const auto h = PrimitiveSet::hyperplane(Point{1.0, 1.0}, 1.0);
  const Point x0{3.0, 5.0};
  const IterationTrace t = run(preset_dr(h, h), x0, 1e-12, 10);
  CHECK(t.status == RunStatus::Converged);
  CHECK(t.iterations() <= 1);
  CHECK(distance(h.project(t.last().x), h.project(x0)) <= 1e-14 * norm(x0));
}

TEST_CASE("DR on 30 degree lines") {
  const Point z{0.0, 0.0};
  const IterationTrace t = run(preset_dr(line(0.0), line(kPi / 6)), Point{2.0, 1.0}, 1e-8, 200, z);
  CHECK(t.status == RunStatus::Converged);
  CHECK(t.last().residual < 1e-8);
  CHECK(fejer_check(t, z) <= 1e-10);
  CHECK(t.fejer_monitored);
}

TEST_CASE("DR on parallel lines keeps residual 1") {
  const auto a = PrimitiveSet::hyperplane(Point{0.0, 1.0}, 0.0);
  const auto b = PrimitiveSet::hyperplane(Point{0.0, 1.0}, 1.0);
  const Method m = preset_dr(a, b);
  const IterationTrace t = run(m, Point{0.3, 0.2}, 1e-8, 50);
  CHECK(t.status == RunStatus::MaxIters);
  for (const TraceRow& r : t.rows) CHECK(r.residual == doctest::Approx(1.0).epsilon(1e-12));

  const IterationTrace stalled = iterate(m.v_base, m.rule, StoppingRule{1e-8, 1000, StallDetection{5, 1e-6}}, Point{0.3, 0.2});
  CHECK(stalled.status == RunStatus::Stalled);
  CHECK(stalled.iterations() == 5);
}

TEST_CASE("RASPC relaxation") {
  const auto a = line(0.0);
  const auto b = line(kPi / 6);
  const Point x0{2.0, 1.0};
  const Method m31 = preset_raspc(a, b, 3.0, 1.0);
  REQUIRE(m31.rule.sigma.has_value());
  CHECK((*m31.rule.sigma)(x0) == doctest::Approx(0.25).epsilon(1e-15));
  const Method m11 = preset_raspc(a, b, 1.0, 1.0);
  CHECK((*m11.rule.sigma)(x0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_ERROR_KIND(preset_raspc(a, b, 2.0, 2.0), ErrorKind::PreconditionViolated);

  const Point z{0.0, 0.0};
  for (auto [l, mu] : {std::pair{3.0, 1.0}, std::pair{1.0, 3.0}, std::pair{2.5, 1.5}}) {
    const IterationTrace t = run(preset_raspc(a, b, l, mu), x0, 1e-10, 2000, z);
    CHECK(t.status == RunStatus::Converged);
    CHECK(norm(t.last().x) <= 1e-8);
    CHECK(t.worst_fejer_violation <= kFejerTolerance);
  }
}

TEST_CASE("EADC") {
  const auto a = line(0.0);
  const auto b = line(kPi / 6);
  const Point z{0.0, 0.0};

  const IterationTrace fixed = run(preset_eadc(a, b, 3.0, 1.0), z, 1e-12, 10);
  CHECK(fixed.status == RunStatus::Converged);
  CHECK(fixed.iterations() == 0);

  const Method m = preset_eadc(a, b, 3.0, 1.0);
  const IterationTrace t = run(m, Point{2.0, 1.0}, 1e-10, 500, z);
  CHECK(t.status == RunStatus::Converged);
  CHECK(t.worst_fejer_violation <= kFejerTolerance);
  for (const TraceRow& r : t.rows) {
    if (!r.step) continue;
    CHECK(*r.step >= 0.25 * (1 - 1e-12));
    const Point res = m.v_base(r.x) - r.x;
    CHECK((1.0 / *r.step) * inner(z - r.x, res) >= norm_sq(res) - 1e-9);
  }
}

TEST_CASE("EADC beats DR on a ball tangent to a line") {
  const auto ball = PrimitiveSet::ball(Point{0.0, 1.0}, 1.0);
  const auto axis = PrimitiveSet::hyperplane(Point{0.0, 1.0}, 0.0);
  const Point z{0.0, 0.0};
  const Point x0{2.0, 0.0};
  const IterationTrace e = run(preset_eadc(ball, axis, 3.0, 1.0), x0, 1e-14, 20000);
  const IterationTrace d = run(preset_dr(ball, axis), x0, 1e-14, 20000);
  const std::size_t ke = first_below(e, [&](const Point& x) { return distance(x, z); }, 1e-3);
  const std::size_t kd = first_below(d, [&](const Point& x) { return distance(ball.project(x), z); }, 1e-3);
  CHECK(ke < e.rows.size());
  CHECK(ke < kd);
}

TEST_CASE("Moudafi split iteration") {
  const auto c = PrimitiveSet::box(Point{-1.0, -1.0}, Point{1.0, 1.0});
  const auto q = PrimitiveSet::box(Point{0.5, -0.2}, Point{1.5, 0.2});

  // alpha = beta = 0 through the 2-relaxed projections.
  const OperatorHandle s0 = relax(projection(q), 2.0);
  const OperatorHandle u0 = relax(projection(c), 2.0);
  LinearMap a = LinearMap::diagonal({1.0, 2.0});
  a.set_norm(2.0);
  const Method half = preset_moudafi(s0, u0, a, 0.5, 0.5);
  CHECK((*half.rule.sigma)(Point{0.0, 0.0}) == doctest::Approx(0.75).epsilon(1e-15));
  try {
    preset_moudafi(s0, u0, a, 1.0, 1.0);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PreconditionViolated);
    CHECK(std::string(e.what()).find("gamma=0") != std::string::npos);
  }

  const Method m = preset_moudafi(projection(q), projection(c), a, 1.0, 1.0);
  const IterationTrace t = run(m, Point{3.0, 3.0}, 1e-8, 500);
  CHECK(t.status == RunStatus::Converged);
  const Point x = t.last().x;
  CHECK(c.distance_to(x) <= 1e-6);
  CHECK(q.distance_to(a.apply(x)) <= 1e-6);
}

TEST_CASE("fejer_check") {
  const IterationTrace still = iterate(identity(2), StepRule{}, StoppingRule{}, Point{1.0, 1.0});
  CHECK(fejer_check(still, Point{5.0, 5.0}) == 0.0);

  // A 3-relaxed projection stepped with lambda_k = 1 overshoots the line.
  const auto h = line(0.0);
  const Point z{0.0, 0.0};
  const IterationTrace t = iterate(relax(projection(h), 3.0), StepRule{}, StoppingRule{1e-10, 5, std::nullopt},
                                   Point{1.0, 1.0}, z);
  CHECK_FALSE(t.fejer_monitored);
  CHECK(fejer_check(t, z) > 0.1);
  CHECK(t.worst_fejer_violation == fejer_check(t, z));
}

TEST_CASE("squared residuals of SQNE compositions are summable") {
  const auto a = line(0.0);
  const auto b = line(kPi / 7);
  const Point z{0.0, 0.0};
  const Point x0{3.0, -2.0};
  for (auto [l, mu] : {std::pair{1.0, 1.0}, std::pair{1.5, 0.8}, std::pair{0.5, 1.9}}) {
    const double alpha = (l - 2.0) / l;
    const double beta = (mu - 2.0) / mu;
    const double gamma = alpha * beta / (alpha + beta);
    REQUIRE(gamma < 0.0);
    const OperatorHandle v = compose(relax(projection(b), mu), relax(projection(a), l));
    const IterationTrace t = iterate(v, StepRule{}, StoppingRule{1e-12, 5000, std::nullopt}, x0, z);
    CHECK(t.status == RunStatus::Converged);
    double sum = 0.0;
    for (const TraceRow& r : t.rows) sum += r.residual * r.residual;
    CHECK(sum <= norm_sq(x0 - z) / (-gamma) * (1 + 1e-12));
  }
}

TEST_CASE("step rule validation and divergence") {
  StepRule bad;
  bad.lambda_schedule = constant_schedule(1.97);
  CHECK_ERROR_KIND(iterate(projection(line(0.0)), bad, StoppingRule{}, Point{1.0, 1.0}), ErrorKind::InvalidArgument);
  StepRule zero_eps;
  zero_eps.epsilon = 0.0;
  CHECK_ERROR_KIND(iterate(identity(1), zero_eps, StoppingRule{}, Point{1.0}), ErrorKind::InvalidArgument);
  CHECK_ERROR_KIND(iterate(identity(1), StepRule{}, StoppingRule{0.0, 10, std::nullopt}, Point{1.0}),
                   ErrorKind::InvalidArgument);
  CHECK_ERROR_KIND(iterate(identity(2), StepRule{}, StoppingRule{}, Point{1.0}), ErrorKind::DimensionMismatch);

  const OperatorHandle doubling(1, [](const Point& x) { return 3.0 * x; }, "3x");
  const IterationTrace t = iterate(doubling, StepRule{}, StoppingRule{1e-10, 10000, std::nullopt}, Point{1.0});
  CHECK(t.status == RunStatus::Diverged);
  CHECK(t.rows.size() < 100);
}
