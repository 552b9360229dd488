#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fixcalc/parameter_algebra.hpp"
#include "oracles.hpp"
#include "testing.hpp"

using namespace fixcalc;
using oracle::Q;

TEST_CASE("conversions between RFNE and SPC parameters") {
  CHECK(rfne_to_spc(2.0) == 0.0);
  CHECK(rfne_to_spc(1.0) == -1.0);
  CHECK(rfne_to_spc(4.0) == 0.5);
  CHECK(demicontraction_to_relaxed_cutter(-1.0) == 1.0);
  CHECK(demicontraction_to_relaxed_cutter(0.0) == 2.0);
  CHECK(demicontraction_to_relaxed_cutter(0.5) == 4.0);
  CHECK(relaxed_cutter_to_demicontraction(4.0) == 0.5);
  CHECK_ERROR_KIND(rfne_to_spc(0.0), ErrorKind::InvalidArgument);
  CHECK_ERROR_KIND(spc_to_rfne(1.0), ErrorKind::InvalidArgument);
}

TEST_CASE("round trip through the SPC parameter") {
  for (int i = 1; i <= 100000; ++i) {
    const double lambda = i * 1e-3;
    CHECK(std::abs(spc_to_rfne(rfne_to_spc(lambda)) - lambda) <= 1e-13 * std::max(1.0, lambda));
  }
}

TEST_CASE("relaxing a demicontraction") {
  CHECK(relax_demicontraction(-0.7, 1.0) == -0.7);
  CHECK(relax_demicontraction(-1.0, 0.5) == -3.0);
  CHECK(relax_demicontraction(0.0, 2.0) == 0.5);
}

TEST_CASE("nu_star examples") {
  const auto v31 = nu_star(3.0, 1.0);
  REQUIRE(v31.nu_star);
  CHECK(*v31.nu_star == 4.0);
  CHECK(v31.certified);
  for (double mu : {0.5, 1.0, 1.9}) CHECK(*nu_star(2.0, mu).nu_star == 2.0);
  CHECK(std::abs(*nu_star(1.0, 1.0).nu_star - 4.0 / 3.0) <= 1e-15);
  const auto v22 = nu_star(2.0, 2.0);
  CHECK_FALSE(v22.nu_star);
  CHECK_FALSE(v22.certified);
  CHECK(v22.note == CompositionNote::ProductEqualsFour);
  const auto v44 = nu_star(4.0, 2.0);
  CHECK_FALSE(v44.certified);
  CHECK(v44.note == CompositionNote::ProductAboveFour);
  CHECK_ERROR_KIND(nu_star(-1.0, 1.0), ErrorKind::InvalidArgument);
}

TEST_CASE("nu_star agrees with the root of the defining equation over the rationals") {
  for (long long ln = 1; ln <= 40; ++ln) {
    for (long long mn = 1; mn <= 40; ++mn) {
      const Q lambda(ln, 10), mu(mn, 10);
      if (lambda * mu == Q(4)) continue;
      const Q root = oracle::gam_eq_root(lambda, mu);
      const double got = *nu_star(ln / 10.0, mn / 10.0).nu_star;
      CHECK(std::abs(got - root.to_double()) <= 1e-12 * std::max(1.0, std::abs(root.to_double())));
      // nu = 0 (when lambda + mu = lambda mu) is outside the equation's domain.
      if (!(root == Q(0))) CHECK(oracle::gam_eq_residual(lambda, mu, root) == Q(0));
    }
  }
}

TEST_CASE("equation residual and nu_star bounds on random parameters") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 4.0);
  int checked = 0;
  while (checked < 10000) {
    const double l = u(rng), m = u(rng);
    if (!(l * m < 4.0)) continue;
    ++checked;
    const double nu = *nu_star(l, m).nu_star;
    const double lhs = (1 - 2 / nu) * (1 - 2 / nu);
    const double rhs = 4 * (1 / l - 1 / nu) * (1 / m - 1 / nu);
    CHECK(std::abs(lhs - rhs) <= 1e-11);
    const double lo = std::min(l, m);
    CHECK(lo < 4 * lo / (lo + 2));
    CHECK(4 * lo / (lo + 2) <= nu * (1 + 1e-15));
    CHECK(nu >= std::max(l, m) * (1 - 1e-15));
    if (l < 2 && m < 2) {
      const double hi = std::max(l, m);
      CHECK(nu <= 4 * hi / (hi + 2) * (1 + 1e-15));
    }
  }
}

TEST_CASE("nu_star is nondecreasing in each argument") {
  for (double l = 0.1; l < 3.9; l += 0.05) {
    for (double m = 0.1; m < 3.9; m += 0.05) {
      const double h = 1e-4;
      if (!((l + h) * m < 4.0)) continue;
      CHECK(*nu_star(l + h, m).nu_star >= *nu_star(l, m).nu_star - 1e-12);
      CHECK(*nu_star(m, l + h).nu_star >= *nu_star(m, l).nu_star - 1e-12);
    }
  }
}

TEST_CASE("gamma_star examples and sign rules") {
  CHECK(gamma_star(-1.0, -1.0) == -0.5);
  CHECK_ERROR_KIND(gamma_star(-1.0, 0.5), ErrorKind::CompositionUncertified);
  CHECK(std::abs(gamma_star(-2.0, 0.5) - 2.0 / 3.0) <= 1e-15);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng);
    if (!(a + b < a * b)) {
      CHECK_ERROR_KIND(gamma_star(a, b), ErrorKind::CompositionUncertified);
      continue;
    }
    const double g = gamma_star(a, b);
    CHECK(g < 1.0);
    if (a < 0 && b < 0) CHECK(g < 0.0);
    if (a * b < 0) CHECK((g > 0.0 && g < 1.0));
  }
}

TEST_CASE("gamma_star and nu_star are conjugate") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.05, 3.9);
  int checked = 0;
  while (checked < 5000) {
    const double l = u(rng), m = u(rng);
    if (!(l * m < 4.0)) continue;
    const double a = rfne_to_spc(l), b = rfne_to_spc(m);
    if (!(a + b < a * b)) continue;
    ++checked;
    const double via_nu = rfne_to_spc(*nu_star(spc_to_rfne(a), spc_to_rfne(b)).nu_star);
    CHECK(std::abs(via_nu - gamma_star(a, b)) <= 1e-12 * std::max(1.0, std::abs(via_nu)));
  }
}

TEST_CASE("chain_gamma") {
  {
    const std::vector<double> a{-1.0, -1.0};
    CHECK(*chain_gamma(a).gamma == gamma_star(-1.0, -1.0));
  }
  {
    const std::vector<double> a{-2.0, 0.4, -2.0};
    const auto r = chain_gamma(a);
    REQUIRE(r.gamma);
    const Q exact = Q(1) / (Q(1) / Q(-2) + Q(1) / Q(2, 5) + Q(1) / Q(-2));
    CHECK(exact == Q(2, 3));
    CHECK(std::abs(*r.gamma - exact.to_double()) <= 1e-15);
  }
  {
    const std::vector<double> a{-1.0, 1.0 / 3.0, -1.0};
    const auto r = chain_gamma(a);
    CHECK_FALSE(r.gamma);
    CHECK_FALSE(r.reason.empty());
  }
  {
    const std::vector<double> a{0.5, 0.5};
    CHECK_ERROR_KIND(chain_gamma(a), ErrorKind::InvalidArgument);
    const std::vector<double> z{0.0, -1.0};
    CHECK_ERROR_KIND(chain_gamma(z), ErrorKind::InvalidArgument);
  }
}

TEST_CASE("convex combination parameters") {
  const std::vector<double> w{0.5, 0.5};
  const std::vector<double> l{1.0, 3.0};
  CHECK(combined_relaxation(w, l) == 2.0);
  const std::vector<double> a{-1.0, 0.5};
  CHECK(std::abs(combined_spc(w, a) - 0.2) <= 1e-15);
  const std::vector<double> bad{0.5, 0.6};
  CHECK_ERROR_KIND(combined_relaxation(bad, l), ErrorKind::InvalidArgument);

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_real_distribution<double> lam(0.1, 10.0);
  std::uniform_real_distribution<double> alp(-5.0, 0.99);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + trial % 5;
    std::vector<double> ws(n), ls(n), as(n);
    double total = 0;
    for (auto& x : ws) total += (x = u(rng));
    for (auto& x : ws) x /= total;
    double fix = 1.0;
    for (std::size_t i = 0; i + 1 < n; ++i) fix -= ws[i];
    ws.back() = fix;
    for (auto& x : ls) x = lam(rng);
    for (auto& x : as) x = alp(rng);
    const double cl = combined_relaxation(ws, ls);
    CHECK(cl >= *std::min_element(ls.begin(), ls.end()) * (1 - 1e-15));
    CHECK(cl <= *std::max_element(ls.begin(), ls.end()) * (1 + 1e-15));
    const double ca = combined_spc(ws, as);
    CHECK(ca >= *std::min_element(as.begin(), as.end()) - 1e-12);
    CHECK(ca <= *std::max_element(as.begin(), as.end()) + 1e-12);
  }
}

TEST_CASE("lemma_A_holds") {
  CHECK(lemma_A_holds(1.0, 3.9));
  CHECK(lemma_A_holds(3.0, 2.0));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  int failures = 0;
  for (int i = 0; i < 100000; ++i) {
    double l = u(rng), m = u(rng);
    if (l == 0.0 || m == 0.0) continue;
    failures += lemma_A_holds(l, m) ? 0 : 1;
  }
  CHECK(failures == 0);
}

TEST_CASE("lemma_B_holds: part (i) holds, part (ii) has counterexamples") {
  CHECK(lemma_B_holds(-1.0, -1.0));
  CHECK(lemma_B_holds(0.5, 0.5));
  // alpha + beta = 0.4 > alpha beta = -0.05 although gamma* = -0.125 < 1 and
  // only beta is nonnegative: the implication in part (ii) fails.
  CHECK_FALSE(lemma_B_holds(-0.1, 0.5));
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-5.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const double a = u(rng), b = u(rng);
    if (a + b < a * b) {
      // Part (i) on its own, recomputed here.
      CHECK(a + b < 0.0);
      CHECK(a * b / (a + b) < 1.0);
    }
    if (!lemma_B_holds(a, b)) {
      // Every failure is a part (ii) failure with a positive sum.
      CHECK(a + b > 0.0);
      CHECK((a < 0.0) != (b < 0.0));
    }
  }
}
