#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mpqkd/stat_bounds.hpp"
#include "oracles/lp_oracle.hpp"

using namespace mpqkd;

namespace {

// (1 + v) ln(1 + v) - v in extended precision; the series branch keeps the
// bracket accurate where the direct form cancels, so the back-substitution
// measurement does not drown the 1e-10 budget in rounding.
long double bracket_ld(long double v) {
  if (fabsl(v) > 0.5L) return (1.0L + v) * logl(1.0L + v) - v;
  long double sum = 0.0L;
  long double pw = v * v;
  for (int k = 2; k < 200; ++k) {
    const long double term = pw / (k * (k - 1.0L));
    sum += term;
    if (fabsl(term) <= 1e-22L * sum) break;
    pw *= -v;
  }
  return sum;
}

double residual_obs_lower(double expected, double d, double xi) {
  const long double lx = -expected * bracket_ld(-static_cast<long double>(d));
  return static_cast<double>(fabsl(expl(lx) - xi) / xi);
}
double residual_obs_upper(double expected, double d, double xi) {
  const long double lx = -expected * bracket_ld(static_cast<long double>(d));
  return static_cast<double>(fabsl(expl(lx) - xi) / xi);
}
double residual_exp_lower(double bound, double d, double xi) {
  const long double lx = -bound * bracket_ld(static_cast<long double>(d));
  return static_cast<double>(fabsl(expl(lx) - xi) / xi);
}
double residual_exp_upper(double bound, double d, double xi) {
  const long double lx = -bound * bracket_ld(-static_cast<long double>(d));
  return static_cast<double>(fabsl(expl(lx) - xi) / xi);
}

}  // namespace

TEST_CASE("chernoff bounds at xi = 1 collapse to the input") {
  CHECK(chernoff_observed(123.0, 1.0, BoundDirection::Lower) == 123.0);
  CHECK(chernoff_observed(123.0, 1.0, BoundDirection::Upper) == 123.0);
  CHECK(chernoff_expected(77.0, 1.0, BoundDirection::Lower) == 77.0);
  CHECK(chernoff_expected(77.0, 1.0, BoundDirection::Upper) == 77.0);
}

TEST_CASE("chernoff zero conventions") {
  CHECK(chernoff_observed(0.0, 1e-10, BoundDirection::Lower) == 0.0);
  CHECK(chernoff_observed(0.0, 1e-10, BoundDirection::Upper) == 0.0);
  CHECK(chernoff_expected(0.0, 1e-10, BoundDirection::Lower) == 0.0);
  CHECK(chernoff_expected(0.0, 1e-10, BoundDirection::Upper) ==
        doctest::Approx(23.025850929940457).epsilon(1e-13));
  // tiny xi with small expectation: even observing zero is inside
  CHECK(chernoff_observed(10.0, 1e-10, BoundDirection::Lower) == 0.0);
}

TEST_CASE("chernoff frozen values at E = 1e4, O = 100, xi = 1e-10") {
  CHECK(chernoff_observed(1e4, 1e-10, BoundDirection::Upper) ==
        doctest::Approx(10686.246688297234).epsilon(1e-12));
  CHECK(chernoff_observed(1e4, 1e-10, BoundDirection::Lower) ==
        doctest::Approx(9329.105451014217).epsilon(1e-12));
  CHECK(chernoff_expected(100.0, 1e-10, BoundDirection::Lower) ==
        doctest::Approx(46.539958110077808).epsilon(1e-12));
  CHECK(chernoff_expected(100.0, 1e-10, BoundDirection::Upper) ==
        doctest::Approx(184.00527477824961).epsilon(1e-12));
}

TEST_CASE("back-substitution residuals stay below 1e-10") {
  for (double value : {1.0, 31.6, 1e3, 3.2e5, 1e8, 1e10}) {
    for (double xi : {0.5, 1e-3, 1e-10, 1e-20, 1e-30}) {
      const auto ol =
          chernoff_observed_solution(value, xi, BoundDirection::Lower);
      if (ol.bound > 0.0)
        CHECK(residual_obs_lower(value, ol.deviation, xi) < 1e-10);
      const auto ou =
          chernoff_observed_solution(value, xi, BoundDirection::Upper);
      CHECK(residual_obs_upper(value, ou.deviation, xi) < 1e-10);
      const auto el =
          chernoff_expected_solution(value, xi, BoundDirection::Lower);
      if (el.bound > 0.0)
        CHECK(residual_exp_lower(el.bound, el.deviation, xi) < 1e-10);
      const auto eu =
          chernoff_expected_solution(value, xi, BoundDirection::Upper);
      CHECK(residual_exp_upper(eu.bound, eu.deviation, xi) < 1e-10);
    }
  }
}

TEST_CASE("sandwich and monotonicity in xi") {
  for (double value : {5.0, 300.0, 1e6}) {
    double prev_ou = value, prev_ol = -1.0;
    for (double xi : {0.9, 0.1, 1e-4, 1e-12}) {
      const double ol = chernoff_observed(value, xi, BoundDirection::Lower);
      const double ou = chernoff_observed(value, xi, BoundDirection::Upper);
      const double el = chernoff_expected(value, xi, BoundDirection::Lower);
      const double eu = chernoff_expected(value, xi, BoundDirection::Upper);
      CHECK(ol <= value);
      CHECK(value <= ou);
      CHECK(el <= value);
      CHECK(value <= eu);
      CHECK(ou >= prev_ou);  // smaller xi widens the interval
      if (prev_ol >= 0.0) CHECK(ol <= prev_ol);
      prev_ou = ou;
      prev_ol = ol;
    }
  }
}

TEST_CASE("binomial coverage failure stays below xi") {
  std::mt19937_64 rng(2024);
  const int n = 100000;
  const double p = 0.05;
  const double e = n * p;
  const double xi = 0.01;
  const double ol = chernoff_observed(e, xi, BoundDirection::Lower);
  const double ou = chernoff_observed(e, xi, BoundDirection::Upper);
  std::binomial_distribution<int> dist(n, p);
  int outside = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    const int x = dist(rng);
    if (x < ol || x > ou) ++outside;
  }
  CHECK(static_cast<double>(outside) / trials <= xi);
}

TEST_CASE("joint bounds collapse for degenerate coefficient patterns") {
  const std::array<double, 4> obs = {10.0, 20.0, 5.0, 65.0};
  const std::array<double, 4> xis = {1e-6, 1e-6, 1e-6, 1e-6};
  // equal coefficients: one Chernoff call on the total with the 4-way xi
  const double collapsed = joint_lower({2.5, 2.5, 2.5, 2.5}, obs, xis);
  CHECK(collapsed ==
        doctest::Approx(2.5 * chernoff_expected(100.0, 1e-6,
                                                BoundDirection::Lower))
            .epsilon(1e-13));
  // single nonzero coefficient: one call on that observable with xi_1
  const double single = joint_lower({0.0, 1.5, 0.0, 0.0}, obs, xis);
  CHECK(single ==
        doctest::Approx(1.5 * chernoff_expected(20.0, 1e-6,
                                                BoundDirection::Lower))
            .epsilon(1e-13));
  // xi = 1 upper bound equals the plain weighted sum
  const std::array<double, 4> ones = {1.0, 1.0, 1.0, 1.0};
  const double exact = joint_upper({0.3, 1.2, 0.7, 2.0}, obs, ones);
  CHECK(exact == doctest::Approx(0.3 * 10 + 1.2 * 20 + 0.7 * 5 + 2.0 * 65)
                     .epsilon(1e-14));
  CHECK_THROWS_AS(joint_lower({-1.0, 0, 0, 0}, obs, xis),
                  std::invalid_argument);
}

TEST_CASE("joint bounds are invariant under pair permutations") {
  const std::array<double, 4> gam = {0.4, 1.9, 0.05, 1.1};
  const std::array<double, 4> obs = {33.0, 7.0, 120.0, 54.0};
  const std::array<double, 4> xis = {1e-5, 1e-5, 1e-5, 1e-5};
  const double base_l = joint_lower(gam, obs, xis);
  const double base_u = joint_upper(gam, obs, xis);
  const std::array<int, 4> perm = {2, 0, 3, 1};
  std::array<double, 4> pg{}, po{};
  for (int i = 0; i < 4; ++i) {
    pg[i] = gam[perm[i]];
    po[i] = obs[perm[i]];
  }
  CHECK(joint_lower(pg, po, xis) == doctest::Approx(base_l).epsilon(1e-13));
  CHECK(joint_upper(pg, po, xis) == doctest::Approx(base_u).epsilon(1e-13));
}

TEST_CASE("joint bounds bracket the constrained optima") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> gdist(0.0, 2.0);
  std::uniform_real_distribution<double> odist(0.0, 200.0);
  for (int trial = 0; trial < 40; ++trial) {
    test_oracle::LpInstance inst;
    for (int i = 0; i < 4; ++i) {
      inst.gammas[i] = gdist(rng);
      inst.observed[i] = odist(rng);
    }
    inst.xi = 1e-6;
    const std::array<double, 4> xis = {inst.xi, inst.xi, inst.xi, inst.xi};
    const double fl = joint_lower(inst.gammas, inst.observed, xis);
    const double fu = joint_upper(inst.gammas, inst.observed, xis);
    const double lp_min =
        test_oracle::lp_optimum(inst, BoundDirection::Lower);
    const double lp_max =
        test_oracle::lp_optimum(inst, BoundDirection::Upper);
    CHECK(fl <= lp_min * (1 + 1e-9) + 1e-9);
    CHECK(fu >= lp_max * (1 - 1e-9) - 1e-9);
    // xi = 1: both sides collapse onto sum(gamma observed)
    const std::array<double, 4> ones = {1.0, 1.0, 1.0, 1.0};
    double direct = 0.0;
    for (int i = 0; i < 4; ++i) direct += inst.gammas[i] * inst.observed[i];
    CHECK(joint_lower(inst.gammas, inst.observed, ones) ==
          doctest::Approx(direct).epsilon(1e-12));
    CHECK(joint_upper(inst.gammas, inst.observed, ones) ==
          doctest::Approx(direct).epsilon(1e-12));
  }
}
