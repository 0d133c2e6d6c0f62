#include "glidepath/math_util.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>
#include <vector>

using namespace glidepath;

namespace {

// Brute-force Riemann oracle, deliberately independent of integrate().
template <class F>
double riemann(F&& f, double a, double b, int n = 200000) {
  double s = 0.0;
  const double h = (b - a) / n;
  for (int i = 0; i < n; ++i) s += f(a + (i + 0.5) * h);
  return s * h;
}

}  // namespace

TEST_CASE("psi matches its defining integral", "[math_util]") {
  for (double a : {0.0, 0.007, 0.06, 0.08, 0.9}) {
    for (double t : {0.5, 5.0, 20.0, 60.0}) {
      const double oracle = riemann([a](double u) { return std::exp(-a * u); }, 0.0, t);
      REQUIRE(psi(a, t) == Catch::Approx(oracle).margin(1e-8));
    }
  }
  REQUIRE(psi(0.0, 5.0) == 5.0);
  REQUIRE(psi(0.08, 20.0) == Catch::Approx(9.9763).margin(5e-4));
  REQUIRE(0.007 * psi(0.08, 20.0) == Catch::Approx(0.07).margin(5e-4));
  REQUIRE(psi(1e-14, 1.0) == Catch::Approx(1.0).margin(1e-10));
  REQUIRE_THROWS_AS(psi(0.1, -1.0), std::invalid_argument);
}

TEST_CASE("theta matches quadrature of psi", "[math_util]") {
  for (double a : {0.0, 0.06, 0.08, 0.9}) {
    for (double t : {0.5, 5.0, 20.0, 60.0}) {
      const double oracle = riemann([a](double s) { return psi(a, s); }, 0.0, t);
      REQUIRE(theta(a, t) == Catch::Approx(oracle).epsilon(1e-7).margin(1e-8));
    }
  }
  REQUIRE(theta(0.0, 2.0) == 2.0);
  REQUIRE(theta(0.06, 20.0) == Catch::Approx(139.221).margin(5e-3));
  REQUIRE(theta(0.9, 0.0) == 0.0);
  REQUIRE_THROWS_AS(theta(0.1, -2.0), std::invalid_argument);
}

TEST_CASE("upsilon matches quadrature of psi squared", "[math_util]") {
  for (double a : {0.0, 0.06, 0.08, 0.9}) {
    for (double t : {0.5, 5.0, 20.0, 60.0}) {
      const double oracle = riemann([a](double s) { return psi(a, s) * psi(a, s); }, 0.0, t);
      REQUIRE(upsilon(a, t) == Catch::Approx(oracle).epsilon(1e-7).margin(1e-8));
    }
  }
  REQUIRE(upsilon(0.0, 3.0) == 9.0);
  REQUIRE(upsilon(0.06, 20.0) == Catch::Approx(1189.95).margin(0.01));
  REQUIRE(upsilon(0.08, 20.0) == Catch::Approx(944.17).margin(0.01));
  REQUIRE_THROWS_AS(upsilon(0.1, -0.5), std::invalid_argument);
}

TEST_CASE("psi family is continuous across a=0", "[math_util]") {
  // The exact difference is O(a) (e.g. upsilon shifts by a*t^4/4), so the
  // check is relative with an absolute floor for small t.
  for (double t = 0.0; t <= 100.0; t += 12.5) {
    REQUIRE(psi(1e-12, t) == Catch::Approx(psi(0.0, t)).epsilon(1e-8).margin(1e-8));
    REQUIRE(theta(1e-12, t) == Catch::Approx(theta(0.0, t)).epsilon(1e-8).margin(1e-8));
    REQUIRE(upsilon(1e-12, t) == Catch::Approx(upsilon(0.0, t)).epsilon(1e-8).margin(1e-8));
  }
}

TEST_CASE("series and closed branches agree near the cutoff", "[math_util]") {
  for (double u : {0.02, 0.045, 0.055, 0.2}) {
    for (double t : {1.0, 30.0}) {
      const double a = u / t;
      const double th_oracle = riemann([a](double s) { return psi(a, s); }, 0.0, t);
      const double up_oracle = riemann([a](double s) { return psi(a, s) * psi(a, s); }, 0.0, t);
      REQUIRE(theta(a, t) == Catch::Approx(th_oracle).epsilon(1e-9));
      REQUIRE(upsilon(a, t) == Catch::Approx(up_oracle).epsilon(1e-9));
    }
  }
}

TEST_CASE("theta and upsilon differentiate back to psi and psi^2", "[math_util]") {
  const double h = 1e-4;
  for (double a : {0.0, 0.06, 0.9}) {
    for (double t : {0.5, 5.0, 50.0}) {
      const double dtheta = (theta(a, t + h) - theta(a, t - h)) / (2.0 * h);
      const double dups = (upsilon(a, t + h) - upsilon(a, t - h)) / (2.0 * h);
      REQUIRE(std::abs(dtheta - psi(a, t)) < 1e-6);
      REQUIRE(std::abs(dups - psi(a, t) * psi(a, t)) < 1e-6);
    }
  }
}

TEST_CASE("normal_cdf reproduces reference values", "[math_util]") {
  REQUIRE(normal_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(normal_cdf(1.0) == Catch::Approx(0.8413447460685429).margin(1e-12));
  REQUIRE(normal_cdf(2.0) == Catch::Approx(0.9772498680518208).margin(1e-12));
  REQUIRE(normal_cdf(-3.0) == Catch::Approx(0.0013498980316301).margin(1e-12));
  REQUIRE(normal_cdf(1.96) == Catch::Approx(0.9750021048517795).margin(1e-12));
  for (double x : {-2.5, -0.3, 0.7, 3.1}) {
    REQUIRE(normal_cdf(x) + normal_cdf(-x) == Catch::Approx(1.0).margin(1e-14));
  }
}

TEST_CASE("integrate handles smooth integrands to tight tolerance", "[math_util]") {
  REQUIRE(integrate([](double s) { return std::sin(s); }, 0.0, std::numbers::pi) ==
          Catch::Approx(2.0).margin(1e-9));
  REQUIRE(integrate([](double s) { return std::exp(-s); }, 0.0, 1.0) ==
          Catch::Approx(1.0 - std::exp(-1.0)).margin(1e-10));
  REQUIRE(integrate([](double s) { return std::cos(10.0 * s); }, 0.0, 3.0) ==
          Catch::Approx(std::sin(30.0) / 10.0).margin(1e-10));
  REQUIRE(integrate([](double s) { return s * s * s; }, -1.0, 2.0) ==
          Catch::Approx(15.0 / 4.0).margin(1e-10));
  REQUIRE(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
  REQUIRE_THROWS_AS(integrate([](double) { return 1.0; }, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("integrate reports unresolvable integrands", "[math_util]") {
  // Integrable singularity at 0; the adaptive refinement bottoms out.
  auto f = [](double s) { return s > 0.0 ? 1.0 / std::sqrt(s) : 1e300; };
  REQUIRE_THROWS_AS(integrate(f, 0.0, 1.0, 1e-12), NumericError);
}

TEST_CASE("solve2x2 agrees with Cramer on well-conditioned systems", "[math_util]") {
  std::mt19937_64 rng(20260816u);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  int solved = 0;
  for (int k = 0; k < 200; ++k) {
    const double a11 = unif(rng), a12 = unif(rng), a21 = unif(rng), a22 = unif(rng);
    const double x0 = unif(rng), x1 = unif(rng);
    const double det = a11 * a22 - a12 * a21;
    if (std::abs(det) < 0.1) continue;
    const double r1 = a11 * x0 + a12 * x1;
    const double r2 = a21 * x0 + a22 * x1;
    const auto sol = solve2x2(a11, a12, r1, a21, a22, r2);
    REQUIRE_FALSE(sol.singular);
    REQUIRE(sol.x0 == Catch::Approx(x0).margin(1e-11));
    REQUIRE(sol.x1 == Catch::Approx(x1).margin(1e-11));
    ++solved;
  }
  REQUIRE(solved > 100);
}

TEST_CASE("solve2x2 flags singular systems", "[math_util]") {
  REQUIRE(solve2x2(1.0, 2.0, 1.0, 2.0, 4.0, 2.0).singular);
  REQUIRE(solve2x2(0.0, 0.0, 0.0, 0.0, 0.0, 0.0).singular);
  REQUIRE_FALSE(solve2x2(2.0, 0.0, 2.0, 0.0, 3.0, 6.0).singular);
}

TEST_CASE("pairwise_sum is accurate and partition independent", "[math_util]") {
  std::mt19937_64 rng(97u);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> v(100001);
  long double exact = 0.0L;
  for (auto& x : v) {
    x = unif(rng);
    exact += static_cast<long double>(x);
  }
  REQUIRE(pairwise_sum(v) == Catch::Approx(static_cast<double>(exact)).margin(1e-10));
  REQUIRE(pairwise_sum({}) == 0.0);
  std::vector<double> tenths(1000000, 0.1);
  REQUIRE(pairwise_sum(tenths) == Catch::Approx(100000.0).margin(1e-6));
}

TEST_CASE("brent finds bracketed roots", "[math_util]") {
  REQUIRE(brent([](double x) { return std::cos(x); }, 0.0, 2.0) ==
          Catch::Approx(std::numbers::pi / 2.0).margin(1e-10));
  REQUIRE(brent([](double x) { return x * x * x - 2.0; }, 0.0, 2.0) ==
          Catch::Approx(std::cbrt(2.0)).margin(1e-10));
  REQUIRE(brent([](double x) { return x; }, 0.0, 1.0) == 0.0);
  REQUIRE_THROWS_AS(brent([](double x) { return 1.0 + x * x; }, -1.0, 1.0),
                    std::invalid_argument);
}
