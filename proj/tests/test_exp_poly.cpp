#include "glidepath/exp_poly.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "glidepath/math_util.hpp"

using namespace glidepath;

namespace {

// Assembles a random real-valued exponential polynomial from real basis
// functions: s^k e^{a s}, s^k e^{a s} cos(b s), s^k e^{a s} sin(b s).
ExpPoly random_real_poly(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_real_distribution<double> rate(-0.4, 0.15);
  std::uniform_real_distribution<double> freq(0.1, 1.5);
  std::uniform_int_distribution<int> power(0, 2);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<int> n_terms(1, 4);
  ExpPoly p;
  const int n = n_terms(rng);
  for (int i = 0; i < n; ++i) {
    const double c = coef(rng);
    const int k = power(rng);
    const double a = rate(rng);
    switch (kind(rng)) {
      case 0:
        p.add_term(c, k, a);
        break;
      case 1:
        p += ExpPoly::damped_cos(c, k, a, freq(rng));
        break;
      default:
        p += ExpPoly::damped_sin(c, k, a, freq(rng));
        break;
    }
  }
  return p;
}

}  // namespace

TEST_CASE("evaluate matches hand-computed basis values", "[exp_poly]") {
  const ExpPoly p = ExpPoly::constant(2.0) + ExpPoly::monomial(3.0, 1, -0.5) +
                    ExpPoly::damped_cos(1.5, 0, 0.0, 2.0) + ExpPoly::damped_sin(-0.7, 2, 0.1, 1.0);
  for (double s : {0.0, 0.3, 1.7, 4.0}) {
    const double expected = 2.0 + 3.0 * s * std::exp(-0.5 * s) + 1.5 * std::cos(2.0 * s) -
                            0.7 * s * s * std::exp(0.1 * s) * std::sin(s);
    REQUIRE(p.evaluate(s) == Catch::Approx(expected).margin(1e-12));
    REQUIRE(std::abs(p.evaluate_complex(s).imag()) < 1e-12);
  }
}

TEST_CASE("like terms merge and zero coefficients drop", "[exp_poly]") {
  ExpPoly p;
  p.add_term(1.0, 1, -0.3);
  p.add_term(2.0, 1, -0.3);
  p.add_term(0.0, 0, 0.7);
  REQUIRE(p.terms().size() == 1);
  REQUIRE(p.terms()[0].coef.real() == Catch::Approx(3.0));
  p.add_term(-3.0, 1, -0.3);
  REQUIRE(p.evaluate(2.0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("products evaluate to products", "[exp_poly]") {
  std::mt19937_64 rng(4211u);
  for (int trial = 0; trial < 30; ++trial) {
    const ExpPoly a = random_real_poly(rng);
    const ExpPoly b = random_real_poly(rng);
    const ExpPoly ab = a * b;
    for (double s : {0.0, 0.9, 3.3, 7.0}) {
      REQUIRE(ab.evaluate(s) ==
              Catch::Approx(a.evaluate(s) * b.evaluate(s)).margin(1e-10).epsilon(1e-11));
    }
  }
}

TEST_CASE("derivative matches central differences", "[exp_poly]") {
  std::mt19937_64 rng(77u);
  for (int trial = 0; trial < 20; ++trial) {
    const ExpPoly p = random_real_poly(rng);
    const ExpPoly dp = p.derivative();
    const double h = 1e-6;
    for (double s : {0.4, 2.0, 5.5}) {
      const double fd = (p.evaluate(s + h) - p.evaluate(s - h)) / (2.0 * h);
      REQUIRE(dp.evaluate(s) == Catch::Approx(fd).margin(1e-6).epsilon(1e-7));
    }
  }
}

namespace {

// Magnitude-aware quadrature tolerance: absolute 1e-12 is unreachable when
// the integrand itself is in the thousands.
double quad_tol(const ExpPoly& p, double lo, double hi) {
  double scale = 1.0;
  for (int i = 0; i <= 50; ++i) {
    const double s = lo + (hi - lo) * i / 50.0;
    scale = std::max(scale, std::abs(p.evaluate(s)));
  }
  return 1e-12 * scale * std::max(1.0, hi - lo);
}

}  // namespace

TEST_CASE("integrate matches adaptive quadrature", "[exp_poly]") {
  std::mt19937_64 rng(90210u);
  for (int trial = 0; trial < 30; ++trial) {
    const ExpPoly p = random_real_poly(rng);
    for (double t : {0.7, 6.0, 20.0}) {
      const double tol = quad_tol(p, 0.0, t);
      const double oracle = integrate([&](double s) { return p.evaluate(s); }, 0.0, t, tol);
      REQUIRE(p.integrate(t) == Catch::Approx(oracle).margin(20.0 * tol).epsilon(1e-9));
    }
  }
}

TEST_CASE("integrate is exact for tiny rates where the closed form cancels", "[exp_poly]") {
  // |z|*T well below the series switch: int_0^T s e^{z s} ds with z = 1e-6.
  const double z = 1e-6, T = 50.0;
  const ExpPoly p = ExpPoly::monomial(1.0, 1, z);
  const double oracle = integrate([&](double s) { return s * std::exp(z * s); }, 0.0, T, 1e-9);
  REQUIRE(p.integrate(T) == Catch::Approx(oracle).epsilon(1e-11));
  // Just below and above the branch point |z|*T = 0.5.
  for (double rate : {0.4 / 80.0, 0.64 / 80.0}) {
    const ExpPoly q = ExpPoly::monomial(2.0, 2, -rate);
    const double o =
        integrate([&](double s) { return 2.0 * s * s * std::exp(-rate * s); }, 0.0, 80.0, 1e-8);
    REQUIRE(q.integrate(80.0) == Catch::Approx(o).epsilon(1e-10));
  }
}

TEST_CASE("tail convolution matches nested quadrature", "[exp_poly]") {
  std::mt19937_64 rng(5150u);
  const double T = 12.0;
  for (int trial = 0; trial < 12; ++trial) {
    const ExpPoly p = random_real_poly(rng);
    const double tol = quad_tol(p, 0.0, T);
    for (double r : {0.0, 0.06, 0.9}) {
      const ExpPoly conv = p.tail_convolution(r, T);
      for (double u : {0.0, 1.7, 6.0, 11.2, 12.0}) {
        const double oracle = integrate(
            [&](double s) { return p.evaluate(s) * std::exp(-r * (s - u)); }, u, T, tol);
        REQUIRE(conv.evaluate(u) == Catch::Approx(oracle).margin(20.0 * tol).epsilon(1e-9));
      }
      REQUIRE(conv.evaluate(T) == Catch::Approx(0.0).margin(10.0 * tol));
    }
  }
}

TEST_CASE("head convolution matches nested quadrature", "[exp_poly]") {
  std::mt19937_64 rng(314159u);
  const double T = 12.0;
  for (int trial = 0; trial < 12; ++trial) {
    const ExpPoly p = random_real_poly(rng);
    const double tol = quad_tol(p, 0.0, T);
    for (double r : {0.0, 0.06, 0.9}) {
      const ExpPoly conv = p.head_convolution(r, T);
      REQUIRE(conv.evaluate(0.0) == Catch::Approx(0.0).margin(10.0 * tol));
      for (double s : {0.4, 3.0, 8.5, 12.0}) {
        const double oracle = integrate(
            [&](double u) { return p.evaluate(u) * std::exp(-r * (s - u)); }, 0.0, s, tol);
        REQUIRE(conv.evaluate(s) == Catch::Approx(oracle).margin(20.0 * tol).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("convolutions stay exact when the kernel resonates with a term", "[exp_poly]") {
  // Term rate equal to the kernel rate forces the zero-rate antiderivative
  // path; e^{-a s} against kernel e^{-a (s-u)} and a constant against a zero
  // kernel both land there.
  const double a = 0.25, T = 30.0;
  const ExpPoly p = ExpPoly::monomial(1.3, 0, -a) + ExpPoly::constant(0.8);
  const ExpPoly tail = p.tail_convolution(a, T);
  const ExpPoly head = p.head_convolution(0.0, T);
  for (double u : {0.0, 2.0, 14.0, 29.0}) {
    const double tail_oracle = integrate(
        [&](double s) { return p.evaluate(s) * std::exp(-a * (s - u)); }, u, T, 1e-12);
    REQUIRE(tail.evaluate(u) == Catch::Approx(tail_oracle).epsilon(1e-10).margin(1e-11));
    const double head_oracle = integrate([&](double s) { return p.evaluate(s); }, 0.0, u, 1e-12);
    REQUIRE(head.evaluate(u) == Catch::Approx(head_oracle).epsilon(1e-10).margin(1e-11));
  }
}
