#pragma once

// Extremal deterministic strategies indexed by the Lagrange multiplier nu.
//
// Bond side: with a constant market price of rate risk (a = kappa) the
// extremal exposure is f^r_s = (lambda^r + 2 nu g_s) / (1 - 2 nu) where
// g_s = sigma_r Psi(kappa, T - s) is the duration exposure of the horizon
// bond, and the horizon log-moments have closed forms. nu < 1/2 maximizes
// the log-mean for the implied variance, nu > 1/2 minimizes it, and the
// infinite limits collapse to the T-bond hedge with zero variance.
//
// Equity side: extremal exposures solve the second-order condition
// A f'' + C f + D = 0 subject to the first-order integral equation, with
// A = 1 - 2 nu, C = 2 nu (alpha - sigma_x/sigma_S)^2 - alpha^2 and
// D = alpha^2 x_bar / sigma_S. The sign pattern of (A, C) picks one of
// three closed forms: exponential (type I), trigonometric (type II) on the
// same-sign region, and quadratic (type III) on the boundary C = 0. The
// coefficient systems come out of matching exponential terms in the
// integral equation; both residuals are exposed so solutions can always be
// checked against the equations that define them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "glidepath/exp_poly.hpp"
#include "glidepath/io.hpp"
#include "glidepath/market_model.hpp"
#include "glidepath/math_util.hpp"
#include "glidepath/portfolio_distribution.hpp"
#include "glidepath/strategy.hpp"

namespace glidepath {

// Extended-real multiplier. Finite values select one member of an extremal
// family; the infinities encode the zero-variance limits (T-bond hedge on
// the rate side, zero exposure on the equity side).
struct Nu {
  double value = 0.0;

  Nu() = default;
  explicit Nu(double v) : value(v) {
    if (std::isnan(v)) throw std::invalid_argument("Nu: NaN is not a valid multiplier");
  }

  static Nu negative_infinity() { return Nu(-std::numeric_limits<double>::infinity()); }
  static Nu positive_infinity() { return Nu(std::numeric_limits<double>::infinity()); }

  bool finite() const { return std::isfinite(value); }
};

inline std::string format_nu(Nu nu) {
  if (!nu.finite()) return nu.value < 0.0 ? "-inf" : "inf";
  std::ostringstream os;
  os << std::setprecision(12) << nu.value;
  return os.str();
}

inline Nu parse_nu(const std::string& token) {
  const std::string t = trim(token);
  if (t == "-inf") return Nu::negative_infinity();
  if (t == "inf" || t == "+inf") return Nu::positive_infinity();
  return Nu(parse_double(t, "nu"));
}

// Thrown when a multiplier hits one of the isolated values whose linear
// coefficient system is singular and no extremal strategy of the closed
// form exists. Sweeps catch this and mark the grid point instead of dying.
class SingularNuError : public std::runtime_error {
 public:
  explicit SingularNuError(double nu_value)
      : std::runtime_error("equity_extremal: singular nu " + describe(nu_value)),
        nu_value_(nu_value) {}

  double nu_value() const { return nu_value_; }

 private:
  static std::string describe(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
  }

  double nu_value_;
};

namespace detail {

// Solves [[m00 m01], [m10 m11]] (x, y)' = (r0, r1)' with row equilibration.
// A determinant below 1e-14 of the entry magnitude is reported as singular.
inline std::pair<double, double> solve_extremal_system(double m00, double m01, double r0,
                                                       double m10, double m11, double r1,
                                                       double nu_value) {
  const double s0 = std::max(std::abs(m00), std::abs(m01));
  const double s1 = std::max(std::abs(m10), std::abs(m11));
  if (!(s0 > 0.0) || !(s1 > 0.0) || !std::isfinite(s0) || !std::isfinite(s1))
    throw SingularNuError(nu_value);
  m00 /= s0;
  m01 /= s0;
  r0 /= s0;
  m10 /= s1;
  m11 /= s1;
  r1 /= s1;
  const double det = m00 * m11 - m01 * m10;
  const double mag = std::abs(m00 * m11) + std::abs(m01 * m10);
  if (!(std::abs(det) > 1e-14 * std::max(mag, 1e-300))) throw SingularNuError(nu_value);
  return {(r0 * m11 - m01 * r1) / det, (m00 * r1 - m10 * r0) / det};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Bond family (requires the constant-price-of-risk case a = kappa)
// ---------------------------------------------------------------------------

struct BondExtremalSolution {
  Nu nu;
  double lambda_r = 0.0;
  RateParams rates;
  double horizon = 0.0;

  // Duration exposure of the horizon bond, g_s = sigma_r Psi(kappa, T - s).
  double g(double s) const { return rates.sigma_r * psi(rates.kappa, std::max(horizon - s, 0.0)); }

  double operator()(double s) const {
    const double slack = 1e-9 * std::max(1.0, horizon);
    if (s < -slack || s > horizon + slack)
      throw std::invalid_argument("BondExtremalSolution: time outside [0, horizon]");
    if (!nu.finite()) return -g(s);
    return (lambda_r + 2.0 * nu.value * g(s)) / (1.0 - 2.0 * nu.value);
  }

  Strategy strategy() const {
    const ExpPoly gp = detail::bond_vol_poly(rates.kappa, rates.sigma_r, horizon);
    if (!nu.finite()) return Strategy::closed_form(horizon, gp.scaled(-1.0));
    const double inv = 1.0 / (1.0 - 2.0 * nu.value);
    ExpPoly p = ExpPoly::constant(lambda_r * inv);
    p += gp.scaled(2.0 * nu.value * inv);
    return Strategy::closed_form(horizon, p);
  }
};

inline BondExtremalSolution bond_extremal(const RateParams& rp, double horizon, Nu nu) {
  rp.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("bond_extremal: horizon must be positive");
  const double lambda = lambda_r_const(rp);  // rejects a != kappa
  if (nu.finite() && nu.value == 0.5)
    throw std::invalid_argument("bond_extremal: nu = 1/2 has no extremal strategy");
  return {nu, lambda, rp, horizon};
}

// Horizon log-moments of the extremal bond strategy in closed form. The
// variance scales as base / (1 - 2 nu)^2 where base is the nu = 0 variance;
// the infinite limits return the zero-coupon log-return with zero variance.
inline LogNormalSummary bond_closed_form_moments(const RateParams& rp, const MarketState& st,
                                                 double horizon, Nu nu) {
  rp.validate();
  st.validate();
  if (!(horizon > 0.0))
    throw std::invalid_argument("bond_closed_form_moments: horizon must be positive");
  const double lambda = lambda_r_const(rp);
  const double T = horizon;
  const double P = psi(rp.kappa, T);
  const double U = upsilon(rp.kappa, T);
  if (!nu.finite()) {
    // computed through the bond price so that shifting by log p_0(T) later
    // cancels bit-exactly, leaving the hedged multiplier at exactly one
    const double mu = -std::log(zcb_price(rp, st.r0, T));
    return {mu, 0.0};
  }
  if (nu.value == 0.5)
    throw std::invalid_argument("bond_closed_form_moments: nu = 1/2 has no extremal strategy");
  const double n2 = 2.0 * nu.value;
  const double inv = 1.0 / (1.0 - n2);
  const double gap = rp.r_bar - rp.b;
  const double l2 = lambda * lambda;
  const double mu =
      T * ((rp.r_bar - n2 * rp.b + l2) * inv - 0.5 * l2 * inv * inv - n2 * gap * inv * inv) +
      P * (st.r0 - (rp.r_bar - n2 * rp.b) * inv + n2 * gap * inv * inv) -
      0.5 * rp.sigma_r * rp.sigma_r * (n2 * inv) * (n2 * inv) * U;
  const double base = T * (l2 + 2.0 * gap) - 2.0 * P * gap + rp.sigma_r * rp.sigma_r * U;
  return {mu, std::max(base, 0.0) * inv * inv};
}

// Inverts the variance map: returns the maximizing (nu < 1/2) and minimizing
// (nu > 1/2) multipliers whose extremal strategies attain the target.
inline std::pair<Nu, Nu> bond_nu_for_variance(const RateParams& rp, double horizon,
                                              double target_sigma2) {
  rp.validate();
  if (!(horizon > 0.0))
    throw std::invalid_argument("bond_nu_for_variance: horizon must be positive");
  const double lambda = lambda_r_const(rp);
  if (!(target_sigma2 >= 0.0))
    throw std::invalid_argument("bond_nu_for_variance: target variance must be non-negative");
  if (target_sigma2 == 0.0) return {Nu::negative_infinity(), Nu::positive_infinity()};
  const double T = horizon;
  const double gap = rp.r_bar - rp.b;
  const double base = T * (lambda * lambda + 2.0 * gap) - 2.0 * psi(rp.kappa, T) * gap +
                      rp.sigma_r * rp.sigma_r * upsilon(rp.kappa, T);
  const double root = std::sqrt(base / target_sigma2);
  return {Nu(0.5 * (1.0 - root)), Nu(0.5 * (1.0 + root))};
}

// ---------------------------------------------------------------------------
// Equity family
// ---------------------------------------------------------------------------

enum class SolutionType {
  kExponentialI,
  kTrigonometricII,
  kQuadraticIII,
};

inline const char* solution_type_label(SolutionType type) {
  switch (type) {
    case SolutionType::kExponentialI:
      return "I";
    case SolutionType::kTrigonometricII:
      return "II";
    case SolutionType::kQuadraticIII:
      return "III";
  }
  throw std::runtime_error("solution_type_label: corrupt type tag");
}

// Coefficients of the extremal second-order condition A f'' + C f + D = 0.
struct OdeCoefficients {
  double A = 0.0;
  double C = 0.0;
  double D = 0.0;
};

inline OdeCoefficients ode_coefficients(const EquityParams& ep, double nu_value) {
  const double gap = ep.alpha - ep.sigma_x / ep.sigma_S;
  return {1.0 - 2.0 * nu_value, 2.0 * nu_value * gap * gap - ep.alpha * ep.alpha,
          ep.alpha * ep.alpha * ep.x_bar / ep.sigma_S};
}

// Sign analysis of (A, C). Opposite signs give real characteristic roots
// (type I), equal signs give complex roots (type II) and C = 0 within
// 1e-12 of (sigma_x/sigma_S)^2 is treated as the quadratic boundary. The
// boundary is a measure-zero curve, so near-misses take the analytic limit.
inline SolutionType classify_solution_type(const EquityParams& ep, Nu nu) {
  ep.validate();
  if (!nu.finite()) throw std::invalid_argument("classify_solution_type: nu must be finite");
  if (nu.value == 0.5)
    throw std::invalid_argument("classify_solution_type: nu = 1/2 has no extremal strategy");
  const OdeCoefficients ode = ode_coefficients(ep, nu.value);
  const double ratio = ep.sigma_x / ep.sigma_S;
  if (std::abs(ode.C) <= 1e-12 * ratio * ratio) return SolutionType::kQuadraticIII;
  return (ode.A > 0.0) == (ode.C > 0.0) ? SolutionType::kTrigonometricII
                                        : SolutionType::kExponentialI;
}

// One member of the extremal equity family, stored as the closed form of its
// type together with the inputs that produced it.
//   type I:   f_s = b0 + b1 e^{c1 s} + b2 e^{c2 s} with c1 = -c2 > 0
//   type II:  f_s = b0 + b1 sin(c1 s) + b2 cos(c1 s); c1 is the frequency, c2 = 0
//   type III: f_s = b0 + b1 s + b2 s^2; c1 = c2 = 0
struct EquityExtremalSolution {
  Nu nu;
  SolutionType type = SolutionType::kQuadraticIII;
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  EquityParams equity;
  MarketState state;
  double horizon = 0.0;

  double operator()(double s) const {
    const double slack = 1e-9 * std::max(1.0, horizon);
    if (s < -slack || s > horizon + slack)
      throw std::invalid_argument("EquityExtremalSolution: time outside [0, horizon]");
    switch (type) {
      case SolutionType::kExponentialI:
        return b0 + b1 * std::exp(c1 * s) + b2 * std::exp(c2 * s);
      case SolutionType::kTrigonometricII:
        return b0 + b1 * std::sin(c1 * s) + b2 * std::cos(c1 * s);
      case SolutionType::kQuadraticIII:
        return b0 + s * (b1 + s * b2);
    }
    throw std::runtime_error("EquityExtremalSolution: corrupt type tag");
  }

  ExpPoly exp_poly() const {
    ExpPoly p = ExpPoly::constant(b0);
    switch (type) {
      case SolutionType::kExponentialI:
        p += ExpPoly::monomial(b1, 0, c1);
        p += ExpPoly::monomial(b2, 0, c2);
        break;
      case SolutionType::kTrigonometricII:
        p += ExpPoly::damped_sin(b1, 0, 0.0, c1);
        p += ExpPoly::damped_cos(b2, 0, 0.0, c1);
        break;
      case SolutionType::kQuadraticIII:
        p += ExpPoly::monomial(b1, 1, 0.0);
        p += ExpPoly::monomial(b2, 2, 0.0);
        break;
    }
    return p;
  }

  Strategy strategy() const { return Strategy::closed_form(horizon, exp_poly()); }
};

inline EquityExtremalSolution equity_extremal(const EquityParams& ep, const MarketState& st,
                                              double horizon, Nu nu) {
  ep.validate();
  st.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("equity_extremal: horizon must be positive");

  EquityExtremalSolution sol;
  sol.nu = nu;
  sol.equity = ep;
  sol.state = st;
  sol.horizon = horizon;

  if (!nu.finite()) return sol;  // risk-free limit, zero exposure
  if (nu.value == 0.5)
    throw std::invalid_argument("equity_extremal: nu = 1/2 has no extremal strategy");

  const double q = 1.0 - 2.0 * nu.value;

  if (nu.value == 0.0) {
    // Global maximum: f equals the expected market price of equity risk.
    if (ep.alpha == 0.0) {
      sol.b0 = st.x0 / ep.sigma_S;
    } else {
      sol.type = SolutionType::kExponentialI;
      sol.b0 = ep.x_bar / ep.sigma_S;
      sol.b2 = (st.x0 - ep.x_bar) / ep.sigma_S;
      sol.c1 = ep.alpha;
      sol.c2 = -ep.alpha;
    }
    return sol;
  }
  if (ep.sigma_x == 0.0) {
    // No feedback from realized shocks into the premium: the first-order
    // condition collapses to xi - (1 - 2 nu) f = 0.
    if (ep.alpha == 0.0) {
      sol.b0 = st.x0 / (ep.sigma_S * q);
    } else {
      sol.type = SolutionType::kExponentialI;
      sol.b0 = ep.x_bar / (ep.sigma_S * q);
      sol.b2 = (st.x0 - ep.x_bar) / (ep.sigma_S * q);
      sol.c1 = ep.alpha;
      sol.c2 = -ep.alpha;
    }
    return sol;
  }

  const OdeCoefficients ode = ode_coefficients(ep, nu.value);
  sol.type = classify_solution_type(ep, nu);
  const double T = horizon;
  const double a = ep.alpha;
  const double x0 = st.x0;
  const double xb = ep.x_bar;
  const double sS = ep.sigma_S;
  const double sx = ep.sigma_x;
  const double rt = sx / sS - a;

  switch (sol.type) {
    case SolutionType::kQuadraticIII: {
      // C = 0 forces alpha != sigma_x/sigma_S, so rt is bounded away from 0.
      // The system comes from matching coefficients of {1, s, s^2, e^{-as},
      // e^{as}} in the first-order condition; note the x0 term carries
      // 1/sigma_S (writing it over sigma_x instead breaks the residual).
      sol.b2 = -ode.D / (2.0 * ode.A);
      const double level = xb * a / (sS * q);
      const auto [b0, b1] = detail::solve_extremal_system(
          a, T * a + 1.0, level * (0.5 * T * T * a * a + T * a + 1.0),  //
          sx / sS, sx / (sx - sS * a), x0 / sS * rt + level * (sx / sS) / rt, nu.value);
      sol.b0 = b0;
      sol.b1 = b1;
      break;
    }
    case SolutionType::kTrigonometricII: {
      const double c = std::sqrt(ode.C / ode.A);
      const double k1 = std::sin(c * T);
      const double k2 = std::cos(c * T);
      sol.c1 = c;
      sol.b0 = -ode.D / ode.C;
      const double lead = a * xb / sS;
      const auto [b1, b2] = detail::solve_extremal_system(
          k1 * a + k2 * c, k2 * a - k1 * c, lead * (1.0 / ode.A + a * a / ode.C),  //
          c, rt, x0 / sx * (c * c + rt * rt) + lead * (1.0 / ode.A + a * rt / ode.C), nu.value);
      sol.b1 = b1;
      sol.b2 = b2;
      break;
    }
    case SolutionType::kExponentialI: {
      const double c1 = std::sqrt(-ode.C / ode.A);
      sol.c1 = c1;
      sol.c2 = -c1;
      sol.b0 = -ode.D / ode.C;
      const double half_ratio = 0.5 * sx / sS;
      if (std::abs(a - half_ratio) <= 1e-12 * std::max(a, half_ratio)) {
        // Here c1 equals alpha and the general system degenerates; the
        // closed form with b1 = 0 applies instead.
        const double decay = std::exp(-2.0 * a * T);
        const double den = 2.0 * nu.value * decay - 1.0;
        if (!(std::abs(den) > 1e-14 * (2.0 * std::abs(nu.value) * decay + 1.0)))
          throw SingularNuError(nu.value);
        sol.b2 =
            (-x0 / sS + xb / sS * (1.0 - 4.0 * nu.value / q * (std::exp(-a * T) - 1.0))) / den;
      } else {
        const double c2 = -c1;
        const double mC = -ode.C;  // alpha^2 - 2 nu (alpha - sigma_x/sigma_S)^2
        const double gap = a - sx / sS;
        const double rhs1 = a * xb / (sS * mC);
        const double rhs2 = -x0 / sS + a * xb / sS * (a - 2.0 * nu.value * gap) / mC;
        // The first row is scaled by e^{-c1 T} so large exponents (nu near
        // 1/2) cannot overflow; the system is unchanged.
        const auto [b1, b2] = detail::solve_extremal_system(
            1.0 / (c1 - a), std::exp(-2.0 * c1 * T) / (c2 - a), rhs1 * std::exp(-c1 * T),  //
            sx / (sS * (c1 + a) - sx), sx / (sS * (c2 + a) - sx), rhs2, nu.value);
        sol.b1 = b1;
        sol.b2 = b2;
      }
      break;
    }
  }
  return sol;
}

// Sup-residual of the defining first-order integral equation
//   xi_s - f_s + 2 nu h_s - 2 nu (sigma_x/sigma_S) int_0^s h_u e^{-alpha(s-u)} du = 0
// with h_u = f_u - (sigma_x/sigma_S) int_u^T f_v e^{-alpha(v-u)} dv, evaluated
// on a 1001-point grid. The whole left-hand side reduces to exponential
// polynomials, so the only error in the residual itself is roundoff.
inline double residual_integral_equation(const EquityExtremalSolution& sol) {
  if (!sol.nu.finite())
    throw std::invalid_argument("residual_integral_equation: nu must be finite");
  const EquityParams& ep = sol.equity;
  const double ratio = ep.sigma_x / ep.sigma_S;
  const double n2 = 2.0 * sol.nu.value;
  const ExpPoly f = sol.exp_poly();
  ExpPoly h = f;
  if (ep.sigma_x != 0.0) h += f.tail_convolution(ep.alpha, sol.horizon).scaled(-ratio);
  ExpPoly lhs = detail::xi_poly(ep, sol.state) - f + h.scaled(n2);
  if (ep.sigma_x != 0.0 && n2 != 0.0)
    lhs = lhs - h.head_convolution(ep.alpha, sol.horizon).scaled(n2 * ratio);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double s = sol.horizon * static_cast<double>(i) / 1000.0;
    worst = std::max(worst, std::abs(lhs.evaluate(s)));
  }
  return worst;
}

// Sup-residual of A f'' + C f + D = 0 on the same grid, with f'' taken
// analytically from the stored closed form.
inline double residual_ode(const EquityExtremalSolution& sol) {
  if (!sol.nu.finite()) throw std::invalid_argument("residual_ode: nu must be finite");
  const OdeCoefficients ode = ode_coefficients(sol.equity, sol.nu.value);
  const ExpPoly f = sol.exp_poly();
  const ExpPoly fpp = f.derivative().derivative();
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double s = sol.horizon * static_cast<double>(i) / 1000.0;
    worst = std::max(worst, std::abs(ode.A * fpp.evaluate(s) + ode.C * f.evaluate(s) + ode.D));
  }
  return worst;
}

// Finds the nu in (-inf, 0] whose extremal strategy attains the target
// variance. The search runs on u = 1/(1 - 2 nu), which maps (-inf, 0] onto
// (0, 1] with the risk-free limit at u -> 0.
inline Nu equity_nu_for_variance(const EquityParams& ep, const MarketState& st, double horizon,
                                 double target_sigma2) {
  ep.validate();
  st.validate();
  if (!(horizon > 0.0))
    throw std::invalid_argument("equity_nu_for_variance: horizon must be positive");
  if (!(target_sigma2 >= 0.0))
    throw std::invalid_argument("equity_nu_for_variance: target variance must be non-negative");
  const auto family_sigma2 = [&](double u) {
    const Nu nu(0.5 * (1.0 - 1.0 / u));
    const EquityExtremalSolution sol = equity_extremal(ep, st, horizon, nu);
    return horizon_moments_equity_only(ep, st, sol.strategy(), MomentRoute::kClosedForm).sigma2;
  };
  const double cap = family_sigma2(1.0);  // nu = 0, the global maximum point
  if (target_sigma2 > cap)
    throw std::invalid_argument(
        "equity_nu_for_variance: target exceeds the variance of the maximal-mean strategy");
  if (target_sigma2 == 0.0) return Nu::negative_infinity();
  if (target_sigma2 == cap) return Nu(0.0);
  double lo = 1e-3;
  while (family_sigma2(lo) > target_sigma2) {
    lo *= 0.25;
    if (lo < 1e-14) return Nu::negative_infinity();
  }
  const double u =
      brent([&](double v) { return family_sigma2(v) - target_sigma2; }, lo, 1.0, 1e-15);
  return Nu(0.5 * (1.0 - 1.0 / u));
}

// Closed-form horizon log-moments of a constant equity exposure. The
// variance expansion is c^2 [T - 2 R Theta(alpha,T) + R^2 Upsilon(alpha,T)]
// with R = sigma_x/sigma_S, obtained by integrating the squared net weight
// directly; alpha = 0 falls back to quadrature of the defining integrals.
inline LogNormalSummary constant_equity_moments(const EquityParams& ep, const MarketState& st,
                                                double horizon, double exposure) {
  ep.validate();
  st.validate();
  if (!(horizon > 0.0))
    throw std::invalid_argument("constant_equity_moments: horizon must be positive");
  if (!std::isfinite(exposure))
    throw std::invalid_argument("constant_equity_moments: exposure must be finite");
  if (ep.alpha == 0.0) {
    return horizon_moments_equity_only(ep, st, Strategy::constant(horizon, exposure),
                                       MomentRoute::kQuadrature);
  }
  const double T = horizon;
  const double mu =
      exposure / ep.sigma_S * (T * ep.x_bar + (st.x0 - ep.x_bar) * psi(ep.alpha, T)) -
      0.5 * T * exposure * exposure;
  const double R = ep.sigma_x / ep.sigma_S;
  const double s2 =
      exposure * exposure * (T - 2.0 * R * theta(ep.alpha, T) + R * R * upsilon(ep.alpha, T));
  return {mu, std::max(s2, 0.0)};
}

// ---------------------------------------------------------------------------
// Joint pairs and sweeps
// ---------------------------------------------------------------------------

struct JointExtremalPair {
  BondExtremalSolution bond;
  EquityExtremalSolution equity;
  LogNormalSummary summary;
};

// Extremal pairs under independent factors: the bond and equity solutions
// for one shared nu, with additive horizon log-moments.
inline JointExtremalPair joint_pair(const RateParams& rp, const EquityParams& ep,
                                    const MarketState& st, double horizon, Nu nu) {
  if (ep.rho != 0.0)
    throw std::invalid_argument("joint_pair: requires independent factors (rho = 0)");
  BondExtremalSolution bond = bond_extremal(rp, horizon, nu);
  EquityExtremalSolution equity = equity_extremal(ep, st, horizon, nu);
  const LogNormalSummary rates = bond_closed_form_moments(rp, st, horizon, nu);
  const LogNormalSummary shares =
      horizon_moments_equity_only(ep, st, equity.strategy(), MomentRoute::kClosedForm);
  LogNormalSummary total{rates.mu + shares.mu, rates.sigma2 + shares.sigma2};
  return {std::move(bond), std::move(equity), total};
}

// Extremal rate strategy when the equity exposure is fixed and the factors
// correlate: f^r_s = (lambda^r + 2 nu g_s + rho (2 nu h^S_s - f^S_s)) / (1 - 2 nu).
// Closed-form equity inputs stay closed form; sampled inputs are evaluated
// through the indirect-effect quadrature and returned on the default grid.
inline Strategy bond_extremal_given_equity(const RateParams& rp, const EquityParams& ep,
                                           double horizon, Nu nu, const Strategy& f_S,
                                           double rho) {
  rp.validate();
  ep.validate();
  if (!(horizon > 0.0))
    throw std::invalid_argument("bond_extremal_given_equity: horizon must be positive");
  if (!(std::isfinite(rho) && std::abs(rho) <= 1.0))
    throw std::invalid_argument("bond_extremal_given_equity: rho must lie in [-1, 1]");
  if (std::abs(f_S.horizon() - horizon) > 1e-9 * std::max(1.0, horizon))
    throw std::invalid_argument("bond_extremal_given_equity: equity strategy horizon mismatch");
  const double lambda = lambda_r_const(rp);
  if (nu.finite() && nu.value == 0.5)
    throw std::invalid_argument("bond_extremal_given_equity: nu = 1/2 has no extremal strategy");

  const double ratio = ep.sigma_x / ep.sigma_S;
  if (f_S.has_closed_form()) {
    const ExpPoly f = f_S.exp_poly();
    ExpPoly h = f;
    if (ep.sigma_x != 0.0) h += f.tail_convolution(ep.alpha, horizon).scaled(-ratio);
    const ExpPoly g = detail::bond_vol_poly(rp.kappa, rp.sigma_r, horizon);
    if (!nu.finite()) return Strategy::closed_form(horizon, (g + h.scaled(rho)).scaled(-1.0));
    const double n2 = 2.0 * nu.value;
    ExpPoly p = ExpPoly::constant(lambda) + g.scaled(n2) + h.scaled(rho * n2) - f.scaled(rho);
    return Strategy::closed_form(horizon, p.scaled(1.0 / (1.0 - n2)));
  }
  const detail::ExposureCurve curve(f_S, ep.alpha);
  const auto h_S = [&](double u) {
    return ep.sigma_x == 0.0 ? f_S(u) : f_S(u) - ratio * curve.tail(u);
  };
  return Strategy::sample(horizon, [&](double s) {
    const double g = rp.sigma_r * psi(rp.kappa, horizon - s);
    if (!nu.finite()) return -(g + rho * h_S(s));
    const double n2 = 2.0 * nu.value;
    return (lambda + n2 * g + rho * (n2 * h_S(s) - f_S(s))) / (1.0 - n2);
  });
}

struct ProfilePoint {
  Nu nu;
  LogNormalSummary summary{std::numeric_limits<double>::quiet_NaN(),
                           std::numeric_limits<double>::quiet_NaN()};
  bool singular = false;
};

inline std::vector<ProfilePoint> profile_sweep(const RateParams& rp, const MarketState& st,
                                               double horizon, const std::vector<Nu>& grid) {
  std::vector<ProfilePoint> out;
  out.reserve(grid.size());
  for (const Nu nu : grid) out.push_back({nu, bond_closed_form_moments(rp, st, horizon, nu), false});
  return out;
}

inline std::vector<ProfilePoint> profile_sweep(const EquityParams& ep, const MarketState& st,
                                               double horizon, const std::vector<Nu>& grid) {
  std::vector<ProfilePoint> out;
  out.reserve(grid.size());
  for (const Nu nu : grid) {
    ProfilePoint point;
    point.nu = nu;
    try {
      const EquityExtremalSolution sol = equity_extremal(ep, st, horizon, nu);
      point.summary = horizon_moments_equity_only(ep, st, sol.strategy(), MomentRoute::kClosedForm);
    } catch (const SingularNuError&) {
      point.singular = true;
    }
    out.push_back(point);
  }
  return out;
}

// Result of probing the minimizing side of the equity family for strategies
// strictly inside the risk-reward envelopes. `family` holds the probe grid
// followed by the continuation of the nu > 1/2 branch toward the risk-free
// limit (the lower branch); `upper` holds the maximizing branch (nu < 1/2).
// A probe point is interior when the lower branch passes strictly below it
// at equal sigma while the maximizing branch passes strictly above. Only
// the continuation beyond the probe range is used as the lower reference:
// probe points themselves can sit near singular multipliers, where the
// exploding coefficients would otherwise contaminate the envelope.
struct WedgeScan {
  std::vector<ProfilePoint> upper;
  std::vector<ProfilePoint> family;
  std::size_t probe_count = 0;
  std::vector<std::size_t> interior;

  bool has_interior() const { return !interior.empty(); }
};

namespace detail {

// Linear interpolation of the segment (p, q) in the sigma coordinate.
// Returns false when sigma does not lie inside the segment's sigma span.
inline bool interpolate_mu(const ProfilePoint& p, const ProfilePoint& q, double sigma,
                           double* mu) {
  if (p.singular || q.singular) return false;
  const double s0 = p.summary.sigma();
  const double s1 = q.summary.sigma();
  const double m0 = p.summary.mu;
  const double m1 = q.summary.mu;
  if (!std::isfinite(s0) || !std::isfinite(s1) || !std::isfinite(m0) || !std::isfinite(m1))
    return false;
  const double lo = std::min(s0, s1);
  const double hi = std::max(s0, s1);
  if (sigma < lo || sigma > hi) return false;
  if (hi == lo) {
    *mu = std::max(m0, m1);
    return true;
  }
  const double w = (sigma - s0) / (s1 - s0);
  *mu = m0 + w * (m1 - m0);
  return true;
}

}  // namespace detail

inline WedgeScan scan_interior_wedge(const EquityParams& ep, const MarketState& st, double horizon,
                                     std::vector<Nu> probe, double tol = 1e-6) {
  ep.validate();
  st.validate();
  if (!(horizon > 0.0))
    throw std::invalid_argument("scan_interior_wedge: horizon must be positive");
  if (probe.empty()) throw std::invalid_argument("scan_interior_wedge: probe grid is empty");
  for (const Nu nu : probe) {
    if (!nu.finite() || nu.value <= 0.5)
      throw std::invalid_argument(
          "scan_interior_wedge: probe multipliers must be finite and exceed 1/2");
  }
  std::sort(probe.begin(), probe.end(), [](Nu a, Nu b) { return a.value < b.value; });

  WedgeScan scan;
  scan.family = profile_sweep(ep, st, horizon, probe);
  scan.probe_count = scan.family.size();

  // Continue the minimizing branch beyond the probe; nu -> +inf collapses to
  // the risk-free point, which anchors the lower envelope at sigma = 0.
  {
    std::vector<Nu> tail;
    for (double u = 0.7 / (1.0 - 2.0 * probe.back().value); u < -1e-5; u *= 0.7)
      tail.push_back(Nu(0.5 * (1.0 - 1.0 / u)));
    const std::vector<ProfilePoint> pts = profile_sweep(ep, st, horizon, tail);
    scan.family.insert(scan.family.end(), pts.begin(), pts.end());
    scan.family.push_back({Nu::positive_infinity(), LogNormalSummary{0.0, 0.0}, false});
  }

  // Sigma coverage of the lower branch. Only probes inside that span can be
  // flagged, so the maximizing branch needs to cover no more than this.
  double lower_span = 0.0;
  for (std::size_t i = scan.probe_count; i < scan.family.size(); ++i) {
    if (scan.family[i].singular) continue;
    const double s = scan.family[i].summary.sigma();
    if (std::isfinite(s)) lower_span = std::max(lower_span, s);
  }
  double sigma_cap = lower_span;
  for (std::size_t i = 0; i < scan.probe_count; ++i) {
    if (scan.family[i].singular) continue;
    const double s = scan.family[i].summary.sigma();
    if (std::isfinite(s) && s <= lower_span) sigma_cap = std::max(sigma_cap, s);
  }

  // Maximizing branch, from the risk-free limit up to coverage of the
  // flaggable sigma range (sigma grows through nu = 0 toward nu = 1/2, so
  // coverage always terminates).
  scan.upper.push_back({Nu::negative_infinity(), LogNormalSummary{0.0, 0.0}, false});
  for (double u = 1e-3; u < 1e9; u *= 1.2) {
    const Nu nu(0.5 * (1.0 - 1.0 / u));
    ProfilePoint point;
    point.nu = nu;
    try {
      const EquityExtremalSolution sol = equity_extremal(ep, st, horizon, nu);
      point.summary = horizon_moments_equity_only(ep, st, sol.strategy(), MomentRoute::kClosedForm);
    } catch (const SingularNuError&) {
      point.singular = true;
    }
    scan.upper.push_back(point);
    if (!point.singular && u >= 1.0 && point.summary.sigma() >= 1.05 * sigma_cap) break;
  }

  for (std::size_t i = 0; i < scan.probe_count; ++i) {
    const ProfilePoint& pt = scan.family[i];
    if (pt.singular) continue;
    const double sigma = pt.summary.sigma();
    const double mu = pt.summary.mu;
    if (!std::isfinite(sigma) || !std::isfinite(mu)) continue;

    // Strictly above the lower branch somewhere at equal sigma.
    bool above_lower = false;
    for (std::size_t j = scan.probe_count; j + 1 < scan.family.size() && !above_lower; ++j) {
      double env;
      if (detail::interpolate_mu(scan.family[j], scan.family[j + 1], sigma, &env))
        above_lower = env < mu - tol;
    }
    if (!above_lower) continue;

    // Strictly below the maximizing branch at equal sigma.
    double envelope = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < scan.upper.size(); ++j) {
      double env;
      if (detail::interpolate_mu(scan.upper[j], scan.upper[j + 1], sigma, &env))
        envelope = std::max(envelope, env);
    }
    if (std::isfinite(envelope) && mu < envelope - tol) scan.interior.push_back(i);
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

// Glidepath of an equity solution: exposure plus the equivalent equity share
// f^S_s / sigma_S (the fraction of wealth held in equities, cash-financed).
inline void glidepath_csv(const EquityExtremalSolution& sol, std::ostream& out,
                          std::size_t rows = Strategy::kDefaultNodes) {
  if (rows < 2) throw std::invalid_argument("glidepath_csv: need at least two rows");
  out << "s,exposure,equity_share\n";
  out << std::setprecision(12);
  const double step = sol.horizon / static_cast<double>(rows - 1);
  for (std::size_t i = 0; i < rows; ++i) {
    const double s = std::min(static_cast<double>(i) * step, sol.horizon);
    const double f = sol(s);
    out << s << ',' << f << ',' << f / sol.equity.sigma_S << '\n';
  }
}

// One-row coefficient record of the closed form.
inline void coefficient_csv(const EquityExtremalSolution& sol, std::ostream& out) {
  out << "type,nu,b0,b1,b2,c1,c2\n";
  out << solution_type_label(sol.type) << ',' << format_nu(sol.nu) << ',' << std::setprecision(12)
      << sol.b0 << ',' << sol.b1 << ',' << sol.b2 << ',' << sol.c1 << ',' << sol.c2 << '\n';
}

}  // namespace glidepath
