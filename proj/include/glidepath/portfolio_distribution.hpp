#pragma once

// Horizon distribution of the portfolio under deterministic strategies.
//
// For exposures (f^r, f^S) on [0, T] the log portfolio value is normal,
// log(V_T/V_0) ~ N(mu_T, sigma_T^2), with
//
//   mu_T = m^0_T + m^r_T + m^S_T - rho Integral f^r_u f^S_u du,
//   sigma_T^2 = Integral (h^r_u)^2 + (h^S_u)^2 + 2 rho h^r_u h^S_u du,
//
// where m^0 collects the expected money-market return, m^r and m^S the
// risk-premium and quadratic penalty terms of the two exposures, and the
// weights h^r, h^S fold in the indirect effects: duration of the rate flow
// after u, and the premium feedback of equity innovations before the
// horizon.
//
// Two evaluation routes exist. Constant/ClosedForm strategies integrate
// exactly through the ExpPoly algebra; Sampled strategies (and any strategy
// on request) go through quadrature, where tail integrals of the
// piecewise-linear interpolant are evaluated segment-exactly and outer
// integrals use composite Gauss-Legendre panels between grid nodes.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "glidepath/market_model.hpp"
#include "glidepath/math_util.hpp"
#include "glidepath/strategy.hpp"

namespace glidepath {

/// Log-mean and log-variance of the horizon portfolio value.
struct LogNormalSummary {
  double mu{};
  double sigma2{};

  double sigma() const { return std::sqrt(sigma2); }
};

/// Which integration engine horizon_moments_* use.
enum class MomentRoute {
  kAuto,        ///< closed form when the strategy kinds allow it, else quadrature
  kClosedForm,  ///< ExpPoly algebra; rejects Sampled strategies
  kQuadrature,  ///< numeric integration for any strategy kind
};

/// Expected market price of equity risk at time s,
/// xi_s = (x_bar + e^{-alpha s}(x0 - x_bar)) / sigma_S.
inline double xi(const EquityParams& ep, const MarketState& st, double s) {
  if (s < 0.0) throw std::invalid_argument("xi: s must be non-negative");
  return (ep.x_bar + std::exp(-ep.alpha * s) * (st.x0 - ep.x_bar)) / ep.sigma_S;
}

namespace detail {

/// xi as an ExpPoly in s.
inline ExpPoly xi_poly(const EquityParams& ep, const MarketState& st) {
  ExpPoly p = ExpPoly::constant(ep.x_bar / ep.sigma_S);
  p += ExpPoly::monomial((st.x0 - ep.x_bar) / ep.sigma_S, 0, -ep.alpha);
  return p;
}

/// sigma_r Psi(kappa, T - s) as an ExpPoly in s (the exposure of a T-bond).
inline ExpPoly bond_vol_poly(double kappa, double sigma_r, double horizon) {
  if (kappa == 0.0) {
    ExpPoly p = ExpPoly::constant(sigma_r * horizon);
    p += ExpPoly::monomial(-sigma_r, 1, 0.0);
    return p;
  }
  ExpPoly p = ExpPoly::constant(sigma_r / kappa);
  p += ExpPoly::monomial(-sigma_r / kappa * std::exp(-kappa * horizon), 0, kappa);
  return p;
}

/// Integral over [0, d] of (p + q v) e^{-r v} dv, stable for small r d.
inline double linear_exp_integral(double p, double q, double r, double d) {
  const double head = p * psi(r, d);
  const double u = r * d;
  double iv;  // Integral of v e^{-r v}
  if (std::abs(u) < 0.05) {
    // d^2 sum_k (-u)^k / (k! (k+2)); the closed form loses digits to
    // cancellation here.
    double term = 0.5;
    double sum = term;
    double pow_u = 1.0;
    double fact = 1.0;
    for (int k = 1; k <= 12; ++k) {
      pow_u *= -u;
      fact *= k;
      term = pow_u / (fact * (k + 2));
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    iv = d * d * sum;
  } else {
    iv = (psi(r, d) - d * std::exp(-u)) / r;
  }
  return head + q * iv;
}

/// Evaluates f and its exponential tail integral
/// tail(u) = Integral_u^T f(s) e^{-rate (s-u)} ds for one strategy.
/// ClosedForm/Constant kinds use the exact convolution; Sampled kinds use a
/// backward recursion over the grid that is exact for the interpolant.
class ExposureCurve {
 public:
  ExposureCurve(const Strategy& f, double tail_rate) : f_(&f), rate_(tail_rate) {
    if (f.has_closed_form()) {
      tail_poly_ = f.exp_poly().tail_convolution(rate_, f.horizon());
      return;
    }
    const std::vector<double>& v = f.values();
    const double step = f.grid_step();
    const double decay = std::exp(-rate_ * step);
    node_tails_.assign(v.size(), 0.0);
    for (std::size_t i = v.size() - 1; i-- > 0;) {
      const double slope = (v[i + 1] - v[i]) / step;
      node_tails_[i] =
          linear_exp_integral(v[i], slope, rate_, step) + decay * node_tails_[i + 1];
    }
  }

  double value(double u) const { return (*f_)(u); }

  double tail(double u) const {
    if (tail_poly_) return tail_poly_->evaluate(u);
    const std::vector<double>& v = f_->values();
    const double step = f_->grid_step();
    double pos = u / step;
    std::size_t i = static_cast<std::size_t>(std::max(pos, 0.0));
    if (i >= v.size() - 1) return 0.0;  // u at (or past) the horizon
    const double s_i = static_cast<double>(i) * step;
    const double local = std::min(std::max(u - s_i, 0.0), step);
    const double slope = (v[i + 1] - v[i]) / step;
    const double f_u = v[i] + slope * local;
    const double rest = step - local;
    return linear_exp_integral(f_u, slope, rate_, rest) +
           std::exp(-rate_ * rest) * node_tails_[i + 1];
  }

 private:
  const Strategy* f_;
  double rate_;
  std::optional<ExpPoly> tail_poly_;
  std::vector<double> node_tails_;
};

/// Grid nodes of a sampled strategy (empty for closed kinds).
inline std::vector<double> grid_knots(const Strategy& f) {
  if (f.has_closed_form()) return {};
  const std::size_t n = f.values().size();
  std::vector<double> knots(n);
  const double step = f.grid_step();
  for (std::size_t i = 0; i < n; ++i) knots[i] = static_cast<double>(i) * step;
  knots.back() = f.horizon();
  return knots;
}

inline std::vector<double> merge_knots(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end(),
                      [](double x, double y) { return std::abs(x - y) < 1e-12; }),
          a.end());
  return a;
}

/// Integrates fn over [0, T]. With knots (a strategy grid) the integrand is
/// smooth between nodes and a fixed Gauss-Legendre panel per segment is both
/// fast and accurate; without knots, adaptive quadrature.
template <typename F>
double integrate_exposure(F&& fn, const std::vector<double>& knots, double horizon) {
  if (knots.size() < 2) return integrate(fn, 0.0, horizon, 1e-10);
  // 7-point Gauss-Legendre nodes/weights on [-1, 1].
  static const double x[] = {0.0, 0.405845151377397, -0.405845151377397,
                             0.741531185599394, -0.741531185599394,
                             0.949107912342759, -0.949107912342759};
  static const double w[] = {0.417959183673469, 0.381830050505119, 0.381830050505119,
                             0.279705391489277, 0.279705391489277,
                             0.129484966168870, 0.129484966168870};
  std::vector<double> partials;
  partials.reserve(knots.size() - 1);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double mid = 0.5 * (knots[i] + knots[i + 1]);
    const double half = 0.5 * (knots[i + 1] - knots[i]);
    double acc = 0.0;
    for (int k = 0; k < 7; ++k) acc += w[k] * fn(mid + half * x[k]);
    partials.push_back(acc * half);
  }
  return pairwise_sum(partials);
}

inline bool want_closed_route(MomentRoute route, bool closed_available, const char* who) {
  switch (route) {
    case MomentRoute::kAuto:
      return closed_available;
    case MomentRoute::kClosedForm:
      if (!closed_available)
        throw std::invalid_argument(std::string(who) +
                                    ": sampled strategies have no closed-form route");
      return true;
    case MomentRoute::kQuadrature:
      return false;
  }
  throw std::runtime_error("horizon moments: corrupt route tag");
}

}  // namespace detail

/// Variance weight of the rate factor at time u,
///   h^r_u = sigma_r Psi(kappa, T-u) + f^r_u + (a - kappa) tail_kappa(f^r)(u).
/// The last term vanishes identically when a = kappa.
inline double weight_h_r(const RateParams& rp, const Strategy& f_r, double u) {
  const double horizon = f_r.horizon();
  if (u < 0.0 || u > horizon)
    throw std::invalid_argument("weight_h_r: u outside [0, T]");
  double indirect = 0.0;
  if (rp.a != rp.kappa) {
    indirect = (rp.a - rp.kappa) * detail::ExposureCurve(f_r, rp.kappa).tail(u);
  }
  return rp.sigma_r * psi(rp.kappa, horizon - u) + f_r(u) + indirect;
}

/// Variance weight of the equity factor at time u,
///   h^S_u = f^S_u - (sigma_x / sigma_S) tail_alpha(f^S)(u).
inline double weight_h_S(const EquityParams& ep, const Strategy& f_S, double u) {
  const double horizon = f_S.horizon();
  if (u < 0.0 || u > horizon)
    throw std::invalid_argument("weight_h_S: u outside [0, T]");
  if (ep.sigma_x == 0.0) return f_S(u);
  return f_S(u) - ep.sigma_x / ep.sigma_S * detail::ExposureCurve(f_S, ep.alpha).tail(u);
}

/// Log-moments when only the money market and rate exposure are used and the
/// market price of rate risk is constant (a = kappa):
///   mu = m^0_T + lambda^r Integral f - (1/2) Integral f^2,
///   sigma2 = Integral (sigma_r Psi(kappa, T-s) + f_s)^2 ds.
inline LogNormalSummary horizon_moments_rates_only(const RateParams& rp, const MarketState& st,
                                                   const Strategy& f_r,
                                                   MomentRoute route = MomentRoute::kAuto) {
  const double lambda_r = lambda_r_const(rp);  // rejects a != kappa
  const double horizon = f_r.horizon();
  const double m0 = horizon * rp.r_bar + (st.r0 - rp.r_bar) * psi(rp.kappa, horizon);

  if (detail::want_closed_route(route, f_r.has_closed_form(), "horizon_moments_rates_only")) {
    const ExpPoly f = f_r.exp_poly();
    const ExpPoly h = detail::bond_vol_poly(rp.kappa, rp.sigma_r, horizon) + f;
    const double mu = m0 + lambda_r * f.integrate(horizon) - 0.5 * (f * f).integrate(horizon);
    return {mu, std::max((h * h).integrate(horizon), 0.0)};
  }

  const std::vector<double> knots = detail::grid_knots(f_r);
  const double mu =
      m0 + detail::integrate_exposure(
               [&](double s) {
                 const double f = f_r(s);
                 return lambda_r * f - 0.5 * f * f;
               },
               knots, horizon);
  const double s2 = detail::integrate_exposure(
      [&](double s) {
        const double h = rp.sigma_r * psi(rp.kappa, horizon - s) + f_r(s);
        return h * h;
      },
      knots, horizon);
  return {mu, std::max(s2, 0.0)};
}

/// Log-moments of the excess-return factor generated by an equity overlay
/// (independent rate factor, rho = 0):
///   mu = Integral xi_s f_s - f_s^2 / 2 ds,  sigma2 = Integral (h^S_u)^2 du.
inline LogNormalSummary horizon_moments_equity_only(const EquityParams& ep,
                                                    const MarketState& st, const Strategy& f_S,
                                                    MomentRoute route = MomentRoute::kAuto) {
  const double horizon = f_S.horizon();
  const double feedback = ep.sigma_x / ep.sigma_S;

  if (detail::want_closed_route(route, f_S.has_closed_form(),
                                "horizon_moments_equity_only")) {
    const ExpPoly f = f_S.exp_poly();
    const double mu = (detail::xi_poly(ep, st) * f).integrate(horizon) -
                      0.5 * (f * f).integrate(horizon);
    ExpPoly h = f;
    if (ep.sigma_x != 0.0) h += f.tail_convolution(ep.alpha, horizon).scaled(-feedback);
    return {mu, std::max((h * h).integrate(horizon), 0.0)};
  }

  const std::vector<double> knots = detail::grid_knots(f_S);
  const detail::ExposureCurve curve(f_S, ep.alpha);
  const double mu = detail::integrate_exposure(
      [&](double s) {
        const double f = f_S(s);
        return xi(ep, st, s) * f - 0.5 * f * f;
      },
      knots, horizon);
  const double s2 = detail::integrate_exposure(
      [&](double u) {
        const double h = curve.value(u) - feedback * curve.tail(u);
        return h * h;
      },
      knots, horizon);
  return {mu, std::max(s2, 0.0)};
}

/// Full two-factor log-moments for a joint exposure (general a, kappa, rho).
inline LogNormalSummary horizon_moments_general(const RateParams& rp, const EquityParams& ep,
                                                const MarketState& st, const JointExposure& j,
                                                MomentRoute route = MomentRoute::kAuto) {
  const double horizon = j.rate_strategy.horizon();
  const double m0 = horizon * rp.r_bar + (st.r0 - rp.r_bar) * psi(rp.kappa, horizon);
  const double premium_level = rp.a * (rp.r_bar - rp.b) / rp.sigma_r;
  const double premium_decay = (rp.a - rp.kappa) * (st.r0 - rp.r_bar) / rp.sigma_r;
  const double feedback = ep.sigma_x / ep.sigma_S;

  const bool closed_available =
      j.rate_strategy.has_closed_form() && j.equity_strategy.has_closed_form();
  if (detail::want_closed_route(route, closed_available, "horizon_moments_general")) {
    const ExpPoly fr = j.rate_strategy.exp_poly();
    const ExpPoly fS = j.equity_strategy.exp_poly();
    const double m_r = premium_level * fr.integrate(horizon) +
                       premium_decay *
                           (ExpPoly::monomial(1.0, 0, -rp.kappa) * fr).integrate(horizon) -
                       0.5 * (fr * fr).integrate(horizon);
    const double m_S = (detail::xi_poly(ep, st) * fS).integrate(horizon) -
                       0.5 * (fS * fS).integrate(horizon);
    const double cross = -ep.rho * (fr * fS).integrate(horizon);

    ExpPoly h_r = detail::bond_vol_poly(rp.kappa, rp.sigma_r, horizon) + fr;
    if (rp.a != rp.kappa)
      h_r += fr.tail_convolution(rp.kappa, horizon).scaled(rp.a - rp.kappa);
    ExpPoly h_S = fS;
    if (ep.sigma_x != 0.0) h_S += fS.tail_convolution(ep.alpha, horizon).scaled(-feedback);

    const double s2 = (h_r * h_r).integrate(horizon) + (h_S * h_S).integrate(horizon) +
                      2.0 * ep.rho * (h_r * h_S).integrate(horizon);
    return {m0 + m_r + m_S + cross, std::max(s2, 0.0)};
  }

  const std::vector<double> knots = detail::merge_knots(
      detail::grid_knots(j.rate_strategy), detail::grid_knots(j.equity_strategy));
  const detail::ExposureCurve rate_curve(j.rate_strategy, rp.kappa);
  const detail::ExposureCurve equity_curve(j.equity_strategy, ep.alpha);

  const double mu_integrals = detail::integrate_exposure(
      [&](double s) {
        const double fr = rate_curve.value(s);
        const double fS = equity_curve.value(s);
        return premium_level * fr + premium_decay * std::exp(-rp.kappa * s) * fr -
               0.5 * fr * fr + xi(ep, st, s) * fS - 0.5 * fS * fS - ep.rho * fr * fS;
      },
      knots, horizon);
  const double s2 = detail::integrate_exposure(
      [&](double u) {
        const double h_r = rp.sigma_r * psi(rp.kappa, horizon - u) + rate_curve.value(u) +
                           (rp.a - rp.kappa) * rate_curve.tail(u);
        const double h_S = equity_curve.value(u) - feedback * equity_curve.tail(u);
        return h_r * h_r + h_S * h_S + 2.0 * ep.rho * h_r * h_S;
      },
      knots, horizon);
  return {m0 + mu_integrals, std::max(s2, 0.0)};
}

}  // namespace glidepath
