#pragma once

// Risk and reward statistics of log-normal horizon multipliers.
//
// Deterministic strategies make every horizon multiplier log-normal, so the
// headline risk numbers reduce to partial moments of exp(N(mu, sigma^2)):
//
//   median                  e^mu
//   prob_loss   P(M < 1)  = Phi(-mu/sigma)
//   exp_loss    E(1-M)^+  = Phi(-mu/sigma) - e^{mu+sigma^2/2} Phi(-mu/sigma - sigma)
//   cond_loss   E[1-M | M<1] = exp_loss / prob_loss
//
// The rate-side multiplier Y restates the bond-extremal portfolio in units
// of the horizon bond: shifting the log-mean by log p_0(T) strips out every
// trace of the running short rate r0. The equity multiplier Z needs no
// shift. Terminal wealth factors as V_T = (V_0 / p_0(T)) * Y_T * Z_T.
//
// Table generation walks (horizon, nu) grids over the closed-form extremal
// families; cells are independent, so callers may distribute them freely.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "glidepath/extremal_strategies.hpp"
#include "glidepath/market_model.hpp"
#include "glidepath/math_util.hpp"
#include "glidepath/portfolio_distribution.hpp"

namespace glidepath {

struct RiskStats {
  double median = 1.0;
  double prob_loss = 0.0;
  double cond_loss = 0.0;
  double exp_loss = 0.0;
};

enum class MultiplierKind { kRateMultiplierY, kEquityMultiplierZ };

/// A log multiplier summary tagged with which factor of terminal wealth it
/// describes.
struct MultiplierContext {
  MultiplierKind which = MultiplierKind::kRateMultiplierY;
  LogNormalSummary summary{0.0, 0.0};
};

/// Risk statistics of exp(N(mu, sigma^2)) against the break-even level 1.
///
/// sigma = 0 degenerates to indicator statistics: the multiplier is the
/// constant e^mu, so prob_loss is 0 or 1 and the loss size is 1 - e^mu.
/// prob_loss = 0 yields cond_loss = 0 by convention (conditioning on a null
/// event).
inline RiskStats lognormal_stats(double mu, double sigma) {
  if (!std::isfinite(mu) || !std::isfinite(sigma) || sigma < 0.0)
    throw std::invalid_argument("lognormal_stats: need finite mu and sigma >= 0");
  RiskStats out;
  out.median = std::exp(mu);
  if (sigma == 0.0) {
    out.prob_loss = mu < 0.0 ? 1.0 : 0.0;
    out.exp_loss = mu < 0.0 ? 1.0 - out.median : 0.0;
    out.cond_loss = out.exp_loss;
    return out;
  }
  const double z = -mu / sigma;
  out.prob_loss = normal_cdf(z);
  const double tail = normal_cdf(z - sigma);
  // guard the inf * 0 corner when mu + sigma^2/2 overflows against a tail
  // that has already underflowed to zero
  const double partial = tail > 0.0 ? std::exp(mu + 0.5 * sigma * sigma) * tail : 0.0;
  // (1 - M)^+ < 1, so the partial moment never exceeds the probability;
  // the clamp only absorbs last-bit cancellation noise
  out.exp_loss = std::clamp(out.prob_loss - partial, 0.0, out.prob_loss);
  out.cond_loss = out.prob_loss > 0.0 ? out.exp_loss / out.prob_loss : 0.0;
  return out;
}

inline RiskStats lognormal_stats(const LogNormalSummary& summary) {
  return lognormal_stats(summary.mu, std::sqrt(std::max(summary.sigma2, 0.0)));
}

/// Restates a rates-only portfolio summary as the r0-independent multiplier
/// Y: one unit is the horizon bond, so mu shifts by log p_0(T). Pass the
/// same state the summary was computed with.
inline MultiplierContext multiplier_from_portfolio(const RateParams& rp, const MarketState& st,
                                                   double horizon,
                                                   const LogNormalSummary& summary) {
  rp.validate();
  st.validate();
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("multiplier_from_portfolio: horizon must be positive");
  MultiplierContext out;
  out.which = MultiplierKind::kRateMultiplierY;
  out.summary.mu = summary.mu + std::log(zcb_price(rp, st.r0, horizon));
  out.summary.sigma2 = summary.sigma2;
  return out;
}

/// Tags an equity-only portfolio summary as the multiplier Z (no shift:
/// the equity factor already starts from one unit of cash).
inline MultiplierContext equity_multiplier(const LogNormalSummary& summary) {
  return MultiplierContext{MultiplierKind::kEquityMultiplierZ, summary};
}

/// One (horizon, nu) cell of a risk table. Cells where the extremal system
/// is singular carry NaN statistics and singular = true.
struct StatsCell {
  double horizon = 0.0;
  Nu nu{0.0};
  MultiplierContext context;
  RiskStats stats;
  bool singular = false;
};

namespace detail {

inline void check_stats_grid(const std::vector<double>& horizons, const std::vector<Nu>& nus) {
  if (horizons.empty() || nus.empty()) throw std::invalid_argument("stats_table: empty grid");
  for (const double T : horizons)
    if (!(T > 0.0) || !std::isfinite(T))
      throw std::invalid_argument("stats_table: horizons must be positive");
}

}  // namespace detail

/// Risk table for the bond extremal family: multiplier Y per (T, nu).
inline std::vector<StatsCell> stats_table(const RateParams& rp, const MarketState& st,
                                          const std::vector<double>& horizons,
                                          const std::vector<Nu>& nus) {
  detail::check_stats_grid(horizons, nus);
  std::vector<StatsCell> cells;
  cells.reserve(horizons.size() * nus.size());
  for (const double T : horizons) {
    for (const Nu nu : nus) {
      StatsCell cell;
      cell.horizon = T;
      cell.nu = nu;
      cell.context =
          multiplier_from_portfolio(rp, st, T, bond_closed_form_moments(rp, st, T, nu));
      cell.stats = lognormal_stats(cell.context.summary);
      cells.push_back(cell);
    }
  }
  return cells;
}

/// Risk table for the equity extremal family: multiplier Z per (T, nu).
/// Singular multipliers do not interrupt the sweep; their cells are marked.
inline std::vector<StatsCell> stats_table(const EquityParams& ep, const MarketState& st,
                                          const std::vector<double>& horizons,
                                          const std::vector<Nu>& nus) {
  detail::check_stats_grid(horizons, nus);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<StatsCell> cells;
  cells.reserve(horizons.size() * nus.size());
  for (const double T : horizons) {
    for (const Nu nu : nus) {
      StatsCell cell;
      cell.horizon = T;
      cell.nu = nu;
      try {
        const EquityExtremalSolution sol = equity_extremal(ep, st, T, nu);
        cell.context = equity_multiplier(
            horizon_moments_equity_only(ep, st, sol.strategy(), MomentRoute::kClosedForm));
        cell.stats = lognormal_stats(cell.context.summary);
      } catch (const SingularNuError&) {
        cell.singular = true;
        cell.context = equity_multiplier(LogNormalSummary{nan, nan});
        cell.stats = RiskStats{nan, nan, nan, nan};
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

namespace detail {

inline std::string format_fixed3(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return std::string(buf);
}

}  // namespace detail

/// Writes a stats table as CSV. The first statistics block is rounded to 3
/// decimals the way the reference tables print; the *_full block repeats the
/// same numbers at working precision. Singular cells print nan statistics
/// and the note "singular".
inline void stats_table_csv(const std::vector<StatsCell>& cells, std::ostream& out) {
  out << "T,nu,median,prob_loss,cond_loss,exp_loss,"
         "median_full,prob_loss_full,cond_loss_full,exp_loss_full,note\n";
  out << std::setprecision(12);
  for (const StatsCell& cell : cells) {
    const RiskStats& s = cell.stats;
    out << cell.horizon << ',' << format_nu(cell.nu) << ',' << detail::format_fixed3(s.median)
        << ',' << detail::format_fixed3(s.prob_loss) << ',' << detail::format_fixed3(s.cond_loss)
        << ',' << detail::format_fixed3(s.exp_loss) << ',' << s.median << ',' << s.prob_loss
        << ',' << s.cond_loss << ',' << s.exp_loss << ',' << (cell.singular ? "singular" : "")
        << '\n';
  }
}

/// Serializes risk-reward profile points as "sigma,mu,nu" rows sorted by nu
/// (risk-free -inf first). Singular points carry no coordinates and are
/// omitted.
inline void profile_csv(std::vector<ProfilePoint> points, std::ostream& out) {
  std::stable_sort(points.begin(), points.end(),
                   [](const ProfilePoint& a, const ProfilePoint& b) {
                     return a.nu.value < b.nu.value;
                   });
  out << "sigma,mu,nu\n";
  out << std::setprecision(12);
  for (const ProfilePoint& p : points) {
    if (p.singular || !std::isfinite(p.summary.mu) || !std::isfinite(p.summary.sigma2)) continue;
    out << std::sqrt(std::max(p.summary.sigma2, 0.0)) << ',' << p.summary.mu << ','
        << format_nu(p.nu) << '\n';
  }
}

}  // namespace glidepath
