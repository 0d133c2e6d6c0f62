#pragma once

// Simulation oracle for terminal portfolio values.
//
// Simulates the two factors and the log portfolio value
//
//   d log V = (r + f^r lambda^r + f^S x / sigma_S
//              - (f^r^2 + f^S^2 + 2 rho f^r f^S) / 2) dt
//             + f^r dW^r + f^S dW^S
//
// under deterministic exposures (f^r, f^S). Both factors use their exact
// one-step transition (the conditional mean and variance of an
// Ornstein-Uhlenbeck step are known in closed form) and the time integrals
// accumulate by the trapezoidal rule, so the only discretization error left
// is the quadrature of the smooth drift and the within-step shape of the
// exposure, both O(dt^2). One normal per step drives x and S jointly, which
// is exactly the perfect negative local correlation of the risk-premium
// innovations; the rate normal correlates with it at rho.
//
// Determinism: path i derives its own generator from (seed, i) via the
// splitmix64 sequence, and reductions use pairwise summation, so the result
// is a pure function of the config no matter how paths are scheduled.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "glidepath/market_model.hpp"
#include "glidepath/math_util.hpp"
#include "glidepath/portfolio_distribution.hpp"
#include "glidepath/strategy.hpp"

namespace glidepath {

struct SimConfig {
  std::size_t n_paths = 100000;  ///< total simulated paths
  int n_steps = 100;             ///< time steps per year
  std::uint64_t seed = 1;        ///< base seed for the per-path streams
  bool antithetic = false;       ///< mirror every second path

  void validate() const {
    if (n_paths < 2) throw std::invalid_argument("SimConfig: need at least 2 paths");
    if (n_steps < 1) throw std::invalid_argument("SimConfig: need at least 1 step per year");
    if (antithetic && n_paths % 2 != 0)
      throw std::invalid_argument("SimConfig: antithetic pairing needs an even path count");
  }
};

struct SimResult {
  double sample_mu = 0.0;      ///< sample mean of log V_T
  double sample_sigma2 = 0.0;  ///< unbiased sample variance of log V_T
  double se_mu = 0.0;          ///< standard error of sample_mu
  double se_sigma2 = 0.0;      ///< standard error of sample_sigma2
};

namespace detail {

/// index-th output of the splitmix64 sequence started at seed.
inline std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Samples log V_T under the joint exposure and returns its sample moments.
///
/// sigma_r = 0 is accepted here (unlike RateParams::validate) so the
/// deterministic-cash benchmark can be simulated; the rate risk premium is
/// zero in that case. With antithetic on, se_mu is computed over pair
/// averages (the mirrored halves are dependent); sample_sigma2 and its
/// standard error always use the individual samples.
///
/// If raw_dump is given, writes one "path_id,log_VT" row per path at full
/// round-trip precision after the header.
inline SimResult simulate_terminal(const RateParams& rp, const EquityParams& ep,
                                   const MarketState& st, const JointExposure& j,
                                   const SimConfig& cfg, std::ostream* raw_dump = nullptr) {
  if (!(rp.sigma_r >= 0.0) || !std::isfinite(rp.sigma_r))
    throw std::invalid_argument("simulate_terminal: sigma_r must be non-negative");
  if (!(rp.kappa >= 0.0) || !(rp.a >= 0.0))
    throw std::invalid_argument("simulate_terminal: kappa and a must be non-negative");
  if (!std::isfinite(rp.r_bar) || !std::isfinite(rp.b))
    throw std::invalid_argument("simulate_terminal: r_bar and b must be finite");
  ep.validate();
  st.validate();
  cfg.validate();
  const double T = j.rate_strategy.horizon();
  if (!(T > 0.0)) throw std::invalid_argument("simulate_terminal: horizon must be positive");

  const double lam = rp.sigma_r == 0.0 ? 0.0 : lambda_r_const(rp);
  const std::size_t n_steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.n_steps * T)));
  const double dt = T / static_cast<double>(n_steps);

  // exposures are deterministic, so tabulate them once for all paths
  std::vector<double> fr(n_steps + 1);
  std::vector<double> fs(n_steps + 1);
  std::vector<double> quad(n_steps + 1);   // (f^r^2 + f^S^2 + 2 rho f^r f^S)/2
  std::vector<double> fr_mid(n_steps);     // trapezoid level for f^r dW^r
  std::vector<double> fs_mid(n_steps);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    const double t = T * static_cast<double>(k) / static_cast<double>(n_steps);
    fr[k] = j.rate_strategy(t);
    fs[k] = j.equity_strategy(t);
    quad[k] = 0.5 * (fr[k] * fr[k] + fs[k] * fs[k] + 2.0 * ep.rho * fr[k] * fs[k]);
  }
  for (std::size_t k = 0; k < n_steps; ++k) {
    fr_mid[k] = 0.5 * (fr[k] + fr[k + 1]);
    fs_mid[k] = 0.5 * (fs[k] + fs[k + 1]);
  }

  const double decay_r = std::exp(-rp.kappa * dt);
  const double decay_x = std::exp(-ep.alpha * dt);
  const double shock_r = rp.sigma_r * std::sqrt(psi(2.0 * rp.kappa, dt));
  const double shock_x = ep.sigma_x * std::sqrt(psi(2.0 * ep.alpha, dt));
  const double sqrt_dt = std::sqrt(dt);
  const double rho_c = std::sqrt(std::max(1.0 - ep.rho * ep.rho, 0.0));

  std::vector<double> samples(cfg.n_paths);
  if (raw_dump) *raw_dump << "path_id,log_VT\n" << std::setprecision(17);

  for (std::size_t path = 0; path < cfg.n_paths; ++path) {
    const std::size_t stream = cfg.antithetic ? path / 2 : path;
    const double flip = (cfg.antithetic && path % 2 == 1) ? -1.0 : 1.0;
    std::mt19937_64 eng(detail::splitmix64_at(cfg.seed, stream));
    std::normal_distribution<double> gauss(0.0, 1.0);

    double r = st.r0;
    double x = st.x0;
    double log_v = 0.0;
    double drift_prev = r + fr[0] * lam + fs[0] * x / ep.sigma_S - quad[0];
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double z_s = flip * gauss(eng);
      const double z_r = ep.rho * z_s + rho_c * flip * gauss(eng);
      const double r_next = rp.r_bar + decay_r * (r - rp.r_bar) + shock_r * z_r;
      const double x_next = ep.x_bar + decay_x * (x - ep.x_bar) - shock_x * z_s;
      const double drift_next =
          r_next + fr[k + 1] * lam + fs[k + 1] * x_next / ep.sigma_S - quad[k + 1];
      log_v += 0.5 * dt * (drift_prev + drift_next) +
               sqrt_dt * (fr_mid[k] * z_r + fs_mid[k] * z_s);
      r = r_next;
      x = x_next;
      drift_prev = drift_next;
    }
    if (!std::isfinite(log_v) || !std::isfinite(r) || !std::isfinite(x))
      throw std::runtime_error("simulate_terminal: non-finite state on path " +
                               std::to_string(path) + " (log V = " + std::to_string(log_v) +
                               ", r = " + std::to_string(r) + ", x = " + std::to_string(x) +
                               ")");
    samples[path] = log_v;
    if (raw_dump) *raw_dump << path << ',' << log_v << '\n';
  }

  const double n = static_cast<double>(cfg.n_paths);
  SimResult out;
  out.sample_mu = pairwise_sum(samples) / n;

  std::vector<double> work(cfg.n_paths);
  for (std::size_t i = 0; i < cfg.n_paths; ++i) {
    const double d = samples[i] - out.sample_mu;
    work[i] = d * d;
  }
  const double m2 = pairwise_sum(work) / n;
  out.sample_sigma2 = cfg.n_paths > 1 ? m2 * n / (n - 1.0) : 0.0;
  for (std::size_t i = 0; i < cfg.n_paths; ++i) work[i] = work[i] * work[i];
  const double m4 = pairwise_sum(work) / n;
  // Var(s^2) ~ (m4 - (n-3)/(n-1) s^4) / n
  const double var_s2 =
      (m4 - (n - 3.0) / (n - 1.0) * out.sample_sigma2 * out.sample_sigma2) / n;
  out.se_sigma2 = std::sqrt(std::max(var_s2, 0.0));

  if (cfg.antithetic) {
    const std::size_t pairs = cfg.n_paths / 2;
    std::vector<double> avg(pairs);
    for (std::size_t p = 0; p < pairs; ++p) avg[p] = 0.5 * (samples[2 * p] + samples[2 * p + 1]);
    const double np = static_cast<double>(pairs);
    double ss = 0.0;
    std::vector<double> dev(pairs);
    for (std::size_t p = 0; p < pairs; ++p) {
      const double d = avg[p] - out.sample_mu;
      dev[p] = d * d;
    }
    ss = pairwise_sum(dev) / (np - 1.0);
    out.se_mu = std::sqrt(std::max(ss, 0.0) / np);
  } else {
    out.se_mu = std::sqrt(std::max(out.sample_sigma2, 0.0) / n);
  }
  return out;
}

/// z-scores of the simulated moments against an analytic summary:
/// ((sample_mu - mu)/se_mu, (sample_sigma2 - sigma2)/se_sigma2).
/// A zero standard error maps an exact match to 0 and anything else to
/// +/- infinity.
inline std::pair<double, double> compare_to_analytic(const SimResult& result,
                                                     const LogNormalSummary& summary) {
  const auto score = [](double diff, double se) {
    if (se > 0.0) return diff / se;
    if (diff == 0.0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), diff);
  };
  return {score(result.sample_mu - summary.mu, result.se_mu),
          score(result.sample_sigma2 - summary.sigma2, result.se_sigma2)};
}

}  // namespace glidepath
