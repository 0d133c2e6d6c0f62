// Tests for monte_carlo.hpp: exact-transition stepping, reproducibility,
// antithetic pairing, and agreement with the analytic moment routes.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "glidepath/extremal_strategies.hpp"
#include "glidepath/market_model.hpp"
#include "glidepath/monte_carlo.hpp"
#include "glidepath/portfolio_distribution.hpp"
#include "glidepath/strategy.hpp"

using namespace glidepath;

namespace {

std::vector<double> parse_dump(const std::string& text, std::size_t expect_rows) {
  std::istringstream in(text);
  std::string line;
  REQUIRE(std::getline(in, line));
  REQUIRE(line == "path_id,log_VT");
  std::vector<double> values;
  std::size_t expected_id = 0;
  while (std::getline(in, line)) {
    const std::size_t comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    CHECK(std::stoull(line.substr(0, comma)) == expected_id);
    values.push_back(std::stod(line.substr(comma + 1)));
    ++expected_id;
  }
  REQUIRE(values.size() == expect_rows);
  return values;
}

}  // namespace

TEST_CASE("cash portfolio in a flat deterministic world") {
  RateParams rp;
  rp.kappa = 0.08;
  rp.r_bar = 0.02;
  rp.sigma_r = 0.0;
  rp.a = 0.08;
  rp.b = 0.04;
  const ModelConfig em = preset("equity-moderate");
  const MarketState st{0.02, em.equity.x_bar};
  const double T = 10.0;
  const JointExposure none(Strategy::constant(T, 0.0), Strategy::constant(T, 0.0));

  SimConfig cfg;
  cfg.n_paths = 64;
  cfg.n_steps = 12;
  cfg.seed = 5;
  const SimResult res = simulate_terminal(rp, em.equity, st, none, cfg);
  // the only inexactness left is the rounding inside the mean reduction
  CHECK(std::abs(res.sample_mu - T * rp.r_bar) <= 1e-12);
  CHECK(res.sample_sigma2 <= 1e-30);
  CHECK(res.se_mu <= 1e-15);
  CHECK(res.se_sigma2 <= 1e-30);

  // the z-score contract on exact and degenerate inputs
  const SimResult exact{1.25, 0.5, 0.0, 0.0};
  const auto z = compare_to_analytic(exact, LogNormalSummary{1.25, 0.5});
  CHECK(z.first == 0.0);
  CHECK(z.second == 0.0);
  const auto off = compare_to_analytic(exact, LogNormalSummary{2.25, 0.5});
  CHECK(std::isinf(off.first));
  CHECK(off.first < 0.0);
  const SimResult noisy{1.0, 0.5, 0.125, 0.0};
  CHECK(compare_to_analytic(noisy, LogNormalSummary{0.75, 0.5}).first == 2.0);
}

TEST_CASE("bond hedge collapses the simulated variance") {
  const ModelConfig mod = preset("rates-moderate");
  const ModelConfig em = preset("equity-moderate");
  const double T = 20.0;
  const MarketState st{0.02, em.equity.x_bar};
  const JointExposure hedge(bond_extremal(mod.rates, T, Nu::negative_infinity()).strategy(),
                            Strategy::constant(T, 0.0));

  SimConfig cfg;
  cfg.n_paths = 4000;
  cfg.n_steps = 100;
  cfg.seed = 42;
  const SimResult res = simulate_terminal(mod.rates, em.equity, st, hedge, cfg);

  const double hedge_mu = -std::log(zcb_price(mod.rates, st.r0, T));
  CHECK(res.sample_sigma2 < 1e-4);
  // the realized variance is so small that the statistical error vanishes
  // and the O(dt^2) drift quadrature bias is what remains; measure the mean
  // against the variance bound above rather than the collapsed se
  CHECK(std::abs(res.sample_mu - hedge_mu) <=
        3.0 * std::sqrt(1e-4 / static_cast<double>(cfg.n_paths)));
  CHECK(std::abs(res.sample_mu - hedge_mu) <= 1e-6);
}

TEST_CASE("constant equity exposure matches the analytic moments") {
  const ModelConfig mod = preset("rates-moderate");
  const ModelConfig em = preset("equity-moderate");
  const MarketState st{0.0, 0.045};
  const double T = 20.0;
  const JointExposure j(Strategy::constant(T, 0.0), Strategy::constant(T, 0.3));

  SimConfig cfg;
  cfg.n_paths = 10000;
  cfg.n_steps = 100;
  cfg.seed = 7;
  std::ostringstream dump;
  const SimResult res = simulate_terminal(mod.rates, em.equity, st, j, cfg, &dump);
  const LogNormalSummary oracle = horizon_moments_general(mod.rates, em.equity, st, j);

  const auto z = compare_to_analytic(res, oracle);
  INFO("z_mu=" << z.first << " z_sigma2=" << z.second);
  CHECK(std::abs(z.first) <= 4.0);
  CHECK(std::abs(z.second) <= 4.0);

  // log V_T should be Gaussian: sample skewness within 4 sqrt(6/n) of zero
  const std::vector<double> samples = parse_dump(dump.str(), cfg.n_paths);
  double mean = 0.0;
  for (const double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  double m2 = 0.0;
  double m3 = 0.0;
  for (const double s : samples) {
    const double d = s - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(samples.size());
  m3 /= static_cast<double>(samples.size());
  const double skew = m3 / std::pow(m2, 1.5);
  CHECK(std::abs(skew) <= 4.0 * std::sqrt(6.0 / static_cast<double>(samples.size())));
}

TEST_CASE("correlated joint exposure matches the general moment route") {
  const ModelConfig mod = preset("rates-moderate");
  EquityParams ep = preset("equity-moderate").equity;
  ep.rho = 0.25;
  const MarketState st{0.01, 0.03};
  const double T = 10.0;
  const JointExposure j(
      bond_extremal(mod.rates, T, Nu(-1.0)).strategy(),
      Strategy::closed_form(T, ExpPoly::constant(0.2) + ExpPoly::monomial(0.1, 0, -0.3)));

  SimConfig cfg;
  cfg.n_paths = 10000;
  cfg.n_steps = 100;
  cfg.seed = 20260816;
  const SimResult res = simulate_terminal(mod.rates, ep, st, j, cfg);
  const LogNormalSummary oracle = horizon_moments_general(mod.rates, ep, st, j);

  const auto z = compare_to_analytic(res, oracle);
  INFO("z_mu=" << z.first << " z_sigma2=" << z.second);
  CHECK(std::abs(z.first) <= 4.0);
  CHECK(std::abs(z.second) <= 4.0);
}

TEST_CASE("simulation results are reproducible and seed sensitive") {
  const ModelConfig mod = preset("rates-moderate");
  const ModelConfig em = preset("equity-moderate");
  const double T = 5.0;
  const JointExposure j(Strategy::constant(T, 0.1), Strategy::constant(T, 0.3));

  SimConfig cfg;
  cfg.n_paths = 256;
  cfg.n_steps = 20;
  cfg.seed = 99;
  std::ostringstream dump_a;
  std::ostringstream dump_b;
  const SimResult a = simulate_terminal(mod.rates, em.equity, em.state, j, cfg, &dump_a);
  const SimResult b = simulate_terminal(mod.rates, em.equity, em.state, j, cfg, &dump_b);
  CHECK(a.sample_mu == b.sample_mu);
  CHECK(a.sample_sigma2 == b.sample_sigma2);
  CHECK(a.se_mu == b.se_mu);
  CHECK(a.se_sigma2 == b.se_sigma2);
  CHECK(dump_a.str() == dump_b.str());

  cfg.seed = 100;
  const SimResult c = simulate_terminal(mod.rates, em.equity, em.state, j, cfg);
  CHECK(c.sample_mu != a.sample_mu);
}

TEST_CASE("antithetic pairing slashes the mean error of a linear payoff") {
  const ModelConfig mod = preset("rates-moderate");
  const ModelConfig em = preset("equity-moderate");
  const double T = 10.0;
  const JointExposure j(Strategy::constant(T, 0.0), Strategy::constant(T, 0.3));

  SimConfig cfg;
  cfg.n_paths = 2000;
  cfg.n_steps = 50;
  cfg.seed = 11;
  const SimResult plain = simulate_terminal(mod.rates, em.equity, em.state, j, cfg);
  cfg.antithetic = true;
  const SimResult anti = simulate_terminal(mod.rates, em.equity, em.state, j, cfg);

  // log V_T is linear in the Gaussian draws here, so mirrored pairs average
  // to a constant and the pair-based standard error collapses
  CHECK(anti.se_mu < 0.05 * plain.se_mu);
  const LogNormalSummary oracle = horizon_moments_general(mod.rates, em.equity, em.state, j);
  CHECK(std::abs(anti.sample_mu - oracle.mu) <= 5.0 * plain.se_mu);
}

TEST_CASE("halving the step size moves the mean by less than the noise") {
  const ModelConfig mod = preset("rates-moderate");
  const ModelConfig em = preset("equity-moderate");
  const double T = 20.0;
  const JointExposure j(Strategy::constant(T, 0.0), Strategy::constant(T, 0.3));

  SimConfig cfg;
  cfg.n_paths = 4000;
  cfg.seed = 123;
  cfg.n_steps = 100;
  const SimResult fine = simulate_terminal(mod.rates, em.equity, em.state, j, cfg);
  cfg.n_steps = 50;
  const SimResult coarse = simulate_terminal(mod.rates, em.equity, em.state, j, cfg);
  const double se = std::sqrt(fine.se_mu * fine.se_mu + coarse.se_mu * coarse.se_mu);
  CHECK(std::abs(fine.sample_mu - coarse.sample_mu) <= 3.0 * se);
}

TEST_CASE("simulation rejects bad configs and aborts on overflow") {
  const ModelConfig mod = preset("rates-moderate");
  const ModelConfig em = preset("equity-moderate");
  const double T = 5.0;
  const JointExposure j(Strategy::constant(T, 0.0), Strategy::constant(T, 0.3));

  SimConfig cfg;
  cfg.n_paths = 1;
  CHECK_THROWS_AS(simulate_terminal(mod.rates, em.equity, em.state, j, cfg),
                  std::invalid_argument);
  cfg.n_paths = 3;
  cfg.antithetic = true;
  CHECK_THROWS_AS(simulate_terminal(mod.rates, em.equity, em.state, j, cfg),
                  std::invalid_argument);
  cfg.antithetic = false;
  cfg.n_steps = 0;
  CHECK_THROWS_AS(simulate_terminal(mod.rates, em.equity, em.state, j, cfg),
                  std::invalid_argument);

  SimConfig ok;
  ok.n_paths = 4;
  ok.n_steps = 10;
  RateParams bad = mod.rates;
  bad.sigma_r = -0.1;
  CHECK_THROWS_AS(simulate_terminal(bad, em.equity, em.state, j, ok), std::invalid_argument);

  const JointExposure huge(Strategy::constant(T, 0.0), Strategy::constant(T, 1e160));
  try {
    simulate_terminal(mod.rates, em.equity, em.state, huge, ok);
    FAIL("expected a runtime_error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("path 0") != std::string::npos);
  }
}
