// Command line front end for the glidepath library.
//
// Subcommands: yield-curve, vol-profile, profile, strategy, stats, simulate,
// classify. Parameters come from a named preset or a key=value config file
// (exactly one of the two); everything is emitted as CSV with a header row.
//
// Exit codes: 0 success, 2 configuration errors, 3 numerical failures
// (singular risk multiplier, quadrature non-convergence).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glidepath/extremal_strategies.hpp"
#include "glidepath/io.hpp"
#include "glidepath/market_model.hpp"
#include "glidepath/math_util.hpp"
#include "glidepath/monte_carlo.hpp"
#include "glidepath/portfolio_distribution.hpp"
#include "glidepath/risk_stats.hpp"
#include "glidepath/strategy.hpp"

namespace {

using namespace glidepath;

constexpr const char* kPresetHelp =
    "named parameter set: rates-moderate, rates-low, equity-moderate, "
    "equity-high, mr-1..mr-7, mr-A..mr-G";

/// Model parameter source shared by all subcommands: --preset xor --config,
/// with optional --r0/--x0 state overrides.
struct SourceOptions {
  std::string preset_name;
  std::string config_path;
  double r0 = 0.0;
  double x0 = 0.0;
  CLI::Option* preset_opt = nullptr;
  CLI::Option* config_opt = nullptr;
  CLI::Option* r0_opt = nullptr;
  CLI::Option* x0_opt = nullptr;

  void attach(CLI::App* cmd, bool with_state = true) {
    preset_opt = cmd->add_option("--preset", preset_name, kPresetHelp);
    config_opt = cmd->add_option("--config", config_path, "key=value parameter file");
    if (with_state) {
      r0_opt = cmd->add_option("--r0", r0, "override the starting short rate (annualized)");
      x0_opt = cmd->add_option("--x0", x0, "override the starting risk premium (annualized)");
    }
  }

  ModelConfig load() const {
    const bool has_preset = preset_opt->count() > 0;
    const bool has_config = config_opt->count() > 0;
    if (has_preset == has_config)
      throw std::invalid_argument("exactly one of --preset or --config is required");
    ModelConfig cfg;
    if (has_preset) {
      cfg = preset(preset_name);
    } else {
      auto pairs = parse_key_value_file(config_path);
      cfg = model_config_from_pairs(pairs, config_path);
      if (!pairs.empty())
        throw std::invalid_argument(config_path + ": unknown key '" + pairs.begin()->first +
                                    "'");
    }
    if (r0_opt != nullptr && r0_opt->count() > 0) cfg.state.r0 = r0;
    if (x0_opt != nullptr && x0_opt->count() > 0) cfg.state.x0 = x0;
    cfg.validate();
    return cfg;
  }
};

/// CSV destination: --output file or standard output.
struct OutputOptions {
  std::string path;

  void attach(CLI::App* cmd) {
    cmd->add_option("--output,-o", path, "write CSV to this file instead of standard output");
  }

  template <class Fn>
  void write(Fn&& fn) const {
    if (path.empty()) {
      fn(std::cout);
      return;
    }
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file '" + path + "'");
    fn(out);
  }
};

struct FamilyOption {
  std::string family;

  void attach(CLI::App* cmd) {
    cmd->add_option("--family", family,
                    "extremal family: rates or equity (default: inferred from the "
                    "preset name, rates otherwise)")
        ->check(CLI::IsMember({"rates", "equity"}));
  }

  // Equity presets (equity-*, mr-*) imply the equity family so the common
  // invocations need no explicit flag; --family always wins.
  bool rates(const SourceOptions& source) const {
    if (!family.empty()) return family == "rates";
    const std::string& name = source.preset_name;
    const bool equity_preset =
        name.rfind("equity", 0) == 0 || name.rfind("mr-", 0) == 0;
    return !equity_preset;
  }
};

void check_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw std::invalid_argument(std::string(what) + " must be positive");
}

std::vector<Nu> parse_nu_list(const std::vector<std::string>& tokens) {
  std::vector<Nu> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) out.push_back(parse_nu(t));
  return out;
}

// ---------------------------------------------------------------------------
// yield-curve

struct YieldCurveCmd {
  SourceOptions source;
  OutputOptions output;
  double max_maturity = 40.0;
  double step = 1.0;
  std::vector<double> r0_columns{-0.02, 0.0, 0.02, 0.04, 0.06};

  void attach(CLI::App* cmd) {
    source.attach(cmd, /*with_state=*/false);
    output.attach(cmd);
    cmd->add_option("--max-T", max_maturity, "largest maturity in years (default 40)");
    cmd->add_option("--step", step, "maturity grid step in years (default 1)");
    cmd->add_option("--r0", r0_columns,
                    "short-rate column values (default -0.02,0,0.02,0.04,0.06)")
        ->delimiter(',');
  }

  void run() const {
    const ModelConfig cfg = source.load();
    check_positive(step, "--step");
    if (!(max_maturity >= 0.0) || !std::isfinite(max_maturity))
      throw std::invalid_argument("--max-T must be non-negative");
    if (r0_columns.empty()) throw std::invalid_argument("--r0 needs at least one value");
    output.write([&](std::ostream& out) {
      out << std::setprecision(12);
      out << "maturity";
      for (const double r0 : r0_columns) out << ",r0=" << r0;
      out << '\n';
      const auto rows = static_cast<std::size_t>(std::llround(max_maturity / step));
      for (std::size_t k = 0; k <= rows; ++k) {
        const double t = std::min(static_cast<double>(k) * step, max_maturity);
        out << t;
        for (const double r0 : r0_columns) out << ',' << zero_yield(cfg.rates, r0, t);
        out << '\n';
      }
    });
  }
};

// ---------------------------------------------------------------------------
// vol-profile

struct VolProfileCmd {
  SourceOptions source;
  OutputOptions output;
  double max_t = 100.0;
  double step = 1.0;

  void attach(CLI::App* cmd) {
    source.attach(cmd, /*with_state=*/false);
    output.attach(cmd);
    cmd->add_option("--max-T", max_t, "largest observation window in years (default 100)");
    cmd->add_option("--step", step, "grid step in years (default 1)");
  }

  void run() const {
    const ModelConfig cfg = source.load();
    check_positive(step, "--step");
    check_positive(max_t, "--max-T");
    // a random-walk premium (alpha = 0 with sigma_x > 0) has no finite
    // asymptote; the constant columns then print inf to flag divergence
    output.write([&](std::ostream& out) {
      out << std::setprecision(12);
      out << "t,vol,asymptote,stationary_sd\n";
      const double asym = asymptotic_excess_vol(cfg.equity);
      const double sd = stationary_premium_sd(cfg.equity);
      const auto rows = static_cast<std::size_t>(std::llround(max_t / step));
      for (std::size_t k = 1; k <= rows; ++k) {
        const double t = std::min(static_cast<double>(k) * step, max_t);
        out << t << ',' << excess_vol_profile(cfg.equity, t) << ',' << asym << ',' << sd
            << '\n';
      }
    });
  }
};

// ---------------------------------------------------------------------------
// profile

struct ProfileCmd {
  SourceOptions source;
  OutputOptions output;
  FamilyOption family;
  double horizon = 20.0;
  double nu_min = -10.0;
  double nu_max = 0.45;
  std::size_t points = 200;

  void attach(CLI::App* cmd) {
    source.attach(cmd);
    output.attach(cmd);
    family.attach(cmd);
    cmd->add_option("--T", horizon, "investment horizon in years");
    cmd->add_option("--nu-min", nu_min, "left end of the multiplier grid (default -10)");
    cmd->add_option("--nu-max", nu_max, "right end of the multiplier grid (default 0.45)");
    cmd->add_option("--points", points, "grid size (default 200)");
  }

  void run() const {
    const ModelConfig cfg = source.load();
    check_positive(horizon, "--T");
    if (points < 2) throw std::invalid_argument("--points must be at least 2");
    if (!(nu_min < nu_max)) throw std::invalid_argument("--nu-min must be below --nu-max");
    std::vector<Nu> grid;
    grid.reserve(points);
    for (std::size_t k = 0; k < points; ++k)
      grid.push_back(
          Nu(nu_min + (nu_max - nu_min) * static_cast<double>(k) /
                          static_cast<double>(points - 1)));

    // both families report the r0-independent multiplier: Y for rates
    // (shifted by log p_0(T)), Z for equity; the risk-free anchor is the
    // point (0, 0) at nu = -inf
    std::vector<ProfilePoint> pts;
    if (family.rates(source)) {
      pts = profile_sweep(cfg.rates, cfg.state, horizon, grid);
      const double shift = std::log(zcb_price(cfg.rates, cfg.state.r0, horizon));
      for (ProfilePoint& p : pts) p.summary.mu += shift;
    } else {
      pts = profile_sweep(cfg.equity, cfg.state, horizon, grid);
    }
    pts.push_back(ProfilePoint{Nu::negative_infinity(), LogNormalSummary{0.0, 0.0}, false});
    output.write([&](std::ostream& out) { profile_csv(pts, out); });
  }
};

// ---------------------------------------------------------------------------
// strategy

struct StrategyCmd {
  SourceOptions source;
  OutputOptions output;
  FamilyOption family;
  double horizon = 20.0;
  std::string nu_token;
  double sigma_target = 0.0;
  std::size_t rows = Strategy::kDefaultNodes;
  CLI::Option* nu_opt = nullptr;
  CLI::Option* sigma_opt = nullptr;

  void attach(CLI::App* cmd) {
    source.attach(cmd);
    output.attach(cmd);
    family.attach(cmd);
    cmd->add_option("--T", horizon, "investment horizon in years");
    nu_opt = cmd->add_option("--nu", nu_token,
                             "risk multiplier; -inf selects the risk-free hedge");
    sigma_opt = cmd->add_option(
        "--sigma", sigma_target,
        "pick nu on the mean-maximizing branch hitting this log-value volatility");
    cmd->add_option("--rows", rows, "number of CSV rows (default 2001)");
  }

  Nu pick_nu(const ModelConfig& cfg) const {
    const bool has_nu = nu_opt->count() > 0;
    const bool has_sigma = sigma_opt->count() > 0;
    if (has_nu == has_sigma)
      throw std::invalid_argument("exactly one of --nu or --sigma is required");
    if (has_nu) return parse_nu(nu_token);
    if (!(sigma_target >= 0.0) || !std::isfinite(sigma_target))
      throw std::invalid_argument("--sigma must be non-negative");
    const double target = sigma_target * sigma_target;
    if (family.rates(source)) return bond_nu_for_variance(cfg.rates, horizon, target).first;
    return equity_nu_for_variance(cfg.equity, cfg.state, horizon, target);
  }

  void run() const {
    const ModelConfig cfg = source.load();
    check_positive(horizon, "--T");
    if (rows < 2) throw std::invalid_argument("--rows must be at least 2");
    const Nu nu = pick_nu(cfg);
    output.write([&](std::ostream& out) {
      if (family.rates(source)) {
        const BondExtremalSolution sol = bond_extremal(cfg.rates, horizon, nu);
        out << "s,exposure\n" << std::setprecision(12);
        for (std::size_t i = 0; i < rows; ++i) {
          const double s =
              horizon * static_cast<double>(i) / static_cast<double>(rows - 1);
          out << s << ',' << sol(s) << '\n';
        }
      } else {
        const EquityExtremalSolution sol = equity_extremal(cfg.equity, cfg.state, horizon, nu);
        glidepath_csv(sol, out, rows);
      }
    });
  }
};

// ---------------------------------------------------------------------------
// stats

struct StatsCmd {
  SourceOptions source;
  OutputOptions output;
  FamilyOption family;
  std::vector<double> horizons{10.0, 20.0, 30.0, 40.0, 50.0, 60.0};
  std::vector<std::string> nu_tokens{"-10", "-2", "-1", "-0.5", "-0.25", "-0.0625", "0"};

  void attach(CLI::App* cmd) {
    source.attach(cmd);
    output.attach(cmd);
    family.attach(cmd);
    cmd->add_option("--T", horizons, "horizon grid in years (default 10,20,...,60)")
        ->delimiter(',');
    cmd->add_option("--nu", nu_tokens,
                    "risk multiplier grid (default -10,-2,-1,-0.5,-0.25,-0.0625,0)")
        ->delimiter(',');
  }

  void run() const {
    const ModelConfig cfg = source.load();
    const std::vector<Nu> nus = parse_nu_list(nu_tokens);
    const std::vector<StatsCell> cells =
        family.rates(source) ? stats_table(cfg.rates, cfg.state, horizons, nus)
                       : stats_table(cfg.equity, cfg.state, horizons, nus);
    output.write([&](std::ostream& out) { stats_table_csv(cells, out); });
  }
};

// ---------------------------------------------------------------------------
// simulate

struct SimulateCmd {
  SourceOptions source;
  OutputOptions output;
  double horizon = 20.0;
  std::string nu_token = "0";
  SimConfig sim;
  std::string dump_path;

  void attach(CLI::App* cmd) {
    source.attach(cmd);
    output.attach(cmd);
    cmd->add_option("--T", horizon, "investment horizon in years");
    cmd->add_option("--nu", nu_token, "risk multiplier of the joint extremal pair");
    cmd->add_option("--paths", sim.n_paths, "number of Monte Carlo paths (default 100000)");
    cmd->add_option("--steps", sim.n_steps, "time steps per year (default 100)");
    cmd->add_option("--seed", sim.seed, "random seed (default 1)");
    cmd->add_flag("--antithetic", sim.antithetic, "mirror every second path");
    cmd->add_option("--dump", dump_path, "write raw path_id,log_VT samples to this file");
  }

  void run() const {
    const ModelConfig cfg = source.load();
    check_positive(horizon, "--T");
    const Nu nu = parse_nu(nu_token);
    const JointExtremalPair pair = joint_pair(cfg.rates, cfg.equity, cfg.state, horizon, nu);
    const JointExposure exposure(pair.bond.strategy(), pair.equity.strategy());

    SimResult result;
    if (dump_path.empty()) {
      result = simulate_terminal(cfg.rates, cfg.equity, cfg.state, exposure, sim);
    } else {
      std::ofstream dump(dump_path);
      if (!dump) throw std::invalid_argument("cannot open dump file '" + dump_path + "'");
      result = simulate_terminal(cfg.rates, cfg.equity, cfg.state, exposure, sim, &dump);
    }
    const auto z = compare_to_analytic(result, pair.summary);
    output.write([&](std::ostream& out) {
      out << std::setprecision(12);
      out << "quantity,analytic,sample,se,z\n";
      out << "mu," << pair.summary.mu << ',' << result.sample_mu << ',' << result.se_mu << ','
          << z.first << '\n';
      out << "sigma2," << pair.summary.sigma2 << ',' << result.sample_sigma2 << ','
          << result.se_sigma2 << ',' << z.second << '\n';
    });
  }
};

// ---------------------------------------------------------------------------
// classify

struct ClassifyCmd {
  SourceOptions source;
  OutputOptions output;
  double horizon = 20.0;
  std::string nu_token = "0";

  void attach(CLI::App* cmd) {
    source.attach(cmd);
    output.attach(cmd);
    cmd->add_option("--T", horizon, "investment horizon in years");
    cmd->add_option("--nu", nu_token, "risk multiplier to classify");
  }

  void run() const {
    const ModelConfig cfg = source.load();
    check_positive(horizon, "--T");
    const Nu nu = parse_nu(nu_token);
    const EquityExtremalSolution sol = equity_extremal(cfg.equity, cfg.state, horizon, nu);
    output.write([&](std::ostream& out) { coefficient_csv(sol, out); });
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Deterministic glide paths and horizon risk profiles under a two-factor "
      "bond/equity market model"};
  app.require_subcommand(1);

  YieldCurveCmd yield_curve;
  yield_curve.attach(app.add_subcommand(
      "yield-curve", "zero-coupon yields by maturity, one column per short rate"));
  VolProfileCmd vol_profile;
  vol_profile.attach(app.add_subcommand(
      "vol-profile", "annualized volatility of log excess equity returns by window"));
  ProfileCmd profile;
  profile.attach(
      app.add_subcommand("profile", "risk-reward profile of an extremal family"));
  StrategyCmd strategy;
  strategy.attach(app.add_subcommand("strategy", "exposure glide path of one strategy"));
  StatsCmd stats;
  stats.attach(app.add_subcommand("stats", "risk and reward statistics over a (T, nu) grid"));
  SimulateCmd simulate;
  simulate.attach(app.add_subcommand(
      "simulate", "Monte Carlo check of the joint extremal pair against the analytic moments"));
  ClassifyCmd classify;
  classify.attach(app.add_subcommand(
      "classify", "solution type and coefficients of the equity extremal at nu"));

  app.get_subcommand("yield-curve")->callback([&] { yield_curve.run(); });
  app.get_subcommand("vol-profile")->callback([&] { vol_profile.run(); });
  app.get_subcommand("profile")->callback([&] { profile.run(); });
  app.get_subcommand("strategy")->callback([&] { strategy.run(); });
  app.get_subcommand("stats")->callback([&] { stats.run(); });
  app.get_subcommand("simulate")->callback([&] { simulate.run(); });
  app.get_subcommand("classify")->callback([&] { classify.run(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const glidepath::SingularNuError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const glidepath::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
