#pragma once

// Deterministic investment strategies: a factor exposure f_s given as a
// function of time s in [0, T]. Three representations are supported:
//
//   Constant    a single exposure level,
//   ClosedForm  an ExpPoly (sums of s^k e^{zs}), exact integral algebra,
//   Sampled     a uniform grid of exposures, linearly interpolated.
//
// Strategies serialize to CSV with header "s,exposure"; reading always
// produces a Sampled strategy on the file's grid.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "glidepath/exp_poly.hpp"

namespace glidepath {

enum class StrategyKind { kConstant, kClosedForm, kSampled };

class Strategy {
 public:
  /// Default number of grid nodes used when materializing a strategy
  /// (grid step T/2000).
  static constexpr std::size_t kDefaultNodes = 2001;

  static Strategy constant(double horizon, double level) {
    Strategy f(horizon, StrategyKind::kConstant);
    if (!std::isfinite(level))
      throw std::invalid_argument("Strategy: constant level must be finite");
    f.level_ = level;
    return f;
  }

  static Strategy closed_form(double horizon, ExpPoly poly) {
    Strategy f(horizon, StrategyKind::kClosedForm);
    f.poly_ = std::move(poly);
    return f;
  }

  /// Uniform grid of exposures over [0, horizon]; values[i] is the exposure
  /// at i * horizon / (values.size() - 1).
  static Strategy sampled(double horizon, std::vector<double> values) {
    Strategy f(horizon, StrategyKind::kSampled);
    if (values.size() < 2)
      throw std::invalid_argument("Strategy: sampled grid needs at least 2 points");
    for (double v : values) {
      if (!std::isfinite(v))
        throw std::invalid_argument("Strategy: sampled exposures must be finite");
    }
    f.values_ = std::move(values);
    return f;
  }

  /// Materializes fn on a uniform grid with n nodes.
  template <typename F>
  static Strategy sample(double horizon, F&& fn, std::size_t n = kDefaultNodes) {
    if (n < 2) throw std::invalid_argument("Strategy: sampled grid needs at least 2 points");
    std::vector<double> values(n);
    const double step = horizon / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = fn(std::min(static_cast<double>(i) * step, horizon));
    }
    return sampled(horizon, std::move(values));
  }

  double horizon() const { return horizon_; }
  StrategyKind kind() const { return kind_; }
  bool has_closed_form() const { return kind_ != StrategyKind::kSampled; }

  /// Exposure at time s. s must lie in [0, T] up to a small roundoff slack.
  double operator()(double s) const {
    const double slack = 1e-9 * std::max(1.0, horizon_);
    if (s < -slack || s > horizon_ + slack)
      throw std::invalid_argument("Strategy: evaluation time outside [0, T]");
    s = std::min(std::max(s, 0.0), horizon_);
    switch (kind_) {
      case StrategyKind::kConstant:
        return level_;
      case StrategyKind::kClosedForm:
        return poly_.evaluate(s);
      case StrategyKind::kSampled: {
        const double step = grid_step();
        const double pos = s / step;
        std::size_t i = static_cast<std::size_t>(pos);
        if (i >= values_.size() - 1) i = values_.size() - 2;
        const double w = pos - static_cast<double>(i);
        return values_[i] + w * (values_[i + 1] - values_[i]);
      }
    }
    throw std::runtime_error("Strategy: corrupt kind tag");
  }

  /// Exact representation for Constant and ClosedForm kinds.
  ExpPoly exp_poly() const {
    switch (kind_) {
      case StrategyKind::kConstant:
        return ExpPoly::constant(level_);
      case StrategyKind::kClosedForm:
        return poly_;
      case StrategyKind::kSampled:
        break;
    }
    throw std::invalid_argument("Strategy: sampled strategies have no closed form");
  }

  const std::vector<double>& values() const {
    if (kind_ != StrategyKind::kSampled)
      throw std::invalid_argument("Strategy: grid values only exist for sampled strategies");
    return values_;
  }

  double grid_step() const {
    if (kind_ != StrategyKind::kSampled)
      throw std::invalid_argument("Strategy: grid step only exists for sampled strategies");
    return horizon_ / static_cast<double>(values_.size() - 1);
  }

  /// Writes "s,exposure" rows. Constant and ClosedForm kinds are
  /// materialized on the default grid.
  void to_csv(std::ostream& out) const {
    out << "s,exposure\n" << std::setprecision(12);
    const std::size_t n = kind_ == StrategyKind::kSampled ? values_.size() : kDefaultNodes;
    const double step = horizon_ / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::min(static_cast<double>(i) * step, horizon_);
      out << s << ',' << (*this)(s) << '\n';
    }
  }

  /// Reads a strategy written by to_csv (or any uniform "s,exposure" grid).
  static Strategy from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim_token(line) != "s,exposure")
      throw std::runtime_error("Strategy: expected CSV header 's,exposure'");
    std::vector<double> times;
    std::vector<double> values;
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string stripped = trim_token(line);
      if (stripped.empty()) continue;
      const std::size_t comma = stripped.find(',');
      if (comma == std::string::npos)
        throw std::runtime_error("Strategy: line " + std::to_string(lineno) +
                                 ": expected 's,exposure'");
      times.push_back(parse_field(stripped.substr(0, comma), lineno));
      values.push_back(parse_field(stripped.substr(comma + 1), lineno));
    }
    if (times.size() < 2)
      throw std::runtime_error("Strategy: need at least 2 grid rows");
    if (std::abs(times.front()) > 1e-12)
      throw std::runtime_error("Strategy: grid must start at s = 0");
    const double horizon = times.back();
    const double step = horizon / static_cast<double>(times.size() - 1);
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (std::abs(times[i] - static_cast<double>(i) * step) >
          1e-7 * std::max(1.0, horizon))
        throw std::runtime_error("Strategy: grid is not uniform at row " +
                                 std::to_string(i + 2));
    }
    return sampled(horizon, std::move(values));
  }

 private:
  Strategy(double horizon, StrategyKind kind) : horizon_(horizon), kind_(kind) {
    if (!std::isfinite(horizon) || horizon <= 1e-9)
      throw std::invalid_argument("Strategy: horizon must exceed 1e-9 years");
  }

  static std::string trim_token(const std::string& s) {
    std::size_t first = 0;
    std::size_t last = s.size();
    while (first < last && std::isspace(static_cast<unsigned char>(s[first]))) ++first;
    while (last > first && std::isspace(static_cast<unsigned char>(s[last - 1]))) --last;
    return s.substr(first, last - first);
  }

  static double parse_field(const std::string& token, int lineno) {
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != trim_token(token).size() && used != token.size())
        throw std::invalid_argument("trailing characters");
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("Strategy: line " + std::to_string(lineno) +
                               ": bad number '" + token + "'");
    }
  }

  double horizon_{};
  StrategyKind kind_{};
  double level_{};
  ExpPoly poly_{};
  std::vector<double> values_{};
};

/// A rate strategy and an equity strategy sharing one horizon.
struct JointExposure {
  Strategy rate_strategy;
  Strategy equity_strategy;

  JointExposure(Strategy f_r, Strategy f_S)
      : rate_strategy(std::move(f_r)), equity_strategy(std::move(f_S)) {
    if (rate_strategy.horizon() != equity_strategy.horizon())
      throw std::invalid_argument("JointExposure: strategies must share the horizon");
  }
};

}  // namespace glidepath
