#pragma once

// Plain-text configuration files and small parsing helpers.
//
// Config files are line oriented "key = value" pairs. Blank lines and lines
// starting with '#' are ignored; inline "# ..." comments are stripped. Keys
// are case sensitive. A key may appear only once.

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "glidepath/market_model.hpp"

namespace glidepath {

inline std::string trim(const std::string& s) {
  std::size_t first = 0;
  std::size_t last = s.size();
  while (first < last && std::isspace(static_cast<unsigned char>(s[first]))) ++first;
  while (last > first && std::isspace(static_cast<unsigned char>(s[last - 1]))) --last;
  return s.substr(first, last - first);
}

/// Parses "key = value" lines from a stream. Throws std::runtime_error with
/// a line number on malformed or duplicate entries.
inline std::map<std::string, std::string> parse_key_value(std::istream& in,
                                                          const std::string& source) {
  std::map<std::string, std::string> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(source + ":" + std::to_string(lineno) +
                               ": expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error(source + ":" + std::to_string(lineno) +
                               ": empty key or value");
    if (!pairs.emplace(key, value).second)
      throw std::runtime_error(source + ":" + std::to_string(lineno) +
                               ": duplicate key '" + key + "'");
  }
  return pairs;
}

inline std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_key_value(in, path);
}

/// Strict double parser: the whole token must be consumed.
inline double parse_double(const std::string& value, const std::string& what) {
  const std::string t = trim(value);
  char* end = nullptr;
  const double parsed = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0')
    throw std::runtime_error(what + ": not a number: '" + value + "'");
  return parsed;
}

namespace detail {

// Pops pairs[key] if present; returns fallback otherwise.
inline double take_double(std::map<std::string, std::string>& pairs, const std::string& key,
                          double fallback) {
  const auto it = pairs.find(key);
  if (it == pairs.end()) return fallback;
  const double parsed = parse_double(it->second, key);
  pairs.erase(it);
  return parsed;
}

inline double take_required_double(std::map<std::string, std::string>& pairs,
                                   const std::string& key, const std::string& source) {
  const auto it = pairs.find(key);
  if (it == pairs.end())
    throw std::runtime_error(source + ": missing required key '" + key + "'");
  const double parsed = parse_double(it->second, key);
  pairs.erase(it);
  return parsed;
}

}  // namespace detail

/// Builds a ModelConfig from parsed key=value pairs, consuming the keys it
/// recognizes. Required keys: kappa, r_bar, sigma_r, a, b, x_bar, sigma_S,
/// sigma_x, alpha. Optional: rho (default 0), r0 (default 0), x0 (default
/// x_bar). Leftover pairs stay in the map for the caller to interpret.
inline ModelConfig model_config_from_pairs(std::map<std::string, std::string>& pairs,
                                           const std::string& source) {
  ModelConfig cfg;
  cfg.rates.kappa = detail::take_required_double(pairs, "kappa", source);
  cfg.rates.r_bar = detail::take_required_double(pairs, "r_bar", source);
  cfg.rates.sigma_r = detail::take_required_double(pairs, "sigma_r", source);
  cfg.rates.a = detail::take_required_double(pairs, "a", source);
  cfg.rates.b = detail::take_required_double(pairs, "b", source);
  cfg.equity.x_bar = detail::take_required_double(pairs, "x_bar", source);
  cfg.equity.sigma_S = detail::take_required_double(pairs, "sigma_S", source);
  cfg.equity.sigma_x = detail::take_required_double(pairs, "sigma_x", source);
  cfg.equity.alpha = detail::take_required_double(pairs, "alpha", source);
  cfg.equity.rho = detail::take_double(pairs, "rho", 0.0);
  cfg.state.r0 = detail::take_double(pairs, "r0", 0.0);
  cfg.state.x0 = detail::take_double(pairs, "x0", cfg.equity.x_bar);
  cfg.validate();
  return cfg;
}

/// Loads a full model configuration from a key=value file. Unrecognized keys
/// are rejected (use model_config_from_pairs when mixing model and run keys
/// in one file).
inline ModelConfig load_model_config(const std::string& path) {
  auto pairs = parse_key_value_file(path);
  const ModelConfig cfg = model_config_from_pairs(pairs, path);
  if (!pairs.empty())
    throw std::runtime_error(path + ": unknown key '" + pairs.begin()->first + "'");
  return cfg;
}

}  // namespace glidepath
