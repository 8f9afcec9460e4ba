#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dsr/errors.hpp"
#include "dsr/experiments.hpp"
#include "dsr/filters.hpp"
#include "dsr/target.hpp"

namespace dsr {

namespace detail {

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    T value{};
    if constexpr (std::is_same_v<T, double>) value = std::stod(text, &used);
    else if constexpr (std::is_same_v<T, int>) value = std::stoi(text, &used);
    else {
      if (text.find('-') != std::string::npos) throw InputError("negative");
      value = static_cast<T>(std::stoull(text, &used));
    }
    if (used != text.size()) throw InputError("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw InputError("config: bad value '" + text + "' for key '" + key + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InputError("config: bad boolean '" + text + "' for key '" + key + "'");
}

}  // namespace detail

/// Applies one `key = value` setting to a config. Keys mirror the
/// ExperimentConfig field names; `lambda` also accepts `oracle` or `theory`.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_value;
  if (key == "target") c.target = parse_target(value);
  else if (key == "kernel") require(value == "sobolev-min", "config: only the sobolev-min kernel is built in");
  else if (key == "filter") c.filter = parse_filter(value, c.filter.nu);
  else if (key == "nu") {
    const double nu = parse_value<double>(key, value);
    require(nu > 0.0, "config: nu must be positive");
    c.filter.nu = nu;
  }
  else if (key == "n") c.n = parse_value<std::size_t>(key, value);
  else if (key == "alpha") c.alpha = parse_value<double>(key, value);
  else if (key == "m") c.m = parse_value<std::size_t>(key, value);
  else if (key == "sigma") c.sigma = parse_value<double>(key, value);
  else if (key == "lambda") {
    if (value == "oracle") c.lambda_mode = LambdaMode::Oracle;
    else if (value == "theory") c.lambda_mode = LambdaMode::Theory;
    else {
      c.lambda_mode = LambdaMode::Explicit;
      c.lambda = parse_value<double>(key, value);
    }
  }
  else if (key == "k") {
    c.lambda_mode = LambdaMode::Explicit;
    c.k = parse_value<int>(key, value);
  }
  else if (key == "runs") c.runs = parse_value<std::size_t>(key, value);
  else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, value);
  else if (key == "workers") c.workers = parse_value<std::size_t>(key, value);
  else if (key == "lambda_min") c.lambda_min = parse_value<double>(key, value);
  else if (key == "lambda_max") c.lambda_max = parse_value<double>(key, value);
  else if (key == "grid_points") c.grid_points = parse_value<int>(key, value);
  else if (key == "k_max") c.k_max = parse_value<int>(key, value);
  else if (key == "quad_nodes") c.quad_nodes = parse_value<int>(key, value);
  else if (key == "r") c.r = parse_value<double>(key, value);
  else if (key == "b") c.b = parse_value<double>(key, value);
  else if (key == "R") c.R = parse_value<double>(key, value);
  else if (key == "timing") c.timing = detail::parse_bool(key, value);
  else throw InputError("config: unknown key '" + key + "'");
}

/// Reads `key = value` lines, optionally grouped under `[section]` headers
/// (section names are ignored), into `c`.
inline void load_config(std::istream& in, ExperimentConfig& c) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  auto visit = [&](const boost::property_tree::ptree& node) {
    for (const auto& [key, child] : node) {
      if (!child.empty()) continue;
      apply_setting(c, key, child.data());
    }
  };
  visit(tree);
  for (const auto& [section, child] : tree)
    if (!child.empty()) visit(child);
  c.validate();
}

}  // namespace dsr
