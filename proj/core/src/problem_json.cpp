#include <cmath>
#include <stdexcept>

#include "switchgrid/model/json_util.hpp"
#include "switchgrid/model/problem.hpp"
#include "switchgrid/util/errors.hpp"

namespace switchgrid {
namespace json_util {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void require_object(const nlohmann::json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
}

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key,
                              const std::string& prefix) {
  require_object(obj, prefix);
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(prefix, key), "missing key");
  return *it;
}

double get_number(const nlohmann::json& obj, const std::string& key, const std::string& prefix) {
  const auto& v = require(obj, key, prefix);
  if (!v.is_number()) throw ConfigError(join(prefix, key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(join(prefix, key), "expected a finite number");
  return d;
}

double get_number(const nlohmann::json& obj, const std::string& key, const std::string& prefix,
                  double fallback) {
  require_object(obj, prefix);
  return obj.contains(key) ? get_number(obj, key, prefix) : fallback;
}

long long get_integer(const nlohmann::json& obj, const std::string& key, const std::string& prefix) {
  const auto& v = require(obj, key, prefix);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
  }
  throw ConfigError(join(prefix, key), "expected an integer");
}

long long get_integer(const nlohmann::json& obj, const std::string& key, const std::string& prefix,
                      long long fallback) {
  require_object(obj, prefix);
  return obj.contains(key) ? get_integer(obj, key, prefix) : fallback;
}

bool get_bool(const nlohmann::json& obj, const std::string& key, const std::string& prefix,
              bool fallback) {
  require_object(obj, prefix);
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(join(prefix, key), "expected a boolean");
  return v.get<bool>();
}

std::string get_string(const nlohmann::json& obj, const std::string& key, const std::string& prefix) {
  const auto& v = require(obj, key, prefix);
  if (!v.is_string()) throw ConfigError(join(prefix, key), "expected a string");
  return v.get<std::string>();
}

std::string get_string(const nlohmann::json& obj, const std::string& key, const std::string& prefix,
                       const std::string& fallback) {
  require_object(obj, prefix);
  return obj.contains(key) ? get_string(obj, key, prefix) : fallback;
}

std::vector<double> get_number_array(const nlohmann::json& obj, const std::string& key,
                                     const std::string& prefix) {
  const auto& v = require(obj, key, prefix);
  const std::string path = join(prefix, key);
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw ConfigError(path + "[" + std::to_string(k) + "]", "expected a number");
    out.push_back(v[k].get<double>());
  }
  return out;
}

}  // namespace json_util

namespace {

using namespace json_util;

MarketModel parse_market(const nlohmann::json& doc, const std::string& p) {
  require_object(doc, p);
  const std::string kind = get_string(doc, "kind", p);
  try {
    if (kind == "capped_gbm") {
      const double cap = get_number(doc, "cap", p);
      if (!(cap > 0.0)) throw ConfigError(join(p, "cap"), "must be positive");
      return capped_gbm(get_number(doc, "mu", p), get_number(doc, "sigma", p), cap);
    }
    if (kind == "gbm") return gbm(get_number(doc, "mu", p), get_number(doc, "sigma", p));
    if (kind == "table") {
      return tabulated_market(get_number_array(doc, "x", p), get_number_array(doc, "drift", p),
                              get_number_array(doc, "volatility", p));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(p, e.what());
  }
  throw ConfigError(join(p, "kind"), "unknown market kind '" + kind + "'");
}

CostFunction parse_cost(const nlohmann::json& doc, const std::string& p, int reach) {
  require_object(doc, p);
  const std::string kind = get_string(doc, "kind", p);
  if (kind == "fixed_plus_prop") {
    const double fixed = get_number(doc, "fixed", p);
    const double prop = get_number(doc, "prop", p);
    if (fixed < 0.0) throw ConfigError(join(p, "fixed"), "must be nonnegative");
    if (prop < 0.0) throw ConfigError(join(p, "prop"), "must be nonnegative");
    return CostFunction::fixed_plus_proportional(fixed, prop, reach);
  }
  if (kind == "table") {
    const auto table = get_number_array(doc, "table", p);
    if (table.size() % 2 == 0) {
      throw ConfigError(join(p, "table"), "needs an odd number of entries for sizes -R..R");
    }
    const int r = static_cast<int>(table.size() / 2);
    if (r < reach) {
      throw ConfigError(join(p, "table"), "must cover trade sizes -" + std::to_string(reach) +
                                              ".." + std::to_string(reach));
    }
    return CostFunction(r, table);
  }
  throw ConfigError(join(p, "kind"), "unknown cost kind '" + kind + "'");
}

Utility parse_utility(const nlohmann::json& doc, const std::string& p) {
  require_object(doc, p);
  const std::string kind = get_string(doc, "kind", p);
  if (kind != "power") throw ConfigError(join(p, "kind"), "unknown utility kind '" + kind + "'");
  const double gamma = get_number(doc, "gamma", p);
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError(join(p, "gamma"), "must lie in (0, 1)");
  return power_utility(gamma);
}

}  // namespace

ProblemSpec problem_from_json(const nlohmann::json& doc, const std::string& key_prefix) {
  const std::string& p = key_prefix;
  require_object(doc, p);
  const auto& pos = require(doc, "positions", p);
  const std::string pp = join(p, "positions");
  const long long c2 = get_integer(pos, "c2", pp);
  const long long c3 = get_integer(pos, "c3", pp);
  if (c2 < 0) throw ConfigError(join(pp, "c2"), "must be a nonnegative integer");
  if (c3 < 0) throw ConfigError(join(pp, "c3"), "must be a nonnegative integer");
  if (c2 > 60 || c3 > 60) throw ConfigError(pp, "position bounds above 60 are not supported");
  const PositionSet k{static_cast<int>(c2), static_cast<int>(c3)};

  MarketModel market = parse_market(require(doc, "market", p), join(p, "market"));
  CostFunction cost = parse_cost(require(doc, "cost", p), join(p, "cost"), k.c2 + k.c3);
  Utility utility = parse_utility(require(doc, "utility", p), join(p, "utility"));
  const double horizon = get_number(doc, "horizon", p);
  if (!(horizon > 0.0)) throw ConfigError(join(p, "horizon"), "must be positive");
  return make_problem(std::move(market), std::move(cost), std::move(utility), k, horizon);
}

}  // namespace switchgrid
