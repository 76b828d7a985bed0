#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace switchgrid::json_util {

/// Typed accessors that raise ConfigError with the dotted key path.

std::string join(const std::string& prefix, const std::string& key);

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key,
                              const std::string& prefix);
void require_object(const nlohmann::json& obj, const std::string& path);

double get_number(const nlohmann::json& obj, const std::string& key, const std::string& prefix);
double get_number(const nlohmann::json& obj, const std::string& key, const std::string& prefix,
                  double fallback);
long long get_integer(const nlohmann::json& obj, const std::string& key, const std::string& prefix);
long long get_integer(const nlohmann::json& obj, const std::string& key, const std::string& prefix,
                      long long fallback);
bool get_bool(const nlohmann::json& obj, const std::string& key, const std::string& prefix,
              bool fallback);
std::string get_string(const nlohmann::json& obj, const std::string& key, const std::string& prefix);
std::string get_string(const nlohmann::json& obj, const std::string& key, const std::string& prefix,
                       const std::string& fallback);
std::vector<double> get_number_array(const nlohmann::json& obj, const std::string& key,
                                     const std::string& prefix);

}  // namespace switchgrid::json_util
