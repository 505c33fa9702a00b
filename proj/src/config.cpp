#include "sievestream/config.hpp"

#include <cerrno>
#include <climits>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sievestream/errors.hpp"

namespace sievestream {

namespace {

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream stream(value);
  std::string part;
  while (std::getline(stream, part, ',')) {
    part = trim(part);
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

double parse_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const double parsed = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as a real");
  }
  return parsed;
}

long long parse_integer(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const long long parsed = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("key '" + key + "': cannot parse '" + value + "' as an integer");
  }
  return parsed;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE ||
      value.find('-') != std::string::npos) {
    throw ConfigError("key '" + key + "': cannot parse '" + value +
                      "' as an unsigned integer");
  }
  return parsed;
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config config;
  std::stringstream stream(text);
  std::string raw;
  long line = 0;
  while (std::getline(stream, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string entry = trim(raw);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line) +
                        " has no '=' separator: '" + entry + "'");
    }
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line) + " has an empty key");
    }
    if (!config.entries_.emplace(key, value).second) {
      throw ConfigError("duplicate config key '" + key + "'");
    }
  }
  return config;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

std::string Config::serialize() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  return out;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

const std::string& Config::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing required config key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_double(key, it->second);
}

double Config::require_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const long long value = parse_integer(key, it->second);
  if (value < INT_MIN || value > INT_MAX) {
    throw ConfigError("key '" + key + "': value out of int range");
  }
  return static_cast<int>(value);
}

std::uint64_t Config::get_uint64(const std::string& key, std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_unsigned(key, it->second);
}

bool Config::get_on_off(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "': expected on/off, got '" + v + "'");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> values;
  const auto it = entries_.find(key);
  if (it == entries_.end()) return values;
  for (const std::string& part : split_list(it->second)) {
    values.push_back(parse_double(key, part));
  }
  return values;
}

std::vector<std::uint64_t> Config::get_uint64_list(const std::string& key) const {
  std::vector<std::uint64_t> values;
  const auto it = entries_.find(key);
  if (it == entries_.end()) return values;
  for (const std::string& part : split_list(it->second)) {
    values.push_back(parse_unsigned(key, part));
  }
  return values;
}

ObjectiveSpec objective_from_config(const Config& config) {
  ObjectiveSpec spec;
  spec.lambda_i = config.get_double("objective.lambda_i", spec.lambda_i);
  spec.lambda_d = config.get_double("objective.lambda_d", spec.lambda_d);
  spec.alpha = config.get_double("objective.alpha", spec.alpha);
  spec.informativeness = informativeness_from_name(
      config.get_string("objective.informativeness",
                        std::string(informativeness_name(spec.informativeness))));
  spec.detection_lambda =
      config.get_double("objective.detection_lambda", spec.detection_lambda);
  spec.kernel.kind = kernel_kind_from_name(config.get_string(
      "objective.kernel", std::string(kernel_kind_name(spec.kernel.kind))));
  spec.kernel.beta = config.get_double("objective.beta", spec.kernel.beta);
  spec.validate();
  return spec;
}

SelectorConfig selector_from_config(const Config& config) {
  SelectorConfig selector;
  selector.algorithm = algorithm_from_name(config.get_string(
      "selector.algorithm", std::string(algorithm_name(selector.algorithm))));
  selector.k = config.get_int("selector.k", selector.k);
  const bool sieve_family = selector.algorithm == Algorithm::kSieveStreaming ||
                            selector.algorithm == Algorithm::kSieveStreamingPP ||
                            selector.algorithm == Algorithm::kThreeSieves;
  if (sieve_family) {
    if (!config.has("selector.epsilon")) {
      throw ConfigError("selector.epsilon is required for sieve algorithms");
    }
    selector.epsilon = config.require_double("selector.epsilon");
  }
  selector.rejection_budget = config.get_int("selector.t", selector.rejection_budget);
  selector.seed = config.get_uint64("selector.seed", selector.seed);
  selector.validate();
  return selector;
}

WorldSpec world_from_config(const Config& config) {
  WorldSpec world;
  const std::string preset = config.get_string("simulator.preset", "custom");
  if (preset == "paper-scale") {
    world = paper_scale_preset().world;
  } else if (preset != "custom") {
    throw ConfigError("unknown simulator preset '" + preset + "'");
  }
  world.classes = config.get_int("simulator.classes", world.classes);
  world.feature_dim = config.get_int("simulator.feature_dim", world.feature_dim);
  world.centroid_spread =
      config.get_double("simulator.centroid_spread", world.centroid_spread);
  world.cluster_sigma = config.get_double("simulator.cluster_sigma", world.cluster_sigma);
  world.softmax_sharpness =
      config.get_double("simulator.softmax_sharpness", world.softmax_sharpness);
  world.seed = config.get_uint64("simulator.seed", world.seed);
  world.validate();
  return world;
}

PeculiaritySpec peculiarity_from_config(const Config& config) {
  PeculiaritySpec pec;
  const std::string preset = config.get_string("simulator.preset", "custom");
  if (preset == "paper-scale") pec = paper_scale_preset().peculiarity;
  pec.imbalance_factor =
      config.get_int("simulator.imbalance_factor", pec.imbalance_factor);
  pec.imbalanced_fraction =
      config.get_double("simulator.imbalanced_fraction", pec.imbalanced_fraction);
  pec.replication = config.get_int("simulator.replication", pec.replication);
  pec.noise_sigma = config.get_double("simulator.noise_sigma", pec.noise_sigma);
  pec.nonobject_count = config.get_int("simulator.nonobject_count", pec.nonobject_count);
  pec.round_size = config.get_int("simulator.round_size", pec.round_size);
  pec.rounds = config.get_int("simulator.rounds", pec.rounds);
  pec.validate();
  return pec;
}

}  // namespace sievestream
