#ifndef SIEVESTREAM_CONFIG_HPP
#define SIEVESTREAM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sievestream/objective.hpp"
#include "sievestream/selectors.hpp"
#include "sievestream/simulator.hpp"

namespace sievestream {

/**
 * Flat key-value configuration with dotted section prefixes
 * (objective.*, selector.*, simulator.*, harness.*, bench.*).
 *
 * Values are kept verbatim as trimmed strings and typed on access, so the
 * canonical serialization (sorted keys, "key = value" lines) round-trips
 * exactly. '#' starts a comment; blank lines are ignored; duplicate keys
 * are an error.
 */
class Config {
 public:
  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  std::string serialize() const;

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  const std::string& get_string(const std::string& key) const;           // required
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  bool get_on_off(const std::string& key, bool fallback) const;  // on/off/true/false
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::uint64_t> get_uint64_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// Builders from the dotted sections. Each applies defaults, then explicit
// keys, then validates.
ObjectiveSpec objective_from_config(const Config& config);
SelectorConfig selector_from_config(const Config& config);
WorldSpec world_from_config(const Config& config);
PeculiaritySpec peculiarity_from_config(const Config& config);

}  // namespace sievestream

#endif  // SIEVESTREAM_CONFIG_HPP
