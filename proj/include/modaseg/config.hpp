#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "modaseg/geometry.hpp"

namespace modaseg {

/// Raised for absent required keys; the message names the key.
struct MissingKeyError : std::runtime_error {
  explicit MissingKeyError(const std::string& key)
      : std::runtime_error("missing required config key: " + key) {}
};

struct BadValueError : std::runtime_error {
  BadValueError(const std::string& key, const std::string& value)
      : std::runtime_error("bad value for config key " + key + ": '" + value + "'") {}
};

/// Nested key-value run configuration. On disk: INI-style sections
/// ([section.subsection]) with key = value lines, # or ; comments. In
/// memory: a flat map of dotted keys. CLI overrides use "dotted.key=value".
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  void set(const std::string& dotted_key, const std::string& value);
  void apply_override(const std::string& assignment);  // "a.b=c"
  bool has(const std::string& dotted_key) const;

  std::string get_string(const std::string& key) const;  // throws MissingKeyError
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::pair<double, double> get_pair(const std::string& key,
                                     std::pair<double, double> fallback) const;
  Shape3 get_shape(const std::string& key, Shape3 fallback) const;
  Vec3 get_vec3(const std::string& key, Vec3 fallback) const;

  /// Sorted "key = value" lines; the canonical form hashed into run records
  /// and checkpoints.
  std::string canonical() const;

  /// Subset of keys under "prefix." with the prefix stripped.
  Config section(const std::string& prefix) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace modaseg
