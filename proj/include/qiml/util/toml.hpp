#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qiml {

// Minimal TOML subset: [section] headers, key = value lines, # comments.
// Values: integers, floats, booleans, "strings", and flat arrays of those.
// Keys are stored flattened as "section.key". Good enough for run configs;
// anything fancier (nested tables, dates, multi-line strings) is rejected.
struct TomlValue {
  enum class Kind { Int, Float, Bool, String, Array };
  Kind kind = Kind::Int;
  std::int64_t i = 0;
  double f = 0.0;
  bool b = false;
  std::string s;
  std::vector<TomlValue> array;
};

class TomlTable {
 public:
  bool contains(const std::string& key) const { return values_.count(key) != 0; }

  // typed getters; throw std::runtime_error on missing key or kind mismatch
  std::int64_t get_int(const std::string& key) const;
  double get_float(const std::string& key) const;  // accepts integer values too
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<double> get_float_array(const std::string& key) const;

  // defaulted variants
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_float(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_float_array(const std::string& key,
                                      const std::vector<double>& fallback) const;

  void set(const std::string& key, TomlValue value);
  const std::map<std::string, TomlValue>& entries() const { return values_; }

  // Deterministic serialisation (sorted keys, shortest round-trip floats),
  // used to archive the resolved configuration of a run.
  std::string serialise() const;

 private:
  const TomlValue& at(const std::string& key) const;
  std::map<std::string, TomlValue> values_;
};

TomlTable parse_toml(const std::string& text);
TomlTable parse_toml_file(const std::string& path);

}  // namespace qiml
