#ifndef WAVETRAIN_CONFIG_HPP
#define WAVETRAIN_CONFIG_HPP

// Flat key-value documents:
//
//   # comment
//   system = B
//   alpha  = -1.2
//   v      = 1.9
//
// One `key = value` per line; keys are case-sensitive, duplicates are an
// error. Model keys are `system` plus the parameter names of param_name();
// any other key is left for the caller (run settings such as `v`, `span`).

#include "wavetrain/model.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wavetrain {

class ConfigDocument {
 public:
  static ConfigDocument parse(const std::string& text);
  static ConfigDocument load(const std::string& path);

  std::optional<std::string> get(const std::string& key) const;
  /// Parses the value as a double; ConfigError when malformed.
  std::optional<double> get_double(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  bool contains(const std::string& key) const { return get(key).has_value(); }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string to_text() const;
  void save(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// True for `system` and the twelve parameter keys.
bool is_model_key(const std::string& key);

/// Builds a preset from `system` and overrides it with every parameter key
/// present. An `eps_tilde` entry is accepted only if it equals the value the
/// preset derives. Non-model keys are ignored.
ModelSpec model_from_config(const ConfigDocument& doc);

/// Emits `system` and every present parameter in round-trip precision.
ConfigDocument model_to_config(const ModelSpec& spec);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

}  // namespace wavetrain

#endif  // WAVETRAIN_CONFIG_HPP
