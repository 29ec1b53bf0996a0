#include "wavetrain/config.hpp"

#include "wavetrain/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wavetrain {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("value of '" + key + "' is not a number: '" + text + "'");
  return value;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw InvalidArgument("format_double failed");
  return std::string(buf, ptr);
}

ConfigDocument ConfigDocument::parse(const std::string& text) {
  ConfigDocument doc;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (doc.contains(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    doc.entries_.emplace_back(std::move(key), std::move(value));
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> ConfigDocument::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::optional<double> ConfigDocument::get_double(const std::string& key) const {
  auto text = get(key);
  if (!text) return std::nullopt;
  return parse_double(key, *text);
}

void ConfigDocument::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

std::string ConfigDocument::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

void ConfigDocument::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << to_text();
}

bool is_model_key(const std::string& key) {
  return key == "system" || param_from_name(key).has_value();
}

ModelSpec model_from_config(const ConfigDocument& doc) {
  const auto system = doc.get("system");
  if (!system) throw ConfigError("config document has no 'system' key");
  const SystemId id = parse_system_id(*system);

  std::map<Param, double> overrides;
  std::optional<double> eps_tilde;
  for (const auto& [key, text] : doc.entries()) {
    const auto p = param_from_name(key);
    if (!p) continue;
    const double value = parse_double(key, text);
    if (*p == Param::eps_tilde)
      eps_tilde = value;
    else
      overrides[*p] = value;
  }
  ModelSpec spec = make_preset(id, overrides);
  if (eps_tilde && *eps_tilde != spec.eps_tilde())
    throw ConfigError("eps_tilde = " + format_double(*eps_tilde) + " contradicts System " +
                      std::string(1, system_letter(id)) + " (which fixes it to " +
                      format_double(spec.eps_tilde()) + ")");
  return spec;
}

ConfigDocument model_to_config(const ModelSpec& spec) {
  if (spec.system() == SystemId::custom)
    throw ConfigError("custom nonlinearities cannot be written to a config document");
  ConfigDocument doc;
  doc.set("system", std::string(1, system_letter(spec.system())));
  for (Param p : kAllParams)
    if (auto v = spec.params().find(p)) doc.set(std::string(param_name(p)), format_double(*v));
  return doc;
}

}  // namespace wavetrain
