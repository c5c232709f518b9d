#pragma once

// Strict sectioned key-value configuration:
//
//   # comment
//   [section]
//   key = value
//
// Every key present in the file must be read by the command that consumes
// it; leftovers are reported by reject_unknown().

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "skcat/core/types.hpp"

namespace skcat {

class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

namespace detail {
inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace detail

class Config {
 public:
  Config() = default;

  static Config parse(std::istream& in, const std::string& origin = "<config>") {
    Config c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const std::string where = origin + ":" + std::to_string(lineno);
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(where + ": malformed section header");
        section = detail::trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError(where + ": empty section name");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
      if (section.empty()) throw ConfigError(where + ": key outside of any section");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError(where + ": empty key");
      const std::string full = section + "." + key;
      if (c.values_.count(full)) throw ConfigError(where + ": duplicate key " + full);
      c.values_[full] = value;
      c.order_.push_back(full);
    }
    return c;
  }

  static Config parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse(in, path);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  double get_double(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return to_double(key, it->second);
  }

  long get_int(const std::string& key, long fallback) {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(it->second, &pos);
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected an integer, got '" + it->second + "'");
    }
    if (pos != it->second.size()) throw ConfigError(key + ": expected an integer, got '" + it->second + "'");
    return v;
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  bool get_bool(const std::string& key, bool fallback) {
    const std::string v = get_string(key, fallback ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
  }

  // Comma-separated list of numbers.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) {
    used_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, detail::trim(item)));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
  }

  void reject_unknown() const {
    for (const auto& k : order_)
      if (!used_.count(k)) throw ConfigError("unknown configuration key " + k);
  }

  // Every key/value pair in file order, for provenance headers.
  std::vector<std::pair<std::string, std::string>> entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : order_) out.emplace_back(k, values_.at(k));
    return out;
  }

 private:
  static double to_double(const std::string& key, const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a number, got '" + s + "'");
    }
    if (pos != s.size()) throw ConfigError(key + ": expected a number, got '" + s + "'");
    return v;
  }

  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
  std::set<std::string> used_;
};

// Isotope presets.
struct IsotopePreset {
  std::string name;
  int two_i = 7;
  double gamma_n = 5.55e6;    // Hz / T
  double hyperfine = 101.52e6;  // Hz
};

inline IsotopePreset isotope_preset(const std::string& name) {
  if (name == "Sb-123") return {"Sb-123", 7, 5.55e6, 101.52e6};
  if (name == "Bi-209") return {"Bi-209", 9, 6.96e6, 1.475e9};
  throw ConfigError("unknown isotope preset '" + name + "' (expected Sb-123 or Bi-209)");
}

}  // namespace skcat
