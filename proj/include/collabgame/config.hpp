#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "collabgame/csv.hpp"
#include "collabgame/error.hpp"

namespace collabgame {

/// `key = value` text configuration. Blank lines and lines starting with '#' are ignored.
/// Every lookup marks its key as used; reject_unused() flags keys nobody asked for (typos).
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<config>") {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::config, origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
      }
      const std::string key = trim(t.substr(0, eq));
      if (key.empty()) throw Error(ErrorKind::config, origin + ":" + std::to_string(lineno) + ": empty key");
      if (cfg.entries_.count(key)) {
        throw Error(ErrorKind::config, origin + ":" + std::to_string(lineno) + ": key '" + key + "' repeated");
      }
      cfg.entries_[key] = {trim(t.substr(eq + 1)), lineno};
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    const auto lines = csv::read_lines(path);
    std::string text;
    for (const auto& l : lines) text += l + '\n';
    return parse(text, path);
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  /// Keys that start with `prefix`, sorted.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) {
      if (k.rfind(prefix, 0) == 0) out.push_back(k);
    }
    return out;
  }

  std::optional<std::string> text(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    used_.insert(key);
    return it->second.value;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return text(key).value_or(fallback);
  }

  double get_double(const std::string& key, double fallback) const {
    auto v = text(key);
    if (!v) return fallback;
    auto d = csv::parse_double(*v);
    if (!d) throw error(key, "expected a number, got '" + *v + "'");
    return *d;
  }

  long long get_int(const std::string& key, long long fallback) const {
    auto v = text(key);
    if (!v) return fallback;
    auto d = csv::parse_int(*v);
    if (!d) throw error(key, "expected an integer, got '" + *v + "'");
    return *d;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto v = text(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw error(key, "expected true or false, got '" + *v + "'");
  }

  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const {
    auto v = text(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& tok : csv::split(*v)) {
      auto d = csv::parse_double(trim(tok));
      if (!d) throw error(key, "expected a comma-separated list of numbers, got '" + *v + "'");
      out.push_back(*d);
    }
    return out;
  }

  std::vector<std::string> get_strings(const std::string& key, std::vector<std::string> fallback) const {
    auto v = text(key);
    if (!v) return fallback;
    std::vector<std::string> out;
    if (v->empty()) return out;
    for (const auto& tok : csv::split(*v)) out.push_back(trim(tok));
    return out;
  }

  /// Error located at the key's line.
  Error error(const std::string& key, const std::string& what) const {
    auto it = entries_.find(key);
    const std::string line = it == entries_.end() ? "" : ":" + std::to_string(it->second.line);
    return Error(ErrorKind::config, origin_ + line + ": " + key + ": " + what);
  }

  void reject_unused() const {
    for (const auto& [k, v] : entries_) {
      if (!used_.count(k)) throw error(k, "unknown key");
    }
  }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  std::string origin_ = "<config>";
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace collabgame
