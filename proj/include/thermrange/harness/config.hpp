#pragma once

// Flat `key = value` experiment configuration. Lines starting with '#' are
// comments. Later assignments (and command-line overrides) replace earlier
// ones. Relative file paths are resolved against the directory of the file
// that set them.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thermrange/error.hpp"
#include "thermrange/text.hpp"

namespace thermrange::harness {

class Config {
 public:
  Config() = default;

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    Config cfg;
    cfg.source_ = path;
    const auto base = path.parent_path();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto body = text::trim(std::string_view(line).substr(0, line.find('#')));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
      const auto key = text::trim(body.substr(0, eq));
      if (key.empty()) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
      cfg.assign(std::string(key), std::string(text::trim(body.substr(eq + 1))), base);
    }
    return cfg;
  }

  /// Applies a `key=value` override; relative paths resolve against `base`.
  void set_override(std::string_view assignment, const std::filesystem::path& base = std::filesystem::current_path()) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    const auto key = text::trim(assignment.substr(0, eq));
    if (key.empty()) throw ConfigError("override '" + std::string(assignment) + "' has an empty key");
    assign(std::string(key), std::string(text::trim(assignment.substr(eq + 1))), base);
  }

  void set(const std::string& key, const std::string& value,
           const std::filesystem::path& base = std::filesystem::current_path()) {
    assign(key, value, base);
  }

  void erase(const std::string& key) { entries_.erase(key); }

  bool has(const std::string& key) const { return entries_.contains(key); }

  const std::filesystem::path& source() const noexcept { return source_; }

  std::string get_string(const std::string& key) const { return entry(key).value; }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  double get_double(const std::string& key) const {
    const auto& v = entry(key).value;
    const auto parsed = text::parse_double(v);
    if (!parsed) throw ConfigError(key + ": '" + v + "' is not a number");
    return *parsed;
  }
  double get_double(const std::string& key, double fallback) const { return has(key) ? get_double(key) : fallback; }

  std::int64_t get_int(const std::string& key) const {
    const auto& v = entry(key).value;
    const auto parsed = text::parse_int(v);
    if (!parsed) throw ConfigError(key + ": '" + v + "' is not an integer");
    return *parsed;
  }
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = entry(key).value;
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || end != v.data() + v.size())
      throw ConfigError(key + ": '" + v + "' is not an unsigned integer");
    return out;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = entry(key).value;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": '" + v + "' is not a boolean");
  }

  std::vector<double> get_doubles(const std::string& key) const {
    const auto& v = entry(key).value;
    std::vector<double> out;
    for (const auto f : text::split(v, ',')) {
      const auto parsed = text::parse_double(text::trim(f));
      if (!parsed) throw ConfigError(key + ": '" + std::string(f) + "' is not a number");
      out.push_back(*parsed);
    }
    return out;
  }

  /// The value of `key` as a path, resolved against the file that set it.
  std::filesystem::path get_path(const std::string& key) const {
    const auto& e = entry(key);
    const std::filesystem::path p(e.value);
    return p.is_absolute() ? p : e.base / p;
  }

  /// Copies every entry whose key starts with one of `prefixes` from `other`.
  void import_prefixed(const Config& other, std::initializer_list<std::string_view> prefixes) {
    for (const auto& [key, e] : other.entries_)
      for (const auto prefix : prefixes)
        if (key.starts_with(prefix)) entries_[key] = e;
  }

  /// All entries in key order, for provenance output.
  std::vector<std::pair<std::string, std::string>> items() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, e] : entries_) out.emplace_back(key, e.value);
    return out;
  }

 private:
  struct Entry {
    std::string value;
    std::filesystem::path base;
  };

  const Entry& entry(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing required config key '" + key + "'");
    return it->second;
  }

  void assign(std::string key, std::string value, const std::filesystem::path& base) {
    entries_[std::move(key)] = Entry{std::move(value), base};
  }

  std::map<std::string, Entry> entries_;
  std::filesystem::path source_;
};

}  // namespace thermrange::harness
