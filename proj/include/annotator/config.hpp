#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace annotator {

inline const char* tool_version() { return "0.1.0"; }

// "key = value" lines, '#' comments, later keys override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback = {}) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  void set(const std::string& key, const std::string& value);

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Secrets belong in the environment, never in config files. Throws
// ConfigError when a value looks like an API key (sk-... style token, or a
// *key*/*secret*/*token* key whose value is not an env-var NAME).
void reject_embedded_secrets(const KeyValueConfig& config);

// Audit record every subcommand writes next to its outputs: what ran, on
// which inputs (by content hash), and what it produced.
class RunManifest {
 public:
  explicit RunManifest(std::string subcommand);

  void set_config(const std::map<std::string, std::string>& snapshot);
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void write(const std::filesystem::path& path);

 private:
  std::string subcommand_;
  std::string started_at_;
  std::map<std::string, std::string> config_;
  std::vector<std::pair<std::string, std::string>> inputs_;   // path, sha256
  std::vector<std::pair<std::string, std::string>> outputs_;  // path, sha256
};

}  // namespace annotator
