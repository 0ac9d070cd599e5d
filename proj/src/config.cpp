#include "annotator/config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>

#include "annotator/errors.hpp"
#include "annotator/rng.hpp"
#include "annotator/util.hpp"

namespace annotator {

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string line = (eol == std::string::npos)
                           ? text.substr(pos)
                           : text.substr(pos, eol - pos);
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = trim(line);
    if (!trimmed.empty()) {
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ParseError("config line " + std::to_string(line_no) +
                         ": expected 'key = value'");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty())
        throw ParseError("config line " + std::to_string(line_no) +
                         ": empty key");
      config.values_[key] = value;
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  auto config = parse(read_file(path));
  reject_embedded_secrets(config);
  return config;
}

std::string KeyValueConfig::get(const std::string& key,
                                const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long long KeyValueConfig::get_int(const std::string& key,
                                  long long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer: '" +
                      it->second + "'");
  }
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: '" +
                      it->second + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: '" + v + "'");
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

namespace {

bool looks_like_env_var_name(const std::string& v) {
  if (v.empty()) return false;
  if (!std::isupper(static_cast<unsigned char>(v[0])) && v[0] != '_')
    return false;
  return std::all_of(v.begin(), v.end(), [](unsigned char c) {
    return std::isupper(c) || std::isdigit(c) || c == '_';
  });
}

bool looks_like_token(const std::string& v) {
  if (v.rfind("sk-", 0) == 0 && v.size() >= 20) return true;
  if (v.rfind("Bearer ", 0) == 0) return true;
  // long single-word base64/hex-ish blobs
  if (v.size() >= 32 &&
      std::all_of(v.begin(), v.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-' || c == '+' ||
               c == '/' || c == '=';
      }) &&
      std::any_of(v.begin(), v.end(),
                  [](unsigned char c) { return std::isdigit(c); }) &&
      std::any_of(v.begin(), v.end(),
                  [](unsigned char c) { return std::islower(c); }))
    return true;
  return false;
}

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

void reject_embedded_secrets(const KeyValueConfig& config) {
  for (const auto& [key, value] : config.values()) {
    if (value.empty()) continue;
    const std::string lk = lowercase(key);
    const bool secret_key = lk.find("key") != std::string::npos ||
                            lk.find("secret") != std::string::npos ||
                            lk.find("token") != std::string::npos;
    if (secret_key && !looks_like_env_var_name(value)) {
      throw ConfigError(
          "config key '" + key +
          "' looks like an embedded credential; put the secret in an "
          "environment variable and reference its NAME instead");
    }
    if (looks_like_token(value)) {
      throw ConfigError("config value for '" + key +
                        "' looks like an API token; secrets must come from "
                        "the environment");
    }
  }
}

RunManifest::RunManifest(std::string subcommand)
    : subcommand_(std::move(subcommand)), started_at_(utc_timestamp_now()) {}

void RunManifest::set_config(const std::map<std::string, std::string>& snapshot) {
  config_ = snapshot;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs_.emplace_back(path.string(), sha256_hex(read_file(path)));
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_.emplace_back(path.string(), sha256_hex(read_file(path)));
}

void RunManifest::write(const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["tool"] = "annotator";
  j["version"] = tool_version();
  j["subcommand"] = subcommand_;
  j["rng_algorithm"] = rng_algorithm_id();
  j["started_at"] = started_at_;
  j["finished_at"] = utc_timestamp_now();
  j["config"] = config_;
  auto files = [](const std::vector<std::pair<std::string, std::string>>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [p, h] : v) arr.push_back({{"path", p}, {"sha256", h}});
    return arr;
  };
  j["inputs"] = files(inputs_);
  j["outputs"] = files(outputs_);
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace annotator
