#include "annotator/llm.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <sstream>

#include "annotator/errors.hpp"
#include "annotator/util.hpp"

namespace annotator {

using nlohmann::json;

namespace {

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Pulls {Entity, Label} objects out of a JSON array; keys matched
// case-insensitively, malformed objects counted, order kept.
bool extract_entities_from_array(const json& arr, ParseOutcome& out) {
  if (!arr.is_array()) return false;
  for (const auto& item : arr) {
    if (!item.is_object()) {
      ++out.field_errors;
      continue;
    }
    std::string surface, category;
    bool have_surface = false, have_category = false;
    for (const auto& [key, value] : item.items()) {
      const std::string k = lowercase(key);
      if (k == "entity" && value.is_string()) {
        surface = value.get<std::string>();
        have_surface = true;
      } else if (k == "label" && value.is_string()) {
        category = value.get<std::string>();
        have_category = true;
      }
    }
    if (!have_surface || !have_category || surface.empty()) {
      ++out.field_errors;
      continue;
    }
    out.entities.push_back(PredictedEntity{std::move(surface), std::move(category)});
  }
  return true;
}

// Finds the array either directly or wrapped under an "entities" key.
// Returns the status the extraction deserves, or failure.
ParseStatus try_extract(const json& value, ParseOutcome& out) {
  if (value.is_array()) {
    ParseOutcome attempt;
    if (extract_entities_from_array(value, attempt)) {
      out = std::move(attempt);
      return ParseStatus::ok_strict;
    }
    return ParseStatus::failure;
  }
  if (value.is_object()) {
    for (const auto& [key, inner] : value.items()) {
      if (lowercase(key) == "entities" && inner.is_array()) {
        ParseOutcome attempt;
        if (extract_entities_from_array(inner, attempt)) {
          out = std::move(attempt);
          return ParseStatus::ok_wrapped;
        }
      }
    }
  }
  return ParseStatus::failure;
}

// Rewrites single-quote pseudo-JSON (the context-block print format) into
// real JSON: 'x' -> "x", \' -> ', inner " -> \".
std::string normalize_single_quotes(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool in_double = false, in_single = false;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_double) {
      out.push_back(c);
      if (c == '\\' && i + 1 < raw.size()) {
        out.push_back(raw[++i]);
      } else if (c == '"') {
        in_double = false;
      }
      continue;
    }
    if (in_single) {
      if (c == '\\' && i + 1 < raw.size() && raw[i + 1] == '\'') {
        out.push_back('\'');
        ++i;
      } else if (c == '\\' && i + 1 < raw.size()) {
        out.push_back('\\');
        out.push_back(raw[++i]);
      } else if (c == '"') {
        out += "\\\"";
      } else if (c == '\'') {
        out.push_back('"');
        in_single = false;
      } else {
        out.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_double = true;
      out.push_back(c);
    } else if (c == '\'') {
      in_single = true;
      out.push_back('"');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::optional<json> parse_json(const std::string& text) {
  json parsed = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) return std::nullopt;
  return parsed;
}

// Balanced [...] substrings of `raw`, left to right. `quote` selects which
// quote character delimits strings while matching brackets.
std::vector<std::string> bracket_candidates(const std::string& raw, char quote) {
  std::vector<std::string> out;
  for (std::size_t start = 0; start < raw.size(); ++start) {
    if (raw[start] != '[') continue;
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
      const char c = raw[i];
      if (in_string) {
        if (c == '\\') ++i;
        else if (c == quote) in_string = false;
        continue;
      }
      if (c == quote) in_string = true;
      else if (c == '[') ++depth;
      else if (c == ']' && --depth == 0) {
        out.push_back(raw.substr(start, i - start + 1));
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::string_view parse_status_name(ParseStatus status) {
  switch (status) {
    case ParseStatus::ok_strict: return "ok_strict";
    case ParseStatus::ok_wrapped: return "ok_wrapped";
    case ParseStatus::ok_quote_normalized: return "ok_quote_normalized";
    case ParseStatus::ok_embedded: return "ok_embedded";
    case ParseStatus::failure: return "failure";
  }
  return "failure";
}

ParseOutcome parse_entity_output(const std::string& raw) {
  ParseOutcome out;

  // 1) the whole string is JSON (array, or object wrapping one)
  if (auto parsed = parse_json(raw)) {
    const ParseStatus status = try_extract(*parsed, out);
    if (status != ParseStatus::failure) {
      out.status = status;
      return out;
    }
  }

  // 2) single-quote pseudo-JSON
  if (auto parsed = parse_json(normalize_single_quotes(raw))) {
    if (try_extract(*parsed, out) != ParseStatus::failure) {
      out.status = ParseStatus::ok_quote_normalized;
      return out;
    }
  }

  // 3) array embedded in prose: first balanced-bracket candidate that parses
  for (const char quote : {'"', '\''}) {
    for (const auto& candidate : bracket_candidates(raw, quote)) {
      auto parsed = parse_json(candidate);
      if (!parsed) parsed = parse_json(normalize_single_quotes(candidate));
      if (!parsed || !parsed->is_array()) continue;
      ParseOutcome attempt;
      if (extract_entities_from_array(*parsed, attempt)) {
        attempt.status = ParseStatus::ok_embedded;
        return attempt;
      }
    }
  }

  out.status = ParseStatus::failure;
  out.entities.clear();
  return out;
}

std::string request_fingerprint(const std::string& prompt_text,
                                const CompletionParams& params) {
  std::ostringstream canon;
  canon << sha256_hex(prompt_text) << '\n'
        << params.model_id << '\n'
        << params.temperature << '\n'
        << params.seed << '\n'
        << params.max_output_tokens << '\n'
        << (params.response_format == ResponseFormat::structured_entities
                ? "structured-entities"
                : "free-text");
  return sha256_hex(canon.str());
}

std::unique_ptr<MockProvider> MockProvider::echo_gold(
    std::map<int, std::string> responses_by_id) {
  auto p = std::unique_ptr<MockProvider>(new MockProvider());
  p->responses_by_id_ = std::move(responses_by_id);
  p->label_ = "echo-gold";
  return p;
}

std::unique_ptr<MockProvider> MockProvider::fixed(std::string text,
                                                  std::string label) {
  auto p = std::unique_ptr<MockProvider>(new MockProvider());
  p->fixed_text_ = std::move(text);
  p->use_fixed_ = true;
  p->label_ = std::move(label);
  return p;
}

RawCompletion MockProvider::complete(const RenderedPrompt& prompt,
                                     const CompletionParams& params) {
  RawCompletion completion;
  completion.model_id = name();
  completion.latency_ms = 0.0;
  completion.request_fingerprint = request_fingerprint(prompt.text, params);
  if (use_fixed_) {
    completion.text = fixed_text_;
  } else {
    auto it = responses_by_id_.find(prompt.input_sentence_id);
    completion.text = (it != responses_by_id_.end()) ? it->second : "[]";
  }
  return completion;
}

HttpChatProvider::HttpChatProvider(ChatEndpointSpec spec, RetryPolicy policy)
    : spec_(std::move(spec)), policy_(policy) {
  if (spec_.endpoint.empty())
    throw ConfigError("chat provider needs an endpoint");
  if (const char* key = std::getenv(spec_.api_key_env.c_str()))
    api_key_ = key;
}

std::string HttpChatProvider::build_request_body(const RenderedPrompt& prompt,
                                                 const CompletionParams& params,
                                                 bool structured_output) {
  json body;
  body["model"] = params.model_id;
  body["messages"] = json::array(
      {json{{"role", "user"}, {"content", prompt.text}}});
  body["temperature"] = params.temperature;
  body["seed"] = params.seed;
  body["max_tokens"] = params.max_output_tokens;
  if (structured_output &&
      params.response_format == ResponseFormat::structured_entities) {
    body["response_format"] = {
        {"type", "json_schema"},
        {"json_schema",
         {{"name", "entity_list"},
          {"strict", true},
          {"schema",
           {{"type", "object"},
            {"properties",
             {{"entities",
               {{"type", "array"},
                {"items",
                 {{"type", "object"},
                  {"properties",
                   {{"Entity", {{"type", "string"}}},
                    {"Label", {{"type", "string"}}}}},
                  {"required", json::array({"Entity", "Label"})},
                  {"additionalProperties", false}}}}}}},
            {"required", json::array({"entities"})},
            {"additionalProperties", false}}}}}};
  }
  return body.dump();
}

RawCompletion HttpChatProvider::complete(const RenderedPrompt& prompt,
                                         const CompletionParams& params) {
  const auto start = std::chrono::steady_clock::now();
  const std::string body =
      build_request_body(prompt, params, spec_.structured_output);
  const std::string response = http_post_json_with_retries(
      spec_.endpoint, spec_.path, body, api_key_, "chat " + spec_.endpoint,
      policy_);

  json parsed;
  try {
    parsed = json::parse(response);
  } catch (const json::parse_error& e) {
    throw IntegrityError(std::string("chat response is not JSON: ") + e.what());
  }

  RawCompletion completion;
  completion.request_fingerprint = request_fingerprint(prompt.text, params);
  completion.model_id = params.model_id;
  try {
    completion.text =
        parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw IntegrityError("chat response has no choices[0].message.content");
  }
  if (parsed.contains("model") && parsed["model"].is_string())
    completion.model_id = parsed["model"].get<std::string>();
  completion.latency_ms =
      std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - start)
          .count();
  return completion;
}

bool HttpChatProvider::preflight() { return endpoint_reachable(spec_.endpoint); }

TranscriptWriter::TranscriptWriter(std::filesystem::path path)
    : path_(std::move(path)) {}

void TranscriptWriter::record(int target_id, const RenderedPrompt& prompt,
                              const CompletionParams& params,
                              const RawCompletion& completion) {
  json line;
  line["fingerprint"] = completion.request_fingerprint;
  line["target_id"] = target_id;
  line["prompt_sha256"] = sha256_hex(prompt.text);
  line["model_id"] = completion.model_id;
  line["params"] = {
      {"model_id", params.model_id},
      {"temperature", params.temperature},
      {"seed", params.seed},
      {"max_output_tokens", params.max_output_tokens},
      {"response_format",
       params.response_format == ResponseFormat::structured_entities
           ? "structured-entities"
           : "free-text"}};
  line["response"] = completion.text;
  line["latency_ms"] = completion.latency_ms;
  buffer_ += line.dump();
  buffer_ += '\n';
}

void TranscriptWriter::flush() {
  write_file_atomic(path_, buffer_);
}

ReplayProvider::ReplayProvider(const std::filesystem::path& transcript_path) {
  const std::string data = read_file(transcript_path);
  std::istringstream in(data);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json parsed;
    try {
      parsed = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("transcript " + transcript_path.string() + " line " +
                       std::to_string(line_no) + ": " + e.what());
    }
    RawCompletion completion;
    completion.request_fingerprint = parsed.at("fingerprint").get<std::string>();
    completion.text = parsed.at("response").get<std::string>();
    completion.model_id = parsed.value("model_id", std::string("replay"));
    completion.latency_ms = parsed.value("latency_ms", 0.0);
    responses_[completion.request_fingerprint] = std::move(completion);
  }
}

RawCompletion ReplayProvider::complete(const RenderedPrompt& prompt,
                                       const CompletionParams& params) {
  const std::string fingerprint = request_fingerprint(prompt.text, params);
  auto it = responses_.find(fingerprint);
  if (it == responses_.end())
    throw ProviderError("replay transcript has no response for fingerprint " +
                            fingerprint,
                        1);
  return it->second;
}

}  // namespace annotator
