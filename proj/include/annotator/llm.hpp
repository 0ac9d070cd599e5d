#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "annotator/http.hpp"
#include "annotator/promptkit.hpp"

namespace annotator {

enum class ResponseFormat { structured_entities, free_text };

struct CompletionParams {
  double temperature = 0.0;
  std::uint64_t seed = 42;
  std::string model_id;
  int max_output_tokens = 1024;
  ResponseFormat response_format = ResponseFormat::structured_entities;
};

struct RawCompletion {
  std::string text;
  std::string model_id;
  double latency_ms = 0.0;
  std::string request_fingerprint;
};

struct PredictedEntity {
  std::string surface;   // verbatim model output, not yet validated
  std::string category;  // may lie outside the corpus label set

  bool operator==(const PredictedEntity&) const = default;
};

// How far down the lenient ladder the parser had to go.
enum class ParseStatus {
  ok_strict,           // valid JSON array of entity objects
  ok_wrapped,          // array found under an "entities" key
  ok_quote_normalized, // single-quote pseudo-JSON accepted after rewriting
  ok_embedded,         // array found inside surrounding prose
  failure,
};

std::string_view parse_status_name(ParseStatus status);

struct ParseOutcome {
  ParseStatus status = ParseStatus::failure;
  std::vector<PredictedEntity> entities;  // order and duplicates preserved
  int field_errors = 0;  // objects skipped for a missing/empty Entity or Label
};

// Total: never throws on model output; anything unusable becomes
// ParseStatus::failure.
ParseOutcome parse_entity_output(const std::string& raw);

// sha256 over prompt bytes and canonical params; identical inputs always map
// to identical fingerprints.
std::string request_fingerprint(const std::string& prompt_text,
                                const CompletionParams& params);

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual RawCompletion complete(const RenderedPrompt& prompt,
                                 const CompletionParams& params) = 0;
  virtual std::string name() const = 0;
  // Cheap reachability check so runs can fail before any spend.
  virtual bool preflight() { return true; }
};

// Deterministic offline providers. echo_gold answers each sentence id with a
// canned entity list (annotate builds it from gold tags); fixed always
// returns the same text ("[]" for empty, broken text for malformed).
class MockProvider : public CompletionProvider {
 public:
  static std::unique_ptr<MockProvider> echo_gold(
      std::map<int, std::string> responses_by_id);
  static std::unique_ptr<MockProvider> fixed(std::string text,
                                             std::string label);

  RawCompletion complete(const RenderedPrompt& prompt,
                         const CompletionParams& params) override;
  std::string name() const override { return "mock:" + label_; }

 private:
  MockProvider() = default;
  std::map<int, std::string> responses_by_id_;
  std::string fixed_text_;
  bool use_fixed_ = false;
  std::string label_;
};

struct ChatEndpointSpec {
  std::string endpoint;  // e.g. http://host:port
  std::string path = "/v1/chat/completions";
  std::string api_key_env = "ANNOTATOR_API_KEY";
  bool structured_output = true;  // attach the entity-list schema
};

// OpenAI-compatible chat-completions client with the shared retry policy.
class HttpChatProvider : public CompletionProvider {
 public:
  explicit HttpChatProvider(ChatEndpointSpec spec, RetryPolicy policy = {});
  RawCompletion complete(const RenderedPrompt& prompt,
                         const CompletionParams& params) override;
  std::string name() const override { return "http:" + spec_.endpoint; }
  bool preflight() override;

  // Request body builder, exposed for tests.
  static std::string build_request_body(const RenderedPrompt& prompt,
                                        const CompletionParams& params,
                                        bool structured_output);

 private:
  ChatEndpointSpec spec_;
  RetryPolicy policy_;
  std::string api_key_;
};

// One JSONL line per completed request; the file doubles as the replay
// source for bit-exact offline re-runs.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(std::filesystem::path path);
  void record(int target_id, const RenderedPrompt& prompt,
              const CompletionParams& params, const RawCompletion& completion);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::string buffer_;

 public:
  // Buffered content is written atomically on flush.
  void flush();
};

// Answers every request from a recorded transcript, keyed by fingerprint.
class ReplayProvider : public CompletionProvider {
 public:
  explicit ReplayProvider(const std::filesystem::path& transcript_path);
  RawCompletion complete(const RenderedPrompt& prompt,
                         const CompletionParams& params) override;
  std::string name() const override { return "replay"; }
  std::size_t size() const { return responses_.size(); }

 private:
  std::map<std::string, RawCompletion> responses_;
};

}  // namespace annotator
