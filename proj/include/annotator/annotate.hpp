#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "annotator/corpus.hpp"
#include "annotator/embeddings.hpp"
#include "annotator/llm.hpp"
#include "annotator/promptkit.hpp"
#include "annotator/splitter.hpp"
#include "annotator/vectorstore.hpp"

namespace annotator {

enum class UnmatchedReason {
  surface_not_found,  // token subsequence never occurs
  label_not_in_set,   // category outside the corpus label set
  overlap_conflict,   // every occurrence overlaps an already-claimed span
};

std::string_view unmatched_reason_name(UnmatchedReason reason);

struct AlignmentOutcome {
  std::vector<std::pair<PredictedEntity, EntitySpan>> matched;
  std::vector<std::pair<PredictedEntity, UnmatchedReason>> unmatched;
};

// Greedy left-to-right alignment: each prediction, in output order, claims
// the first unclaimed exact token-subsequence occurrence of its
// whitespace-split surface (case-sensitive). Failures are data, never
// exceptions.
AlignmentOutcome align_entities(const std::vector<std::string>& tokens,
                                const std::vector<PredictedEntity>& predictions,
                                const std::vector<std::string>& labels);

struct SentenceProvenance {
  PromptMode mode = PromptMode::baseline;
  std::vector<int> context_ids;
  ParseStatus parse_status = ParseStatus::failure;
  bool provider_failed = false;
  int predictions = 0;  // parsed predictions
  int matched = 0;
  int unmatched_surface = 0;
  int unmatched_label = 0;
  int unmatched_overlap = 0;
  int field_errors = 0;
};

// One element of the LLM-labeled training set: strict-BIO tags over the
// original tokens, plus how they were produced.
struct AnnotatedSentence {
  int sentence_id = -1;
  std::vector<std::string> tags;
  SentenceProvenance provenance;
};

struct AnnotateRunConfig {
  PromptMode mode = PromptMode::rag;
  std::size_t context_size = 25;  // m; ignored for baseline
  bool icl_resample_per_target = false;
  double failure_threshold = 0.05;  // provider-error rate that aborts the run
  std::size_t max_inflight = 4;
  CompletionParams params;
  std::vector<std::string> labels;  // empty: derive from the corpus
  std::size_t embed_batch_size = 64;
};

struct RunReport {
  std::string provider;
  std::string mode;
  std::size_t context_size = 0;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::size_t targets = 0;
  std::size_t annotated = 0;
  std::size_t parse_ok_strict = 0;
  std::size_t parse_ok_wrapped = 0;
  std::size_t parse_ok_quote_normalized = 0;
  std::size_t parse_ok_embedded = 0;
  std::size_t parse_failures = 0;
  std::size_t provider_errors = 0;
  std::size_t predictions = 0;
  std::size_t matched = 0;
  std::size_t unmatched_surface = 0;
  std::size_t unmatched_label = 0;
  std::size_t unmatched_overlap = 0;
  std::size_t field_errors = 0;

  std::string to_json() const;
};

struct AnnotationRun {
  std::vector<AnnotatedSentence> annotated;  // |annotated| == |targets|
  RunReport report;
};

// Per-run state shared by every target sentence: the split, the serialized
// sample-space examples, the ICL draw or the RAG index.
class AnnotationPipeline {
 public:
  AnnotationPipeline(const Corpus& corpus, const SplitResult& split,
                     AnnotateRunConfig config, CompletionProvider& provider,
                     EmbeddingProvider* embedder, EmbeddingCache* cache);

  AnnotatedSentence annotate_sentence(const Sentence& target);
  // The prompt a target would be sent (also used for transcript records).
  RenderedPrompt build_prompt(const Sentence& target);

  const AnnotateRunConfig& config() const { return config_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<int> select_context_ids(const Sentence& target);
  const std::string& serialized_example(int sentence_id);

  const Corpus& corpus_;
  const SplitResult& split_;
  AnnotateRunConfig config_;
  CompletionProvider& provider_;
  EmbeddingProvider* embedder_ = nullptr;
  EmbeddingCache* cache_ = nullptr;
  std::vector<std::string> labels_;
  std::mutex example_mutex_;
  std::map<int, std::string> example_cache_;
  std::map<int, const Sentence*> by_id_;
  std::optional<ContextSet> icl_context_;
  std::optional<VectorIndex> index_;
};

struct RunOutputPaths {
  std::filesystem::path annotated_conll;     // T-hat, ingestion format
  std::filesystem::path gold_targets_conll;  // gold tags for the same ids
  std::filesystem::path report_json;
  std::filesystem::path prompts_jsonl;     // {target_id, mode, context_ids, prompt_sha256}
  std::filesystem::path transcript_jsonl;  // replayable request/response log
};

// Full annotation loop over the split's targets. Sentences whose provider
// call fails after retries are annotated all-O and counted; the run throws
// ProviderError only when the failure rate exceeds the configured threshold
// (or the provider is unreachable up front). All outputs are written
// atomically; any empty path is skipped.
AnnotationRun annotate_corpus(const Corpus& corpus, const SplitResult& split,
                              const AnnotateRunConfig& config,
                              CompletionProvider& provider,
                              EmbeddingProvider* embedder,
                              EmbeddingCache* cache,
                              const RunOutputPaths& outputs = {});

// "mock:echo-gold" | "mock:empty" | "mock:malformed" | "replay:<path>" |
// "http" (uses `endpoint`). echo-gold answers from the corpus gold tags.
std::unique_ptr<CompletionProvider> make_completion_provider(
    const std::string& spec, const Corpus& corpus,
    const ChatEndpointSpec& endpoint = {});

// JSON array of {"Entity", "Label"} objects for a sentence's gold spans —
// what a perfect structured-output model would return.
std::string gold_entity_json(const Sentence& s);

}  // namespace annotator
