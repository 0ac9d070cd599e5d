#include "annotator/annotate.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <set>
#include <thread>

#include "annotator/errors.hpp"
#include "annotator/util.hpp"

namespace annotator {

using nlohmann::json;

std::string_view unmatched_reason_name(UnmatchedReason reason) {
  switch (reason) {
    case UnmatchedReason::surface_not_found: return "surface-not-found";
    case UnmatchedReason::label_not_in_set: return "label-not-in-set";
    case UnmatchedReason::overlap_conflict: return "overlap-conflict";
  }
  return "surface-not-found";
}

AlignmentOutcome align_entities(const std::vector<std::string>& tokens,
                                const std::vector<PredictedEntity>& predictions,
                                const std::vector<std::string>& labels) {
  AlignmentOutcome outcome;
  if (tokens.empty()) return outcome;
  const std::set<std::string> label_set(labels.begin(), labels.end());
  std::vector<bool> claimed(tokens.size(), false);

  for (const auto& pred : predictions) {
    if (!label_set.count(pred.category)) {
      outcome.unmatched.emplace_back(pred, UnmatchedReason::label_not_in_set);
      continue;
    }
    const auto pattern = split_whitespace(pred.surface);
    if (pattern.empty() || pattern.size() > tokens.size()) {
      outcome.unmatched.emplace_back(pred, UnmatchedReason::surface_not_found);
      continue;
    }

    bool occurs = false;
    std::size_t claim_at = tokens.size();  // sentinel
    for (std::size_t start = 0; start + pattern.size() <= tokens.size();
         ++start) {
      bool equal = true;
      for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (tokens[start + i] != pattern[i]) {
          equal = false;
          break;
        }
      }
      if (!equal) continue;
      occurs = true;
      bool free = true;
      for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (claimed[start + i]) {
          free = false;
          break;
        }
      }
      if (free) {
        claim_at = start;
        break;
      }
    }

    if (claim_at == tokens.size()) {
      outcome.unmatched.emplace_back(
          pred, occurs ? UnmatchedReason::overlap_conflict
                       : UnmatchedReason::surface_not_found);
      continue;
    }
    for (std::size_t i = 0; i < pattern.size(); ++i) claimed[claim_at + i] = true;
    EntitySpan span;
    span.start = claim_at;
    span.end = claim_at + pattern.size();
    span.category = pred.category;
    span.surface = join(pattern, " ");
    outcome.matched.emplace_back(pred, std::move(span));
  }
  return outcome;
}

std::string gold_entity_json(const Sentence& s) {
  json arr = json::array();
  for (const auto& span : extract_entities(s)) {
    arr.push_back({{"Entity", span.surface}, {"Label", span.category}});
  }
  return arr.dump();
}

AnnotationPipeline::AnnotationPipeline(const Corpus& corpus,
                                       const SplitResult& split,
                                       AnnotateRunConfig config,
                                       CompletionProvider& provider,
                                       EmbeddingProvider* embedder,
                                       EmbeddingCache* cache)
    : corpus_(corpus),
      split_(split),
      config_(std::move(config)),
      provider_(provider),
      embedder_(embedder),
      cache_(cache) {
  labels_ = config_.labels.empty() ? collect_label_set(corpus_) : config_.labels;
  if (labels_.empty())
    throw ConfigError("corpus has no entity categories; nothing to annotate with");

  for (const auto& s : corpus_.train) by_id_[s.id] = &s;
  for (int id : split_.sample_space)
    if (!by_id_.count(id))
      throw ConfigError("split references unknown train sentence id " +
                        std::to_string(id));

  if (config_.mode != PromptMode::baseline) {
    if (config_.context_size < 1)
      throw ConfigError("context size m must be >= 1 for icl/rag");
    if (config_.context_size > split_.sample_space.size())
      throw ConfigError(
          "context size m=" + std::to_string(config_.context_size) +
          " exceeds sample-space size x=" +
          std::to_string(split_.sample_space.size()));
  }

  if (config_.mode == PromptMode::icl && !config_.icl_resample_per_target) {
    icl_context_ = sample_random_context(split_, config_.context_size,
                                         config_.params.seed);
  }

  if (config_.mode == PromptMode::rag) {
    if (!embedder_) throw ConfigError("rag mode needs an embedding provider");
    std::vector<std::string> texts;
    texts.reserve(split_.sample_space.size());
    for (int id : split_.sample_space)
      texts.push_back(sentence_text(*by_id_.at(id)));
    auto vectors =
        embed_batch(*embedder_, cache_, texts, config_.embed_batch_size);
    std::vector<std::pair<int, EmbeddingVector>> items;
    items.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i)
      items.emplace_back(split_.sample_space[i], std::move(vectors[i]));
    index_ = VectorIndex::build(items);
  }
}

const std::string& AnnotationPipeline::serialized_example(int sentence_id) {
  std::lock_guard lock(example_mutex_);
  auto it = example_cache_.find(sentence_id);
  if (it == example_cache_.end()) {
    const Sentence& s = *by_id_.at(sentence_id);
    it = example_cache_
             .emplace(sentence_id, serialize_example(s, extract_entities(s)))
             .first;
  }
  return it->second;
}

std::vector<int> AnnotationPipeline::select_context_ids(const Sentence& target) {
  switch (config_.mode) {
    case PromptMode::baseline:
      return {};
    case PromptMode::icl: {
      if (icl_context_) return icl_context_->example_ids;
      // per-target resampling derives a stream from (run seed, target id)
      const std::uint64_t seed =
          config_.params.seed ^ fnv1a64(std::to_string(target.id));
      return sample_random_context(split_, config_.context_size, seed)
          .example_ids;
    }
    case PromptMode::rag: {
      const auto query =
          embed_batch(*embedder_, cache_, {sentence_text(target)},
                      config_.embed_batch_size)
              .front();
      std::vector<int> ids;
      for (const auto& hit : index_->query_top_k(query, config_.context_size))
        ids.push_back(hit.sentence_id);
      return ids;
    }
  }
  return {};
}

RenderedPrompt AnnotationPipeline::build_prompt(const Sentence& target) {
  auto context_ids = select_context_ids(target);
  std::vector<std::string> context;
  context.reserve(context_ids.size());
  for (int id : context_ids) context.push_back(serialized_example(id));
  return render_prompt(config_.mode, labels_, context, sentence_text(target),
                       target.id, std::move(context_ids));
}

namespace {

// parse + align + BIO-encode one completion into the annotated sentence
void fill_from_completion(AnnotatedSentence& out, const Sentence& target,
                          const std::string& completion_text,
                          const std::vector<std::string>& labels) {
  const ParseOutcome parsed = parse_entity_output(completion_text);
  out.provenance.parse_status = parsed.status;
  out.provenance.field_errors = parsed.field_errors;
  out.provenance.predictions = static_cast<int>(parsed.entities.size());
  if (parsed.status == ParseStatus::failure) {
    out.tags.assign(target.tokens.size(), "O");
    return;
  }
  const AlignmentOutcome aligned =
      align_entities(target.tokens, parsed.entities, labels);
  out.provenance.matched = static_cast<int>(aligned.matched.size());
  for (const auto& [pred, reason] : aligned.unmatched) {
    (void)pred;
    switch (reason) {
      case UnmatchedReason::surface_not_found:
        ++out.provenance.unmatched_surface;
        break;
      case UnmatchedReason::label_not_in_set:
        ++out.provenance.unmatched_label;
        break;
      case UnmatchedReason::overlap_conflict:
        ++out.provenance.unmatched_overlap;
        break;
    }
  }
  std::vector<EntitySpan> spans;
  spans.reserve(aligned.matched.size());
  for (const auto& [pred, span] : aligned.matched) {
    (void)pred;
    spans.push_back(span);
  }
  out.tags = spans_to_tags(target.tokens.size(), spans);
}

struct SentenceWork {
  AnnotatedSentence annotated;
  RenderedPrompt prompt;
  RawCompletion completion;
  bool completed = false;  // provider produced a response
};

}  // namespace

AnnotatedSentence AnnotationPipeline::annotate_sentence(const Sentence& target) {
  const RenderedPrompt prompt = build_prompt(target);

  AnnotatedSentence out;
  out.sentence_id = target.id;
  out.provenance.mode = config_.mode;
  out.provenance.context_ids = prompt.context_ids;

  RawCompletion completion;
  try {
    completion = provider_.complete(prompt, config_.params);
  } catch (const ProviderError&) {
    out.provenance.provider_failed = true;
    out.tags.assign(target.tokens.size(), "O");
    return out;
  }
  fill_from_completion(out, target, completion.text, labels_);
  return out;
}

std::string RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["provider"] = provider;
  j["mode"] = mode;
  j["context_size"] = context_size;
  j["fraction"] = fraction;
  j["seed"] = seed;
  j["targets"] = targets;
  j["annotated"] = annotated;
  j["parse"] = {{"ok_strict", parse_ok_strict},
                {"ok_wrapped", parse_ok_wrapped},
                {"ok_quote_normalized", parse_ok_quote_normalized},
                {"ok_embedded", parse_ok_embedded},
                {"failures", parse_failures}};
  j["provider_errors"] = provider_errors;
  j["alignment"] = {{"predictions", predictions},
                    {"matched", matched},
                    {"unmatched_surface", unmatched_surface},
                    {"unmatched_label", unmatched_label},
                    {"unmatched_overlap", unmatched_overlap},
                    {"field_errors", field_errors}};
  return j.dump(2) + "\n";
}

AnnotationRun annotate_corpus(const Corpus& corpus, const SplitResult& split,
                              const AnnotateRunConfig& config,
                              CompletionProvider& provider,
                              EmbeddingProvider* embedder,
                              EmbeddingCache* cache,
                              const RunOutputPaths& outputs) {
  if (!provider.preflight())
    throw ProviderError("provider " + provider.name() +
                            " unreachable; aborting before any request",
                        0);

  AnnotationPipeline pipeline(corpus, split, config, provider, embedder, cache);

  std::map<int, const Sentence*> by_id;
  for (const auto& s : corpus.train) by_id[s.id] = &s;
  std::vector<const Sentence*> targets;
  targets.reserve(split.targets.size());
  for (int id : split.targets) {
    auto it = by_id.find(id);
    if (it == by_id.end())
      throw ConfigError("split references unknown train sentence id " +
                        std::to_string(id));
    targets.push_back(it->second);
  }

  std::vector<SentenceWork> work(targets.size());

  auto process = [&](std::size_t i) {
    const Sentence& target = *targets[i];
    SentenceWork& w = work[i];
    w.prompt = pipeline.build_prompt(target);
    w.annotated.sentence_id = target.id;
    w.annotated.provenance.mode = config.mode;
    w.annotated.provenance.context_ids = w.prompt.context_ids;
    try {
      w.completion = provider.complete(w.prompt, config.params);
      w.completed = true;
    } catch (const ProviderError&) {
      w.annotated.provenance.provider_failed = true;
      w.annotated.tags.assign(target.tokens.size(), "O");
      return;
    }
    fill_from_completion(w.annotated, target, w.completion.text,
                         pipeline.labels());
  };

  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min(config.max_inflight, targets.size()));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < targets.size(); ++i) process(i);
  } else {
    // index is read-only after pipeline construction; workers contend only
    // on the embedding-cache mutex and the cursor. Results commit by index,
    // so output order is target order regardless of completion order.
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = cursor.fetch_add(1);
          if (i >= targets.size()) return;
          try {
            process(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  AnnotationRun run;
  run.report.provider = provider.name();
  run.report.mode = std::string(prompt_mode_name(config.mode));
  run.report.context_size =
      config.mode == PromptMode::baseline ? 0 : config.context_size;
  run.report.fraction = split.fraction;
  run.report.seed = config.params.seed;
  run.report.targets = targets.size();

  run.annotated.reserve(work.size());
  for (auto& w : work) {
    const auto& p = w.annotated.provenance;
    if (p.provider_failed) {
      ++run.report.provider_errors;
    } else {
      switch (p.parse_status) {
        case ParseStatus::ok_strict: ++run.report.parse_ok_strict; break;
        case ParseStatus::ok_wrapped: ++run.report.parse_ok_wrapped; break;
        case ParseStatus::ok_quote_normalized:
          ++run.report.parse_ok_quote_normalized;
          break;
        case ParseStatus::ok_embedded: ++run.report.parse_ok_embedded; break;
        case ParseStatus::failure: ++run.report.parse_failures; break;
      }
    }
    run.report.predictions += static_cast<std::size_t>(p.predictions);
    run.report.matched += static_cast<std::size_t>(p.matched);
    run.report.unmatched_surface += static_cast<std::size_t>(p.unmatched_surface);
    run.report.unmatched_label += static_cast<std::size_t>(p.unmatched_label);
    run.report.unmatched_overlap += static_cast<std::size_t>(p.unmatched_overlap);
    run.report.field_errors += static_cast<std::size_t>(p.field_errors);
    run.annotated.push_back(std::move(w.annotated));
  }
  run.report.annotated = run.annotated.size();

  const double failure_rate =
      targets.empty() ? 0.0
                      : static_cast<double>(run.report.provider_errors) /
                            static_cast<double>(targets.size());
  if (failure_rate > config.failure_threshold) {
    throw ProviderError(
        "provider failure rate " + std::to_string(failure_rate) +
            " exceeds threshold " + std::to_string(config.failure_threshold),
        static_cast<int>(run.report.provider_errors));
  }

  if (!outputs.annotated_conll.empty()) {
    std::vector<Sentence> exported;
    exported.reserve(run.annotated.size());
    for (std::size_t i = 0; i < run.annotated.size(); ++i) {
      Sentence s;
      s.id = static_cast<int>(i);
      s.tokens = targets[i]->tokens;
      s.tags = run.annotated[i].tags;
      exported.push_back(std::move(s));
    }
    write_file_atomic(outputs.annotated_conll, serialize_conll(exported));
  }
  if (!outputs.gold_targets_conll.empty()) {
    std::vector<Sentence> gold;
    gold.reserve(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
      Sentence s = *targets[i];
      s.id = static_cast<int>(i);
      gold.push_back(std::move(s));
    }
    write_file_atomic(outputs.gold_targets_conll, serialize_conll(gold));
  }
  if (!outputs.report_json.empty())
    write_file_atomic(outputs.report_json, run.report.to_json());
  if (!outputs.prompts_jsonl.empty()) {
    std::string log;
    for (const auto& w : work) {
      json line;
      line["target_id"] = w.prompt.input_sentence_id;
      line["mode"] = prompt_mode_name(w.prompt.mode);
      line["context_ids"] = w.prompt.context_ids;
      line["prompt_sha256"] = sha256_hex(w.prompt.text);
      log += line.dump();
      log += '\n';
    }
    write_file_atomic(outputs.prompts_jsonl, log);
  }
  if (!outputs.transcript_jsonl.empty()) {
    TranscriptWriter transcript(outputs.transcript_jsonl);
    for (const auto& w : work) {
      if (!w.completed) continue;
      transcript.record(w.prompt.input_sentence_id, w.prompt, config.params,
                        w.completion);
    }
    transcript.flush();
  }
  return run;
}

std::unique_ptr<CompletionProvider> make_completion_provider(
    const std::string& spec, const Corpus& corpus,
    const ChatEndpointSpec& endpoint) {
  if (spec == "mock:echo-gold") {
    std::map<int, std::string> responses;
    for (const auto& s : corpus.train) responses[s.id] = gold_entity_json(s);
    return MockProvider::echo_gold(std::move(responses));
  }
  if (spec == "mock:empty") return MockProvider::fixed("[]", "empty");
  if (spec == "mock:malformed")
    return MockProvider::fixed("not json {", "malformed");
  if (spec.rfind("replay:", 0) == 0)
    return std::make_unique<ReplayProvider>(spec.substr(7));
  if (spec == "http") {
    if (endpoint.endpoint.empty())
      throw ConfigError("http provider needs an endpoint");
    return std::make_unique<HttpChatProvider>(endpoint);
  }
  throw ConfigError("unknown provider '" + spec +
                    "' (expected mock:echo-gold|mock:empty|mock:malformed|"
                    "replay:<path>|http)");
}

}  // namespace annotator
