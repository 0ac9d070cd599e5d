#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace annotator {

// One pre-tokenized sentence with per-token BIO tags. `id` is the ordinal
// within its split.
struct Sentence {
  int id = 0;
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

// Decoded entity: token span [start, end) of one category; `surface` is the
// covered tokens joined with single spaces.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string category;
  std::string surface;

  bool operator==(const EntitySpan&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<std::string> label_set;  // categories in first-appearance order
  std::vector<Sentence> train;
  std::vector<Sentence> valid;
  std::vector<Sentence> test;
};

struct SplitStats {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
};

struct DatasetStats {
  // keyed "train"/"valid"/"test"; only splits that are present
  std::map<std::string, SplitStats> splits;
  std::size_t entity_count = 0;
  // mean token count per gold entity, pooled over all present splits;
  // absent when the corpus has no entities
  std::optional<double> avg_entity_length;
};

struct ConllParseOptions {
  // 0-based column holding the tag; column 0 is always the token
  std::size_t tag_column = 1;
  // convert IOB1 input (an I- tag opening a span) to strict BIO before
  // validating
  bool iob1_to_bio = false;
};

// Token-per-line format: whitespace-separated columns, blank line between
// sentences, "-DOCSTART-" lines skipped. Throws ParseError (ragged line,
// with 1-based line number) or ValidationError (broken BIO, with sentence id
// and token position).
std::vector<Sentence> parse_conll(std::string_view text,
                                  const ConllParseOptions& opts = {});

// Strict BIO check for one sentence; throws ValidationError.
void validate_bio(const Sentence& s);

// Decode maximal B-/I- runs. Precondition: s passes validate_bio.
std::vector<EntitySpan> extract_entities(const Sentence& s);

// Inverse of extract_entities over the same token count.
std::vector<std::string> spans_to_tags(std::size_t n_tokens,
                                       const std::vector<EntitySpan>& spans);

DatasetStats corpus_stats(const Corpus& c);

// Categories in order of first appearance across train, valid, test.
std::vector<std::string> collect_label_set(const Corpus& c);

// Export in the ingestion format: "token tag" lines, one blank line between
// sentences, trailing newline after the last sentence.
std::string serialize_conll(const std::vector<Sentence>& sentences);

std::string sentence_text(const Sentence& s);

std::string dataset_stats_to_json(const DatasetStats& stats,
                                  const std::string& corpus_name);

}  // namespace annotator
