#include "annotator/corpus.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <set>

#include "annotator/errors.hpp"
#include "annotator/util.hpp"

namespace annotator {

namespace {

bool is_blank(std::string_view line) {
  for (char c : line)
    if (c != ' ' && c != '\t' && c != '\r') return false;
  return true;
}

// "O" stays; "B-X"/"I-X" split into prefix char and category.
struct TagParts {
  char prefix;         // 'O', 'B' or 'I'
  std::string_view category;  // empty for 'O'
};

TagParts split_tag(std::string_view tag, int sentence_id, std::size_t pos) {
  if (tag == "O") return {'O', {}};
  if (tag.size() >= 3 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-')
    return {tag[0], tag.substr(2)};
  throw ValidationError("sentence " + std::to_string(sentence_id) +
                        ", position " + std::to_string(pos) +
                        ": invalid tag '" + std::string(tag) + "'");
}

void iob1_to_bio(Sentence& s) {
  for (std::size_t i = 0; i < s.tags.size(); ++i) {
    std::string& tag = s.tags[i];
    if (tag.size() < 3 || tag[0] != 'I' || tag[1] != '-') continue;
    const std::string_view cat = std::string_view(tag).substr(2);
    bool continues = false;
    if (i > 0) {
      const std::string& prev = s.tags[i - 1];
      if (prev.size() >= 3 && (prev[0] == 'B' || prev[0] == 'I') &&
          prev[1] == '-' && std::string_view(prev).substr(2) == cat) {
        continues = true;
      }
    }
    if (!continues) tag[0] = 'B';
  }
}

}  // namespace

std::vector<Sentence> parse_conll(std::string_view text,
                                  const ConllParseOptions& opts) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (current.tokens.empty()) return;
    current.id = static_cast<int>(sentences.size());
    if (opts.iob1_to_bio) iob1_to_bio(current);
    validate_bio(current);
    sentences.push_back(std::move(current));
    current = Sentence{};
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = (eol == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (is_blank(line)) {
      flush();
    } else {
      auto fields = split_whitespace(line);
      if (fields[0] == "-DOCSTART-") {
        // document markers carry no sentence content
      } else {
        if (fields.size() <= opts.tag_column) {
          throw ParseError("line " + std::to_string(line_no) +
                           ": expected at least " +
                           std::to_string(opts.tag_column + 1) +
                           " columns, got " + std::to_string(fields.size()));
        }
        current.tokens.push_back(fields[0]);
        current.tags.push_back(fields[opts.tag_column]);
      }
    }

    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  flush();
  return sentences;
}

void validate_bio(const Sentence& s) {
  if (s.tokens.empty())
    throw ValidationError("sentence " + std::to_string(s.id) + ": no tokens");
  if (s.tokens.size() != s.tags.size())
    throw ValidationError("sentence " + std::to_string(s.id) +
                          ": token/tag length mismatch");
  for (std::size_t i = 0; i < s.tags.size(); ++i) {
    const TagParts t = split_tag(s.tags[i], s.id, i);
    if (t.prefix != 'I') continue;
    bool ok = false;
    if (i > 0) {
      const TagParts prev = split_tag(s.tags[i - 1], s.id, i - 1);
      ok = prev.prefix != 'O' && prev.category == t.category;
    }
    if (!ok) {
      throw ValidationError("sentence " + std::to_string(s.id) +
                            ", position " + std::to_string(i) +
                            ": I- without preceding B-/I- of same type");
    }
  }
}

std::vector<EntitySpan> extract_entities(const Sentence& s) {
  std::vector<EntitySpan> spans;
  std::size_t i = 0;
  while (i < s.tags.size()) {
    const TagParts t = split_tag(s.tags[i], s.id, i);
    if (t.prefix != 'B') {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    while (end < s.tags.size()) {
      const TagParts n = split_tag(s.tags[end], s.id, end);
      if (n.prefix != 'I' || n.category != t.category) break;
      ++end;
    }
    EntitySpan span;
    span.start = i;
    span.end = end;
    span.category = std::string(t.category);
    std::vector<std::string> covered(s.tokens.begin() + static_cast<long>(i),
                                     s.tokens.begin() + static_cast<long>(end));
    span.surface = join(covered, " ");
    spans.push_back(std::move(span));
    i = end;
  }
  return spans;
}

std::vector<std::string> spans_to_tags(std::size_t n_tokens,
                                       const std::vector<EntitySpan>& spans) {
  std::vector<std::string> tags(n_tokens, "O");
  for (const auto& span : spans) {
    if (span.start >= span.end || span.end > n_tokens)
      throw ValidationError("span [" + std::to_string(span.start) + ", " +
                            std::to_string(span.end) +
                            ") out of range for length " +
                            std::to_string(n_tokens));
    tags[span.start] = "B-" + span.category;
    for (std::size_t i = span.start + 1; i < span.end; ++i)
      tags[i] = "I-" + span.category;
  }
  return tags;
}

DatasetStats corpus_stats(const Corpus& c) {
  DatasetStats stats;
  std::size_t total_span_tokens = 0;
  std::size_t total_spans = 0;
  auto add_split = [&](const char* key, const std::vector<Sentence>& split) {
    if (split.empty()) return;
    SplitStats ss;
    ss.sentences = split.size();
    for (const auto& s : split) {
      ss.tokens += s.tokens.size();
      for (const auto& span : extract_entities(s)) {
        total_span_tokens += span.end - span.start;
        ++total_spans;
      }
    }
    stats.splits[key] = ss;
  };
  add_split("train", c.train);
  add_split("valid", c.valid);
  add_split("test", c.test);
  stats.entity_count = total_spans;
  if (total_spans > 0) {
    stats.avg_entity_length = static_cast<double>(total_span_tokens) /
                              static_cast<double>(total_spans);
  }
  return stats;
}

std::vector<std::string> collect_label_set(const Corpus& c) {
  std::vector<std::string> labels;
  std::set<std::string> seen;
  auto scan = [&](const std::vector<Sentence>& split) {
    for (const auto& s : split) {
      for (std::size_t i = 0; i < s.tags.size(); ++i) {
        const TagParts t = split_tag(s.tags[i], s.id, i);
        if (t.prefix == 'O') continue;
        std::string cat(t.category);
        if (seen.insert(cat).second) labels.push_back(std::move(cat));
      }
    }
  };
  scan(c.train);
  scan(c.valid);
  scan(c.test);
  return labels;
}

std::string serialize_conll(const std::vector<Sentence>& sentences) {
  std::string out;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    if (si) out += '\n';
    const Sentence& s = sentences[si];
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i];
      out += ' ';
      out += s.tags[i];
      out += '\n';
    }
  }
  return out;
}

std::string sentence_text(const Sentence& s) { return join(s.tokens, " "); }

std::string dataset_stats_to_json(const DatasetStats& stats,
                                  const std::string& corpus_name) {
  nlohmann::ordered_json j;
  j["dataset"] = corpus_name;
  for (const auto& [name, ss] : stats.splits) {
    j["splits"][name]["sentences"] = ss.sentences;
    j["splits"][name]["tokens"] = ss.tokens;
  }
  j["entity_count"] = stats.entity_count;
  if (stats.avg_entity_length) {
    // Table-style 2-decimal figure alongside the raw value
    j["avg_entity_length"] =
        std::round(*stats.avg_entity_length * 100.0) / 100.0;
    j["avg_entity_length_raw"] = *stats.avg_entity_length;
  } else {
    j["avg_entity_length"] = nullptr;
  }
  return j.dump(2) + "\n";
}

}  // namespace annotator
