#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "annotator/corpus.hpp"

namespace annotator {

enum class PromptMode { baseline, icl, rag };

std::string_view prompt_mode_name(PromptMode mode);
PromptMode prompt_mode_from_name(std::string_view name);

struct RenderedPrompt {
  std::string text;
  PromptMode mode = PromptMode::baseline;
  std::vector<std::string> label_set;
  std::vector<int> context_ids;  // empty for baseline
  int input_sentence_id = -1;
};

// Python-repr string form, matching how context examples print: single
// quotes unless the string contains one (and no double quote), backslash
// escapes for the delimiter, backslash and control characters.
std::string python_repr(std::string_view s);

// One context example line: [<sentence text>, [{'Entity': ..., 'Label': ...},
// ...]]; an entity-free sentence renders as [<text>, []].
std::string serialize_example(const Sentence& s,
                              const std::vector<EntitySpan>& gold);

// ['PER', 'ORG', 'LOC', 'MISC'] in the given order.
std::string render_label_list(const std::vector<std::string>& labels);

// Fills the pinned template for the mode. Context strings must already be
// serialized examples, ordered (rag: ascending retrieval rank, icl: draw
// order). Byte-stable: identical inputs give identical bytes.
RenderedPrompt render_prompt(PromptMode mode,
                             const std::vector<std::string>& labels,
                             const std::vector<std::string>& context,
                             const std::string& input_text,
                             int input_sentence_id = -1,
                             std::vector<int> context_ids = {});

// The raw templates with {labels} / {context_examples} / {input_text}
// placeholders; copies are pinned under templates/v1.
std::string_view baseline_prompt_template();
std::string_view context_prompt_template();

}  // namespace annotator
