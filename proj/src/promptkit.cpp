#include "annotator/promptkit.hpp"

#include "annotator/errors.hpp"
#include "annotator/util.hpp"

namespace annotator {

namespace {

constexpr std::string_view kSharedHeader =
    "Task Description\n"
    "\n"
    "You are an advanced Named-Entity Recognition (NER) system. Your task is "
    "to analyze the given sentence or passage, identify, extract, and "
    "classify specific named entities according to the following predefined "
    "entity types:\n"
    "\n"
    "{labels}\n"
    "\n"
    "For each sentence:\n"
    "- Label each word in the text with the appropriate entity type if it "
    "matches the specified categories.\n"
    "- Extract multiple entities of the same class if they exist.\n"
    "\n"
    "The output should be in valid JSON format, with each word and its "
    "corresponding label as shown below.\n"
    "\n"
    "Follow the structure strictly and do not add any other explanation. In "
    "entities, label the word exactly as in the text. All the text is "
    "case-sensitive.\n"
    "\n";

constexpr std::string_view kBaselineTail =
    "Input\n"
    "\n"
    "{input_text}";

constexpr std::string_view kContextTail =
    "Examples\n"
    "\n"
    "{context_examples}\n"
    "\n"
    "Input\n"
    "\n"
    "{input_text}";

std::string replace_once(std::string text, std::string_view placeholder,
                         std::string_view value) {
  const auto pos = text.find(placeholder);
  if (pos == std::string::npos)
    throw Error("template is missing placeholder " + std::string(placeholder));
  text.replace(pos, placeholder.size(), value);
  return text;
}

}  // namespace

std::string_view prompt_mode_name(PromptMode mode) {
  switch (mode) {
    case PromptMode::baseline: return "baseline";
    case PromptMode::icl: return "icl";
    case PromptMode::rag: return "rag";
  }
  return "baseline";
}

PromptMode prompt_mode_from_name(std::string_view name) {
  if (name == "baseline") return PromptMode::baseline;
  if (name == "icl") return PromptMode::icl;
  if (name == "rag") return PromptMode::rag;
  throw ConfigError("unknown prompt mode '" + std::string(name) +
                    "' (expected baseline|icl|rag)");
}

std::string python_repr(std::string_view s) {
  const bool has_single = s.find('\'') != std::string_view::npos;
  const bool has_double = s.find('"') != std::string_view::npos;
  const char quote = (has_single && !has_double) ? '"' : '\'';

  std::string out;
  out.reserve(s.size() + 2);
  out.push_back(quote);
  for (unsigned char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c == static_cast<unsigned char>(quote)) {
          out.push_back('\\');
          out.push_back(static_cast<char>(c));
        } else if (c < 0x20 || c == 0x7F) {
          static const char* hex = "0123456789abcdef";
          out += "\\x";
          out.push_back(hex[c >> 4]);
          out.push_back(hex[c & 0xF]);
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back(quote);
  return out;
}

std::string serialize_example(const Sentence& s,
                              const std::vector<EntitySpan>& gold) {
  std::string out = "[";
  out += python_repr(sentence_text(s));
  out += ", [";
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (i) out += ", ";
    out += "{'Entity': ";
    out += python_repr(gold[i].surface);
    out += ", 'Label': ";
    out += python_repr(gold[i].category);
    out += "}";
  }
  out += "]]";
  return out;
}

std::string render_label_list(const std::vector<std::string>& labels) {
  std::string out = "[";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ", ";
    out += python_repr(labels[i]);
  }
  out += "]";
  return out;
}

RenderedPrompt render_prompt(PromptMode mode,
                             const std::vector<std::string>& labels,
                             const std::vector<std::string>& context,
                             const std::string& input_text,
                             int input_sentence_id,
                             std::vector<int> context_ids) {
  if (labels.empty()) throw ConfigError("prompt needs a nonempty label set");
  if (mode == PromptMode::baseline && !context.empty())
    throw ConfigError("baseline prompt cannot carry context examples");
  if (mode != PromptMode::baseline && context.empty())
    throw ConfigError("icl/rag prompt needs at least one context example");

  std::string text(mode == PromptMode::baseline ? baseline_prompt_template()
                                                : context_prompt_template());
  text = replace_once(std::move(text), "{labels}", render_label_list(labels));
  if (mode != PromptMode::baseline) {
    std::string block;
    for (std::size_t i = 0; i < context.size(); ++i) {
      if (i) block += "\n\n";
      block += context[i];
    }
    text = replace_once(std::move(text), "{context_examples}", block);
  }
  text = replace_once(std::move(text), "{input_text}", input_text);

  RenderedPrompt prompt;
  prompt.text = std::move(text);
  prompt.mode = mode;
  prompt.label_set = labels;
  prompt.context_ids = std::move(context_ids);
  prompt.input_sentence_id = input_sentence_id;
  return prompt;
}

std::string_view baseline_prompt_template() {
  static const std::string tmpl =
      std::string(kSharedHeader) + std::string(kBaselineTail);
  return tmpl;
}

std::string_view context_prompt_template() {
  static const std::string tmpl =
      std::string(kSharedHeader) + std::string(kContextTail);
  return tmpl;
}

}  // namespace annotator
