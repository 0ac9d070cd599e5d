#include "annotator/splitter.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "annotator/errors.hpp"
#include "annotator/rng.hpp"
#include "annotator/util.hpp"

namespace annotator {

SplitResult split_sample_space(std::size_t train_size, const SplitSpec& spec) {
  if (train_size < 2)
    throw ConfigError("train split too small to partition: " +
                      std::to_string(train_size));
  if (!(spec.fraction > 0.0 && spec.fraction < 1.0))
    throw ConfigError("sample-space fraction must be in (0,1), got " +
                      std::to_string(spec.fraction));

  const auto x = static_cast<std::size_t>(
      std::floor(spec.fraction * static_cast<double>(train_size) + 0.5));
  if (x < 1 || x >= train_size)
    throw ConfigError("fraction " + std::to_string(spec.fraction) + " of " +
                      std::to_string(train_size) +
                      " leaves an empty sample space or target set");

  SplitMix64 rng(spec.seed);
  auto drawn = sample_without_replacement(train_size, x, rng);

  std::vector<bool> in_sample(train_size, false);
  for (std::size_t id : drawn) in_sample[id] = true;

  SplitResult result;
  result.fraction = spec.fraction;
  result.seed = spec.seed;
  result.sample_space.reserve(x);
  result.targets.reserve(train_size - x);
  for (std::size_t id = 0; id < train_size; ++id) {
    (in_sample[id] ? result.sample_space : result.targets)
        .push_back(static_cast<int>(id));
  }
  return result;
}

ContextSet sample_random_context(const SplitResult& split, std::size_t m,
                                 std::uint64_t seed) {
  const std::size_t x = split.sample_space.size();
  if (m > x)
    throw ConfigError("context size m=" + std::to_string(m) +
                      " exceeds sample-space size x=" + std::to_string(x));
  SplitMix64 rng(seed);
  auto picks = sample_without_replacement(x, m, rng);
  ContextSet ctx;
  ctx.selection = ContextSelection::random;
  ctx.example_ids.reserve(m);
  for (std::size_t p : picks) ctx.example_ids.push_back(split.sample_space[p]);
  return ctx;
}

std::string split_to_json(const SplitResult& split) {
  nlohmann::ordered_json j;
  j["fraction"] = split.fraction;
  j["seed"] = split.seed;
  j["sample_space"] = split.sample_space;
  j["targets"] = split.targets;
  return j.dump(2) + "\n";
}

SplitResult split_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("split file is not valid JSON: ") + e.what());
  }
  SplitResult split;
  try {
    split.fraction = j.at("fraction").get<double>();
    split.seed = j.at("seed").get<std::uint64_t>();
    split.sample_space = j.at("sample_space").get<std::vector<int>>();
    split.targets = j.at("targets").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("split file missing fields: ") + e.what());
  }
  return split;
}

void save_split(const SplitResult& split, const std::filesystem::path& path) {
  write_file_atomic(path, split_to_json(split));
}

SplitResult load_split(const std::filesystem::path& path) {
  return split_from_json(read_file(path));
}

}  // namespace annotator
