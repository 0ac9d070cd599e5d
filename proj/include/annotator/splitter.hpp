#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace annotator {

struct SplitSpec {
  double fraction = 0.30;  // share of the train split used as sample space
  std::uint64_t seed = 42;
};

// Disjoint partition of train sentence ids: `sample_space` holds the
// human-labeled pool context examples are drawn from, `targets` the
// sentences the LLM annotates. Both sorted ascending.
struct SplitResult {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<int> sample_space;
  std::vector<int> targets;
};

enum class ContextSelection { random, retrieved };

struct ContextSet {
  std::vector<int> example_ids;  // in draw / retrieval-rank order
  ContextSelection selection = ContextSelection::random;
};

// Partition {0..train_size-1} with |sample_space| = round(fraction *
// train_size), half-up. Deterministic in (train_size, spec) via splitmix64.
// Throws ConfigError when either side of the partition would be empty.
SplitResult split_sample_space(std::size_t train_size, const SplitSpec& spec);

// Uniform draw of m ids from the sample space, without replacement, in draw
// order. Throws ConfigError when m exceeds the sample-space size.
ContextSet sample_random_context(const SplitResult& split, std::size_t m,
                                 std::uint64_t seed);

std::string split_to_json(const SplitResult& split);
SplitResult split_from_json(const std::string& text);
void save_split(const SplitResult& split, const std::filesystem::path& path);
SplitResult load_split(const std::filesystem::path& path);

}  // namespace annotator
