#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "annotator/embeddings.hpp"

namespace annotator {

struct RetrievalHit {
  int sentence_id = 0;
  double score = 0.0;  // cosine similarity in [-1, 1]
  int rank = 0;        // 1-based

  bool operator==(const RetrievalHit&) const = default;
};

// Exact flat cosine index over the embedded sample space. Immutable after
// build; queries are safe to run concurrently.
class VectorIndex {
 public:
  struct Entry {
    int sentence_id;
    std::vector<double> values;
    double norm;
  };

  // Validates uniform dimension, unique ids, a single provider fingerprint
  // and nonzero norms; throws ValidationError naming the offender.
  static VectorIndex build(
      const std::vector<std::pair<int, EmbeddingVector>>& items);

  // min(k, size()) hits, score descending, ties by ascending sentence id,
  // ranks consecutive from 1. Cosine computed in double precision.
  std::vector<RetrievalHit> query_top_k(const EmbeddingVector& query,
                                        std::size_t k) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t dim() const { return dim_; }
  const std::string& provider_id() const { return provider_id_; }
  const std::string& model_id() const { return model_id_; }

  void save(const std::filesystem::path& path) const;
  // `expected_provider`/`expected_model`, when nonempty, are checked against
  // the stored fingerprint.
  static VectorIndex load(const std::filesystem::path& path,
                          const std::string& expected_provider = {},
                          const std::string& expected_model = {});

  static constexpr char kMagic[4] = {'V', 'I', 'D', 'X'};
  static constexpr std::uint8_t kVersion = 1;

 private:
  std::vector<Entry> entries_;
  std::size_t dim_ = 0;
  std::string provider_id_;
  std::string model_id_;
};

}  // namespace annotator
