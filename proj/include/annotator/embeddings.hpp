#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace annotator {

struct EmbeddingVector {
  std::vector<double> values;
  std::string provider_id;
  std::string model_id;

  std::size_t dim() const { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

enum class EmbeddingKind { remote, local_test };

struct EmbeddingProviderSpec {
  EmbeddingKind kind = EmbeddingKind::local_test;
  std::string endpoint;       // remote only, e.g. http://host:port
  std::string path = "/v1/embeddings";
  std::string model_id = "hashed-bag-of-tokens-v1";
  std::size_t dim = 64;       // expected dimension, checked on every vector
  std::size_t batch_size = 64;
  std::string api_key_env = "ANNOTATOR_EMBED_KEY";
};

// Deterministic offline embedder: hashed bag of tokens. Each whitespace
// token lands in bucket fnv1a64(token) % dim with sign from an independent
// second hash; the vector is then L2-normalized.
EmbeddingVector local_test_embed(const std::string& text, std::size_t dim);

// Content-addressed, write-through embedding cache persisted as
// length-prefixed binary records ("EMBC" magic + version byte; format
// documented in the README). Concurrent readers, serialized writers.
class EmbeddingCache {
 public:
  // In-memory cache when path is empty.
  explicit EmbeddingCache(std::filesystem::path path = {});

  std::optional<EmbeddingVector> get(const std::string& provider_id,
                                     const std::string& model_id,
                                     const std::string& text) const;
  void put(const std::string& provider_id, const std::string& model_id,
           const std::string& text, const EmbeddingVector& vec);
  std::size_t size() const;

  static constexpr char kMagic[4] = {'E', 'M', 'B', 'C'};
  static constexpr std::uint8_t kVersion = 1;

 private:
  struct Entry {
    std::string text;  // full key text kept to rule out hash collisions
    EmbeddingVector vec;
  };
  void load();
  void append_record(const std::string& composite, const Entry& entry);

  std::filesystem::path path_;
  std::unordered_map<std::string, Entry> entries_;
  mutable std::shared_mutex mutex_;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<EmbeddingVector> embed(
      const std::vector<std::string>& texts) = 0;
  virtual const std::string& provider_id() const = 0;
  virtual const std::string& model_id() const = 0;
  virtual std::size_t dim() const = 0;
};

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const EmbeddingProviderSpec& spec);

// Cache-aware batch embedding: order-preserving, one vector per text,
// remote calls chunked at spec.batch_size, results written through the
// cache before returning. Pass cache = nullptr to bypass caching.
std::vector<EmbeddingVector> embed_batch(EmbeddingProvider& provider,
                                         EmbeddingCache* cache,
                                         const std::vector<std::string>& texts,
                                         std::size_t batch_size);

}  // namespace annotator
