#include "annotator/embeddings.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "annotator/errors.hpp"
#include "annotator/http.hpp"
#include "annotator/util.hpp"

namespace annotator {

namespace {

constexpr std::uint64_t kSignSalt = 0x5EED5EED5EED5EEDull;

std::string composite_key(const std::string& provider_id,
                          const std::string& model_id,
                          const std::string& text) {
  std::string key;
  key.reserve(provider_id.size() + model_id.size() + text.size() + 2);
  key += provider_id;
  key += '\x1f';
  key += model_id;
  key += '\x1f';
  key += text;
  return key;
}

}  // namespace

EmbeddingVector local_test_embed(const std::string& text, std::size_t dim) {
  if (dim < 8)
    throw ConfigError("local test embedder needs dim >= 8, got " +
                      std::to_string(dim));
  EmbeddingVector vec;
  vec.provider_id = "local-test";
  vec.model_id = "hashed-bag-of-tokens-v1";
  vec.values.assign(dim, 0.0);

  for (const auto& token : split_whitespace(text)) {
    const std::size_t bucket = fnv1a64(token) % dim;
    const double sign = (fnv1a64(token, kSignSalt) & 1u) ? 1.0 : -1.0;
    vec.values[bucket] += sign;
  }

  double norm_sq = 0.0;
  for (double v : vec.values) norm_sq += v * v;
  if (norm_sq == 0.0)
    throw ValidationError(
        "local test embedder produced a zero vector (empty text?)");
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& v : vec.values) v *= inv;
  return vec;
}

EmbeddingCache::EmbeddingCache(std::filesystem::path path)
    : path_(std::move(path)) {
  if (!path_.empty()) load();
}

void EmbeddingCache::load() {
  if (!std::filesystem::exists(path_)) return;
  const std::string data = read_file(path_);
  ByteReader reader(data, "embedding cache " + path_.string());
  const std::string magic = reader.bytes(4);
  if (magic != std::string(kMagic, 4))
    throw ParseError("embedding cache " + path_.string() + ": bad magic");
  const auto version = static_cast<std::uint8_t>(reader.bytes(1)[0]);
  if (version != kVersion)
    throw ParseError("embedding cache " + path_.string() +
                     ": unsupported version " + std::to_string(version));
  while (!reader.at_end()) {
    const std::uint32_t record_len = reader.u32();
    ByteReader rec(reader.bytes(record_len),
                   "embedding cache record in " + path_.string());
    Entry entry;
    entry.vec.provider_id = rec.bytes(rec.u16());
    entry.vec.model_id = rec.bytes(rec.u16());
    entry.text = rec.bytes(rec.u32());
    const std::uint32_t dim = rec.u32();
    entry.vec.values.reserve(dim);
    for (std::uint32_t i = 0; i < dim; ++i)
      entry.vec.values.push_back(rec.f64());
    std::string key =
        composite_key(entry.vec.provider_id, entry.vec.model_id, entry.text);
    entries_[std::move(key)] = std::move(entry);
  }
}

void EmbeddingCache::append_record(const std::string&, const Entry& entry) {
  if (path_.empty()) return;
  std::string record;
  put_u16(record, static_cast<std::uint16_t>(entry.vec.provider_id.size()));
  record += entry.vec.provider_id;
  put_u16(record, static_cast<std::uint16_t>(entry.vec.model_id.size()));
  record += entry.vec.model_id;
  put_u32(record, static_cast<std::uint32_t>(entry.text.size()));
  record += entry.text;
  put_u32(record, static_cast<std::uint32_t>(entry.vec.values.size()));
  for (double v : entry.vec.values) put_f64(record, v);

  const bool fresh = !std::filesystem::exists(path_);
  if (!path_.parent_path().empty())
    std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error("cannot open embedding cache: " + path_.string());
  if (fresh) {
    out.write(kMagic, 4);
    out.put(static_cast<char>(kVersion));
  }
  std::string framed;
  put_u32(framed, static_cast<std::uint32_t>(record.size()));
  framed += record;
  out.write(framed.data(), static_cast<std::streamsize>(framed.size()));
  out.flush();
}

std::optional<EmbeddingVector> EmbeddingCache::get(
    const std::string& provider_id, const std::string& model_id,
    const std::string& text) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(composite_key(provider_id, model_id, text));
  if (it == entries_.end()) return std::nullopt;
  if (it->second.text != text) return std::nullopt;
  return it->second.vec;
}

void EmbeddingCache::put(const std::string& provider_id,
                         const std::string& model_id, const std::string& text,
                         const EmbeddingVector& vec) {
  std::unique_lock lock(mutex_);
  std::string key = composite_key(provider_id, model_id, text);
  auto [it, inserted] = entries_.try_emplace(key, Entry{text, vec});
  if (inserted) append_record(key, it->second);
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

namespace {

class LocalTestProvider : public EmbeddingProvider {
 public:
  explicit LocalTestProvider(std::size_t dim) : dim_(dim) {
    if (dim_ < 8)
      throw ConfigError("local test embedder needs dim >= 8, got " +
                        std::to_string(dim_));
  }
  std::vector<EmbeddingVector> embed(
      const std::vector<std::string>& texts) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(local_test_embed(t, dim_));
    return out;
  }
  const std::string& provider_id() const override { return provider_id_; }
  const std::string& model_id() const override { return model_id_; }
  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
  std::string provider_id_ = "local-test";
  std::string model_id_ = "hashed-bag-of-tokens-v1";
};

// POSTs {model, input:[texts]} and expects {data:[{index, embedding}]}.
class RemoteProvider : public EmbeddingProvider {
 public:
  explicit RemoteProvider(EmbeddingProviderSpec spec) : spec_(std::move(spec)) {
    if (spec_.endpoint.empty())
      throw ConfigError("remote embedding provider needs an endpoint");
    if (const char* key = std::getenv(spec_.api_key_env.c_str()))
      api_key_ = key;
  }

  std::vector<EmbeddingVector> embed(
      const std::vector<std::string>& texts) override {
    nlohmann::json body;
    body["model"] = spec_.model_id;
    body["input"] = texts;

    const std::string response = http_post_json_with_retries(
        spec_.endpoint, spec_.path, body.dump(), api_key_,
        "embeddings " + spec_.endpoint);

    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(response);
    } catch (const nlohmann::json::parse_error& e) {
      throw IntegrityError(std::string("embeddings response is not JSON: ") +
                           e.what());
    }
    if (!parsed.contains("data") || !parsed["data"].is_array())
      throw IntegrityError("embeddings response has no data array");

    std::vector<EmbeddingVector> out(texts.size());
    std::vector<bool> filled(texts.size(), false);
    for (const auto& item : parsed["data"]) {
      const auto index = item.at("index").get<std::size_t>();
      if (index >= texts.size())
        throw IntegrityError("embeddings response index out of range");
      EmbeddingVector vec;
      vec.provider_id = provider_id_;
      vec.model_id = spec_.model_id;
      vec.values = item.at("embedding").get<std::vector<double>>();
      if (vec.values.size() != spec_.dim)
        throw IntegrityError("embedding dimension mismatch: expected " +
                             std::to_string(spec_.dim) + ", got " +
                             std::to_string(vec.values.size()));
      out[index] = std::move(vec);
      filled[index] = true;
    }
    for (std::size_t i = 0; i < filled.size(); ++i)
      if (!filled[i])
        throw IntegrityError("embeddings response missing index " +
                             std::to_string(i));
    return out;
  }

  const std::string& provider_id() const override { return provider_id_; }
  const std::string& model_id() const override { return spec_.model_id; }
  std::size_t dim() const override { return spec_.dim; }

 private:
  EmbeddingProviderSpec spec_;
  std::string api_key_;
  std::string provider_id_ = "remote";
};

}  // namespace

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const EmbeddingProviderSpec& spec) {
  switch (spec.kind) {
    case EmbeddingKind::local_test:
      return std::make_unique<LocalTestProvider>(spec.dim);
    case EmbeddingKind::remote:
      return std::make_unique<RemoteProvider>(spec);
  }
  throw ConfigError("unknown embedding provider kind");
}

std::vector<EmbeddingVector> embed_batch(EmbeddingProvider& provider,
                                         EmbeddingCache* cache,
                                         const std::vector<std::string>& texts,
                                         std::size_t batch_size) {
  if (texts.empty()) throw ConfigError("embed_batch: no texts");
  if (batch_size == 0) batch_size = 1;
  for (const auto& t : texts)
    if (trim(t).empty())
      throw ConfigError("embed_batch: empty text after trimming");

  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (cache) {
      if (auto hit =
              cache->get(provider.provider_id(), provider.model_id(), texts[i])) {
        out[i] = std::move(*hit);
        continue;
      }
    }
    misses.push_back(i);
  }

  for (std::size_t off = 0; off < misses.size(); off += batch_size) {
    const std::size_t n = std::min(batch_size, misses.size() - off);
    std::vector<std::string> chunk;
    chunk.reserve(n);
    for (std::size_t j = 0; j < n; ++j) chunk.push_back(texts[misses[off + j]]);
    auto vecs = provider.embed(chunk);
    if (vecs.size() != n)
      throw IntegrityError("provider returned " + std::to_string(vecs.size()) +
                           " vectors for " + std::to_string(n) + " texts");
    for (std::size_t j = 0; j < n; ++j) {
      if (vecs[j].dim() != provider.dim())
        throw IntegrityError("embedding dimension mismatch: expected " +
                             std::to_string(provider.dim()) + ", got " +
                             std::to_string(vecs[j].dim()));
      if (cache)
        cache->put(provider.provider_id(), provider.model_id(),
                   texts[misses[off + j]], vecs[j]);
      out[misses[off + j]] = std::move(vecs[j]);
    }
  }
  return out;
}

}  // namespace annotator
