#include "annotator/vectorstore.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "annotator/errors.hpp"
#include "annotator/util.hpp"

namespace annotator {

namespace {

double l2_norm(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

}  // namespace

VectorIndex VectorIndex::build(
    const std::vector<std::pair<int, EmbeddingVector>>& items) {
  if (items.empty()) throw ValidationError("cannot build an empty index");

  VectorIndex index;
  index.dim_ = items.front().second.dim();
  index.provider_id_ = items.front().second.provider_id;
  index.model_id_ = items.front().second.model_id;
  if (index.dim_ == 0) throw ValidationError("zero-dimensional vectors");

  std::unordered_set<int> seen;
  index.entries_.reserve(items.size());
  for (const auto& [id, vec] : items) {
    if (vec.dim() != index.dim_)
      throw ValidationError("dimension mismatch for id " + std::to_string(id) +
                            ": expected " + std::to_string(index.dim_) +
                            ", got " + std::to_string(vec.dim()));
    if (vec.provider_id != index.provider_id_ ||
        vec.model_id != index.model_id_)
      throw ValidationError("provider fingerprint mismatch for id " +
                            std::to_string(id));
    if (!seen.insert(id).second)
      throw ValidationError("duplicate id " + std::to_string(id));
    for (double x : vec.values)
      if (!std::isfinite(x))
        throw ValidationError("non-finite value in vector for id " +
                              std::to_string(id));
    const double norm = l2_norm(vec.values);
    if (norm == 0.0)
      throw ValidationError("zero-norm vector for id " + std::to_string(id) +
                            " (cosine undefined)");
    index.entries_.push_back(Entry{id, vec.values, norm});
  }
  return index;
}

std::vector<RetrievalHit> VectorIndex::query_top_k(
    const EmbeddingVector& query, std::size_t k) const {
  if (query.dim() != dim_)
    throw ValidationError("query dimension " + std::to_string(query.dim()) +
                          " != index dimension " + std::to_string(dim_));
  if (k < 1) throw ValidationError("k must be >= 1");
  const double query_norm = l2_norm(query.values);
  if (query_norm == 0.0)
    throw ValidationError("zero-norm query (cosine undefined)");

  std::vector<RetrievalHit> hits;
  hits.reserve(entries_.size());
  for (const auto& entry : entries_) {
    double dot = 0.0;
    for (std::size_t i = 0; i < dim_; ++i)
      dot += entry.values[i] * query.values[i];
    hits.push_back(
        RetrievalHit{entry.sentence_id, dot / (entry.norm * query_norm), 0});
  }

  const std::size_t take = std::min(k, hits.size());
  auto better = [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.sentence_id < b.sentence_id;
  };
  std::partial_sort(hits.begin(), hits.begin() + static_cast<long>(take),
                    hits.end(), better);
  hits.resize(take);
  for (std::size_t i = 0; i < hits.size(); ++i)
    hits[i].rank = static_cast<int>(i + 1);
  return hits;
}

void VectorIndex::save(const std::filesystem::path& path) const {
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(dim_));
  put_u16(out, static_cast<std::uint16_t>(provider_id_.size()));
  out += provider_id_;
  put_u16(out, static_cast<std::uint16_t>(model_id_.size()));
  out += model_id_;
  put_u64(out, entries_.size());
  for (const auto& entry : entries_) {
    put_u64(out, static_cast<std::uint64_t>(
                     static_cast<std::int64_t>(entry.sentence_id)));
    for (double v : entry.values) put_f64(out, v);
  }
  write_file_atomic(path, out);
}

VectorIndex VectorIndex::load(const std::filesystem::path& path,
                              const std::string& expected_provider,
                              const std::string& expected_model) {
  const std::string data = read_file(path);
  ByteReader reader(data, "index " + path.string());
  if (reader.bytes(4) != std::string(kMagic, 4))
    throw ParseError("index " + path.string() + ": bad magic");
  const auto version = static_cast<std::uint8_t>(reader.bytes(1)[0]);
  if (version != kVersion)
    throw ParseError("index " + path.string() + ": unsupported version " +
                     std::to_string(version));

  VectorIndex index;
  index.dim_ = reader.u32();
  index.provider_id_ = reader.bytes(reader.u16());
  index.model_id_ = reader.bytes(reader.u16());
  if (!expected_provider.empty() && index.provider_id_ != expected_provider)
    throw IntegrityError("index " + path.string() + ": provider '" +
                         index.provider_id_ + "' does not match run config '" +
                         expected_provider + "'");
  if (!expected_model.empty() && index.model_id_ != expected_model)
    throw IntegrityError("index " + path.string() + ": model '" +
                         index.model_id_ + "' does not match run config '" +
                         expected_model + "'");

  const std::uint64_t count = reader.u64();
  index.entries_.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Entry entry;
    entry.sentence_id =
        static_cast<int>(static_cast<std::int64_t>(reader.u64()));
    entry.values.reserve(index.dim_);
    for (std::size_t d = 0; d < index.dim_; ++d)
      entry.values.push_back(reader.f64());
    entry.norm = l2_norm(entry.values);
    if (entry.norm == 0.0)
      throw ValidationError("index " + path.string() + ": zero-norm vector " +
                            std::to_string(entry.sentence_id));
    index.entries_.push_back(std::move(entry));
  }
  return index;
}

}  // namespace annotator
