#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace annotator {

std::vector<std::string> split_whitespace(std::string_view line);
std::string trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// FNV-1a 64-bit; `seed` perturbs the offset basis so independent hash
// streams can be derived from the same bytes.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0);

// SHA-256 as a lowercase hex string (OpenSSL EVP).
std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);

// Write via temp file + rename so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

// Little-endian binary encoding used by the cache and index files.
void put_u16(std::string& out, std::uint16_t v);
void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);
void put_f64(std::string& out, double v);

class ByteReader {
 public:
  ByteReader(std::string_view data, std::string context)
      : data_(data), context_(std::move(context)) {}

  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string bytes(std::size_t n);
  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  std::string_view data_;
  std::string context_;
  std::size_t pos_ = 0;
};

// "2026-08-09T12:34:56Z"
std::string utc_timestamp_now();

}  // namespace annotator
