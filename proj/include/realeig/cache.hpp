#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace realeig {

/// Directory holding cached tables, or nullopt when caching is off.
/// Initialised from REALEIG_CACHE_DIR on first use.
std::optional<std::filesystem::path> cache_directory();
void set_cache_directory(std::optional<std::filesystem::path> dir);

/// One record of the versioned binary cache. kind names the table family,
/// key holds the integer parameters, meta holds real parameters that must
/// match exactly (tolerances), data is the payload.
struct CacheRecord {
  std::string kind;
  std::vector<std::int64_t> key;
  std::vector<double> meta;
  std::vector<double> data;
};

inline constexpr std::uint32_t kCacheVersion = 1;

/// Serialized form: "REALEIGC", version, then the four fields with lengths.
std::vector<char> encode_cache_record(const CacheRecord& rec);
/// Throws IoError on a bad magic, version or truncated buffer.
CacheRecord decode_cache_record(const std::vector<char>& bytes);

/// Reads the record stored for (kind, key) under the cache directory.
/// Returns nullopt when caching is off, the file is missing, unreadable,
/// from another version, or its meta differs.
std::optional<std::vector<double>> cache_load(const std::string& kind, const std::vector<std::int64_t>& key,
                                              const std::vector<double>& meta);
/// Writes atomically (temp file + rename). Failures are ignored: the cache
/// is an accelerator only.
void cache_store(const CacheRecord& rec);

}  // namespace realeig
