#include "realeig/cache.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <random>
#include <system_error>

#include "realeig/errors.hpp"

namespace realeig {

namespace {

constexpr char kMagic[8] = {'R', 'E', 'A', 'L', 'E', 'I', 'G', 'C'};

std::mutex& dir_mutex() {
  static std::mutex m;
  return m;
}

struct DirState {
  bool initialised = false;
  std::optional<std::filesystem::path> dir;
};

DirState& dir_state() {
  static DirState s;
  return s;
}

template <typename T>
void put(std::vector<char>& out, const T& v) {
  const char* p = reinterpret_cast<const char*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("cache record truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::filesystem::path record_path(const std::filesystem::path& dir, const std::string& kind,
                                  const std::vector<std::int64_t>& key) {
  std::string name = kind;
  for (auto k : key) name += "_" + std::to_string(k);
  return dir / (name + ".bin");
}

}  // namespace

std::optional<std::filesystem::path> cache_directory() {
  std::lock_guard lock(dir_mutex());
  auto& s = dir_state();
  if (!s.initialised) {
    s.initialised = true;
    if (const char* env = std::getenv("REALEIG_CACHE_DIR"); env != nullptr && *env != '\0') s.dir = env;
  }
  return s.dir;
}

void set_cache_directory(std::optional<std::filesystem::path> dir) {
  std::lock_guard lock(dir_mutex());
  auto& s = dir_state();
  s.initialised = true;
  s.dir = std::move(dir);
}

std::vector<char> encode_cache_record(const CacheRecord& rec) {
  std::vector<char> out(kMagic, kMagic + 8);
  put(out, kCacheVersion);
  put(out, static_cast<std::uint64_t>(rec.kind.size()));
  out.insert(out.end(), rec.kind.begin(), rec.kind.end());
  put(out, static_cast<std::uint64_t>(rec.key.size()));
  for (auto k : rec.key) put(out, k);
  put(out, static_cast<std::uint64_t>(rec.meta.size()));
  for (auto v : rec.meta) put(out, v);
  put(out, static_cast<std::uint64_t>(rec.data.size()));
  for (auto v : rec.data) put(out, v);
  return out;
}

CacheRecord decode_cache_record(const std::vector<char>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) throw IoError("cache record: bad magic");
  std::size_t pos = 8;
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != kCacheVersion) throw IoError("cache record: version " + std::to_string(version));
  CacheRecord rec;
  const auto nkind = get<std::uint64_t>(bytes, pos);
  if (pos + nkind > bytes.size()) throw IoError("cache record truncated");
  rec.kind.assign(bytes.data() + pos, nkind);
  pos += nkind;
  auto read_vec = [&](auto& v) {
    using T = typename std::decay_t<decltype(v)>::value_type;
    const auto n = get<std::uint64_t>(bytes, pos);
    if (n > bytes.size()) throw IoError("cache record truncated");
    v.resize(n);
    for (auto& x : v) x = get<T>(bytes, pos);
  };
  read_vec(rec.key);
  read_vec(rec.meta);
  read_vec(rec.data);
  if (pos != bytes.size()) throw IoError("cache record: trailing bytes");
  return rec;
}

std::optional<std::vector<double>> cache_load(const std::string& kind, const std::vector<std::int64_t>& key,
                                              const std::vector<double>& meta) {
  const auto dir = cache_directory();
  if (!dir) return std::nullopt;
  std::ifstream in(record_path(*dir, kind, key), std::ios::binary);
  if (!in) return std::nullopt;
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    auto rec = decode_cache_record(bytes);
    if (rec.kind != kind || rec.key != key || rec.meta != meta) return std::nullopt;
    return std::move(rec.data);
  } catch (const IoError&) {
    return std::nullopt;
  }
}

void cache_store(const CacheRecord& rec) {
  const auto dir = cache_directory();
  if (!dir) return;
  std::error_code ec;
  std::filesystem::create_directories(*dir, ec);
  if (ec) return;
  const auto target = record_path(*dir, rec.kind, rec.key);
  std::random_device rd;
  auto tmp = target;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;
    const auto bytes = encode_cache_record(rec);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp, ec);
      return;
    }
  }
  std::filesystem::rename(tmp, target, ec);
  if (ec) std::filesystem::remove(tmp, ec);
}

}  // namespace realeig
