#include "praim/embedding_cache.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "praim/common.hpp"

namespace praim {
namespace {

constexpr char kMagic[4] = {'P', 'R', 'M', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out += static_cast<char>(v & 0xff);
  out += static_cast<char>((v >> 8) & 0xff);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_f32(std::string& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class Reader {
 public:
  Reader(const std::string& data, const std::string& path)
      : data_(data), path_(path) {}

  std::size_t offset() const { return offset_; }
  bool at_end() const { return offset_ == data_.size(); }

  const char* take(std::size_t n, const char* what) {
    if (offset_ + n > data_.size()) {
      throw IoError("corrupted cache file " + path_ + ": truncated " + what +
                    " at byte " + std::to_string(offset_));
    }
    const char* p = data_.data() + offset_;
    offset_ += n;
    return p;
  }

  std::uint16_t u16(const char* what) {
    const auto* p =
        reinterpret_cast<const std::uint8_t*>(take(2, what));
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }

  std::uint32_t u32(const char* what) {
    const auto* p =
        reinterpret_cast<const std::uint8_t*>(take(4, what));
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

 private:
  const std::string& data_;
  const std::string& path_;
  std::size_t offset_ = 0;
};

std::string read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return data;
}

void parse_into(const std::string& path,
                std::map<std::string, std::vector<float>>& entries,
                int& dim) {
  const std::string data = read_binary(path);
  Reader r(data, path);
  const char* magic = r.take(4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("corrupted cache file " + path + ": bad magic at byte 0");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kVersion) {
    throw IoError("unsupported cache version " + std::to_string(version) +
                  " in " + path);
  }
  const std::uint32_t width = r.u32("width");
  if (width == 0) {
    throw IoError("corrupted cache file " + path + ": zero width at byte 8");
  }
  dim = static_cast<int>(width);
  while (!r.at_end()) {
    const std::size_t record_start = r.offset();
    const std::uint16_t key_len = r.u16("record header");
    if (key_len == 0) {
      throw IoError("corrupted cache file " + path + ": empty key at byte " +
                    std::to_string(record_start));
    }
    const char* key_bytes = r.take(key_len, "record key");
    std::string key(key_bytes, key_len);
    std::vector<float> vec(width);
    for (std::uint32_t j = 0; j < width; ++j) vec[j] = r.f32("record vector");
    entries[std::move(key)] = std::move(vec);
  }
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::string path, int dim)
    : path_(std::move(path)), dim_(dim) {
  if (dim_ < 1) throw ValidationError("cache width must be positive");
  if (std::filesystem::exists(path_)) {
    int file_dim = 0;
    parse_into(path_, entries_, file_dim);
    if (file_dim != dim_) {
      throw ValidationError("cache " + path_ + " has width " +
                            std::to_string(file_dim) + ", expected " +
                            std::to_string(dim_));
    }
    file_exists_ = true;
  }
}

EmbeddingCache EmbeddingCache::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char header[12];
  in.read(header, sizeof(header));
  if (in.gcount() != sizeof(header)) {
    throw IoError("corrupted cache file " + path + ": truncated header");
  }
  const auto* p = reinterpret_cast<const std::uint8_t*>(header + 8);
  const std::uint32_t width = static_cast<std::uint32_t>(p[0]) |
                              (static_cast<std::uint32_t>(p[1]) << 8) |
                              (static_cast<std::uint32_t>(p[2]) << 16) |
                              (static_cast<std::uint32_t>(p[3]) << 24);
  in.close();
  if (width == 0 || width > 0x7fffffff) {
    throw IoError("corrupted cache file " + path + ": bad width at byte 8");
  }
  return EmbeddingCache(path, static_cast<int>(width));
}

bool EmbeddingCache::contains(const std::string& key) const {
  return entries_.count(key) != 0;
}

const std::vector<float>* EmbeddingCache::get(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void EmbeddingCache::put(const std::string& key, std::vector<float> vector) {
  if (key.empty() || key.size() > 0xffff) {
    throw ValidationError("cache key length must be in [1, 65535]");
  }
  if (static_cast<int>(vector.size()) != dim_) {
    throw ValidationError("vector width " + std::to_string(vector.size()) +
                          " does not match cache width " +
                          std::to_string(dim_));
  }
  entries_[key] = std::move(vector);
  pending_.push_back(key);
}

void EmbeddingCache::flush() {
  if (pending_.empty() && file_exists_) return;

  std::string payload;
  if (!file_exists_) {
    payload.append(kMagic, 4);
    put_u32(payload, kVersion);
    put_u32(payload, static_cast<std::uint32_t>(dim_));
  }
  for (const auto& key : pending_) {
    put_u16(payload, static_cast<std::uint16_t>(key.size()));
    payload += key;
    for (float v : entries_.at(key)) put_f32(payload, v);
  }

  const std::filesystem::path p(path_);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot write " + path_);
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed for " + path_);
  out.flush();
  file_exists_ = true;
  pending_.clear();
}

}  // namespace praim
