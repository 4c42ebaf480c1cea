#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace praim {

/// Persistent key -> float32 vector store.
///
/// File layout, little-endian: magic "PRMC", u32 version = 1, u32 dim, then
/// records of (u16 key length, key bytes, dim * f32). Records append; on
/// load a repeated key keeps the last record. Round-trips are bit-exact.
class EmbeddingCache {
 public:
  // Loads path when it exists (width must match), otherwise starts an empty
  // cache that will be created on first flush.
  EmbeddingCache(std::string path, int dim);

  // Loads an existing file, taking the width from its header.
  static EmbeddingCache load(const std::string& path);

  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::string& path() const { return path_; }

  bool contains(const std::string& key) const;
  // nullptr when absent.
  const std::vector<float>* get(const std::string& key) const;

  // Inserts or overwrites; the change is persisted on the next flush.
  void put(const std::string& key, std::vector<float> vector);

  // Appends pending records to the file (creating it with a header first).
  void flush();

  // Deterministic iteration: std::map keeps keys sorted.
  const std::map<std::string, std::vector<float>>& entries() const {
    return entries_;
  }

 private:
  std::string path_;
  int dim_ = 0;
  std::map<std::string, std::vector<float>> entries_;
  std::vector<std::string> pending_;  // keys put since the last flush
  bool file_exists_ = false;
};

}  // namespace praim
