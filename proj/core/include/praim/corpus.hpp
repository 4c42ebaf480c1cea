#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace praim {

struct RetrievalHit {
  std::string key;
  double similarity = 0.0;  // cosine
  std::size_t index = 0;    // entry index in the corpus
};

struct RetrievalResult {
  std::vector<RetrievalHit> hits;  // similarity descending, ties by key
  bool short_retrieval = false;    // fewer candidates than requested
};

/// Immutable-after-build nearest-neighbor store over context embeddings.
/// Exact full scan by default; an inverted-file index can be enabled for
/// large corpora and must stay within recall@K 0.99 of the exact scan.
class RetrievalCorpus {
 public:
  RetrievalCorpus(int dim, std::string built_from);

  static RetrievalCorpus build(
      const std::vector<std::pair<std::string, std::vector<float>>>& entries,
      std::string built_from);

  int dim() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  const std::string& built_from() const { return built_from_; }

  const std::string& key(std::size_t index) const { return keys_[index]; }
  const std::vector<float>& vector(std::size_t index) const {
    return vectors_[index];
  }
  bool contains(const std::string& key) const;

  // Duplicate keys and width mismatches are rejected before any mutation.
  void append(const std::string& key, std::vector<float> vector);

  // Top-K cosine, descending, exact ties broken by ascending key. With
  // exclude_self the corpus entry whose key equals query_key is skipped.
  // filter, when set, keeps only candidates it accepts (time-aware
  // retrieval); fewer than k survivors set short_retrieval.
  RetrievalResult retrieve(
      const std::vector<float>& query, int k, bool exclude_self,
      const std::string& query_key = std::string(),
      const std::function<bool(const std::string&)>& filter = nullptr) const;

  // Opt-in approximate backend: coarse k-means cells, probing the nprobe
  // closest. No-op when cells <= 1.
  void build_ivf_index(int nlist, int nprobe, std::uint64_t seed);
  bool has_ivf_index() const { return !centroids_.empty(); }
  void drop_ivf_index();

  // Embedding-cache file plus "<path>.json" sidecar manifest
  // {version, dim, count, built_from, metric}.
  void save(const std::string& path) const;
  static RetrievalCorpus load_file(const std::string& path);

 private:
  RetrievalResult scan(const std::vector<float>& query, int k,
                       bool exclude_self, const std::string& query_key,
                       const std::function<bool(const std::string&)>& filter,
                       const std::vector<std::size_t>* candidates) const;

  int dim_ = 0;
  std::string built_from_;
  std::vector<std::string> keys_;
  std::set<std::string> key_set_;
  std::vector<std::vector<float>> vectors_;
  std::vector<double> norms_;

  // IVF state (empty when disabled).
  int nprobe_ = 0;
  std::vector<std::vector<double>> centroids_;
  std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace praim
