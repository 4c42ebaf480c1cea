#include "praim/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "praim/common.hpp"
#include "praim/embedding_cache.hpp"
#include "praim/rng.hpp"

namespace praim {
namespace {

double vector_norm(const std::vector<float>& v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

double dot(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

}  // namespace

RetrievalCorpus::RetrievalCorpus(int dim, std::string built_from)
    : dim_(dim), built_from_(std::move(built_from)) {
  if (dim_ < 1) throw ValidationError("corpus width must be positive");
}

RetrievalCorpus RetrievalCorpus::build(
    const std::vector<std::pair<std::string, std::vector<float>>>& entries,
    std::string built_from) {
  if (entries.empty()) throw ValidationError("corpus build needs entries");
  RetrievalCorpus corpus(static_cast<int>(entries.front().second.size()),
                         std::move(built_from));
  for (const auto& [key, vec] : entries) corpus.append(key, vec);
  return corpus;
}

bool RetrievalCorpus::contains(const std::string& key) const {
  return key_set_.count(key) != 0;
}

void RetrievalCorpus::append(const std::string& key,
                             std::vector<float> vector) {
  if (static_cast<int>(vector.size()) != dim_) {
    throw ValidationError("entry width " + std::to_string(vector.size()) +
                          " does not match corpus width " +
                          std::to_string(dim_));
  }
  if (contains(key)) {
    throw ValidationError("duplicate corpus key '" + key + "'");
  }
  norms_.push_back(vector_norm(vector));
  key_set_.insert(key);
  keys_.push_back(key);
  vectors_.push_back(std::move(vector));
  drop_ivf_index();  // stale cells would miss the new entry
}

RetrievalResult RetrievalCorpus::scan(
    const std::vector<float>& query, int k, bool exclude_self,
    const std::string& query_key,
    const std::function<bool(const std::string&)>& filter,
    const std::vector<std::size_t>* candidates) const {
  const double query_norm = vector_norm(query);

  std::vector<RetrievalHit> hits;
  auto consider = [&](std::size_t i) {
    if (exclude_self && keys_[i] == query_key) return;
    if (filter && !filter(keys_[i])) return;
    const double denom = query_norm * norms_[i];
    const double sim = denom > 0.0 ? dot(query, vectors_[i]) / denom : 0.0;
    hits.push_back({keys_[i], sim, i});
  };
  if (candidates) {
    for (std::size_t i : *candidates) consider(i);
  } else {
    for (std::size_t i = 0; i < keys_.size(); ++i) consider(i);
  }

  std::sort(hits.begin(), hits.end(),
            [](const RetrievalHit& a, const RetrievalHit& b) {
              if (a.similarity != b.similarity) {
                return a.similarity > b.similarity;
              }
              return a.key < b.key;
            });

  RetrievalResult result;
  const std::size_t want = static_cast<std::size_t>(k);
  if (hits.size() > want) hits.resize(want);
  result.short_retrieval = hits.size() < want;
  result.hits = std::move(hits);
  return result;
}

RetrievalResult RetrievalCorpus::retrieve(
    const std::vector<float>& query, int k, bool exclude_self,
    const std::string& query_key,
    const std::function<bool(const std::string&)>& filter) const {
  if (keys_.empty()) throw ValidationError("retrieve on an empty corpus");
  if (k < 1) throw ValidationError("retrieval depth must be positive");
  if (static_cast<int>(query.size()) != dim_) {
    throw ValidationError("query width does not match corpus width");
  }

  if (centroids_.empty()) {
    return scan(query, k, exclude_self, query_key, filter, nullptr);
  }

  // Rank cells by centroid distance, gather the nprobe nearest.
  std::vector<std::pair<double, std::size_t>> order(centroids_.size());
  for (std::size_t c = 0; c < centroids_.size(); ++c) {
    double d2 = 0.0;
    for (int j = 0; j < dim_; ++j) {
      const double diff =
          static_cast<double>(query[static_cast<std::size_t>(j)]) -
          centroids_[c][static_cast<std::size_t>(j)];
      d2 += diff * diff;
    }
    order[c] = {d2, c};
  }
  std::sort(order.begin(), order.end());
  std::vector<std::size_t> candidates;
  const std::size_t probes =
      std::min<std::size_t>(static_cast<std::size_t>(nprobe_), order.size());
  for (std::size_t p = 0; p < probes; ++p) {
    const auto& cell = cells_[order[p].second];
    candidates.insert(candidates.end(), cell.begin(), cell.end());
  }
  return scan(query, k, exclude_self, query_key, filter, &candidates);
}

void RetrievalCorpus::build_ivf_index(int nlist, int nprobe,
                                      std::uint64_t seed) {
  if (nlist < 1 || nprobe < 1) {
    throw ValidationError("ivf cell and probe counts must be positive");
  }
  drop_ivf_index();
  const std::size_t n = keys_.size();
  if (n == 0) throw ValidationError("ivf index on an empty corpus");
  const std::size_t cells =
      std::min<std::size_t>(static_cast<std::size_t>(nlist), n);
  if (cells <= 1) return;

  // Seeded k-means over the raw vectors, fixed iteration budget.
  SplitRng rng(seed);
  std::vector<std::vector<double>> centroids(cells,
                                             std::vector<double>(dim_, 0.0));
  std::set<std::size_t> picked;
  while (picked.size() < cells) picked.insert(rng.next_index(n));
  std::size_t c = 0;
  for (std::size_t i : picked) {
    for (int j = 0; j < dim_; ++j) {
      centroids[c][static_cast<std::size_t>(j)] =
          vectors_[i][static_cast<std::size_t>(j)];
    }
    ++c;
  }

  std::vector<std::size_t> assign(n, 0);
  for (int iter = 0; iter < 10; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = 0.0;
      std::size_t best_c = 0;
      for (std::size_t cc = 0; cc < cells; ++cc) {
        double d2 = 0.0;
        for (int j = 0; j < dim_; ++j) {
          const double diff =
              static_cast<double>(vectors_[i][static_cast<std::size_t>(j)]) -
              centroids[cc][static_cast<std::size_t>(j)];
          d2 += diff * diff;
        }
        if (cc == 0 || d2 < best) {
          best = d2;
          best_c = cc;
        }
      }
      assign[i] = best_c;
    }
    std::vector<std::size_t> counts(cells, 0);
    std::vector<std::vector<double>> sums(cells,
                                          std::vector<double>(dim_, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (int j = 0; j < dim_; ++j) {
        sums[assign[i]][static_cast<std::size_t>(j)] +=
            static_cast<double>(vectors_[i][static_cast<std::size_t>(j)]);
      }
    }
    for (std::size_t cc = 0; cc < cells; ++cc) {
      if (counts[cc] == 0) continue;  // keep the old centroid
      for (int j = 0; j < dim_; ++j) {
        centroids[cc][static_cast<std::size_t>(j)] =
            sums[cc][static_cast<std::size_t>(j)] /
            static_cast<double>(counts[cc]);
      }
    }
  }

  cells_.assign(cells, {});
  for (std::size_t i = 0; i < n; ++i) cells_[assign[i]].push_back(i);
  centroids_ = std::move(centroids);
  nprobe_ = nprobe;
}

void RetrievalCorpus::drop_ivf_index() {
  centroids_.clear();
  cells_.clear();
  nprobe_ = 0;
}

void RetrievalCorpus::save(const std::string& path) const {
  if (keys_.empty()) throw ValidationError("refusing to save an empty corpus");
  if (std::filesystem::exists(path)) std::filesystem::remove(path);
  EmbeddingCache file(path, dim_);
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    file.put(keys_[i], vectors_[i]);
  }
  file.flush();

  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["dim"] = dim_;
  manifest["count"] = keys_.size();
  manifest["built_from"] = built_from_;
  manifest["metric"] = "cosine";
  write_text_file(path + ".json", manifest.dump(2) + "\n");
}

RetrievalCorpus RetrievalCorpus::load_file(const std::string& path) {
  const nlohmann::json manifest =
      nlohmann::json::parse(read_text_file(path + ".json"));
  EmbeddingCache file = EmbeddingCache::load(path);
  if (manifest.at("dim").get<int>() != file.dim()) {
    throw ValidationError("corpus manifest width disagrees with " + path);
  }
  if (manifest.at("count").get<std::size_t>() != file.size()) {
    throw ValidationError("corpus manifest count disagrees with " + path);
  }
  RetrievalCorpus corpus(file.dim(),
                         manifest.at("built_from").get<std::string>());
  for (const auto& [key, vec] : file.entries()) corpus.append(key, vec);
  return corpus;
}

}  // namespace praim
