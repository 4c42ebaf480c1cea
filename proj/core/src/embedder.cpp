#include "praim/embedder.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace praim {
namespace {

// Prompts per remote request; max_inflight requests run concurrently.
constexpr std::size_t kChunkSize = 16;

std::pair<std::string, std::string> split_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  const std::size_t path_start =
      url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::vector<float> Embedder::embed(const std::string& prompt) {
  return embed_batch({prompt})[0];
}

StubEmbedder::StubEmbedder(int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim < 1) throw ValidationError("embedding width must be positive");
}

std::vector<std::vector<float>> StubEmbedder::embed_batch(
    const std::vector<std::string>& prompts) {
  std::uint8_t seed_bytes[8];
  for (int i = 0; i < 8; ++i) {
    seed_bytes[i] = static_cast<std::uint8_t>((seed_ >> (8 * i)) & 0xff);
  }
  const std::uint64_t state0 = fnv1a64(seed_bytes, sizeof(seed_bytes));

  std::vector<std::vector<float>> out;
  out.reserve(prompts.size());
  for (const auto& prompt : prompts) {
    std::vector<double> counts(static_cast<std::size_t>(dim_), 0.0);
    const std::size_t grams =
        prompt.size() >= 3 ? prompt.size() - 2 : (prompt.empty() ? 0 : 1);
    for (std::size_t i = 0; i < grams; ++i) {
      const std::size_t len = std::min<std::size_t>(3, prompt.size() - i);
      const std::uint64_t h = fnv1a64(prompt.data() + i, len, state0);
      const std::size_t bucket =
          static_cast<std::size_t>(h % static_cast<std::uint64_t>(dim_));
      counts[bucket] += ((h >> 32) & 1) ? 1.0 : -1.0;
    }
    double norm_sq = 0.0;
    for (double c : counts) norm_sq += c * c;
    std::vector<float> vec(static_cast<std::size_t>(dim_));
    if (norm_sq == 0.0) {
      vec[0] = 1.0f;  // degenerate prompt; keep the unit-norm invariant
    } else {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (std::size_t j = 0; j < counts.size(); ++j) {
        vec[j] = static_cast<float>(counts[j] * inv);
      }
    }
    out.push_back(std::move(vec));
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(const EmbedConfig& cfg) : cfg_(cfg) {
  if (cfg_.endpoint.empty()) {
    throw ValidationError("remote embedder requires an endpoint");
  }
  if (!cfg_.api_key_env.empty()) {
    if (const char* value = std::getenv(cfg_.api_key_env.c_str())) {
      api_key_ = value;
    }
  }
}

std::vector<std::vector<float>> RemoteEmbedder::request_chunk(
    const std::vector<std::string>& prompts, std::size_t first_index) {
  const auto [base, path] = split_url(cfg_.endpoint);

  nlohmann::json body;
  body["input"] = prompts;
  body["model"] = cfg_.model;
  const std::string payload = body.dump();

  std::string response;
  std::string last_error = "no attempt made";
  bool ok = false;
  for (int attempt = 0; attempt <= cfg_.retries && !ok; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(cfg_.backoff_ms * (1 << (attempt - 1))));
    }
    httplib::Client client(base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(60, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) {
      headers.emplace("Authorization", "Bearer " + api_key_);
    }
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    response = res->body;
    ok = true;
  }
  if (!ok) {
    throw EmbedTransportError("embedding request failed after " +
                                  std::to_string(cfg_.retries + 1) +
                                  " attempts: " + last_error,
                              first_index);
  }

  nlohmann::json doc = nlohmann::json::parse(response, nullptr, false);
  if (doc.is_discarded() || !doc.contains("data") || !doc["data"].is_array() ||
      doc["data"].size() != prompts.size()) {
    throw EmbedTransportError("malformed embedding response", first_index);
  }
  std::vector<std::vector<float>> out;
  out.reserve(prompts.size());
  for (const auto& item : doc["data"]) {
    const auto& emb = item.at("embedding");
    if (static_cast<int>(emb.size()) != cfg_.dim) {
      throw ValidationError("embedding dimension mismatch: provider returned " +
                            std::to_string(emb.size()) + ", config says " +
                            std::to_string(cfg_.dim));
    }
    std::vector<float> vec(emb.size());
    for (std::size_t j = 0; j < emb.size(); ++j) {
      const double v = emb[j].get<double>();
      if (!std::isfinite(v)) {
        throw ValidationError("provider returned a non-finite embedding value");
      }
      vec[j] = static_cast<float>(v);
    }
    out.push_back(std::move(vec));
  }
  return out;
}

std::vector<std::vector<float>> RemoteEmbedder::embed_batch(
    const std::vector<std::string>& prompts) {
  std::vector<std::vector<float>> results(prompts.size());
  if (prompts.empty()) return results;

  const std::size_t chunk_count = (prompts.size() + kChunkSize - 1) / kChunkSize;
  const std::size_t workers = std::min<std::size_t>(
      static_cast<std::size_t>(cfg_.max_inflight), chunk_count);

  std::atomic<std::size_t> next_chunk{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run = [&]() {
    for (;;) {
      const std::size_t c = next_chunk.fetch_add(1);
      if (c >= chunk_count) return;
      {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (failure) return;
      }
      const std::size_t first = c * kChunkSize;
      const std::size_t last = std::min(first + kChunkSize, prompts.size());
      try {
        std::vector<std::string> chunk(prompts.begin() + first,
                                       prompts.begin() + last);
        auto vecs = request_chunk(chunk, first);
        for (std::size_t i = 0; i < vecs.size(); ++i) {
          results[first + i] = std::move(vecs[i]);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::unique_ptr<Embedder> make_embedder(const EmbedConfig& cfg,
                                        std::uint64_t stub_seed) {
  if (cfg.provider == "stub") {
    return std::make_unique<StubEmbedder>(cfg.dim, stub_seed);
  }
  if (cfg.provider == "remote") {
    return std::make_unique<RemoteEmbedder>(cfg);
  }
  throw ValidationError("unknown embed provider '" + cfg.provider + "'");
}

}  // namespace praim
