#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "praim/common.hpp"
#include "praim/config.hpp"

namespace praim {

/// Transport failure after bounded retries; carries the index of the first
/// prompt in the failing request so callers can name the key.
class EmbedTransportError : public IoError {
 public:
  EmbedTransportError(const std::string& message, std::size_t prompt_index)
      : IoError(message), prompt_index_(prompt_index) {}
  std::size_t prompt_index() const { return prompt_index_; }

 private:
  std::size_t prompt_index_;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual int dim() const = 0;
  virtual std::string provider_tag() const = 0;

  // One finite vector of dim() floats per prompt, in input order.
  virtual std::vector<std::vector<float>> embed_batch(
      const std::vector<std::string>& prompts) = 0;

  std::vector<float> embed(const std::string& prompt);
};

/// Offline deterministic provider: character 3-grams hashed into signed
/// buckets, L2-normalized. Any width, no dependencies.
class StubEmbedder : public Embedder {
 public:
  StubEmbedder(int dim, std::uint64_t seed);

  int dim() const override { return dim_; }
  std::string provider_tag() const override { return "stub"; }
  std::vector<std::vector<float>> embed_batch(
      const std::vector<std::string>& prompts) override;

 private:
  int dim_;
  std::uint64_t seed_;
};

/// JSON-over-HTTP provider: POST {"input": [...], "model": name}, response
/// {"data": [{"embedding": [...]}]}. Bounded retries with exponential
/// backoff; a response width different from the configured dim is fatal.
class RemoteEmbedder : public Embedder {
 public:
  explicit RemoteEmbedder(const EmbedConfig& cfg);

  int dim() const override { return cfg_.dim; }
  std::string provider_tag() const override { return "remote:" + cfg_.model; }
  std::vector<std::vector<float>> embed_batch(
      const std::vector<std::string>& prompts) override;

 private:
  std::vector<std::vector<float>> request_chunk(
      const std::vector<std::string>& prompts, std::size_t first_index);

  EmbedConfig cfg_;
  std::string api_key_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedConfig& cfg,
                                        std::uint64_t stub_seed);

}  // namespace praim
