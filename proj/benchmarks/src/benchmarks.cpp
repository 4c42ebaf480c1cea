// Microbenchmarks for the hot paths: retrieval scans, the model forward
// pass, CRPS scoring, mask drawing and the offline embedder.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "praim/corpus.hpp"
#include "praim/embedder.hpp"
#include "praim/masks.hpp"
#include "praim/metrics.hpp"
#include "praim/model.hpp"
#include "praim/rng.hpp"

namespace {

constexpr int kDim = 256;

std::vector<float> random_vector(praim::SplitRng& rng, int dim) {
  std::vector<float> v(static_cast<std::size_t>(dim));
  for (float& x : v) x = static_cast<float>(rng.next_gaussian());
  return v;
}

const praim::RetrievalCorpus& shared_corpus() {
  static const praim::RetrievalCorpus corpus = [] {
    praim::SplitRng rng(7);
    std::vector<std::pair<std::string, std::vector<float>>> entries;
    entries.reserve(10000);
    for (int i = 0; i < 10000; ++i) {
      entries.emplace_back("k" + std::to_string(i), random_vector(rng, kDim));
    }
    return praim::RetrievalCorpus::build(entries, "train");
  }();
  return corpus;
}

void bench_retrieval_exact(benchmark::State& state) {
  const praim::RetrievalCorpus& corpus = shared_corpus();
  praim::SplitRng rng(11);
  const std::vector<float> query = random_vector(rng, kDim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(corpus.retrieve(query, 20, false));
  }
}
BENCHMARK(bench_retrieval_exact);

void bench_retrieval_ivf(benchmark::State& state) {
  static const praim::RetrievalCorpus corpus = [] {
    praim::RetrievalCorpus c = shared_corpus();
    c.build_ivf_index(64, 8, 3);
    return c;
  }();
  praim::SplitRng rng(11);
  const std::vector<float> query = random_vector(rng, kDim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(corpus.retrieve(query, 20, false));
  }
}
BENCHMARK(bench_retrieval_ivf);

void bench_forward(benchmark::State& state) {
  praim::ModelDims dims;
  dims.d_emb = kDim;
  dims.d_lat = 32;
  dims.d_stat = 16;
  dims.d_cal = 16;
  dims.d_film = 64;
  dims.layers = 2;
  dims.heads = 4;
  dims.window = 7;
  dims.n_stations = 4;
  const praim::ModelParameters params = praim::ModelParameters::init(dims, 5);

  praim::SplitRng rng(13);
  praim::ModelInput input;
  input.query_embedding = Eigen::VectorXd::NullaryExpr(
      dims.d_emb, [&rng](Eigen::Index) { return rng.next_gaussian(); });
  input.neighbor_embeddings = Eigen::MatrixXd::NullaryExpr(
      20, dims.d_emb,
      [&rng](Eigen::Index, Eigen::Index) { return rng.next_gaussian(); });
  input.station_index = 1;
  for (int i = 0; i < 6; ++i) input.calendar(i) = 0.5;
  input.demand_masked_norm = Eigen::VectorXd::NullaryExpr(
      dims.window, [&rng](Eigen::Index) { return rng.next_gaussian(); });
  input.mask.assign(static_cast<std::size_t>(dims.window), 0);
  input.mask[2] = 1;
  input.demand_masked_norm(2) = 0.0;

  for (auto _ : state) {
    benchmark::DoNotOptimize(praim::forward(
        params, input, praim::LatentMode::kDeterministic, nullptr));
  }
}
BENCHMARK(bench_forward);

void bench_crps(benchmark::State& state) {
  double truth = -5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(praim::gaussian_crps(truth, 0.0, 1.3));
    truth += 0.01;
    if (truth > 5.0) truth = -5.0;
  }
}
BENCHMARK(bench_crps);

void bench_mask_ls(benchmark::State& state) {
  praim::SplitRng rng(17);
  for (auto _ : state) {
    benchmark::DoNotOptimize(praim::gen_mask_random(7, 0.5, rng));
  }
}
BENCHMARK(bench_mask_ls);

void bench_mask_dm(benchmark::State& state) {
  praim::MissingnessProfile profile;
  profile.gap_length_pmf = {{1, 0.6}, {2, 0.3}, {3, 0.1}};
  profile.dow_weights = {0.2, 0.1, 0.1, 0.1, 0.1, 0.2, 0.2};
  profile.seasonal_weights.fill(1.0 / 12.0);
  profile.spacing_pmf = {{3, 0.5}, {5, 0.5}};
  praim::SplitRng rng(19);
  const praim::Date start{2024, 3, 4};
  for (auto _ : state) {
    benchmark::DoNotOptimize(praim::gen_mask_dm(profile, 28, start, 0.2, rng));
  }
}
BENCHMARK(bench_mask_dm);

void bench_stub_embed(benchmark::State& state) {
  praim::StubEmbedder embedder(kDim, 23);
  const std::vector<std::string> prompts(
      8,
      "Station S1 over 7 days. Demand: 12.5, [MISSING], 14.0, 13.2, "
      "[MISSING], 15.1, 12.9. Anchor Monday 2024-03-04.");
  for (auto _ : state) {
    benchmark::DoNotOptimize(embedder.embed_batch(prompts));
  }
}
BENCHMARK(bench_stub_embed);

}  // namespace

BENCHMARK_MAIN();
