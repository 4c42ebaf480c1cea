#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "praim/checkpoint.hpp"
#include "praim/common.hpp"
#include "praim/corpus.hpp"
#include "praim/embedder.hpp"
#include "praim/embedding_cache.hpp"
#include "praim/losses.hpp"
#include "praim/model.hpp"
#include "praim/rng.hpp"

// After the Eigen-using headers: the socket headers leak short macro names.
#include "httplib.h"
#include "json.hpp"

#include "test_support.hpp"

using namespace praim;

namespace {

double l2(const std::vector<float>& v) {
  double s = 0.0;
  for (const float x : v) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("stub embedder is deterministic, unit-norm and width-faithful") {
  StubEmbedder e(64, 42);
  const auto a = e.embed("charging demand at S1");
  const auto b = e.embed("charging demand at S1");
  CHECK(a == b);
  CHECK(a.size() == 64);
  CHECK(l2(a) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(l2(e.embed("")) == doctest::Approx(1.0).epsilon(1e-6));

  const auto c = e.embed("charging demand at S2");
  CHECK(a != c);

  StubEmbedder other(64, 43);
  CHECK(other.embed("charging demand at S1") != a);

  const auto batch = e.embed_batch({"x", "y", "x"});
  CHECK(batch[0] == batch[2]);
  CHECK(batch[0] != batch[1]);

  CHECK_THROWS_AS(StubEmbedder(0, 1), ValidationError);
}

TEST_CASE("embedder factory dispatches on the provider name") {
  EmbedConfig cfg;
  cfg.provider = "stub";
  cfg.dim = 16;
  const auto stub = make_embedder(cfg, 7);
  CHECK(stub->provider_tag() == "stub");
  CHECK(stub->dim() == 16);

  cfg.provider = "remote";
  CHECK_THROWS_AS(make_embedder(cfg, 7), ValidationError);  // no endpoint
  cfg.endpoint = "http://127.0.0.1:1/v1/embeddings";
  CHECK(make_embedder(cfg, 7)->provider_tag() == "remote:praim-embed");

  cfg.provider = "imaginary";
  CHECK_THROWS_AS(make_embedder(cfg, 7), ValidationError);
}

namespace {

/// Local embedding endpoint for exercising the HTTP provider.
class FakeProvider {
 public:
  explicit FakeProvider(int dim) : dim_(dim) {
    server_.Post("/v1/embeddings", [this](const httplib::Request& req,
                                          httplib::Response& res) {
      requests_.fetch_add(1);
      last_auth_ = req.get_header_value("Authorization");
      if (fail_first_ > 0) {
        --fail_first_;
        res.status = 500;
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      last_model_ = body.at("model").get<std::string>();
      nlohmann::json data = nlohmann::json::array();
      for (const auto& prompt : body.at("input")) {
        const std::string text = prompt.get<std::string>();
        std::vector<double> vec(static_cast<std::size_t>(reply_dim_), 0.0);
        for (std::size_t i = 0; i < vec.size() && i < text.size(); ++i) {
          vec[i] = static_cast<double>(text[i]) / 128.0;
        }
        data.push_back({{"embedding", vec}});
      }
      res.set_content(nlohmann::json({{"data", data}}).dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    reply_dim_ = dim_;
  }

  ~FakeProvider() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/embeddings";
  }

  void fail_next(int n) { fail_first_ = n; }
  void reply_width(int d) { reply_dim_ = d; }
  int requests() const { return requests_.load(); }
  const std::string& last_auth() const { return last_auth_; }
  const std::string& last_model() const { return last_model_; }

 private:
  int dim_;
  int reply_dim_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  int fail_first_ = 0;
  std::string last_auth_;
  std::string last_model_;
};

EmbedConfig remote_config(const FakeProvider& p, int dim) {
  EmbedConfig cfg;
  cfg.provider = "remote";
  cfg.endpoint = p.endpoint();
  cfg.dim = dim;
  cfg.retries = 2;
  cfg.backoff_ms = 1;
  cfg.max_inflight = 2;
  return cfg;
}

}  // namespace

TEST_CASE("remote embedder round-trips through a local endpoint") {
  FakeProvider provider(8);
  EmbedConfig cfg = remote_config(provider, 8);
  cfg.api_key_env = "PRAIM_TEST_KEY";
  setenv("PRAIM_TEST_KEY", "sekrit", 1);
  RemoteEmbedder remote(cfg);
  const auto out = remote.embed_batch({"alpha", "bravo"});
  REQUIRE(out.size() == 2);
  CHECK(out[0].size() == 8);
  CHECK(out[0][0] == doctest::Approx('a' / 128.0));
  CHECK(out[1][0] == doctest::Approx('b' / 128.0));
  CHECK(provider.last_auth() == "Bearer sekrit");
  CHECK(provider.last_model() == "praim-embed");
  unsetenv("PRAIM_TEST_KEY");
}

TEST_CASE("remote embedder retries transient failures") {
  FakeProvider provider(4);
  provider.fail_next(2);
  RemoteEmbedder remote(remote_config(provider, 4));
  const auto out = remote.embed_batch({"hello"});
  CHECK(out[0].size() == 4);
  CHECK(provider.requests() == 3);  // two 500s, then success
}

TEST_CASE("remote embedder gives up after the retry budget") {
  FakeProvider provider(4);
  provider.fail_next(100);
  RemoteEmbedder remote(remote_config(provider, 4));
  try {
    remote.embed_batch({"p0"});
    FAIL("expected a transport error");
  } catch (const EmbedTransportError& e) {
    CHECK(e.prompt_index() == 0);
  }
  CHECK(provider.requests() == 3);  // initial + 2 retries
}

TEST_CASE("remote embedder treats a width mismatch as fatal") {
  FakeProvider provider(4);
  provider.reply_width(5);
  RemoteEmbedder remote(remote_config(provider, 4));
  CHECK_THROWS_AS(remote.embed_batch({"p"}), ValidationError);
  CHECK(provider.requests() == 1);  // semantic error, not retried
}

TEST_CASE("embedding cache round-trips bit-exactly and keeps the last write") {
  testsupport::TempDir tmp("cache");
  const std::string path = tmp.file("emb.bin");
  {
    EmbeddingCache cache(path, 3);
    CHECK(cache.size() == 0);
    cache.put("S1|2024-01-07", {0.125f, -2.5f, 1e-30f});
    cache.put("S2|2024-01-07", {1.0f, 2.0f, 3.0f});
    cache.flush();
    cache.put("S1|2024-01-07", {9.0f, 8.0f, 7.0f});  // overwrite
    cache.flush();
  }
  EmbeddingCache back = EmbeddingCache::load(path);
  CHECK(back.dim() == 3);
  CHECK(back.size() == 2);
  REQUIRE(back.get("S1|2024-01-07") != nullptr);
  CHECK(*back.get("S1|2024-01-07") == std::vector<float>{9.0f, 8.0f, 7.0f});
  CHECK(*back.get("S2|2024-01-07") == std::vector<float>{1.0f, 2.0f, 3.0f});
  CHECK(back.contains("S1|2024-01-07"));
  CHECK_FALSE(back.contains("S3|2024-01-07"));

  // Reopening with the declared width works; a different width does not.
  CHECK_NOTHROW(EmbeddingCache(path, 3));
  CHECK_THROWS_AS(EmbeddingCache(path, 4), ValidationError);
  CHECK_THROWS_AS(back.put("k", {1.0f}), ValidationError);  // wrong width
}

TEST_CASE("cache flushes append instead of rewriting") {
  testsupport::TempDir tmp("cache_append");
  const std::string path = tmp.file("emb.bin");
  EmbeddingCache cache(path, 2);
  cache.put("a", {1.0f, 2.0f});
  cache.flush();
  const auto first = std::filesystem::file_size(path);
  cache.flush();  // nothing pending
  CHECK(std::filesystem::file_size(path) == first);
  cache.put("b", {3.0f, 4.0f});
  cache.flush();
  CHECK(std::filesystem::file_size(path) > first);
  CHECK(EmbeddingCache::load(path).size() == 2);
}

namespace {

RetrievalCorpus toy_corpus() {
  return RetrievalCorpus::build(
      {
          {"A", {1.0f, 0.0f}},
          {"B", {0.8f, 0.6f}},
          {"C", {0.0f, 1.0f}},
          {"D", {1.0f, 0.0f}},  // exact tie with A under a (1, 0) query
      },
      "train");
}

}  // namespace

TEST_CASE("corpus retrieval orders by similarity with key tie-breaks") {
  const RetrievalCorpus corpus = toy_corpus();
  CHECK(corpus.size() == 4);
  CHECK(corpus.built_from() == "train");

  const RetrievalResult r = corpus.retrieve({1.0f, 0.0f}, 3, false);
  REQUIRE(r.hits.size() == 3);
  CHECK(r.hits[0].key == "A");  // tie with D, ascending key wins
  CHECK(r.hits[1].key == "D");
  CHECK(r.hits[2].key == "B");
  CHECK(r.hits[0].similarity == doctest::Approx(1.0));
  CHECK(r.hits[2].similarity == doctest::Approx(0.8));
  CHECK_FALSE(r.short_retrieval);

  const RetrievalResult self =
      corpus.retrieve({1.0f, 0.0f}, 3, true, "A");
  CHECK(self.hits[0].key == "D");

  const RetrievalResult filtered = corpus.retrieve(
      {1.0f, 0.0f}, 3, false, "",
      [](const std::string& key) { return key == "B" || key == "C"; });
  REQUIRE(filtered.hits.size() == 2);
  CHECK(filtered.hits[0].key == "B");
  CHECK(filtered.short_retrieval);
}

TEST_CASE("corpus rejects duplicates and width mismatches") {
  RetrievalCorpus corpus = toy_corpus();
  CHECK_THROWS_AS(corpus.append("A", {0.5f, 0.5f}), ValidationError);
  CHECK_THROWS_AS(corpus.append("E", {0.5f, 0.5f, 0.5f}), ValidationError);
  CHECK_THROWS_AS(corpus.retrieve({1.0f}, 2, false), ValidationError);
  corpus.append("E", {0.6f, 0.8f});
  CHECK(corpus.size() == 5);
  CHECK(corpus.contains("E"));
}

TEST_CASE("corpus files carry a sidecar manifest and reload faithfully") {
  testsupport::TempDir tmp("corpus");
  const std::string path = tmp.file("corpus.bin");
  const RetrievalCorpus corpus = toy_corpus();
  corpus.save(path);

  const auto side = nlohmann::json::parse(read_text_file(path + ".json"));
  CHECK(side["dim"] == 2);
  CHECK(side["count"] == 4);
  CHECK(side["built_from"] == "train");
  CHECK(side["metric"] == "cosine");
  CHECK(side.contains("version"));

  const RetrievalCorpus back = RetrievalCorpus::load_file(path);
  CHECK(back.size() == 4);
  CHECK(back.built_from() == "train");
  CHECK_FALSE(back.has_ivf_index());
  const auto r = back.retrieve({1.0f, 0.0f}, 2, false);
  CHECK(r.hits[0].key == "A");
  CHECK(back.vector(0) == corpus.vector(0));
}

TEST_CASE("ivf probing every cell matches the exact scan") {
  SplitRng rng(99);
  std::vector<std::pair<std::string, std::vector<float>>> entries;
  for (int i = 0; i < 300; ++i) {
    std::vector<float> v(16);
    for (auto& x : v) x = static_cast<float>(rng.next_gaussian());
    entries.emplace_back("k" + std::to_string(1000 + i), std::move(v));
  }
  RetrievalCorpus corpus = RetrievalCorpus::build(entries, "train");

  std::vector<float> query(16);
  for (auto& x : query) x = static_cast<float>(rng.next_gaussian());
  const RetrievalResult exact = corpus.retrieve(query, 10, false);

  corpus.build_ivf_index(8, 8, 7);  // probe all cells
  CHECK(corpus.has_ivf_index());
  const RetrievalResult ivf = corpus.retrieve(query, 10, false);
  REQUIRE(ivf.hits.size() == exact.hits.size());
  for (std::size_t i = 0; i < ivf.hits.size(); ++i) {
    CHECK(ivf.hits[i].key == exact.hits[i].key);
  }

  corpus.drop_ivf_index();
  CHECK_FALSE(corpus.has_ivf_index());
}

namespace {

ModelDims tiny_dims() {
  ModelDims dims;
  dims.d_emb = 12;
  dims.d_lat = 4;
  dims.d_stat = 4;
  dims.d_cal = 4;
  dims.d_film = 8;
  dims.layers = 2;
  dims.heads = 2;
  dims.window = 5;
  dims.n_stations = 3;
  return dims;
}

ModelInput tiny_input(const ModelDims& dims, std::uint64_t seed) {
  SplitRng rng(seed);
  ModelInput in;
  in.query_embedding = Eigen::VectorXd(dims.d_emb);
  for (int i = 0; i < dims.d_emb; ++i) {
    in.query_embedding(i) = rng.next_gaussian();
  }
  in.neighbor_embeddings = Eigen::MatrixXd(3, dims.d_emb);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < dims.d_emb; ++c) {
      in.neighbor_embeddings(r, c) = rng.next_gaussian();
    }
  }
  in.station_index = 1;
  for (int i = 0; i < 6; ++i) in.calendar(i) = rng.next_double();
  in.demand_masked_norm = Eigen::VectorXd(dims.window);
  in.mask.assign(static_cast<std::size_t>(dims.window), 0);
  in.mask[1] = 1;
  in.mask[3] = 1;
  for (int i = 0; i < dims.window; ++i) {
    in.demand_masked_norm(i) = in.mask[static_cast<std::size_t>(i)]
                                   ? 0.0
                                   : rng.next_gaussian();
  }
  return in;
}

}  // namespace

TEST_CASE("parameter init is seed-deterministic") {
  const ModelDims dims = tiny_dims();
  ModelParameters a = ModelParameters::init(dims, 7);
  ModelParameters b = ModelParameters::init(dims, 7);
  ModelParameters c = ModelParameters::init(dims, 8);
  const auto ra = tensor_refs(a);
  const auto rb = tensor_refs(b);
  const auto rc = tensor_refs(c);
  REQUIRE(ra.size() == rb.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    CHECK(ra[i].name == rb[i].name);
    CHECK(ra[i].size() == rb[i].size());
    for (Eigen::Index j = 0; j < ra[i].size(); ++j) {
      CHECK(ra[i].data[j] == rb[i].data[j]);
      any_diff = any_diff || (ra[i].data[j] != rc[i].data[j]);
    }
  }
  CHECK(any_diff);
}

TEST_CASE("tensor enumeration is stable, unique and excludes the positions") {
  ModelParameters p = ModelParameters::init(tiny_dims(), 1);
  const auto refs = tensor_refs(p);
  std::set<std::string> names;
  for (const auto& r : refs) {
    CHECK(names.insert(r.name).second);
    CHECK(r.size() > 0);
    CHECK(r.name.find("pos") == std::string::npos);
  }
  // Writes through a ref land in the parameter struct.
  for (const auto& r : refs) {
    if (r.name == "out.mean_b") {
      r.data[0] = 3.25;
    }
  }
  CHECK(p.out.mean_b == 3.25);
}

TEST_CASE("positional table is bounded and fixed") {
  const Eigen::MatrixXd pos = sinusoidal_positions(7, 8);
  CHECK(pos.rows() == 7);
  CHECK(pos.cols() == 8);
  CHECK(pos.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  CHECK(pos(0, 0) == doctest::Approx(0.0));  // sin(0)
  CHECK(pos(0, 1) == doctest::Approx(1.0));  // cos(0)
}

TEST_CASE("forward pass produces finite clamped gaussians") {
  const ModelDims dims = tiny_dims();
  const ModelParameters params = ModelParameters::init(dims, 3);
  const ModelInput in = tiny_input(dims, 5);

  ForwardCache cache;
  const GaussianSequence out =
      forward(params, in, LatentMode::kDeterministic, nullptr, &cache);
  REQUIRE(out.mean.size() == dims.window);
  REQUIRE(out.variance.size() == dims.window);
  for (int i = 0; i < dims.window; ++i) {
    CHECK(std::isfinite(out.mean(i)));
    CHECK(out.variance(i) >= kVarianceFloor);
    CHECK(out.variance(i) <= kVarianceCeil);
  }
  CHECK(cache.layers.size() == static_cast<std::size_t>(dims.layers));

  // Deterministic mode is the eps = 0 slice of the stochastic path.
  Eigen::VectorXd zero_eps = Eigen::VectorXd::Zero(dims.d_lat);
  const GaussianSequence stoch =
      forward(params, in, LatentMode::kStochastic, &zero_eps);
  CHECK((stoch.mean - out.mean).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd eps = Eigen::VectorXd::Ones(dims.d_lat);
  const GaussianSequence moved =
      forward(params, in, LatentMode::kStochastic, &eps);
  CHECK((moved.mean - out.mean).cwiseAbs().maxCoeff() > 0.0);

  CHECK_THROWS_AS(forward(params, in, LatentMode::kStochastic, nullptr),
                  ValidationError);
}

TEST_CASE("masked key columns receive no attention") {
  const ModelDims dims = tiny_dims();
  const ModelParameters params = ModelParameters::init(dims, 3);
  const ModelInput in = tiny_input(dims, 5);
  ForwardCache cache;
  forward(params, in, LatentMode::kDeterministic, nullptr, &cache);
  for (const auto& layer : cache.layers) {
    for (const auto& head : layer.heads) {
      for (int q = 0; q < dims.window; ++q) {
        double row = 0.0;
        for (int k = 0; k < dims.window; ++k) {
          if (in.mask[static_cast<std::size_t>(k)]) {
            CHECK(head.attn(q, k) == 0.0);
          }
          row += head.attn(q, k);
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("fusion pools neighbors through a convex attention and a gate") {
  const ModelDims dims = tiny_dims();
  const ModelParameters params = ModelParameters::init(dims, 3);
  const ModelInput in = tiny_input(dims, 5);
  FusionCache cache;
  const Eigen::VectorXd fused = fuse_context(
      params.fusion, in.query_embedding, in.neighbor_embeddings, &cache);
  CHECK(fused.size() == dims.d_emb);
  CHECK(cache.alpha.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cache.alpha.minCoeff() >= 0.0);
  CHECK(cache.gate.minCoeff() > 0.0);
  CHECK(cache.gate.maxCoeff() < 1.0);
  // The fused vector is the gate blend of query and pooled context.
  for (int i = 0; i < dims.d_emb; ++i) {
    const double blend = cache.gate(i) * in.query_embedding(i) +
                         (1.0 - cache.gate(i)) * cache.context(i);
    CHECK(fused(i) == doctest::Approx(blend).epsilon(1e-12));
  }
}

TEST_CASE("loss oracles") {
  Eigen::VectorXd x(2), mu(2), var(2);
  x << 1.0, -2.0;
  mu = x;
  var << 1.0, 1.0;
  CHECK(recon_loss(x, mu, var) ==
        doctest::Approx(kHalfLog2Pi).epsilon(1e-12));

  var << std::exp(1.0), std::exp(1.0);
  // (x - mu)^2 = 0: mean of log(var)/2 + half log 2 pi
  CHECK(recon_loss(x, mu, var) ==
        doctest::Approx(0.5 + kHalfLog2Pi).epsilon(1e-12));

  Eigen::VectorXd m1(1), s1(1);
  m1 << 1.0;
  s1 << 1.0;
  CHECK(kl_loss(m1, s1) == doctest::Approx(0.5).epsilon(1e-12));
  m1 << 0.0;
  s1 << std::sqrt(std::exp(1.0));
  CHECK(kl_loss(m1, s1) ==
        doctest::Approx((std::exp(1.0) - 2.0) / 2.0).epsilon(1e-12));
  CHECK(elbo_loss(2.0, 3.0, 0.1) == doctest::Approx(2.3));
}

TEST_CASE("analytic gradients match finite differences on sampled entries") {
  const ModelDims dims = tiny_dims();
  ModelParameters params = ModelParameters::init(dims, 11);
  const ModelInput in = tiny_input(dims, 13);
  const std::vector<std::size_t> masked_index = {1, 3};
  const std::vector<double> truth_norm = {0.4, -0.9};
  const double theta = 0.1;
  Eigen::VectorXd eps(dims.d_lat);
  SplitRng erng(17);
  for (int i = 0; i < dims.d_lat; ++i) eps(i) = erng.next_gaussian();

  ModelParameters grads = ModelParameters::zeros(dims);
  elbo_with_gradients(params, in, masked_index, truth_norm, theta,
                      LatentMode::kStochastic, &eps, &grads);

  auto loss_at = [&]() {
    return elbo_with_gradients(params, in, masked_index, truth_norm, theta,
                               LatentMode::kStochastic, &eps, nullptr)
        .elbo;
  };

  auto prefs = tensor_refs(params);
  auto grefs = tensor_refs(grads);
  SplitRng pick(23);
  const double h = 1e-5;
  int checked = 0;
  for (std::size_t t = 0; t < prefs.size(); ++t) {
    // A few random entries per tensor keeps this fast; the dense sweep lives
    // in the acceptance harness.
    for (int rep = 0; rep < 3; ++rep) {
      const Eigen::Index j = static_cast<Eigen::Index>(
          pick.next_index(static_cast<std::size_t>(prefs[t].size())));
      const double saved = prefs[t].data[j];
      prefs[t].data[j] = saved + h;
      const double up = loss_at();
      prefs[t].data[j] = saved - h;
      const double down = loss_at();
      prefs[t].data[j] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grefs[t].data[j];
      const double scale =
          std::max({std::abs(numeric), std::abs(analytic), 1.0});
      CHECK_MESSAGE(std::abs(numeric - analytic) / scale < 2e-5,
                    prefs[t].name << "[" << j << "] numeric " << numeric
                                  << " analytic " << analytic);
      ++checked;
    }
  }
  CHECK(checked > 30);
}

TEST_CASE("checkpoints round-trip byte-identically") {
  testsupport::TempDir tmp("ckpt");
  const ModelDims dims = tiny_dims();
  ModelParameters params = ModelParameters::init(dims, 21);
  const std::vector<std::string> stations = {"S1", "S2", "S3"};
  const std::string first = tmp.file("model.ckpt");
  save_checkpoint(first, params, stations, "{\"train\":{\"seed\":21}}");

  const Checkpoint back = load_checkpoint(first);
  CHECK(back.station_ids == stations);
  CHECK(back.config_echo == "{\"train\":{\"seed\":21}}");
  CHECK(back.params.dims == dims);
  CHECK((back.params.pos - params.pos).cwiseAbs().maxCoeff() == 0.0);

  ModelParameters reloaded = back.params;
  auto ra = tensor_refs(params);
  auto rb = tensor_refs(reloaded);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    for (Eigen::Index j = 0; j < ra[i].size(); ++j) {
      CHECK(ra[i].data[j] == doctest::Approx(rb[i].data[j]).epsilon(1e-6));
    }
  }

  const std::string second = tmp.file("model2.ckpt");
  save_checkpoint(second, back.params, back.station_ids, back.config_echo);
  CHECK(read_text_file(first) == read_text_file(second));

  write_text_file(tmp.file("junk.ckpt"), "not a checkpoint");
  CHECK_THROWS(load_checkpoint(tmp.file("junk.ckpt")));
  CHECK_THROWS_AS(load_checkpoint(tmp.file("absent.ckpt")), IoError);
}
