// Acceptance harness: one self-contained check per release criterion,
// printing a PASS/FAIL line each. An optional argv[1] substring restricts
// which criteria run. Exit status is the number of failures.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "praim/baselines.hpp"
#include "praim/checkpoint.hpp"
#include "praim/common.hpp"
#include "praim/config.hpp"
#include "praim/corpus.hpp"
#include "praim/dataset.hpp"
#include "praim/embedding_cache.hpp"
#include "praim/features.hpp"
#include "praim/forecast.hpp"
#include "praim/imputer.hpp"
#include "praim/ingest.hpp"
#include "praim/losses.hpp"
#include "praim/manifest.hpp"
#include "praim/masks.hpp"
#include "praim/metrics.hpp"
#include "praim/model.hpp"
#include "praim/pipeline.hpp"
#include "praim/prompt.hpp"
#include "praim/report.hpp"
#include "praim/rng.hpp"
#include "praim/stats.hpp"
#include "praim/trainer.hpp"

#include "synthetic.hpp"

using namespace praim;

namespace {

class CheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw CheckFailure(detail);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// C1: losses match their closed forms, and the KL term matches a Monte-Carlo
// estimate of the divergence it claims to be.

void check_losses() {
  Eigen::VectorXd x(3), mu(3), var(3);
  x << 0.5, -1.0, 2.0;
  mu = x;
  var.setOnes();
  const double recon = recon_loss(x, mu, var);
  require(std::abs(recon - kHalfLog2Pi) < 1e-12,
          "recon at a perfect unit-variance fit should be half log 2 pi, got " +
              fmt(recon));

  Eigen::VectorXd m1(1), s1(1);
  m1 << 1.0;
  s1 << 1.0;
  require(std::abs(kl_loss(m1, s1) - 0.5) < 1e-12, "KL(N(1,1)||N(0,1)) != 0.5");
  m1 << 0.0;
  s1 << std::sqrt(std::exp(1.0));
  const double kl_e = (std::exp(1.0) - 2.0) / 2.0;
  require(std::abs(kl_loss(m1, s1) - kl_e) < 1e-12,
          "KL(N(0,e)||N(0,1)) != (e-2)/2");

  require(std::abs(elbo_loss(1.25, 0.5, 0.1) - 1.3) < 1e-12,
          "objective is not recon + theta * kl");

  // Monte-Carlo cross-check: KL = E_q[log q(z) - log p(z)].
  Eigen::VectorXd mu2(2), sigma2(2);
  mu2 << 0.5, -0.3;
  sigma2 << 1.2, 0.8;
  const double closed = kl_loss(mu2, sigma2);
  SplitRng rng(1234);
  const int n = 1000000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double term = 0.0;
    for (int d = 0; d < 2; ++d) {
      const double z = mu2(d) + sigma2(d) * rng.next_gaussian();
      const double logq = -0.5 * std::pow((z - mu2(d)) / sigma2(d), 2) -
                          std::log(sigma2(d)) - kHalfLog2Pi;
      const double logp = -0.5 * z * z - kHalfLog2Pi;
      term += logq - logp;
    }
    acc += term;
  }
  const double estimate = acc / n;
  require(std::abs(estimate - closed) < 1e-2,
          "Monte-Carlo KL " + fmt(estimate) + " vs closed form " +
              fmt(closed));
}

// ---------------------------------------------------------------------------
// C2: analytic gradients of the full objective agree with central finite
// differences on every trainable tensor.

ModelDims grad_dims() {
  ModelDims dims;
  dims.d_emb = 8;
  dims.d_lat = 4;
  dims.d_stat = 4;
  dims.d_cal = 4;
  dims.d_film = 8;
  dims.layers = 1;
  dims.heads = 2;
  dims.window = 4;
  dims.n_stations = 2;
  return dims;
}

ModelInput random_input(const ModelDims& dims, int n_neighbors,
                        std::uint64_t seed) {
  SplitRng rng(seed);
  ModelInput in;
  in.query_embedding = Eigen::VectorXd(dims.d_emb);
  for (int i = 0; i < dims.d_emb; ++i) in.query_embedding(i) = rng.next_gaussian();
  in.neighbor_embeddings = Eigen::MatrixXd(n_neighbors, dims.d_emb);
  for (int r = 0; r < n_neighbors; ++r) {
    for (int c = 0; c < dims.d_emb; ++c) {
      in.neighbor_embeddings(r, c) = rng.next_gaussian();
    }
  }
  in.station_index = 1;
  for (int i = 0; i < 6; ++i) in.calendar(i) = 2.0 * rng.next_double() - 1.0;
  in.demand_masked_norm = Eigen::VectorXd(dims.window);
  in.mask.assign(static_cast<std::size_t>(dims.window), 0);
  in.mask[1] = 1;
  in.mask[3] = 1;
  for (int i = 0; i < dims.window; ++i) {
    in.demand_masked_norm(i) =
        in.mask[static_cast<std::size_t>(i)] ? 0.0 : rng.next_gaussian();
  }
  return in;
}

void check_gradients() {
  const ModelDims dims = grad_dims();
  ModelParameters params = ModelParameters::init(dims, 29);
  const ModelInput input = random_input(dims, 3, 31);
  const std::vector<std::size_t> masked_index = {1, 3};
  const std::vector<double> truth_norm = {0.7, -0.4};
  const double theta = 0.1;
  Eigen::VectorXd eps(dims.d_lat);
  SplitRng erng(37);
  for (int i = 0; i < dims.d_lat; ++i) eps(i) = erng.next_gaussian();

  ModelParameters grads = ModelParameters::zeros(dims);
  elbo_with_gradients(params, input, masked_index, truth_norm, theta,
                      LatentMode::kStochastic, &eps, &grads);

  auto loss_at = [&]() {
    return elbo_with_gradients(params, input, masked_index, truth_norm, theta,
                               LatentMode::kStochastic, &eps, nullptr)
        .elbo;
  };

  auto prefs = tensor_refs(params);
  auto grefs = tensor_refs(grads);
  const double h = 1e-5;
  for (std::size_t t = 0; t < prefs.size(); ++t) {
    double num_sq = 0.0, ana_sq = 0.0, diff_sq = 0.0;
    for (Eigen::Index j = 0; j < prefs[t].size(); ++j) {
      const double saved = prefs[t].data[j];
      prefs[t].data[j] = saved + h;
      const double up = loss_at();
      prefs[t].data[j] = saved - h;
      const double down = loss_at();
      prefs[t].data[j] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grefs[t].data[j];
      num_sq += numeric * numeric;
      ana_sq += analytic * analytic;
      diff_sq += (numeric - analytic) * (numeric - analytic);
    }
    const double scale = std::max(std::sqrt(num_sq), std::sqrt(ana_sq));
    if (scale < 1e-7) continue;  // tensor with no influence on this input
    const double rel = std::sqrt(diff_sq) / scale;
    require(rel < 1e-4, "tensor " + prefs[t].name + " gradient mismatch " +
                            fmt(rel));
  }
}

// ---------------------------------------------------------------------------
// C3: masked steps receive zero attention mass and their raw values cannot
// influence the forward pass.

void check_attention_masking() {
  const ModelDims dims = grad_dims();
  const ModelParameters params = ModelParameters::init(dims, 41);
  const ModelInput input = random_input(dims, 3, 43);
  ForwardCache cache;
  forward(params, input, LatentMode::kDeterministic, nullptr, &cache);
  double worst = 0.0;
  for (const auto& layer : cache.layers) {
    for (const auto& head : layer.heads) {
      for (int q = 0; q < dims.window; ++q) {
        for (int k = 0; k < dims.window; ++k) {
          if (input.mask[static_cast<std::size_t>(k)]) {
            worst = std::max(worst, std::abs(head.attn(q, k)));
          }
        }
      }
    }
  }
  require(worst <= 1e-12,
          "attention mass on masked keys reaches " + fmt(worst));

  // End-to-end insensitivity: perturb a masked raw value, rebuild the sample
  // and the outputs must match bit for bit.
  RawWindow window;
  window.station_id = "S1";
  window.anchor = 6;
  window.anchor_date = {2024, 3, 10};
  window.demand_raw = {12.0, 15.0, 11.0, 18.0};
  window.real_missing.assign(4, 0);
  window.curated = true;
  const std::vector<std::uint8_t> mask = {0, 1, 0, 1};

  RawWindow perturbed = window;
  perturbed.demand_raw[1] += 1234.5;
  perturbed.demand_raw[3] -= 77.25;

  const WindowSample a = make_window_sample(window, mask);
  const WindowSample b = make_window_sample(perturbed, mask);
  require(a.norm_mean == b.norm_mean && a.norm_std == b.norm_std,
          "window statistics leak masked raw values");

  auto to_input = [&](const WindowSample& s) {
    ModelInput in = random_input(dims, 3, 47);  // fixed context
    in.demand_masked_norm = Eigen::Map<const Eigen::VectorXd>(
        s.demand_masked_norm.data(),
        static_cast<Eigen::Index>(s.demand_masked_norm.size()));
    in.mask = s.mask;
    return in;
  };
  const GaussianSequence ya =
      forward(params, to_input(a), LatentMode::kDeterministic);
  const GaussianSequence yb =
      forward(params, to_input(b), LatentMode::kDeterministic);
  require((ya.mean - yb.mean).cwiseAbs().maxCoeff() == 0.0 &&
              (ya.variance - yb.variance).cwiseAbs().maxCoeff() == 0.0,
          "masked raw values changed the forward output");
}

// ---------------------------------------------------------------------------
// C4: the sample-survival probability matches its closed form and decays
// monotonically in every argument.

void check_survival_probability() {
  require(std::abs(usable_sample_probability(0.2, 14, 7, 0) -
                   0.009223372036854787) < 1e-15,
          "survival probability oracle (0.2, 14, 7, 0)");
  require(std::abs(usable_sample_probability(0.1, 14, 7, 1) -
                   0.011972515182562033) < 1e-15,
          "survival probability oracle (0.1, 14, 7, 1)");

  const double deltas[] = {0.05, 0.1, 0.2, 0.3, 0.5};
  double prev = 2.0;
  for (const double d : deltas) {
    const double p = usable_sample_probability(d, 14, 7, 1);
    require(p < prev, "not decreasing in the missing rate");
    prev = p;
  }
  prev = 2.0;
  for (const int t : {7, 14, 21, 28}) {
    const double p = usable_sample_probability(0.1, t, 7, 1);
    require(p < prev, "not decreasing in the lookback");
    prev = p;
  }
  prev = 2.0;
  for (const int h : {1, 3, 7, 14}) {
    const double p = usable_sample_probability(0.1, 14, h, 1);
    require(p < prev, "not decreasing in the horizon");
    prev = p;
  }
  prev = 2.0;
  for (const int c : {0, 1, 2, 4}) {
    const double p = usable_sample_probability(0.1, 14, 7, c);
    require(p < prev, "not decreasing in the neighbor count");
    prev = p;
  }
}

// ---------------------------------------------------------------------------
// C5: the closed-form CRPS agrees with numeric quadrature and the interval
// coverage estimator is statistically faithful.

double crps_quadrature(double x, double mu, double sigma) {
  // CRPS = sigma * int (Phi(u) - 1{u >= z})^2 du, split at the kink.
  const double z = (x - mu) / sigma;
  auto simpson = [&](double lo, double hi, bool right_of_z) {
    const int steps = 2400;  // even
    const double h = (hi - lo) / steps;
    double sum = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double u = lo + h * i;
      double f = normal_cdf(u) - (right_of_z ? 1.0 : 0.0);
      f *= f;
      const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      sum += w * f;
    }
    return sum * h / 3.0;
  };
  const double lo = -12.0, hi = 12.0;
  return sigma * (simpson(lo, z, false) + simpson(z, hi, true));
}

void check_probabilistic_scores() {
  const double cases[][3] = {
      {0.0, 0.0, 1.0}, {1.3, 0.2, 0.7}, {-2.0, 1.0, 3.0},
      {25.0, 20.0, 10.0}, {0.5, 0.5, 0.05},
  };
  for (const auto& c : cases) {
    const double closed = gaussian_crps(c[0], c[1], c[2]);
    const double quad = crps_quadrature(c[0], c[1], c[2]);
    require(std::abs(closed - quad) <= 1e-6 * std::max(1.0, c[2]),
            "CRPS(" + fmt(c[0]) + "," + fmt(c[1]) + "," + fmt(c[2]) +
                ") closed " + fmt(closed) + " vs quadrature " + fmt(quad));
  }

  // Coverage: draws from the stated predictive distribution must hit the
  // central intervals at their nominal rates.
  const int n = 10000;
  std::vector<double> mean(n), var(n), truth(n);
  std::vector<std::size_t> idx(n);
  SplitRng rng(2024);
  for (int i = 0; i < n; ++i) {
    mean[static_cast<std::size_t>(i)] = 3.0 * rng.next_gaussian();
    const double sigma = 0.5 + 2.0 * rng.next_double();
    var[static_cast<std::size_t>(i)] = sigma * sigma;
    truth[static_cast<std::size_t>(i)] =
        mean[static_cast<std::size_t>(i)] + sigma * rng.next_gaussian();
    idx[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
  }
  const ProbMetrics m =
      prob_metrics(mean, var, truth, idx, {0.5, 0.8, 0.9, 0.95});
  for (const auto& [alpha, coverage] : m.icp) {
    require(std::abs(coverage - alpha) <= 0.02,
            "coverage at " + fmt(alpha) + " is " + fmt(coverage));
  }
}

// ---------------------------------------------------------------------------
// C6: exact retrieval equals an independent scan, and the inverted-file
// index stays within the recall budget at its default settings.

void check_retrieval() {
  const int dim = 256, count = 10000, k = 20, queries = 100, clusters = 64;
  SplitRng rng(55);
  // Clustered corpus, the regime an inverted-file index targets: prompt
  // embeddings group by station and season rather than filling the sphere.
  std::vector<std::vector<double>> centers(
      clusters, std::vector<double>(static_cast<std::size_t>(dim)));
  for (auto& center : centers) {
    for (auto& x : center) x = rng.next_gaussian();
  }
  auto draw_point = [&]() {
    const std::size_t c = rng.next_index(clusters);
    std::vector<float> v(static_cast<std::size_t>(dim));
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] = static_cast<float>(centers[c][j] + 0.25 * rng.next_gaussian());
    }
    return v;
  };
  std::vector<std::pair<std::string, std::vector<float>>> entries;
  entries.reserve(count);
  for (int i = 0; i < count; ++i) {
    char key[16];
    std::snprintf(key, sizeof(key), "e%05d", i);
    entries.emplace_back(key, draw_point());
  }
  RetrievalCorpus corpus = RetrievalCorpus::build(entries, "train");

  std::vector<std::vector<float>> query_vecs;
  for (int q = 0; q < queries; ++q) query_vecs.push_back(draw_point());

  // Independent full scan with the same tie rule.
  auto brute = [&](const std::vector<float>& query) {
    double qn = 0.0;
    for (const float x : query) qn += static_cast<double>(x) * x;
    qn = std::sqrt(qn);
    std::vector<std::pair<double, std::string>> scored;
    scored.reserve(entries.size());
    for (const auto& [key, vec] : entries) {
      double dot = 0.0, nn = 0.0;
      for (int d = 0; d < dim; ++d) {
        dot += static_cast<double>(query[static_cast<std::size_t>(d)]) *
               vec[static_cast<std::size_t>(d)];
        nn += static_cast<double>(vec[static_cast<std::size_t>(d)]) *
              vec[static_cast<std::size_t>(d)];
      }
      scored.emplace_back(dot / (qn * std::sqrt(nn)), key);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    scored.resize(k);
    return scored;
  };

  for (const auto& query : query_vecs) {
    const RetrievalResult got = corpus.retrieve(query, k, false);
    const auto want = brute(query);
    require(got.hits.size() == static_cast<std::size_t>(k),
            "exact scan returned too few hits");
    for (int i = 0; i < k; ++i) {
      require(got.hits[static_cast<std::size_t>(i)].key ==
                  want[static_cast<std::size_t>(i)].second,
              "exact scan differs from the independent scan at rank " +
                  std::to_string(i));
    }
  }

  corpus.build_ivf_index(64, 8, derive_seed(42, "ivf"));
  double recall_sum = 0.0;
  for (const auto& query : query_vecs) {
    const auto want = brute(query);
    std::set<std::string> truth_keys;
    for (const auto& [sim, key] : want) truth_keys.insert(key);
    const RetrievalResult got = corpus.retrieve(query, k, false);
    int hit = 0;
    for (const auto& h : got.hits) hit += truth_keys.count(h.key) ? 1 : 0;
    recall_sum += static_cast<double>(hit) / k;
  }
  const double recall = recall_sum / queries;
  require(recall >= 0.99, "IVF recall@" + std::to_string(k) + " is " +
                              fmt(recall));
}

// ---------------------------------------------------------------------------
// C7: random masks hit their exact count uniformly; profile-driven masks
// reproduce real gap structure far better than random ones.

void check_mask_generators() {
  SplitRng rng(77);
  for (const auto& [L, rate] : std::vector<std::pair<int, double>>{
           {7, 0.3}, {7, 0.9}, {14, 0.5}, {28, 0.15}}) {
    const auto mask = gen_mask_random(L, rate, rng);
    const auto want = std::clamp<long>(
        static_cast<long>(std::floor(rate * L)), 1L, static_cast<long>(L - 1));
    const long got = std::count(mask.begin(), mask.end(), 1);
    require(got == want, "mask count at L=" + std::to_string(L) +
                             " rate=" + fmt(rate));
  }

  // Positional uniformity over many draws.
  const int L = 14, draws = 10000;
  std::vector<double> freq(static_cast<std::size_t>(L), 0.0);
  for (int d = 0; d < draws; ++d) {
    const auto mask = gen_mask_random(L, 0.5, rng);
    for (int i = 0; i < L; ++i) freq[static_cast<std::size_t>(i)] += mask[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < L; ++i) {
    const double p = freq[static_cast<std::size_t>(i)] / draws;
    // 4 sigma around 0.5 at n = 10000
    require(std::abs(p - 0.5) < 0.02,
            "position " + std::to_string(i) + " frequency " + fmt(p));
  }

  // Structure fidelity: a profile-driven mask should match held-out real
  // gap structure; a random mask of the same budget should not.
  const int length = 700;
  const Date start{2022, 1, 3};  // a Monday
  const MissingnessProfile source = testkit::blocky_profile();
  int dm_wins_gap = 0, dm_wins_dow = 0, dm_wins_ac = 0, rounds = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SplitRng real_rng(seed);
    const DmMaskResult real = gen_mask_dm(source, length, start, 0.2, real_rng);

    // Fit the profile back from the realized gaps, as a run on real data
    // would.
    DailyDemandSeries carrier;
    carrier.station_id = "R";
    carrier.start_date = start;
    carrier.end_date = add_days(start, length - 1);
    carrier.demand.assign(static_cast<std::size_t>(length), 1.0);
    carrier.missing = real.mask;
    const MissingnessProfile fitted = fit_missingness_profile({carrier});

    SplitRng synth_rng(seed + 1000);
    const DmMaskResult dm =
        gen_mask_dm(fitted, length, start, 0.2, synth_rng);
    SplitRng ls_rng(seed + 1000);
    const auto ls = gen_mask_random(length, 0.2, ls_rng);

    const MaskFidelityReport fdm =
        mask_fidelity(real.mask, start, dm.mask, start);
    const MaskFidelityReport fls = mask_fidelity(real.mask, start, ls, start);
    require(fdm.gap_defined && fls.gap_defined, "gap PMFs undefined");
    require(fdm.lag1_defined && fls.lag1_defined, "autocorrelation undefined");
    dm_wins_gap += fdm.gap_wd < fls.gap_wd ? 1 : 0;
    dm_wins_dow += fdm.dow_js < fls.dow_js ? 1 : 0;
    dm_wins_ac += fdm.lag1_ac_abs_diff < fls.lag1_ac_abs_diff ? 1 : 0;
    ++rounds;
  }
  require(dm_wins_gap >= 9, "profiled masks beat random on gap lengths only " +
                                std::to_string(dm_wins_gap) + "/10 times");
  require(dm_wins_dow >= 9, "profiled masks beat random on weekday shape only " +
                                std::to_string(dm_wins_dow) + "/10 times");
  require(dm_wins_ac >= 9,
          "profiled masks beat random on autocorrelation only " +
              std::to_string(dm_wins_ac) + "/10 times");
}

// ---------------------------------------------------------------------------
// Shared synthetic end-to-end fixture for the model-quality criteria: a
// four-station fleet with a strong weekly shape, trained once.

struct Fixture {
  std::string root;
  Config cfg;
  std::vector<DailyDemandSeries> fleet;
  std::string series_dir, cache_path, corpus_path, ckpt_path, log_path;
  bool ready = false;
};

Fixture g_fixture;

Fixture& fixture() {
  Fixture& f = g_fixture;
  if (f.ready) return f;
  f.root = (std::filesystem::temp_directory_path() /
            ("praim_acceptance_" + std::to_string(::getpid())))
               .string();
  std::filesystem::create_directories(f.root);
  f.cfg = testkit::small_config(40);
  f.fleet = testkit::sine_fleet(510, 2.0, 42);
  f.series_dir = f.root + "/series";
  testkit::write_series_dir(f.fleet, f.series_dir);
  f.cache_path = f.root + "/embeddings.bin";
  f.corpus_path = f.root + "/corpus.bin";
  f.ckpt_path = f.root + "/model.ckpt";
  f.log_path = f.root + "/train.log.jsonl";

  RunManifest manifest;
  run_embed(f.cfg, f.series_dir, f.cache_path, manifest);
  run_corpus(f.cfg, f.series_dir, f.cache_path, f.corpus_path, manifest);
  run_train(f.cfg, f.series_dir, f.cache_path, f.corpus_path, f.ckpt_path,
            f.log_path, manifest);
  f.ready = true;
  return f;
}

Eigen::VectorXd to_eigen(const std::vector<float>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = static_cast<double>(v[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// C8: on held-out windows the trained model beats interpolation at every
// masked-count level and beats mean-fill by a wide margin once most of the
// window is hidden.

void check_training_quality() {
  Fixture& f = fixture();
  const Checkpoint ckpt = load_checkpoint(f.ckpt_path);
  RetrievalCorpus corpus = RetrievalCorpus::load_file(f.corpus_path);
  const EmbeddingCache cache = EmbeddingCache::load(f.cache_path);
  const auto series = load_series_dir(f.series_dir);
  const PreparedSamples prepared = prepare_samples(f.cfg, series);

  std::map<int, std::vector<double>> model_err, interp_err, mean_err;
  for (const std::size_t ti : prepared.split.test) {
    const WindowSample& s = prepared.samples[ti];
    const std::string key = make_embedding_key(s.station_id, s.anchor_date);
    const std::vector<float>* emb = cache.get(key);
    require(emb != nullptr, "missing cached embedding for " + key);

    const RetrievalResult hits =
        corpus.retrieve(*emb, f.cfg.rag.k, f.cfg.rag.exclude_self, key);
    require(!hits.hits.empty(), "no retrieval hits for " + key);

    ModelInput input;
    input.query_embedding = to_eigen(*emb);
    input.neighbor_embeddings = Eigen::MatrixXd(
        static_cast<Eigen::Index>(hits.hits.size()), ckpt.params.dims.d_emb);
    for (std::size_t r = 0; r < hits.hits.size(); ++r) {
      input.neighbor_embeddings.row(static_cast<Eigen::Index>(r)) =
          to_eigen(corpus.vector(hits.hits[r].index)).transpose();
    }
    const auto it = std::find(ckpt.station_ids.begin(), ckpt.station_ids.end(),
                              s.station_id);
    require(it != ckpt.station_ids.end(), "station missing from checkpoint");
    input.station_index =
        static_cast<int>(std::distance(ckpt.station_ids.begin(), it));
    for (int c = 0; c < 6; ++c) {
      input.calendar(c) = s.calendar_encoded[static_cast<std::size_t>(c)];
    }
    input.demand_masked_norm = Eigen::Map<const Eigen::VectorXd>(
        s.demand_masked_norm.data(),
        static_cast<Eigen::Index>(s.demand_masked_norm.size()));
    input.mask = s.mask;

    const GaussianSequence out =
        forward(ckpt.params, input, LatentMode::kDeterministic);

    const auto interp = impute_baseline(s.demand_raw, s.mask,
                                        BaselineKind::kInterpolation);
    const auto meanf = impute_baseline(s.demand_raw, s.mask,
                                       BaselineKind::kMean);

    const int level = static_cast<int>(s.masked_index.size());
    for (std::size_t p = 0; p < s.masked_index.size(); ++p) {
      const std::size_t pos = s.masked_index[p];
      const double truth = s.truth_raw[p];
      const double pred = std::max(
          0.0, out.mean(static_cast<Eigen::Index>(pos)) * s.norm_std +
                   s.norm_mean);
      model_err[level].push_back(std::abs(pred - truth));
      interp_err[level].push_back(std::abs(interp[pos] - truth));
      mean_err[level].push_back(std::abs(meanf[pos] - truth));
    }
  }

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
  };

  for (int level = 1; level <= 6; ++level) {
    require(model_err.count(level) == 1 &&
                model_err[level].size() >= 20,
            "masked-count level " + std::to_string(level) +
                " poorly represented in the test split");
    const double m = mean_of(model_err[level]);
    const double i = mean_of(interp_err[level]);
    const double z = mean_of(mean_err[level]);
    require(m < i, "level " + std::to_string(level) + ": model " + fmt(m) +
                       " not below interpolation " + fmt(i));
    if (level >= 4) {
      require(m <= 0.75 * z, "level " + std::to_string(level) + ": model " +
                                 fmt(m) + " not 25% below mean-fill " +
                                 fmt(z));
    }
  }
}

// ---------------------------------------------------------------------------
// C9: distributions of imputed values track the observed distribution far
// more closely than constant fills, and the comparison is exact on
// identical samples.

void check_imputed_distribution() {
  const DistributionReport self =
      dist_compare({1, 2, 3, 4, 5, 6}, {1, 2, 3, 4, 5, 6});
  require(self.wasserstein == 0.0 && self.ks_stat == 0.0 && self.similar_ks &&
              self.similar_mwu,
          "identical samples do not compare as identical");

  Fixture& f = fixture();
  // Uniform gap positions keep the weekday composition of the imputed days
  // equal to the observed days'; structured gaps would compare two different
  // weekday mixtures and penalize even a perfect imputer.
  std::vector<DailyDemandSeries> gappy;
  for (std::size_t i = 0; i < f.fleet.size(); ++i) {
    DailyDemandSeries g = f.fleet[i];
    SplitRng grng(700 + static_cast<std::uint64_t>(i));
    const auto mask =
        gen_mask_random(static_cast<int>(g.size()), 0.15, grng);
    for (std::size_t d = 0; d < g.size(); ++d) {
      if (mask[d]) {
        g.missing[d] = 1;
        g.demand[d] = 0.0;
      }
    }
    gappy.push_back(std::move(g));
  }
  const std::string gappy_dir = f.root + "/gappy";
  testkit::write_series_dir(gappy, gappy_dir);

  RunManifest manifest;
  const std::string imputed_dir = f.root + "/imputed";
  run_impute(f.cfg, f.ckpt_path, f.corpus_path, gappy_dir, imputed_dir,
             manifest);

  std::vector<double> observed, model_fill, zero_fill, mean_fill;
  for (const DailyDemandSeries& g : gappy) {
    const ImputationResult pred =
        read_imputation_csv(imputed_dir + "/" + g.station_id + ".csv");
    double obs_sum = 0.0;
    std::size_t obs_n = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.missing[i]) {
        observed.push_back(g.demand[i]);
        obs_sum += g.demand[i];
        ++obs_n;
      }
    }
    const double station_mean = obs_sum / static_cast<double>(obs_n);
    for (const ImputedDay& day : pred.days) {
      if (!day.was_imputed) continue;
      model_fill.push_back(day.value);
      zero_fill.push_back(0.0);
      mean_fill.push_back(station_mean);
    }
  }
  require(model_fill.size() > 100, "too few imputed days to compare");

  const DistributionReport dm = dist_compare(observed, model_fill);
  const DistributionReport dz = dist_compare(observed, zero_fill);
  const DistributionReport dmean = dist_compare(observed, mean_fill);

  require(dm.wasserstein < dmean.wasserstein,
          "model W1 " + fmt(dm.wasserstein) + " not below mean-fill W1 " +
              fmt(dmean.wasserstein));
  require(dm.wasserstein < dz.wasserstein,
          "model W1 " + fmt(dm.wasserstein) + " not below zero-fill W1 " +
              fmt(dz.wasserstein));
  const int model_similar = (dm.similar_ks ? 1 : 0) + (dm.similar_mwu ? 1 : 0);
  const int zero_similar = (dz.similar_ks ? 1 : 0) + (dz.similar_mwu ? 1 : 0);
  const int mean_similar =
      (dmean.similar_ks ? 1 : 0) + (dmean.similar_mwu ? 1 : 0);
  require(model_similar >= zero_similar && model_similar >= mean_similar,
          "model similarity verdicts fall below the constant fills");
  require(!dz.similar_ks, "zero fill passes the similarity test");
}

// ---------------------------------------------------------------------------
// C10: the whole pipeline is bit-reproducible from a seed.

void check_determinism() {
  const Config base = [] {
    Config cfg = testkit::small_config(2);
    cfg.embed.dim = 32;
    cfg.model.d_lat = 8;
    cfg.model.d_stat = 8;
    cfg.model.d_cal = 8;
    cfg.model.d_film = 16;
    cfg.model.layers = 1;
    cfg.model.heads = 2;
    cfg.rag.k = 8;
    return cfg;
  }();

  const std::vector<DailyDemandSeries> fleet = {
      testkit::sine_series("S1", 30.0, 10.0, 1.5, {2023, 1, 2}, 120, 7),
      testkit::sine_series("S2", 50.0, 10.0, 1.5, {2023, 1, 2}, 120, 8),
  };
  std::vector<DailyDemandSeries> gappy;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    gappy.push_back(
        testkit::with_gaps(fleet[i], 0.12, 60 + static_cast<std::uint64_t>(i)));
  }

  auto run_once = [&](const std::string& root) {
    std::filesystem::create_directories(root);
    const std::string series_dir = root + "/series";
    const std::string gappy_dir = root + "/gappy";
    testkit::write_series_dir(fleet, series_dir);
    testkit::write_series_dir(gappy, gappy_dir);
    RunManifest manifest;
    run_embed(base, series_dir, root + "/emb.bin", manifest);
    run_corpus(base, series_dir, root + "/emb.bin", root + "/corpus.bin",
               manifest);
    run_train(base, series_dir, root + "/emb.bin", root + "/corpus.bin",
              root + "/model.ckpt", root + "/train.log.jsonl", manifest);
    run_impute(base, root + "/model.ckpt", root + "/corpus.bin", gappy_dir,
               root + "/imputed", manifest);
    run_evaluate(base, root + "/imputed", series_dir, root + "/eval", false,
                 manifest);
  };

  const std::string root = (std::filesystem::temp_directory_path() /
                            ("praim_determinism_" + std::to_string(::getpid())))
                               .string();
  run_once(root + "/a");
  run_once(root + "/b");

  for (const char* rel :
       {"/model.ckpt", "/corpus.bin", "/emb.bin", "/train.log.jsonl",
        "/eval/report.json", "/imputed/S1.csv", "/imputed/S2.csv"}) {
    const std::string a = read_text_file(root + "/a" + rel);
    const std::string b = read_text_file(root + "/b" + rel);
    require(a == b, std::string("artifact ") + rel +
                        " differs between identical runs");
  }
  std::filesystem::remove_all(root);
}

// ---------------------------------------------------------------------------
// C11: feeding a forecaster gap-free imputed history instead of gappy raw
// history improves its error, more so in MSE than MAE.

void check_forecast_impact() {
  // Gaps heavy enough that clean lookback windows are scarce: the raw
  // variant's regression is data-starved while the completed variant keeps
  // every origin.
  const DailyDemandSeries truth =
      testkit::sine_series("S1", 40.0, 12.0, 2.0, {2022, 1, 3}, 600, 99);
  const DailyDemandSeries gappy = testkit::with_gaps(truth, 0.35, 101);

  // Oracle-quality imputation: the true values stand in for the model so the
  // criterion isolates the effect of completing the history.
  const ForecastImpact impact = forecast_impact(gappy, truth);

  require(impact.seasonal_naive.n_eval_imputed >=
              impact.seasonal_naive.n_eval_raw,
          "completing the series shrank the seasonal-naive evaluation set");
  require(impact.ridge_ar.n_eval_imputed >= impact.ridge_ar.n_eval_raw,
          "completing the series shrank the ridge evaluation set");
  require(impact.ridge_ar.delta_mae_pct > 0.0,
          "ridge MAE did not improve: " + fmt(impact.ridge_ar.delta_mae_pct) +
              "%");
  require(impact.ridge_ar.delta_mse_pct > 0.0,
          "ridge MSE did not improve: " + fmt(impact.ridge_ar.delta_mse_pct) +
              "%");
  require(std::abs(impact.ridge_ar.delta_mse_pct) >=
              std::abs(impact.ridge_ar.delta_mae_pct),
          "MSE improvement " + fmt(impact.ridge_ar.delta_mse_pct) +
              "% smaller than MAE improvement " +
              fmt(impact.ridge_ar.delta_mae_pct) + "%");
}

struct Criterion {
  const char* id;
  const char* label;
  std::function<void()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const std::vector<Criterion> criteria = {
      {"C1", "losses match closed forms and Monte-Carlo KL", check_losses},
      {"C2", "analytic gradients match finite differences on every tensor",
       check_gradients},
      {"C3", "masked steps get zero attention and cannot leak",
       check_attention_masking},
      {"C4", "sample survival probability is exact and monotone",
       check_survival_probability},
      {"C5", "CRPS matches quadrature and intervals cover nominally",
       check_probabilistic_scores},
      {"C6", "exact retrieval is exact and IVF holds recall 0.99",
       check_retrieval},
      {"C7", "mask generators: exact uniform counts, profiled realism",
       check_mask_generators},
      {"C8", "trained model beats interpolation and mean-fill baselines",
       check_training_quality},
      {"C9", "imputed value distribution tracks the observed one",
       check_imputed_distribution},
      {"C10", "end-to-end runs are bit-reproducible from the seed",
       check_determinism},
      {"C11", "imputation-completed history improves downstream forecasts",
       check_forecast_impact},
  };

  int failures = 0;
  int ran = 0;
  for (const Criterion& c : criteria) {
    const std::string name = std::string(c.id) + " " + c.label;
    if (!filter.empty() && name.find(filter) == std::string::npos) continue;
    ++ran;
    try {
      c.run();
      std::printf("PASS: %s %s\n", c.id, c.label);
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL: %s %s (%s)\n", c.id, c.label, e.what());
    }
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::printf("no criteria match filter '%s'\n", filter.c_str());
    return 2;
  }
  if (g_fixture.ready && failures == 0) {
    std::error_code ec;
    std::filesystem::remove_all(g_fixture.root, ec);
  }
  return failures;
}
