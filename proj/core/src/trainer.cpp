#include "praim/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "json.hpp"
#include "praim/common.hpp"
#include "praim/losses.hpp"
#include "praim/rng.hpp"

namespace praim {
namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;

}  // namespace

AdamW::AdamW(const ModelDims& dims, double lr, double weight_decay)
    : lr_(lr),
      weight_decay_(weight_decay),
      m_(ModelParameters::zeros(dims)),
      v_(ModelParameters::zeros(dims)) {
  if (!(lr > 0.0)) throw ValidationError("learning rate must be positive");
  if (weight_decay < 0.0) {
    throw ValidationError("weight decay must be non-negative");
  }
}

void AdamW::step(ModelParameters& params, ModelParameters& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, t_);
  const double bc2 = 1.0 - std::pow(kBeta2, t_);
  auto p = tensor_refs(params);
  auto g = tensor_refs(grads);
  auto m = tensor_refs(m_);
  auto v = tensor_refs(v_);
  for (std::size_t ti = 0; ti < p.size(); ++ti) {
    for (Eigen::Index i = 0; i < p[ti].size(); ++i) {
      const double grad = g[ti].data[i];
      double& mi = m[ti].data[i];
      double& vi = v[ti].data[i];
      mi = kBeta1 * mi + (1.0 - kBeta1) * grad;
      vi = kBeta2 * vi + (1.0 - kBeta2) * grad * grad;
      const double mhat = mi / bc1;
      const double vhat = vi / bc2;
      double& param = p[ti].data[i];
      param -= lr_ * (mhat / (std::sqrt(vhat) + kAdamEpsilon) +
                      weight_decay_ * param);
    }
  }
}

namespace {

// Indices of the validation slice: the last tenth (floored) of each
// station's items in anchor order.
std::vector<std::uint8_t> validation_flags(const std::vector<TrainItem>& items) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) {
    groups[items[i].sample.station_id].push_back(i);
  }
  std::vector<std::uint8_t> is_val(items.size(), 0);
  for (auto& [station, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return items[a].sample.anchor_date < items[b].sample.anchor_date;
    });
    const auto hold = idx.size() / 10;
    for (std::size_t j = idx.size() - hold; j < idx.size(); ++j) {
      is_val[idx[j]] = 1;
    }
  }
  return is_val;
}

}  // namespace

TrainResult train_model(
    std::vector<TrainItem> items, const ModelDims& dims,
    const TrainOptions& opts,
    const std::function<std::vector<TrainItem>(int epoch)>& redraw) {
  if (items.empty()) throw ValidationError("training set is empty");
  if (opts.batch < 1) throw ValidationError("batch size must be positive");
  if (opts.epochs < 1) throw ValidationError("epoch count must be positive");
  if (opts.patience < 1) throw ValidationError("patience must be positive");
  if (opts.theta < 0.0) throw ValidationError("KL weight must be >= 0");

  TrainResult result;
  result.params = ModelParameters::init(dims, derive_seed(opts.seed, "init"));
  ModelParameters params = result.params;
  AdamW optimizer(dims, opts.lr, opts.weight_decay);
  SplitRng rng(derive_seed(opts.seed, "train"));

  std::vector<std::uint8_t> is_val = validation_flags(items);
  std::vector<std::size_t> train_idx, val_idx;
  auto refresh_partition = [&] {
    train_idx.clear();
    val_idx.clear();
    for (std::size_t i = 0; i < items.size(); ++i) {
      (is_val[i] ? val_idx : train_idx).push_back(i);
    }
    if (train_idx.empty()) {
      throw ValidationError("no training items left after validation holdout");
    }
  };
  refresh_partition();
  result.train_loss_fallback = val_idx.empty();

  double best = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;

  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (redraw && epoch > 1) {
      items = redraw(epoch);
      if (items.empty()) throw ValidationError("mask redraw returned no items");
      is_val = validation_flags(items);
      refresh_partition();
    }

    std::vector<std::size_t> order = train_idx;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const std::size_t j = i + rng.next_index(order.size() - i);
      std::swap(order[i], order[j]);
    }

    double sum_elbo = 0.0, sum_rec = 0.0, sum_kl = 0.0;
    int batch_no = 0;
    for (std::size_t pos = 0; pos < order.size();
         pos += static_cast<std::size_t>(opts.batch)) {
      ++batch_no;
      const auto end = std::min(order.size(),
                                pos + static_cast<std::size_t>(opts.batch));
      const auto batch_n = static_cast<double>(end - pos);
      ModelParameters grads = ModelParameters::zeros(dims);
      for (std::size_t bi = pos; bi < end; ++bi) {
        const TrainItem& item = items[order[bi]];
        ModelInput input;
        input.query_embedding = item.query;
        input.neighbor_embeddings = item.neighbors;
        input.station_index = item.station_index;
        for (int c = 0; c < 6; ++c) {
          input.calendar(c) = item.sample.calendar_encoded[static_cast<std::size_t>(c)];
        }
        input.demand_masked_norm = Eigen::Map<const Eigen::VectorXd>(
            item.sample.demand_masked_norm.data(),
            static_cast<Eigen::Index>(item.sample.demand_masked_norm.size()));
        input.mask = item.sample.mask;

        Eigen::VectorXd eps(dims.d_lat);
        for (int d = 0; d < dims.d_lat; ++d) eps(d) = rng.next_gaussian();

        const LossBreakdown loss = elbo_with_gradients(
            params, input, item.sample.masked_index, item.sample.truth_norm,
            opts.theta, LatentMode::kStochastic, &eps, &grads);
        if (!std::isfinite(loss.elbo)) {
          throw ValidationError("non-finite training loss at epoch " +
                                std::to_string(epoch) + " batch " +
                                std::to_string(batch_no));
        }
        sum_elbo += loss.elbo;
        sum_rec += loss.recon;
        sum_kl += loss.kl;
      }
      auto refs = tensor_refs(grads);
      for (TensorRef& r : refs) {
        for (Eigen::Index i = 0; i < r.size(); ++i) r.data[i] /= batch_n;
      }
      optimizer.step(params, grads);
    }

    EpochStats stats;
    stats.epoch = epoch;
    const auto n_train = static_cast<double>(order.size());
    stats.train_elbo = sum_elbo / n_train;
    stats.train_rec = sum_rec / n_train;
    stats.train_kl = sum_kl / n_train;
    stats.lr = opts.lr;

    if (!val_idx.empty()) {
      double val_sum = 0.0;
      for (const std::size_t vi : val_idx) {
        const TrainItem& item = items[vi];
        ModelInput input;
        input.query_embedding = item.query;
        input.neighbor_embeddings = item.neighbors;
        input.station_index = item.station_index;
        for (int c = 0; c < 6; ++c) {
          input.calendar(c) = item.sample.calendar_encoded[static_cast<std::size_t>(c)];
        }
        input.demand_masked_norm = Eigen::Map<const Eigen::VectorXd>(
            item.sample.demand_masked_norm.data(),
            static_cast<Eigen::Index>(item.sample.demand_masked_norm.size()));
        input.mask = item.sample.mask;
        const LossBreakdown loss = elbo_with_gradients(
            params, input, item.sample.masked_index, item.sample.truth_norm,
            opts.theta, LatentMode::kDeterministic, nullptr, nullptr);
        val_sum += loss.elbo;
      }
      stats.val_elbo = val_sum / static_cast<double>(val_idx.size());
    }

    stats.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    result.log.push_back(stats);

    const double metric =
        stats.val_elbo ? *stats.val_elbo : stats.train_elbo;
    if (metric < best) {
      best = metric;
      result.params = params;
      result.best_epoch = epoch;
      result.best_metric = metric;
      bad_epochs = 0;
    } else if (++bad_epochs >= opts.patience) {
      break;
    }
  }
  return result;
}

std::string epoch_stats_jsonl(const std::vector<EpochStats>& log) {
  std::string out;
  for (const EpochStats& s : log) {
    nlohmann::json j;
    j["epoch"] = s.epoch;
    j["train_elbo"] = s.train_elbo;
    j["train_rec"] = s.train_rec;
    j["train_kl"] = s.train_kl;
    if (s.val_elbo) {
      j["val_elbo"] = *s.val_elbo;
    } else {
      j["val_elbo"] = nullptr;
    }
    j["lr"] = s.lr;
    j["wall_ms"] = s.wall_ms;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace praim
