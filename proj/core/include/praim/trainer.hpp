#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "praim/features.hpp"
#include "praim/model.hpp"

namespace praim {

/// A fully assembled training example: the masked window plus its retrieved
/// context, ready for the forward pass.
struct TrainItem {
  WindowSample sample;
  int station_index = 0;
  Eigen::VectorXd query;      // d_emb
  Eigen::MatrixXd neighbors;  // K x d_emb, retrieval order
};

struct EpochStats {
  int epoch = 0;
  double train_elbo = 0.0;
  double train_rec = 0.0;
  double train_kl = 0.0;
  std::optional<double> val_elbo;  // absent when the validation slice is empty
  double lr = 0.0;
  long long wall_ms = 0;
};

// Adaptive-moment optimizer with decoupled weight decay. Moments follow the
// tensor enumeration order, so steps are deterministic.
class AdamW {
 public:
  AdamW(const ModelDims& dims, double lr, double weight_decay);

  void step(ModelParameters& params, ModelParameters& grads);

  double lr() const { return lr_; }

 private:
  double lr_;
  double weight_decay_;
  int t_ = 0;
  ModelParameters m_;
  ModelParameters v_;
};

struct TrainOptions {
  double theta = 0.1;
  double lr = 1e-4;
  double weight_decay = 1e-5;
  int batch = 64;
  int epochs = 100;
  int patience = 10;
  std::uint64_t seed = 42;
};

struct TrainResult {
  ModelParameters params;  // snapshot from the best validation epoch
  std::vector<EpochStats> log;
  int best_epoch = 0;
  double best_metric = 0.0;
  // Set when no station had enough samples for a validation slice; early
  // stopping then tracks the training loss instead.
  bool train_loss_fallback = false;
};

// Minibatch ELBO training with early stopping. The last tenth of each
// station's items (anchor order) is held out for validation and scored with
// the deterministic latent. The optional redraw hook replaces the item list
// at the start of every epoch after the first (fresh masks per epoch).
TrainResult train_model(
    std::vector<TrainItem> items, const ModelDims& dims,
    const TrainOptions& opts,
    const std::function<std::vector<TrainItem>(int epoch)>& redraw = nullptr);

std::string epoch_stats_jsonl(const std::vector<EpochStats>& log);

}  // namespace praim
