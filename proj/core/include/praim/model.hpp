#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace praim {

// Additive attention mask value for missing-day key columns; the decoder
// zeroes those columns after the softmax so the invariant holds exactly.
inline constexpr double kAttentionMaskValue = -1e9;

// Output variance clamp in normalized units; prevents likelihood collapse.
inline constexpr double kVarianceFloor = 1e-6;
inline constexpr double kVarianceCeil = 1e3;

inline constexpr double kLayerNormEpsilon = 1e-5;

struct ModelDims {
  int d_emb = 0;      // context embedding width
  int d_lat = 0;      // latent width
  int d_stat = 0;     // station embedding width
  int d_cal = 0;      // projected calendar width
  int d_film = 0;     // decoder model width
  int layers = 0;     // transformer layer count
  int heads = 0;      // attention heads per layer
  int window = 0;     // sequence length L
  int n_stations = 0;

  int head_dim() const { return d_film / heads; }
  bool operator==(const ModelDims&) const = default;
};

struct FusionParams {
  Eigen::MatrixXd w_gate;  // d_emb x 2*d_emb
  Eigen::VectorXd b_gate;  // d_emb
};

struct LatentParams {
  Eigen::MatrixXd w_mu;  // d_lat x d_emb
  Eigen::VectorXd b_mu;
  Eigen::MatrixXd w_lv;  // d_lat x d_emb
  Eigen::VectorXd b_lv;
};

struct ConditionerParams {
  Eigen::MatrixXd station_table;  // n_stations x d_stat
  Eigen::MatrixXd cal_w;          // d_cal x 6
  Eigen::VectorXd cal_b;
  Eigen::MatrixXd w1;  // 2*d_film x (d_lat + d_stat + d_cal)
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // 2*d_film x 2*d_film
  Eigen::VectorXd b2;
};

struct AttentionHeadParams {
  Eigen::MatrixXd wq, wk, wv;  // head_dim x d_film
  Eigen::VectorXd bq, bk, bv;  // head_dim
};

struct DecoderLayerParams {
  Eigen::VectorXd ln1_gain, ln1_bias;  // d_film
  std::vector<AttentionHeadParams> heads;
  Eigen::VectorXd ln2_gain, ln2_bias;
  Eigen::MatrixXd ff_w1;  // 4*d_film x d_film
  Eigen::VectorXd ff_b1;
  Eigen::MatrixXd ff_w2;  // d_film x 4*d_film
  Eigen::VectorXd ff_b2;
};

struct OutputHeadParams {
  Eigen::VectorXd mean_w;  // d_film
  double mean_b = 0.0;
  Eigen::VectorXd logvar_w;
  double logvar_b = 0.0;
};

struct ModelParameters {
  ModelDims dims;
  FusionParams fusion;
  LatentParams latent;
  ConditionerParams conditioner;
  Eigen::VectorXd emb_w, emb_b;  // scalar demand lift, d_film each
  std::vector<DecoderLayerParams> layers;
  Eigen::VectorXd final_ln_gain, final_ln_bias;
  OutputHeadParams out;
  Eigen::MatrixXd pos;  // window x d_film, fixed sinusoidal, not trained

  // Fan-in uniform matrices, zero biases, unit layer-norm gains, N(0, 0.02)
  // station table. Draw order is fixed, so a seed pins every weight.
  static ModelParameters init(const ModelDims& dims, std::uint64_t seed);
  static ModelParameters zeros(const ModelDims& dims);
};

// One mutable view per trainable tensor; pos is excluded. data is
// column-major, rows*cols elements.
struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;

  Eigen::Index size() const { return rows * cols; }
};

// Stable enumeration order; used by the optimizer, the checkpoint writer and
// the finite-difference harness.
std::vector<TensorRef> tensor_refs(ModelParameters& params);

Eigen::MatrixXd sinusoidal_positions(int window, int width);

struct ModelInput {
  Eigen::VectorXd query_embedding;       // d_emb
  Eigen::MatrixXd neighbor_embeddings;   // K x d_emb, row per neighbor
  int station_index = 0;
  Eigen::Matrix<double, 6, 1> calendar;  // anchor-day cyclical encoding
  Eigen::VectorXd demand_masked_norm;    // L, masked steps already zero
  std::vector<std::uint8_t> mask;        // L, 1 = treated as missing
};

struct GaussianSequence {
  Eigen::VectorXd mean;      // L
  Eigen::VectorXd variance;  // L, clamped positive
};

// Intermediate states kept for the analytic backward pass and for tests
// probing attention mass.
struct FusionCache {
  Eigen::VectorXd scores;     // K, pre-softmax
  Eigen::VectorXd alpha;      // K
  Eigen::VectorXd context;    // d_emb
  Eigen::VectorXd gate_pre;   // d_emb
  Eigen::VectorXd gate;       // d_emb, sigmoid output
  Eigen::VectorXd omega_hat;  // d_emb
};

struct HeadCache {
  Eigen::MatrixXd q, k, v;  // L x head_dim
  Eigen::MatrixXd attn;     // L x L, post-softmax rows
};

struct LayerCache {
  Eigen::MatrixXd in;        // L x d_film, residual stream entering the layer
  Eigen::MatrixXd ln1_xhat;  // L x d_film
  Eigen::VectorXd ln1_inv_std;  // L
  Eigen::MatrixXd ln1_out;
  std::vector<HeadCache> heads;
  Eigen::MatrixXd attn_concat;  // L x d_film
  Eigen::MatrixXd mid;          // after the attention residual
  Eigen::MatrixXd ln2_xhat;
  Eigen::VectorXd ln2_inv_std;
  Eigen::MatrixXd ln2_out;
  Eigen::MatrixXd ff_pre;  // L x 4*d_film
  Eigen::MatrixXd ff_act;
};

struct ForwardCache {
  FusionCache fusion;
  Eigen::VectorXd mu_z, logvar_z, sigma_z, eps, z;
  Eigen::VectorXd cond_in;          // d_lat + d_stat + d_cal
  Eigen::VectorXd cond_pre, cond_hidden;  // 2*d_film
  Eigen::VectorXd gamma, beta;      // d_film
  Eigen::MatrixXd lifted;           // L x d_film, pre-modulation lift
  Eigen::MatrixXd x0;               // decoder input
  std::vector<LayerCache> layers;
  Eigen::MatrixXd final_xhat;
  Eigen::VectorXd final_inv_std;
  Eigen::MatrixXd h_final;          // L x d_film
  Eigen::VectorXd logvar_x;         // L, pre-clamp
  GaussianSequence output;
};

enum class LatentMode { kStochastic, kDeterministic };

// Attention-weighted neighbor pooling plus the sigmoid gate blend.
Eigen::VectorXd fuse_context(const FusionParams& params,
                             const Eigen::VectorXd& query,
                             const Eigen::MatrixXd& neighbors,
                             FusionCache* cache = nullptr);

void encode_latent(const LatentParams& params,
                   const Eigen::VectorXd& omega_hat, Eigen::VectorXd& mu,
                   Eigen::VectorXd& logvar, Eigen::VectorXd& sigma);

Eigen::VectorXd sample_latent(const Eigen::VectorXd& mu,
                              const Eigen::VectorXd& sigma,
                              const Eigen::VectorXd& eps);

// FiLM parameter production from [z || station row || projected calendar].
void condition(const ConditionerParams& params, const Eigen::VectorXd& z,
               int station_index, const Eigen::Matrix<double, 6, 1>& calendar,
               Eigen::VectorXd& gamma, Eigen::VectorXd& beta,
               ForwardCache* cache = nullptr);

// Per-step scalar lift, FiLM modulation broadcast over time, positional
// encoding added last.
Eigen::MatrixXd modulate(const Eigen::VectorXd& demand_masked_norm,
                         const Eigen::VectorXd& gamma,
                         const Eigen::VectorXd& beta,
                         const Eigen::VectorXd& emb_w,
                         const Eigen::VectorXd& emb_b,
                         const Eigen::MatrixXd& pos,
                         ForwardCache* cache = nullptr);

GaussianSequence decode(const ModelParameters& params, const Eigen::MatrixXd& x,
                        const std::vector<std::uint8_t>& mask,
                        ForwardCache* cache = nullptr);

// Full composition. Stochastic mode requires eps (d_lat); deterministic mode
// uses z = mu. The cache, when supplied, is filled for backward/test use.
GaussianSequence forward(const ModelParameters& params, const ModelInput& input,
                         LatentMode mode, const Eigen::VectorXd* eps = nullptr,
                         ForwardCache* cache = nullptr);

double silu(double x);

}  // namespace praim
