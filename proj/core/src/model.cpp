#include "praim/model.hpp"

#include <cmath>

#include "praim/common.hpp"
#include "praim/rng.hpp"

namespace praim {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_dims(const ModelDims& d) {
  if (d.d_emb < 1 || d.d_lat < 1 || d.d_stat < 1 || d.d_cal < 1 ||
      d.d_film < 1 || d.layers < 1 || d.heads < 1 || d.window < 2 ||
      d.n_stations < 1) {
    throw ValidationError("model dimensions must all be positive, window >= 2");
  }
  if (d.d_film % d.heads != 0) {
    throw ValidationError("head count must divide the decoder width");
  }
}

void fill_uniform(MatrixXd& m, double bound, SplitRng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = (2.0 * rng.next_double() - 1.0) * bound;
  }
}

// Fan-in scaled affine init: U(+-1/sqrt(cols)), zero bias.
void init_affine(MatrixXd& w, VectorXd& b, SplitRng& rng) {
  fill_uniform(w, 1.0 / std::sqrt(static_cast<double>(w.cols())), rng);
  b.setZero();
}

MatrixXd row_layer_norm(const MatrixXd& x, const VectorXd& gain,
                        const VectorXd& bias, MatrixXd* xhat_out,
                        VectorXd* inv_std_out) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  MatrixXd xhat(rows, cols);
  VectorXd inv_std(rows);
  MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = x.row(r).mean();
    const double var =
        (x.row(r).array() - mean).square().sum() / static_cast<double>(cols);
    const double s = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    xhat.row(r) = (x.row(r).array() - mean) * s;
    inv_std(r) = s;
    out.row(r) =
        xhat.row(r).cwiseProduct(gain.transpose()) + bias.transpose();
  }
  if (xhat_out) *xhat_out = xhat;
  if (inv_std_out) *inv_std_out = inv_std;
  return out;
}

VectorXd softmax(const VectorXd& logits) {
  const double peak = logits.maxCoeff();
  VectorXd e = (logits.array() - peak).exp();
  return e / e.sum();
}

}  // namespace

double silu(double x) { return x / (1.0 + std::exp(-x)); }

Eigen::MatrixXd sinusoidal_positions(int window, int width) {
  MatrixXd pos(window, width);
  for (int t = 0; t < window; ++t) {
    for (int j = 0; j < width; ++j) {
      const double expo = static_cast<double>(j - (j % 2)) / width;
      const double angle = t / std::pow(10000.0, expo);
      pos(t, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pos;
}

ModelParameters ModelParameters::zeros(const ModelDims& dims) {
  check_dims(dims);
  ModelParameters p;
  p.dims = dims;
  const int dh = dims.head_dim();

  p.fusion.w_gate = MatrixXd::Zero(dims.d_emb, 2 * dims.d_emb);
  p.fusion.b_gate = VectorXd::Zero(dims.d_emb);

  p.latent.w_mu = MatrixXd::Zero(dims.d_lat, dims.d_emb);
  p.latent.b_mu = VectorXd::Zero(dims.d_lat);
  p.latent.w_lv = MatrixXd::Zero(dims.d_lat, dims.d_emb);
  p.latent.b_lv = VectorXd::Zero(dims.d_lat);

  p.conditioner.station_table = MatrixXd::Zero(dims.n_stations, dims.d_stat);
  p.conditioner.cal_w = MatrixXd::Zero(dims.d_cal, 6);
  p.conditioner.cal_b = VectorXd::Zero(dims.d_cal);
  const int cond_in = dims.d_lat + dims.d_stat + dims.d_cal;
  p.conditioner.w1 = MatrixXd::Zero(2 * dims.d_film, cond_in);
  p.conditioner.b1 = VectorXd::Zero(2 * dims.d_film);
  p.conditioner.w2 = MatrixXd::Zero(2 * dims.d_film, 2 * dims.d_film);
  p.conditioner.b2 = VectorXd::Zero(2 * dims.d_film);

  p.emb_w = VectorXd::Zero(dims.d_film);
  p.emb_b = VectorXd::Zero(dims.d_film);

  p.layers.resize(static_cast<std::size_t>(dims.layers));
  for (auto& layer : p.layers) {
    layer.ln1_gain = VectorXd::Zero(dims.d_film);
    layer.ln1_bias = VectorXd::Zero(dims.d_film);
    layer.heads.resize(static_cast<std::size_t>(dims.heads));
    for (auto& head : layer.heads) {
      head.wq = MatrixXd::Zero(dh, dims.d_film);
      head.wk = MatrixXd::Zero(dh, dims.d_film);
      head.wv = MatrixXd::Zero(dh, dims.d_film);
      head.bq = VectorXd::Zero(dh);
      head.bk = VectorXd::Zero(dh);
      head.bv = VectorXd::Zero(dh);
    }
    layer.ln2_gain = VectorXd::Zero(dims.d_film);
    layer.ln2_bias = VectorXd::Zero(dims.d_film);
    layer.ff_w1 = MatrixXd::Zero(4 * dims.d_film, dims.d_film);
    layer.ff_b1 = VectorXd::Zero(4 * dims.d_film);
    layer.ff_w2 = MatrixXd::Zero(dims.d_film, 4 * dims.d_film);
    layer.ff_b2 = VectorXd::Zero(dims.d_film);
  }

  p.final_ln_gain = VectorXd::Zero(dims.d_film);
  p.final_ln_bias = VectorXd::Zero(dims.d_film);
  p.out.mean_w = VectorXd::Zero(dims.d_film);
  p.out.mean_b = 0.0;
  p.out.logvar_w = VectorXd::Zero(dims.d_film);
  p.out.logvar_b = 0.0;

  p.pos = sinusoidal_positions(dims.window, dims.d_film);
  return p;
}

ModelParameters ModelParameters::init(const ModelDims& dims,
                                      std::uint64_t seed) {
  ModelParameters p = zeros(dims);
  SplitRng rng(seed);

  init_affine(p.fusion.w_gate, p.fusion.b_gate, rng);
  init_affine(p.latent.w_mu, p.latent.b_mu, rng);
  init_affine(p.latent.w_lv, p.latent.b_lv, rng);

  for (Eigen::Index i = 0; i < p.conditioner.station_table.size(); ++i) {
    p.conditioner.station_table.data()[i] = 0.02 * rng.next_gaussian();
  }
  init_affine(p.conditioner.cal_w, p.conditioner.cal_b, rng);
  init_affine(p.conditioner.w1, p.conditioner.b1, rng);
  init_affine(p.conditioner.w2, p.conditioner.b2, rng);

  // Scalar lift has fan-in 1.
  for (Eigen::Index i = 0; i < p.emb_w.size(); ++i) {
    p.emb_w(i) = 2.0 * rng.next_double() - 1.0;
  }

  for (auto& layer : p.layers) {
    layer.ln1_gain.setOnes();
    for (auto& head : layer.heads) {
      init_affine(head.wq, head.bq, rng);
      init_affine(head.wk, head.bk, rng);
      init_affine(head.wv, head.bv, rng);
    }
    layer.ln2_gain.setOnes();
    init_affine(layer.ff_w1, layer.ff_b1, rng);
    init_affine(layer.ff_w2, layer.ff_b2, rng);
  }
  p.final_ln_gain.setOnes();

  const double out_bound = 1.0 / std::sqrt(static_cast<double>(dims.d_film));
  for (Eigen::Index i = 0; i < p.out.mean_w.size(); ++i) {
    p.out.mean_w(i) = (2.0 * rng.next_double() - 1.0) * out_bound;
  }
  for (Eigen::Index i = 0; i < p.out.logvar_w.size(); ++i) {
    p.out.logvar_w(i) = (2.0 * rng.next_double() - 1.0) * out_bound;
  }
  return p;
}

std::vector<TensorRef> tensor_refs(ModelParameters& p) {
  std::vector<TensorRef> refs;
  auto add_m = [&](const std::string& name, MatrixXd& m) {
    refs.push_back({name, m.data(), m.rows(), m.cols()});
  };
  auto add_v = [&](const std::string& name, VectorXd& v) {
    refs.push_back({name, v.data(), v.rows(), 1});
  };
  auto add_s = [&](const std::string& name, double& s) {
    refs.push_back({name, &s, 1, 1});
  };

  add_m("fusion.w_gate", p.fusion.w_gate);
  add_v("fusion.b_gate", p.fusion.b_gate);
  add_m("latent.w_mu", p.latent.w_mu);
  add_v("latent.b_mu", p.latent.b_mu);
  add_m("latent.w_lv", p.latent.w_lv);
  add_v("latent.b_lv", p.latent.b_lv);
  add_m("cond.station_table", p.conditioner.station_table);
  add_m("cond.cal_w", p.conditioner.cal_w);
  add_v("cond.cal_b", p.conditioner.cal_b);
  add_m("cond.w1", p.conditioner.w1);
  add_v("cond.b1", p.conditioner.b1);
  add_m("cond.w2", p.conditioner.w2);
  add_v("cond.b2", p.conditioner.b2);
  add_v("decoder.emb_w", p.emb_w);
  add_v("decoder.emb_b", p.emb_b);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const std::string base = "decoder.layer" + std::to_string(l) + ".";
    auto& layer = p.layers[l];
    add_v(base + "ln1_gain", layer.ln1_gain);
    add_v(base + "ln1_bias", layer.ln1_bias);
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      const std::string hb = base + "head" + std::to_string(h) + ".";
      auto& head = layer.heads[h];
      add_m(hb + "wq", head.wq);
      add_v(hb + "bq", head.bq);
      add_m(hb + "wk", head.wk);
      add_v(hb + "bk", head.bk);
      add_m(hb + "wv", head.wv);
      add_v(hb + "bv", head.bv);
    }
    add_v(base + "ln2_gain", layer.ln2_gain);
    add_v(base + "ln2_bias", layer.ln2_bias);
    add_m(base + "ff_w1", layer.ff_w1);
    add_v(base + "ff_b1", layer.ff_b1);
    add_m(base + "ff_w2", layer.ff_w2);
    add_v(base + "ff_b2", layer.ff_b2);
  }
  add_v("decoder.final_ln_gain", p.final_ln_gain);
  add_v("decoder.final_ln_bias", p.final_ln_bias);
  add_v("out.mean_w", p.out.mean_w);
  add_s("out.mean_b", p.out.mean_b);
  add_v("out.logvar_w", p.out.logvar_w);
  add_s("out.logvar_b", p.out.logvar_b);
  return refs;
}

VectorXd fuse_context(const FusionParams& params, const VectorXd& query,
                      const MatrixXd& neighbors, FusionCache* cache) {
  if (neighbors.rows() == 0) {
    throw ValidationError("fusion needs at least one retrieved neighbor");
  }
  if (neighbors.cols() != query.size()) {
    throw ValidationError("neighbor width does not match the query");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(query.size()));
  const VectorXd scores = neighbors * query * scale;  // K
  const VectorXd alpha = softmax(scores);
  const VectorXd context = neighbors.transpose() * alpha;  // d_emb

  VectorXd stacked(2 * query.size());
  stacked << query, context;
  const VectorXd gate_pre = params.w_gate * stacked + params.b_gate;
  const VectorXd gate =
      gate_pre.unaryExpr([](double g) { return 1.0 / (1.0 + std::exp(-g)); });
  const VectorXd omega_hat =
      gate.cwiseProduct(query) +
      (VectorXd::Ones(gate.size()) - gate).cwiseProduct(context);

  if (cache) {
    cache->scores = scores;
    cache->alpha = alpha;
    cache->context = context;
    cache->gate_pre = gate_pre;
    cache->gate = gate;
    cache->omega_hat = omega_hat;
  }
  return omega_hat;
}

void encode_latent(const LatentParams& params, const VectorXd& omega_hat,
                   VectorXd& mu, VectorXd& logvar, VectorXd& sigma) {
  mu = params.w_mu * omega_hat + params.b_mu;
  logvar = params.w_lv * omega_hat + params.b_lv;
  if (!mu.allFinite() || !logvar.allFinite()) {
    throw ValidationError("non-finite latent activations");
  }
  sigma = (0.5 * logvar).array().exp();
}

VectorXd sample_latent(const VectorXd& mu, const VectorXd& sigma,
                       const VectorXd& eps) {
  return mu + sigma.cwiseProduct(eps);
}

void condition(const ConditionerParams& params, const VectorXd& z,
               int station_index, const Eigen::Matrix<double, 6, 1>& calendar,
               VectorXd& gamma, VectorXd& beta, ForwardCache* cache) {
  if (station_index < 0 ||
      station_index >= params.station_table.rows()) {
    throw ValidationError("station index out of range");
  }
  const VectorXd cal = params.cal_w * calendar + params.cal_b;
  VectorXd cond_in(z.size() + params.station_table.cols() + cal.size());
  cond_in << z, params.station_table.row(station_index).transpose(), cal;

  const VectorXd pre = params.w1 * cond_in + params.b1;
  const VectorXd hidden = pre.unaryExpr([](double h) { return silu(h); });
  const VectorXd out = params.w2 * hidden + params.b2;

  const Eigen::Index half = out.size() / 2;
  gamma = out.head(half);
  beta = out.tail(half);

  if (cache) {
    cache->cond_in = cond_in;
    cache->cond_pre = pre;
    cache->cond_hidden = hidden;
    cache->gamma = gamma;
    cache->beta = beta;
  }
}

MatrixXd modulate(const VectorXd& demand_masked_norm, const VectorXd& gamma,
                  const VectorXd& beta, const VectorXd& emb_w,
                  const VectorXd& emb_b, const MatrixXd& pos,
                  ForwardCache* cache) {
  const Eigen::Index L = demand_masked_norm.size();
  MatrixXd lifted(L, emb_w.size());
  MatrixXd x(L, emb_w.size());
  for (Eigen::Index t = 0; t < L; ++t) {
    lifted.row(t) = (emb_w * demand_masked_norm(t) + emb_b).transpose();
    x.row(t) = lifted.row(t).cwiseProduct(gamma.transpose()) +
               beta.transpose() + pos.row(t);
  }
  if (cache) {
    cache->lifted = lifted;
    cache->x0 = x;
  }
  return x;
}

GaussianSequence decode(const ModelParameters& params, const MatrixXd& x_in,
                        const std::vector<std::uint8_t>& mask,
                        ForwardCache* cache) {
  const Eigen::Index L = x_in.rows();
  const int dh = params.dims.head_dim();
  if (static_cast<Eigen::Index>(mask.size()) != L) {
    throw ValidationError("mask length does not match the sequence");
  }
  bool any_observed = false;
  for (auto m : mask) {
    if (m == 0) any_observed = true;
  }
  if (!any_observed) throw ValidationError("all-masked window");

  const double scale =
      1.0 / std::sqrt(static_cast<double>(params.dims.d_film));

  if (cache) cache->layers.assign(params.layers.size(), LayerCache{});

  MatrixXd x = x_in;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    LayerCache* lc = cache ? &cache->layers[l] : nullptr;
    if (lc) lc->in = x;

    MatrixXd ln1_xhat;
    VectorXd ln1_inv_std;
    const MatrixXd y = row_layer_norm(x, layer.ln1_gain, layer.ln1_bias,
                                      lc ? &ln1_xhat : nullptr,
                                      lc ? &ln1_inv_std : nullptr);
    if (lc) {
      lc->ln1_xhat = std::move(ln1_xhat);
      lc->ln1_inv_std = std::move(ln1_inv_std);
      lc->ln1_out = y;
      lc->heads.resize(layer.heads.size());
    }

    MatrixXd concat(L, params.dims.d_film);
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      const auto& head = layer.heads[h];
      const MatrixXd q =
          (y * head.wq.transpose()).rowwise() + head.bq.transpose();
      const MatrixXd k =
          (y * head.wk.transpose()).rowwise() + head.bk.transpose();
      const MatrixXd v =
          (y * head.wv.transpose()).rowwise() + head.bv.transpose();

      MatrixXd logits = q * k.transpose() * scale;  // L x L
      for (Eigen::Index j = 0; j < L; ++j) {
        if (mask[static_cast<std::size_t>(j)]) {
          logits.col(j).array() += kAttentionMaskValue;
        }
      }
      MatrixXd attn(L, L);
      for (Eigen::Index r = 0; r < L; ++r) {
        attn.row(r) = softmax(logits.row(r).transpose()).transpose();
      }
      // Vectorized exp clamps instead of underflowing, leaving denormal
      // residue in the masked columns; force the invariant exactly.
      for (Eigen::Index j = 0; j < L; ++j) {
        if (mask[static_cast<std::size_t>(j)]) attn.col(j).setZero();
      }
      concat.block(0, static_cast<Eigen::Index>(h) * dh, L, dh) = attn * v;
      if (lc) {
        lc->heads[h].q = q;
        lc->heads[h].k = k;
        lc->heads[h].v = v;
        lc->heads[h].attn = attn;
      }
    }

    MatrixXd mid = x + concat;
    if (lc) {
      lc->attn_concat = concat;
      lc->mid = mid;
    }

    MatrixXd ln2_xhat;
    VectorXd ln2_inv_std;
    const MatrixXd y2 = row_layer_norm(mid, layer.ln2_gain, layer.ln2_bias,
                                       lc ? &ln2_xhat : nullptr,
                                       lc ? &ln2_inv_std : nullptr);
    const MatrixXd ff_pre =
        (y2 * layer.ff_w1.transpose()).rowwise() + layer.ff_b1.transpose();
    const MatrixXd ff_act = ff_pre.unaryExpr([](double h) { return silu(h); });
    const MatrixXd ff_out =
        (ff_act * layer.ff_w2.transpose()).rowwise() + layer.ff_b2.transpose();
    x = mid + ff_out;
    if (lc) {
      lc->ln2_xhat = std::move(ln2_xhat);
      lc->ln2_inv_std = std::move(ln2_inv_std);
      lc->ln2_out = y2;
      lc->ff_pre = ff_pre;
      lc->ff_act = ff_act;
    }
  }

  MatrixXd final_xhat;
  VectorXd final_inv_std;
  const MatrixXd h = row_layer_norm(x, params.final_ln_gain,
                                    params.final_ln_bias,
                                    cache ? &final_xhat : nullptr,
                                    cache ? &final_inv_std : nullptr);

  GaussianSequence out;
  out.mean = h * params.out.mean_w;
  out.mean.array() += params.out.mean_b;
  VectorXd logvar = h * params.out.logvar_w;
  logvar.array() += params.out.logvar_b;
  out.variance = logvar.array().exp().min(kVarianceCeil).max(kVarianceFloor);

  if (cache) {
    cache->final_xhat = std::move(final_xhat);
    cache->final_inv_std = std::move(final_inv_std);
    cache->h_final = h;
    cache->logvar_x = logvar;
    cache->output = out;
  }
  return out;
}

GaussianSequence forward(const ModelParameters& params, const ModelInput& input,
                         LatentMode mode, const VectorXd* eps,
                         ForwardCache* cache) {
  FusionCache local_fusion;
  FusionCache* fc = cache ? &cache->fusion : &local_fusion;
  const VectorXd omega_hat = fuse_context(params.fusion, input.query_embedding,
                                          input.neighbor_embeddings, fc);

  VectorXd mu, logvar, sigma;
  encode_latent(params.latent, omega_hat, mu, logvar, sigma);

  VectorXd z;
  VectorXd eps_used = VectorXd::Zero(mu.size());
  if (mode == LatentMode::kStochastic) {
    if (eps == nullptr) {
      throw ValidationError("stochastic forward requires a noise draw");
    }
    eps_used = *eps;
    z = sample_latent(mu, sigma, eps_used);
  } else {
    z = mu;
  }
  if (cache) {
    cache->mu_z = mu;
    cache->logvar_z = logvar;
    cache->sigma_z = sigma;
    cache->eps = eps_used;
    cache->z = z;
  }

  VectorXd gamma, beta;
  condition(params.conditioner, z, input.station_index, input.calendar, gamma,
            beta, cache);

  const MatrixXd x = modulate(input.demand_masked_norm, gamma, beta,
                              params.emb_w, params.emb_b, params.pos, cache);
  return decode(params, x, input.mask, cache);
}

}  // namespace praim
