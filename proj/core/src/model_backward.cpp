#include <cmath>

#include "praim/common.hpp"
#include "praim/losses.hpp"
#include "praim/model.hpp"

namespace praim {
namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double silu_prime(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

// Backward through y_r = gain (*) xhat_r + bias, where xhat was produced by
// per-row standardization with the cached inverse std.
MatrixXd layer_norm_backward(const MatrixXd& dout, const MatrixXd& xhat,
                             const VectorXd& inv_std, const VectorXd& gain,
                             VectorXd& dgain, VectorXd& dbias) {
  dgain += dout.cwiseProduct(xhat).colwise().sum().transpose();
  dbias += dout.colwise().sum().transpose();
  MatrixXd dx(dout.rows(), dout.cols());
  for (Eigen::Index r = 0; r < dout.rows(); ++r) {
    const RowVectorXd dxhat = dout.row(r).cwiseProduct(gain.transpose());
    const double m1 = dxhat.mean();
    const double m2 = dxhat.cwiseProduct(xhat.row(r)).mean();
    dx.row(r) =
        inv_std(r) * (dxhat.array() - m1 - xhat.row(r).array() * m2).matrix();
  }
  return dx;
}

// Row-wise softmax backward: dS_r = A_r (*) (dA_r - <dA_r, A_r>).
MatrixXd softmax_backward_rows(const MatrixXd& dA, const MatrixXd& A) {
  MatrixXd dS(dA.rows(), dA.cols());
  for (Eigen::Index r = 0; r < dA.rows(); ++r) {
    const double inner = dA.row(r).dot(A.row(r));
    dS.row(r) = (A.row(r).array() * (dA.row(r).array() - inner)).matrix();
  }
  return dS;
}

}  // namespace

LossBreakdown elbo_with_gradients(const ModelParameters& params,
                                  const ModelInput& input,
                                  const std::vector<std::size_t>& masked_index,
                                  const std::vector<double>& truth_norm,
                                  double theta, LatentMode mode,
                                  const Eigen::VectorXd* eps,
                                  ModelParameters* grads) {
  if (masked_index.empty()) {
    throw ValidationError("ELBO needs at least one masked step");
  }
  if (masked_index.size() != truth_norm.size()) {
    throw ValidationError("masked index and truth lengths differ");
  }

  ForwardCache cache;
  const GaussianSequence pred = forward(params, input, mode, eps, &cache);

  const std::size_t n_mi = masked_index.size();
  VectorXd truth(n_mi), mu_mi(n_mi), var_mi(n_mi);
  for (std::size_t i = 0; i < n_mi; ++i) {
    truth(static_cast<Eigen::Index>(i)) = truth_norm[i];
    mu_mi(static_cast<Eigen::Index>(i)) =
        pred.mean(static_cast<Eigen::Index>(masked_index[i]));
    var_mi(static_cast<Eigen::Index>(i)) =
        pred.variance(static_cast<Eigen::Index>(masked_index[i]));
  }

  LossBreakdown loss;
  loss.recon = recon_loss(truth, mu_mi, var_mi);
  loss.kl = kl_loss(cache.mu_z, cache.sigma_z);
  loss.elbo = elbo_loss(loss.recon, loss.kl, theta);
  if (!grads) return loss;
  if (grads->dims != params.dims) {
    throw ValidationError("gradient container has mismatched dimensions");
  }

  const Eigen::Index L = pred.mean.size();
  const double inv_n = 1.0 / static_cast<double>(n_mi);

  // Output heads and the variance clamp.
  VectorXd dmean = VectorXd::Zero(L);
  VectorXd dlogvar_x = VectorXd::Zero(L);
  for (std::size_t i = 0; i < n_mi; ++i) {
    const auto t = static_cast<Eigen::Index>(masked_index[i]);
    const double var = pred.variance(t);
    const double resid = pred.mean(t) - truth_norm[i];
    dmean(t) = inv_n * resid / var;
    const double raw_var = std::exp(cache.logvar_x(t));
    if (raw_var > kVarianceFloor && raw_var < kVarianceCeil) {
      // d/dvar of [resid^2/(2 var) + log(var)/2], times dvar/dlogvar = var.
      dlogvar_x(t) = inv_n * (0.5 - resid * resid / (2.0 * var));
    }
  }

  MatrixXd dh = dmean * params.out.mean_w.transpose() +
                dlogvar_x * params.out.logvar_w.transpose();  // L x d_film
  grads->out.mean_w += cache.h_final.transpose() * dmean;
  grads->out.mean_b += dmean.sum();
  grads->out.logvar_w += cache.h_final.transpose() * dlogvar_x;
  grads->out.logvar_b += dlogvar_x.sum();

  MatrixXd dx = layer_norm_backward(dh, cache.final_xhat, cache.final_inv_std,
                                    params.final_ln_gain,
                                    grads->final_ln_gain, grads->final_ln_bias);

  const int dh_width = params.dims.head_dim();
  const double scale =
      1.0 / std::sqrt(static_cast<double>(params.dims.d_film));

  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const auto& layer = params.layers[l];
    auto& glayer = grads->layers[l];
    const LayerCache& lc = cache.layers[l];

    // Feed-forward block: out = mid + ff(ln2(mid)).
    const MatrixXd& dff_out = dx;
    glayer.ff_w2 += dff_out.transpose() * lc.ff_act;
    glayer.ff_b2 += dff_out.colwise().sum().transpose();
    const MatrixXd dact = dff_out * layer.ff_w2;
    const MatrixXd dpre =
        dact.cwiseProduct(lc.ff_pre.unaryExpr([](double v) {
          return silu_prime(v);
        }));
    glayer.ff_w1 += dpre.transpose() * lc.ln2_out;
    glayer.ff_b1 += dpre.colwise().sum().transpose();
    const MatrixXd dy2 = dpre * layer.ff_w1;
    MatrixXd dmid = dx;  // residual branch
    dmid += layer_norm_backward(dy2, lc.ln2_xhat, lc.ln2_inv_std,
                                layer.ln2_gain, glayer.ln2_gain,
                                glayer.ln2_bias);

    // Attention block: mid = in + concat(heads(ln1(in))).
    MatrixXd dy = MatrixXd::Zero(L, params.dims.d_film);
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      const auto& head = layer.heads[h];
      auto& ghead = glayer.heads[h];
      const HeadCache& hc = lc.heads[h];
      const MatrixXd dout_h =
          dmid.block(0, static_cast<Eigen::Index>(h) * dh_width, L, dh_width);

      const MatrixXd dA = dout_h * hc.v.transpose();
      const MatrixXd dv = hc.attn.transpose() * dout_h;
      const MatrixXd dS = softmax_backward_rows(dA, hc.attn);
      const MatrixXd dq = dS * hc.k * scale;
      const MatrixXd dk = dS.transpose() * hc.q * scale;

      ghead.wq += dq.transpose() * lc.ln1_out;
      ghead.bq += dq.colwise().sum().transpose();
      ghead.wk += dk.transpose() * lc.ln1_out;
      ghead.bk += dk.colwise().sum().transpose();
      ghead.wv += dv.transpose() * lc.ln1_out;
      ghead.bv += dv.colwise().sum().transpose();
      dy += dq * head.wq + dk * head.wk + dv * head.wv;
    }
    MatrixXd din = dmid;  // residual branch
    din += layer_norm_backward(dy, lc.ln1_xhat, lc.ln1_inv_std, layer.ln1_gain,
                               glayer.ln1_gain, glayer.ln1_bias);
    dx = din;
  }

  // Modulated input: x0_t = gamma (*) lift_t + beta + pos_t.
  VectorXd dgamma = VectorXd::Zero(params.dims.d_film);
  VectorXd dbeta = VectorXd::Zero(params.dims.d_film);
  for (Eigen::Index t = 0; t < L; ++t) {
    dgamma += dx.row(t).transpose().cwiseProduct(cache.lifted.row(t).transpose());
    dbeta += dx.row(t).transpose();
    const VectorXd dlift = dx.row(t).transpose().cwiseProduct(cache.gamma);
    grads->emb_w += dlift * input.demand_masked_norm(t);
    grads->emb_b += dlift;
  }

  // Conditioner MLP.
  VectorXd dout_cond(2 * params.dims.d_film);
  dout_cond << dgamma, dbeta;
  grads->conditioner.w2 += dout_cond * cache.cond_hidden.transpose();
  grads->conditioner.b2 += dout_cond;
  const VectorXd dhidden = params.conditioner.w2.transpose() * dout_cond;
  const VectorXd dpre_cond = dhidden.cwiseProduct(
      cache.cond_pre.unaryExpr([](double v) { return silu_prime(v); }));
  grads->conditioner.w1 += dpre_cond * cache.cond_in.transpose();
  grads->conditioner.b1 += dpre_cond;
  const VectorXd din_cond = params.conditioner.w1.transpose() * dpre_cond;

  const Eigen::Index d_lat = params.dims.d_lat;
  const Eigen::Index d_stat = params.dims.d_stat;
  const Eigen::Index d_cal = params.dims.d_cal;
  VectorXd dz = din_cond.head(d_lat);
  grads->conditioner.station_table.row(input.station_index) +=
      din_cond.segment(d_lat, d_stat).transpose();
  const VectorXd dcal = din_cond.tail(d_cal);
  grads->conditioner.cal_w += dcal * input.calendar.transpose();
  grads->conditioner.cal_b += dcal;

  // Latent heads; the KL term feeds both directly.
  VectorXd dmu_z = dz + theta * cache.mu_z;
  VectorXd dlogvar_z =
      theta * 0.5 * (cache.logvar_z.array().exp() - 1.0).matrix();
  if (mode == LatentMode::kStochastic) {
    const VectorXd dsigma = dz.cwiseProduct(cache.eps);
    dlogvar_z += 0.5 * dsigma.cwiseProduct(cache.sigma_z);
  }
  const VectorXd& omega_hat = cache.fusion.omega_hat;
  grads->latent.w_mu += dmu_z * omega_hat.transpose();
  grads->latent.b_mu += dmu_z;
  grads->latent.w_lv += dlogvar_z * omega_hat.transpose();
  grads->latent.b_lv += dlogvar_z;
  const VectorXd domega_hat = params.latent.w_mu.transpose() * dmu_z +
                              params.latent.w_lv.transpose() * dlogvar_z;

  // Gated fusion; the query and neighbor embeddings are inputs, so gradient
  // flow stops at the parameters.
  const VectorXd& u = cache.fusion.gate;
  const VectorXd& ctx = cache.fusion.context;
  const VectorXd du =
      domega_hat.cwiseProduct(input.query_embedding - ctx);
  const VectorXd dgate_pre =
      du.cwiseProduct(u).cwiseProduct(VectorXd::Ones(u.size()) - u);
  VectorXd stacked(2 * params.dims.d_emb);
  stacked << input.query_embedding, ctx;
  grads->fusion.w_gate += dgate_pre * stacked.transpose();
  grads->fusion.b_gate += dgate_pre;

  return loss;
}

}  // namespace praim
