#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "praim/model.hpp"

namespace praim {

inline constexpr double kHalfLog2Pi = 0.9189385332046727;

// Mean over masked steps of the Gaussian negative log-density
// (x-mu)^2/(2 var) + log(var)/2 + log(2 pi)/2.
double recon_loss(const Eigen::VectorXd& truth, const Eigen::VectorXd& mean,
                  const Eigen::VectorXd& variance);

// KL(N(mu, diag sigma^2) || N(0, I)) = sum(sigma^2 + mu^2 - log sigma^2 - 1)/2.
double kl_loss(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma);

double elbo_loss(double recon, double kl, double theta);

struct LossBreakdown {
  double elbo = 0.0;
  double recon = 0.0;
  double kl = 0.0;
};

// Runs the forward pass, evaluates the ELBO on the masked steps and, when
// grads is non-null, accumulates analytic gradients for every trainable
// tensor into it (callers zero it between batches). Stochastic mode requires
// a fixed eps so the same draw prices the loss and its gradient.
LossBreakdown elbo_with_gradients(const ModelParameters& params,
                                  const ModelInput& input,
                                  const std::vector<std::size_t>& masked_index,
                                  const std::vector<double>& truth_norm,
                                  double theta, LatentMode mode,
                                  const Eigen::VectorXd* eps,
                                  ModelParameters* grads);

}  // namespace praim
