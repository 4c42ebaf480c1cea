#include "praim/losses.hpp"

#include <cmath>

#include "praim/common.hpp"

namespace praim {

namespace {
}

double recon_loss(const Eigen::VectorXd& truth, const Eigen::VectorXd& mean,
                  const Eigen::VectorXd& variance) {
  if (truth.size() == 0) {
    throw ValidationError("reconstruction loss needs at least one masked step");
  }
  if (mean.size() != truth.size() || variance.size() != truth.size()) {
    throw ValidationError("loss input lengths differ");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const double var = variance(i);
    if (!(var > 0.0)) throw ValidationError("non-positive variance in loss");
    const double r = truth(i) - mean(i);
    total += r * r / (2.0 * var) + 0.5 * std::log(var) + kHalfLog2Pi;
  }
  return total / static_cast<double>(truth.size());
}

double kl_loss(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma) {
  if (mu.size() != sigma.size()) {
    throw ValidationError("latent mean and scale lengths differ");
  }
  double total = 0.0;
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    const double s = sigma(j);
    if (!(s > 0.0)) throw ValidationError("non-positive latent scale");
    const double s2 = s * s;
    total += s2 + mu(j) * mu(j) - std::log(s2) - 1.0;
  }
  return 0.5 * total;
}

double elbo_loss(double recon, double kl, double theta) {
  if (theta < 0.0) throw ValidationError("KL weight must be non-negative");
  return recon + theta * kl;
}

}  // namespace praim
