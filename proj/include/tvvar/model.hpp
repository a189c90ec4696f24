#ifndef TVVAR_MODEL_HPP
#define TVVAR_MODEL_HPP

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "tvvar/errors.hpp"

namespace tvvar {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// How the state spread is inflated over a multi-step horizon.
enum class HorizonDiscount { kRecursive, kConstant };

/// Volatility degrees-of-freedom n and scaling constant k implied by
/// (p, beta). The volatility evolution shrinks the Wishart degrees of
/// freedom from n+p-1 to beta*n+p-1, and k = (n+p-1)/(beta*n+p-1) keeps
/// the precision mean unchanged. beta must exceed 2/3 so that the
/// multi-step forecast covariance (which divides by 3*beta-2) is finite.
inline std::pair<double, double> derive_constants(int p, double beta) {
  if (p < 1) throw DataError("series dimension p must be >= 1");
  if (!(beta > 2.0 / 3.0 && beta < 1.0))
    throw DataError("volatility discount beta must lie in (2/3, 1)");
  const double n = 1.0 / (1.0 - beta);
  const double k = (beta * (1.0 - p) + p) / (beta * (2.0 - p) + p - 1.0);
  return {n, k};
}

/// Model hyperparameters: series dimension p, autoregressive order d,
/// per-component state discount factors delta (length d*p+1), volatility
/// discount beta, and the derived constants n, k.
struct ModelConfig {
  int p = 0;
  int d = 0;
  VectorXd delta;
  double beta = 0.0;
  double n = 0.0;
  double k = 0.0;
  HorizonDiscount horizon_discount = HorizonDiscount::kRecursive;

  int state_dim() const { return d * p + 1; }
  double beta_n() const { return beta * n; }
};

/// Validated config with a full delta vector.
inline ModelConfig make_config(int p, int d, const VectorXd& delta, double beta) {
  if (d < 1) throw DataError("autoregressive order d must be >= 1");
  auto [n, k] = derive_constants(p, beta);
  if (delta.size() != d * p + 1)
    throw DataError("delta must have length d*p+1 = " + std::to_string(d * p + 1) +
                    ", got " + std::to_string(delta.size()));
  for (Eigen::Index j = 0; j < delta.size(); ++j)
    if (!(delta[j] > 0.0 && delta[j] <= 1.0))
      throw DataError("every state discount factor must lie in (0, 1]");
  ModelConfig cfg;
  cfg.p = p;
  cfg.d = d;
  cfg.delta = delta;
  cfg.beta = beta;
  cfg.n = n;
  cfg.k = k;
  return cfg;
}

/// A single scalar delta expands to delta * I_{dp+1}.
inline ModelConfig make_config(int p, int d, double delta, double beta) {
  if (d < 1) throw DataError("autoregressive order d must be >= 1");
  return make_config(p, d, VectorXd::Constant(d * p + 1, delta), beta);
}

/// Conjugate prior at time t = d: state location m (dp+1 x p), state spread
/// P (dp+1 square), volatility scale S (p square).
struct Prior {
  MatrixXd m;
  MatrixXd P;
  MatrixXd S;
};

/// Weakly informative default: m = initial belief (else zero),
/// P = 1000 * I, S = I.
inline Prior default_prior(const ModelConfig& cfg,
                           const std::optional<MatrixXd>& initial_belief = std::nullopt) {
  const int q = cfg.state_dim();
  Prior prior;
  if (initial_belief) {
    if (initial_belief->rows() != q || initial_belief->cols() != cfg.p)
      throw DataError("initial belief must be (dp+1) x p");
    prior.m = *initial_belief;
  } else {
    prior.m = MatrixXd::Zero(q, cfg.p);
  }
  prior.P = 1000.0 * MatrixXd::Identity(q, q);
  prior.S = MatrixXd::Identity(cfg.p, cfg.p);
  return prior;
}

/// Regression design vector f = [1, y'_{t-1}, ..., y'_{t-d}]'.
/// history holds the last d observations, most recent first.
inline VectorXd build_design(const std::vector<VectorXd>& history, int p, int d) {
  if (static_cast<int>(history.size()) != d)
    throw DataError("design vector needs exactly d = " + std::to_string(d) +
                    " lagged observations, got " + std::to_string(history.size()));
  VectorXd f(d * p + 1);
  f[0] = 1.0;
  for (int j = 0; j < d; ++j) {
    if (history[j].size() != p)
      throw DataError("lagged observation has dimension " +
                      std::to_string(history[j].size()) + ", expected p = " +
                      std::to_string(p));
    f.segment(1 + j * p, p) = history[j];
  }
  return f;
}

}  // namespace tvvar

#endif
