#ifndef TVVAR_SIMULATE_HPP
#define TVVAR_SIMULATE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tvvar/errors.hpp"
#include "tvvar/linalg.hpp"
#include "tvvar/model.hpp"
#include "tvvar/series.hpp"

namespace tvvar {

enum class VolatilityMode { kFixed, kBetaEvolution, kUserPath };

/// Generative settings: true initial state Phi0 ((dp+1) x p) and volatility
/// Sigma0, series length, RNG seed, the volatility law, and the nominal
/// state spread pstar that sets the coefficient drift speed through the
/// discount relation W = Delta^{-1/2} P* Delta^{-1/2} - P*.
struct SimSpec {
  ModelConfig config;
  MatrixXd phi0;
  MatrixXd sigma0;
  int n = 0;
  std::uint64_t seed = 0;
  VolatilityMode vol_mode = VolatilityMode::kBetaEvolution;
  std::vector<MatrixXd> sigma_path;  // used when vol_mode == kUserPath (t = d+1..n)
  double pstar = 0.01;               // P* = pstar * I; 0 freezes the coefficients
  double explosion_guard = 1e6;
};

inline MatrixXd std_normal_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixXd z(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) z(i, j) = normal(rng);
  return z;
}

/// Matrix-variate normal draw M + chol(U) Z chol(V)' with Z iid standard
/// normal, so vec(draw - M) has covariance V (x) U. U and V may be
/// positive semidefinite.
inline MatrixXd sample_matrix_normal(const MatrixXd& M, const MatrixXd& U,
                                     const MatrixXd& V, std::mt19937_64& rng) {
  if (U.rows() != M.rows() || V.rows() != M.cols())
    throw DataError("matrix normal: spread dimensions do not match the location");
  const MatrixXd lu = psd_factor(U);
  const MatrixXd lv = psd_factor(V);
  return M + lu * std_normal_matrix(M.rows(), M.cols(), rng) * lv.transpose();
}

/// Wishart_p(dof, I) draw via the Bartlett factorization; valid for any
/// real dof > p - 1 (chi-square marginals take fractional degrees of
/// freedom).
inline MatrixXd sample_wishart_identity(int p, double dof, std::mt19937_64& rng) {
  if (!(dof > p - 1))
    throw DataError("Wishart dof must exceed p - 1");
  std::normal_distribution<double> normal;
  MatrixXd l = MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    std::chi_squared_distribution<double> chi2(dof - i);
    l(i, i) = std::sqrt(chi2(rng));
    for (int j = 0; j < i; ++j) l(i, j) = normal(rng);
  }
  return l * l.transpose();
}

/// Singular multivariate beta draw with degrees of freedom (dof/2, 1/2):
/// with G ~ Wishart_p(dof, I), g standard normal, and T the upper Cholesky
/// factor of G + gg' (so G + gg' = T'T),
///   B = (T')^{-1} G T^{-1}.
/// Then I - B = (T')^{-1} gg' T^{-1} has rank one and eigenvalues of B lie
/// in (0, 1].
inline MatrixXd sample_singular_beta(int p, double dof, std::mt19937_64& rng) {
  const MatrixXd g = sample_wishart_identity(p, dof, rng);
  std::normal_distribution<double> normal;
  VectorXd gamma(p);
  for (int i = 0; i < p; ++i) gamma[i] = normal(rng);
  const MatrixXd t = chol_upper(g + gamma * gamma.transpose());
  const MatrixXd x = t.transpose().triangularView<Eigen::Lower>().solve(g);
  const MatrixXd b =
      t.transpose().triangularView<Eigen::Lower>().solve(x.transpose()).transpose();
  return symmetrize(b);
}

/// One step of the volatility random walk:
///   Sigma_t^{-1} = k U(Sigma_{t-1}^{-1})' B U(Sigma_{t-1}^{-1}),
/// with B a singular beta of dof (beta*n + p - 1)/2 and 1/2. That dof is
/// what makes the precision a martingale, E(Sigma_t^{-1}) = Sigma_{t-1}^{-1},
/// matching the shrinkage the filter assumes.
inline MatrixXd sample_singular_beta_evolution(const MatrixXd& sigma_prev,
                                               const ModelConfig& cfg,
                                               std::mt19937_64& rng) {
  const int p = cfg.p;
  if (sigma_prev.rows() != p || sigma_prev.cols() != p)
    throw DataError("volatility evolution: dimension mismatch");
  const MatrixXd prec_prev = spd_inverse(sigma_prev);
  const MatrixXd b = sample_singular_beta(p, cfg.beta_n() + p - 1, rng);
  const MatrixXd u = chol_upper(prec_prev);
  const MatrixXd prec = symmetrize(cfg.k * u.transpose() * b * u);
  return spd_inverse(prec);
}

struct SimOutput {
  SeriesFrame data;                 // t = 1..n
  std::vector<MatrixXd> phi_path;   // t = d..n
  std::vector<MatrixXd> sigma_path; // t = d..n
};

/// Generate a series from the model: coefficients follow a random walk with
/// shocks drawn matrix-normal(0, W, Sigma_t), the volatility follows the
/// chosen law, and y_t = Phi_t' F_t + eps_t. The first d observations are
/// N(0, Sigma0). Trajectories whose observations exceed the explosion guard
/// abort with the seed in the message; the model is not constrained to
/// stationarity.
inline SimOutput generate(const SimSpec& spec) {
  const ModelConfig& cfg = spec.config;
  const int q = cfg.state_dim();
  if (spec.phi0.rows() != q || spec.phi0.cols() != cfg.p)
    throw DataError("simulation: phi0 must be (dp+1) x p");
  if (spec.sigma0.rows() != cfg.p || !is_spd(spec.sigma0))
    throw DataError("simulation: sigma0 must be symmetric positive definite p x p");
  if (spec.n < cfg.d + 1) throw DataError("simulation length must be at least d+1");
  if (spec.pstar < 0.0) throw DataError("simulation: pstar must be nonnegative");
  if (spec.vol_mode == VolatilityMode::kUserPath &&
      static_cast<int>(spec.sigma_path.size()) != spec.n - cfg.d)
    throw DataError("simulation: user volatility path must cover t = d+1..n");

  std::mt19937_64 rng(spec.seed);
  const VectorXd inv_sqrt = cfg.delta.cwiseSqrt().cwiseInverse();
  const MatrixXd pstar_mat = spec.pstar * MatrixXd::Identity(q, q);
  const MatrixXd w =
      inv_sqrt.asDiagonal() * pstar_mat * inv_sqrt.asDiagonal() - pstar_mat;

  SimOutput out;
  MatrixXd values(spec.n, cfg.p);
  MatrixXd phi = spec.phi0;
  MatrixXd sigma = spec.sigma0;
  const MatrixXd sigma0_factor = psd_factor(spec.sigma0);
  for (int t = 1; t <= cfg.d; ++t)
    values.row(t - 1) =
        (sigma0_factor * std_normal_matrix(cfg.p, 1, rng)).transpose();
  out.phi_path.push_back(phi);
  out.sigma_path.push_back(sigma);

  for (int t = cfg.d + 1; t <= spec.n; ++t) {
    switch (spec.vol_mode) {
      case VolatilityMode::kFixed: break;
      case VolatilityMode::kBetaEvolution:
        sigma = sample_singular_beta_evolution(sigma, cfg, rng);
        break;
      case VolatilityMode::kUserPath:
        sigma = spec.sigma_path[t - cfg.d - 1];
        if (!is_spd(sigma))
          throw DataError("simulation: user volatility path entry not positive definite");
        break;
    }
    phi = sample_matrix_normal(phi, w, sigma, rng);

    VectorXd f(q);
    f[0] = 1.0;
    for (int j = 1; j <= cfg.d; ++j)
      f.segment(1 + (j - 1) * cfg.p, cfg.p) = values.row(t - 1 - j).transpose();
    const VectorXd eps = psd_factor(sigma) * std_normal_matrix(cfg.p, 1, rng);
    const VectorXd y = phi.transpose() * f + eps;
    if (!(y.norm() <= spec.explosion_guard))
      throw NumericalError("simulated trajectory exploded (seed " +
                               std::to_string(spec.seed) + ")",
                           t);
    values.row(t - 1) = y.transpose();
    out.phi_path.push_back(phi);
    out.sigma_path.push_back(sigma);
  }
  out.data = make_frame(values);
  return out;
}

}  // namespace tvvar

#endif
