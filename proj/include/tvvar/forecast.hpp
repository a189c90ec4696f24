#ifndef TVVAR_FORECAST_HPP
#define TVVAR_FORECAST_HPP

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "tvvar/errors.hpp"
#include "tvvar/filter.hpp"
#include "tvvar/linalg.hpp"
#include "tvvar/model.hpp"
#include "tvvar/student_t.hpp"

namespace tvvar {

/// h-step forecast of the series: Student-t location/scale with dof beta*n.
/// covariance = scale/(beta*n - 2); vol_forecast is the h-step volatility
/// mean (constant in h).
struct ForecastResult {
  int h = 0;
  VectorXd mean;
  MatrixXd scale;
  MatrixXd covariance;
  double dof = 0.0;
  MatrixXd vol_forecast;
};

/// h-step forecast accuracy summaries, componentwise over t = d..N-h.
struct FitMetrics {
  int h = 0;
  VectorXd msse;
  VectorXd mae;
  VectorXd me;
  int count = 0;
};

/// Volatility forecast mean E(Sigma_{t+h}|y^t) = (1-beta) k^{-1}/(3 beta - 2) S,
/// the same for every horizon.
inline MatrixXd vol_forecast_mean(const PosteriorState& state, const ModelConfig& cfg) {
  return (1.0 - cfg.beta) / (cfg.k * (3.0 * cfg.beta - 2.0)) * state.S;
}

/// One-step-ahead correlation forecast: vol_forecast_mean normalized to unit
/// diagonal.
inline MatrixXd correlation_forecast(const PosteriorState& state, const ModelConfig& cfg) {
  if (cfg.p < 2) throw DataError("correlation forecast needs p >= 2");
  MatrixXd v = vol_forecast_mean(state, cfg);
  VectorXd diag = v.diagonal();
  if (diag.minCoeff() <= 0.0)
    throw NumericalError("correlation forecast: non-positive variance", state.t);
  VectorXd inv_sd = diag.cwiseSqrt().cwiseInverse();
  return inv_sd.asDiagonal() * v * inv_sd.asDiagonal();
}

namespace detail {

inline MatrixXd horizon_spread(const MatrixXd& P, const ModelConfig& cfg, int h) {
  if (cfg.horizon_discount == HorizonDiscount::kRecursive) {
    // R_t(h) = Delta^{-h/2} P_t Delta^{-h/2}
    VectorXd scale(cfg.delta.size());
    for (Eigen::Index j = 0; j < cfg.delta.size(); ++j)
      scale[j] = std::pow(cfg.delta[j], -0.5 * h);
    return scale.asDiagonal() * P * scale.asDiagonal();
  }
  // Constant shocks: R_t(h) = P_t + h (Delta^{-1/2} P_t Delta^{-1/2} - P_t)
  const VectorXd inv_sqrt = cfg.delta.cwiseSqrt().cwiseInverse();
  MatrixXd r1 = inv_sqrt.asDiagonal() * P * inv_sqrt.asDiagonal();
  return P + h * (r1 - P);
}

}  // namespace detail

/// Iterated forecasts for horizons 1..h: the design at t+j uses realized
/// observations for non-positive leads and previously computed forecast
/// means otherwise, and the state spread is inflated by the discount law at
/// each horizon. The h = 1 entry is the exact one-step predictive.
inline std::vector<ForecastResult> forecast_path(const PosteriorState& state,
                                                 const ModelConfig& cfg, int h) {
  if (h < 1) throw DataError("forecast horizon must be >= 1");
  if (state.t < cfg.d) throw DataError("state precedes the prior time d");
  std::vector<VectorXd> means;
  means.reserve(h);
  const MatrixXd vol = vol_forecast_mean(state, cfg);
  const double bn = cfg.beta_n();
  std::vector<ForecastResult> out;
  out.reserve(h);
  for (int j = 1; j <= h; ++j) {
    VectorXd fhat(cfg.state_dim());
    fhat[0] = 1.0;
    for (int i = 1; i <= cfg.d; ++i) {
      const int lead = j - i;  // time offset of the lag-i value relative to t
      const VectorXd& v = lead <= 0 ? state.history[-lead] : means[lead - 1];
      fhat.segment(1 + (i - 1) * cfg.p, cfg.p) = v;
    }
    means.push_back(state.m.transpose() * fhat);

    ForecastResult fr;
    fr.h = j;
    fr.mean = means.back();
    const MatrixXd Rh = detail::horizon_spread(state.P, cfg, j);
    const double bracket = fhat.dot(Rh * fhat) + 1.0;
    fr.scale = symmetrize(bracket / cfg.k * state.S);
    fr.covariance = fr.scale / (bn - 2.0);
    fr.dof = bn;
    fr.vol_forecast = vol;
    out.push_back(std::move(fr));
  }
  return out;
}

inline ForecastResult forecast(const PosteriorState& state, const ModelConfig& cfg, int h) {
  return forecast_path(state, cfg, h).back();
}

/// Central credible bounds for the h-step forecast, componentwise:
/// mean +/- q * sqrt(diag(scale)) with q the (1+level)/2 quantile of the
/// unit-scale Student t variate.
inline std::pair<VectorXd, VectorXd> credible_bounds(const ForecastResult& result,
                                                     double level) {
  if (!(level > 0.0 && level < 1.0)) throw DataError("credible level must be in (0,1)");
  const double q = t_unit_quantile(result.dof, 0.5 * (1.0 + level));
  const VectorXd half = q * result.scale.diagonal().cwiseSqrt();
  return {result.mean - half, result.mean + half};
}

/// MSSE/MAE/ME at horizon h over t = d..N-h: standardized errors use the
/// symmetric inverse square root of the forecast covariance. The t = d term
/// comes from the prior-only state.
inline FitMetrics rolling_metrics(const SeriesFrame& series, const ModelConfig& cfg,
                                  const Prior& prior, int h,
                                  const FilterOptions& opts = {}) {
  if (h < 1) throw DataError("metrics horizon must be >= 1");
  if (series.n() < cfg.d + h + 1)
    throw DataError("need at least d+h+1 observations for h-step metrics");
  FilterOptions full = opts;
  full.snapshot_every = 1;
  full.keep_snapshots = true;
  const FilterResult run = run_filter(series, cfg, prior, full);

  FitMetrics metrics;
  metrics.h = h;
  metrics.msse = VectorXd::Zero(cfg.p);
  metrics.mae = VectorXd::Zero(cfg.p);
  metrics.me = VectorXd::Zero(cfg.p);
  for (int t = cfg.d; t <= series.n() - h; ++t) {
    const PosteriorState& st = run.snapshots[t - cfg.d];
    const ForecastResult fr = forecast(st, cfg, h);
    const VectorXd e = series.at(t + h) - fr.mean;
    const VectorXd v = sym_inv_sqrt(fr.covariance, t) * e;
    metrics.msse += v.cwiseAbs2();
    metrics.mae += e.cwiseAbs();
    metrics.me += e;
    ++metrics.count;
  }
  metrics.msse /= metrics.count;
  metrics.mae /= metrics.count;
  metrics.me /= metrics.count;
  return metrics;
}

}  // namespace tvvar

#endif
