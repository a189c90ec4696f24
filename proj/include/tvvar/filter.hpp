#ifndef TVVAR_FILTER_HPP
#define TVVAR_FILTER_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "tvvar/errors.hpp"
#include "tvvar/linalg.hpp"
#include "tvvar/model.hpp"
#include "tvvar/series.hpp"
#include "tvvar/student_t.hpp"

namespace tvvar {

/// Conjugate posterior at time t: state location m (dp+1 x p), state spread
/// P, volatility scale S, plus the last d observations (most recent first)
/// for building the next design vector. The posterior volatility mean is
/// S/(n-2).
struct PosteriorState {
  int t = 0;
  MatrixXd m;
  MatrixXd P;
  MatrixXd S;
  std::vector<VectorXd> history;
};

/// Per-step byproducts of one filter update.
struct StepDiagnostics {
  int t = 0;
  VectorXd e;           // one-step forecast error
  double Q = 0.0;       // f'Rf + 1
  VectorXd K;           // adaptive gain Rf/Q
  MatrixXd R;           // prior-at-t state spread
  MatrixXd Qstar1;      // one-step predictive scale Q * k^{-1} * S_{t-1}
  double logpred = 0.0; // log one-step predictive density of the observed y_t
  int jitter_escalations = 0;
  bool q_warning = false;
};

struct FilterOptions {
  int snapshot_every = 1;      // keep every k-th posterior (1 = full trajectory)
  bool keep_snapshots = true;
  double q_warn_threshold = 1e12;
};

struct FilterResult {
  PosteriorState state;                  // posterior at t = N
  std::vector<StepDiagnostics> steps;    // t = d+1..N
  std::vector<PosteriorState> snapshots; // t = d, then kept steps (always incl. t = N)
};

inline PosteriorState initial_state(const Prior& prior, const ModelConfig& cfg,
                                    const SeriesFrame& series) {
  if (series.p() != cfg.p) throw DataError("series dimension does not match config p");
  if (series.n() < cfg.d + 1)
    throw DataError("need at least d+1 = " + std::to_string(cfg.d + 1) +
                    " observations, got " + std::to_string(series.n()));
  if (prior.m.rows() != cfg.state_dim() || prior.m.cols() != cfg.p ||
      prior.P.rows() != cfg.state_dim() || prior.S.rows() != cfg.p)
    throw DataError("prior dimensions do not match config");
  PosteriorState st;
  st.t = cfg.d;
  st.m = prior.m;
  st.P = prior.P;
  st.S = prior.S;
  for (int j = 0; j < cfg.d; ++j) st.history.push_back(series.at(cfg.d - j));
  return st;
}

/// Evolution step: state spread is inflated by the discount matrix,
/// R = Delta^{-1/2} P Delta^{-1/2}, and the volatility scale shrinks to
/// k^{-1} S.
inline std::pair<MatrixXd, MatrixXd> evolve(const PosteriorState& state,
                                            const ModelConfig& cfg) {
  if (state.P.rows() != cfg.delta.size())
    throw DataError("state spread does not match the discount vector");
  const VectorXd inv_sqrt = cfg.delta.cwiseSqrt().cwiseInverse();
  MatrixXd r = inv_sqrt.asDiagonal() * state.P * inv_sqrt.asDiagonal();
  return {std::move(r), state.S / cfg.k};
}

namespace detail {

// Cholesky with escalating diagonal jitter: base 1e-10*trace/dim, then x10,
// at most three retries before giving up.
inline int ensure_spd(MatrixXd& a, int t, int& escalations) {
  a = symmetrize(a);
  if (is_spd(a)) return 0;
  const double base = 1e-10 * a.trace() / a.rows();
  for (int attempt = 0; attempt < 3; ++attempt) {
    ++escalations;
    MatrixXd jittered =
        a + base * std::pow(10.0, attempt) * MatrixXd::Identity(a.rows(), a.cols());
    if (is_spd(jittered)) {
      a = jittered;
      return attempt + 1;
    }
  }
  throw NumericalError("posterior matrix lost positive definiteness", t);
}

}  // namespace detail

/// One conjugate update: absorb observation y at time state.t + 1.
inline std::pair<PosteriorState, StepDiagnostics> update(const PosteriorState& state,
                                                         const VectorXd& y,
                                                         const ModelConfig& cfg,
                                                         const FilterOptions& opts = {}) {
  if (state.t < cfg.d) throw DataError("filter state precedes the prior time d");
  if (y.size() != cfg.p) throw DataError("observation dimension mismatch");
  const int t = state.t + 1;

  const VectorXd f = build_design(state.history, cfg.p, cfg.d);
  auto [R, S_prior] = evolve(state, cfg);

  StepDiagnostics diag;
  diag.t = t;
  diag.R = R;
  const VectorXd Rf = R * f;
  diag.Q = f.dot(Rf) + 1.0;
  diag.q_warning = diag.Q > opts.q_warn_threshold;
  diag.e = y - state.m.transpose() * f;
  diag.K = Rf / diag.Q;
  diag.Qstar1 = symmetrize(diag.Q * S_prior);
  diag.logpred = mvt_logpdf(y, state.m.transpose() * f, diag.Qstar1, cfg.beta_n(), t);

  PosteriorState next;
  next.t = t;
  next.m = state.m + diag.K * diag.e.transpose();
  next.P = R - Rf * Rf.transpose() / diag.Q;
  next.S = S_prior + diag.e * diag.e.transpose() / diag.Q;
  detail::ensure_spd(next.P, t, diag.jitter_escalations);
  detail::ensure_spd(next.S, t, diag.jitter_escalations);

  next.history.reserve(cfg.d);
  next.history.push_back(y);
  for (int j = 0; j + 1 < cfg.d; ++j) next.history.push_back(state.history[j]);
  return {std::move(next), std::move(diag)};
}

/// Run the filter over the whole series: prior at t = d, updates for
/// t = d+1..N. Snapshots hold the posterior trajectory (the t = d prior
/// state first), thinned per options but always ending at t = N.
inline FilterResult run_filter(const SeriesFrame& series, const ModelConfig& cfg,
                               const Prior& prior, const FilterOptions& opts = {}) {
  FilterResult result;
  PosteriorState st = initial_state(prior, cfg, series);
  if (opts.keep_snapshots) result.snapshots.push_back(st);
  const int n = series.n();
  result.steps.reserve(n - cfg.d);
  for (int t = cfg.d + 1; t <= n; ++t) {
    auto [next, diag] = update(st, series.at(t), cfg, opts);
    st = std::move(next);
    result.steps.push_back(std::move(diag));
    if (opts.keep_snapshots &&
        ((t - cfg.d) % opts.snapshot_every == 0 || t == n))
      result.snapshots.push_back(st);
  }
  result.state = std::move(st);
  return result;
}

}  // namespace tvvar

#endif
