#ifndef TVVAR_SELECTION_HPP
#define TVVAR_SELECTION_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <string>
#include <utility>
#include <vector>

#include "tvvar/errors.hpp"
#include "tvvar/filter.hpp"
#include "tvvar/forecast.hpp"
#include "tvvar/linalg.hpp"
#include "tvvar/model.hpp"

namespace tvvar {

/// Sequential Bayes factors of model 1 against model 2, one per shared
/// observation time.
struct ComparisonTrace {
  std::vector<int> times;
  std::vector<double> log_H;
  std::vector<double> H;
  std::vector<double> running_mean;  // running arithmetic mean of H
  std::vector<double> logpred1;
  std::vector<double> logpred2;
  double mean_H = 0.0;
  double mean_log_H = 0.0;
};

/// Evaluated log-likelihood with its per-term breakdown:
/// total = constant + quadratic + logdet + eigen.
struct LikelihoodReport {
  double total = 0.0;
  double constant = 0.0;
  double quadratic = 0.0;
  double logdet = 0.0;
  double eigen = 0.0;
  std::vector<int> survived;  // eigenvalues above threshold per step
};

/// log H_t(1) for one observation: ratio of the two models' one-step
/// predictive Student-t densities, in the shared-dof form
/// H = (|Q2*|/|Q1*|)^{1/2} ((bn + e1'Q1*^{-1}e1)/(bn + e2'Q2*^{-1}e2))^{-(bn+p)/2}.
/// Both models must share p and beta.
inline double log_bayes_factor_step(const StepDiagnostics& diag1,
                                    const StepDiagnostics& diag2,
                                    const ModelConfig& cfg) {
  if (diag1.e.size() != diag2.e.size())
    throw DataError("Bayes factor: models must share the series dimension");
  const double bn = cfg.beta_n();
  const int p = static_cast<int>(diag1.e.size());
  auto term = [&](const StepDiagnostics& dg) {
    Eigen::LLT<MatrixXd> llt(symmetrize(dg.Qstar1));
    if (llt.info() != Eigen::Success)
      throw NumericalError("Bayes factor: predictive scale not positive definite", dg.t);
    const double logdet =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return std::make_pair(logdet, dg.e.dot(llt.solve(dg.e)));
  };
  auto [logdet1, quad1] = term(diag1);
  auto [logdet2, quad2] = term(diag2);
  return 0.5 * (logdet2 - logdet1) -
         0.5 * (bn + p) * (std::log(bn + quad1) - std::log(bn + quad2));
}

inline double bayes_factor_step(const StepDiagnostics& diag1, const StepDiagnostics& diag2,
                                const ModelConfig& cfg) {
  return std::exp(log_bayes_factor_step(diag1, diag2, cfg));
}

/// Run two models over the same series in lockstep and collect sequential
/// Bayes factors for every time both produce a one-step forecast.
inline ComparisonTrace compare_models(const SeriesFrame& series, const ModelConfig& cfg1,
                                      const ModelConfig& cfg2, const Prior& prior1,
                                      const Prior& prior2) {
  if (cfg1.p != cfg2.p) throw DataError("compared models must share p");
  if (cfg1.beta != cfg2.beta)
    throw DataError("Bayes factors require equal beta; compare across beta by likelihood");
  FilterOptions light;
  light.keep_snapshots = false;
  const FilterResult run1 = run_filter(series, cfg1, prior1, light);
  const FilterResult run2 = run_filter(series, cfg2, prior2, light);

  ComparisonTrace trace;
  const int start = std::max(cfg1.d, cfg2.d) + 1;
  double sum_H = 0.0;
  double sum_log = 0.0;
  for (int t = start; t <= series.n(); ++t) {
    const StepDiagnostics& d1 = run1.steps[t - cfg1.d - 1];
    const StepDiagnostics& d2 = run2.steps[t - cfg2.d - 1];
    const double lh = log_bayes_factor_step(d1, d2, cfg1);
    trace.times.push_back(t);
    trace.log_H.push_back(lh);
    trace.H.push_back(std::exp(lh));
    trace.logpred1.push_back(d1.logpred);
    trace.logpred2.push_back(d2.logpred);
    sum_H += trace.H.back();
    sum_log += lh;
    trace.running_mean.push_back(sum_H / trace.H.size());
  }
  if (!trace.H.empty()) {
    trace.mean_H = trace.running_mean.back();
    trace.mean_log_H = sum_log / trace.H.size();
  }
  return trace;
}

/// Log-likelihood of the volatility path evaluated at the posterior means
/// Sigma_t = S_t/(n-2). Requires the full snapshot trajectory t = d..N.
/// The eigenvalue term keeps, per step, the eigenvalues of
/// I - k^{-1} (U')^{-1} Sigma_t^{-1} U^{-1} (U the upper Cholesky factor of
/// Sigma_{t-1}^{-1}) above 1e-10 times the largest; in exact arithmetic
/// exactly one survives.
inline LikelihoodReport evaluate_log_likelihood(const std::vector<PosteriorState>& snapshots,
                                                const SeriesFrame& series,
                                                const ModelConfig& cfg) {
  const int n = series.n();
  if (static_cast<int>(snapshots.size()) != n - cfg.d + 1)
    throw DataError("log-likelihood needs the full (unthinned) posterior trajectory");
  for (int i = 0; i < static_cast<int>(snapshots.size()); ++i)
    if (snapshots[i].t != cfg.d + i)
      throw DataError("posterior trajectory is not consecutive in t");

  LikelihoodReport rep;
  const double nn = cfg.n;
  const int p = cfg.p;
  double prev_logdet = 0.0;
  MatrixXd prev_inv;
  {
    const MatrixXd sigma_d = snapshots[0].S / (nn - 2.0);
    prev_logdet = logdet_spd(sigma_d, cfg.d);
    prev_inv = spd_inverse(sigma_d, cfg.d);
  }
  for (int t = cfg.d + 1; t <= n; ++t) {
    const PosteriorState& prev = snapshots[t - cfg.d - 1];
    const PosteriorState& cur = snapshots[t - cfg.d];
    const MatrixXd sigma_t = cur.S / (nn - 2.0);
    const MatrixXd sigma_t_inv = spd_inverse(sigma_t, t);
    const double cur_logdet = logdet_spd(sigma_t, t);

    const VectorXd f = build_design(prev.history, cfg.p, cfg.d);
    const VectorXd e = series.at(t) - prev.m.transpose() * f;
    rep.quadratic += -0.5 * e.dot(sigma_t_inv * e);

    rep.logdet += 0.5 * (nn - p) * (prev_logdet - cur_logdet);

    // I - B with B = k^{-1} (U')^{-1} Sigma_t^{-1} U^{-1}; rank one by the
    // rank-one structure of the S recursion.
    const MatrixXd u = chol_upper(prev_inv, t);
    const MatrixXd u_inv =
        u.triangularView<Eigen::Upper>().solve(MatrixXd::Identity(p, p));
    const MatrixXd b = u_inv.transpose() * sigma_t_inv * u_inv / cfg.k;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(
        symmetrize(MatrixXd::Identity(p, p) - b));
    const VectorXd lam = es.eigenvalues();
    const double lmax = lam.maxCoeff();
    if (lam.minCoeff() < -1e-6 * std::max(lmax, 1e-300))
      throw NumericalError("log-likelihood: negative eigenvalue in the volatility "
                           "transition term",
                           t);
    int kept = 0;
    for (Eigen::Index j = 0; j < lam.size(); ++j) {
      if (lmax > 0.0 && lam[j] > 1e-10 * lmax) {
        rep.eigen += -0.5 * p * std::log(lam[j]);
        ++kept;
      }
    }
    rep.survived.push_back(kept);

    prev_logdet = cur_logdet;
    prev_inv = sigma_t_inv;
  }
  rep.constant = -0.5 * n * p * std::log(2.0 * M_PI * M_PI) -
                 0.5 * n * p * (nn - p) * std::log(cfg.k) +
                 n * (log_multigamma(p, 0.5 * (nn + 1.0)) -
                      log_multigamma(p, 0.5 * nn));
  rep.total = rep.constant + rep.quadratic + rep.logdet + rep.eigen;
  return rep;
}

/// One hyperparameter grid cell: the Table-1 columns.
struct GridCell {
  int d = 0;
  double delta = 0.0;
  double beta = 0.0;
  bool ok = false;
  std::string error;
  double loglik = 0.0;
  VectorXd msse;
  VectorXd mae;
};

struct GridResult {
  std::vector<GridCell> cells;  // ranked best first
};

struct PriorOptions {
  double p_scale = 1000.0;
  double s_scale = 1.0;
};

inline Prior scaled_prior(const ModelConfig& cfg, const PriorOptions& opts) {
  Prior prior = default_prior(cfg);
  prior.P *= opts.p_scale / 1000.0;
  prior.S *= opts.s_scale;
  return prior;
}

/// Evaluate every (d, delta, beta) cell: log-likelihood at the posterior
/// volatility mean plus one-step MSSE and MAE. Cells are ranked by
/// log-likelihood, ties broken by distance of MSSE(1) from the all-ones
/// vector, then by smaller d. A failing cell is recorded, not fatal.
inline GridResult grid_search(const SeriesFrame& series, const std::vector<int>& ds,
                              const std::vector<double>& deltas,
                              const std::vector<double>& betas,
                              const PriorOptions& prior_opts = {}, int jobs = 1) {
  if (ds.empty() || deltas.empty() || betas.empty())
    throw DataError("grid search needs a nonempty grid");
  std::vector<GridCell> cells;
  for (int d : ds)
    for (double delta : deltas)
      for (double beta : betas) {
        GridCell cell;
        cell.d = d;
        cell.delta = delta;
        cell.beta = beta;
        cells.push_back(cell);
      }

  auto eval_cell = [&](GridCell cell) {
    try {
      const ModelConfig cfg = make_config(series.p(), cell.d, cell.delta, cell.beta);
      const Prior prior = scaled_prior(cfg, prior_opts);
      const FilterResult run = run_filter(series, cfg, prior);
      const LikelihoodReport rep = evaluate_log_likelihood(run.snapshots, series, cfg);
      const FitMetrics metrics = rolling_metrics(series, cfg, prior, 1);
      cell.loglik = rep.total;
      cell.msse = metrics.msse;
      cell.mae = metrics.mae;
      cell.ok = true;
    } catch (const std::exception& ex) {
      cell.ok = false;
      cell.error = ex.what();
    }
    return cell;
  };

  if (jobs <= 1) {
    for (auto& cell : cells) cell = eval_cell(cell);
  } else {
    // Bounded fan-out; results collected in cell order so the ranking is
    // independent of scheduling.
    for (size_t base = 0; base < cells.size(); base += jobs) {
      std::vector<std::future<GridCell>> batch;
      for (size_t i = base; i < std::min(cells.size(), base + jobs); ++i)
        batch.push_back(std::async(std::launch::async, eval_cell, cells[i]));
      for (size_t i = 0; i < batch.size(); ++i) cells[base + i] = batch[i].get();
    }
  }

  std::stable_sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
    if (a.ok != b.ok) return a.ok;
    if (!a.ok) return false;
    if (a.loglik != b.loglik) return a.loglik > b.loglik;
    const double da = (a.msse.array() - 1.0).matrix().norm();
    const double db = (b.msse.array() - 1.0).matrix().norm();
    if (da != db) return da < db;
    return a.d < b.d;
  });
  return {std::move(cells)};
}

}  // namespace tvvar

#endif
