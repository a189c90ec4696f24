#ifndef TVVAR_PORTFOLIO_HPP
#define TVVAR_PORTFOLIO_HPP

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tvvar/errors.hpp"
#include "tvvar/filter.hpp"
#include "tvvar/forecast.hpp"
#include "tvvar/model.hpp"

namespace tvvar {

/// Inputs of one allocation step: one-step forecast mean f, one-step
/// forecast covariance Q, target expected return m.
struct AllocationInput {
  VectorXd f;
  MatrixXd Q;
  double m = 0.0;
};

enum class Strategy { kUnconstrained, kConstrained, kEqualWeight };

inline std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kUnconstrained: return "up";
    case Strategy::kConstrained: return "cp";
    default: return "ewp";
  }
}

/// Minimum-variance weights under the single constraint a'f = m:
/// a = m Q^{-1} f / (f' Q^{-1} f), via a Cholesky solve.
inline VectorXd allocate_up(const AllocationInput& input) {
  Eigen::LLT<MatrixXd> llt(symmetrize(input.Q));
  if (llt.info() != Eigen::Success)
    throw NumericalError("allocation: forecast covariance not positive definite");
  const VectorXd qf = llt.solve(input.f);
  const double denom = input.f.dot(qf);
  if (!(denom > 1e-14 * std::max(1.0, input.f.squaredNorm())))
    throw NumericalError("unconstrained allocation: target return infeasible (f'Q^{-1}f ~ 0)");
  return input.m / denom * qf;
}

/// Minimum-variance weights under a'f = m and a'1 = 1 (fully invested).
/// Rejects f proportional to 1, where the two constraints degenerate.
inline VectorXd allocate_cp(const AllocationInput& input) {
  Eigen::LLT<MatrixXd> llt(symmetrize(input.Q));
  if (llt.info() != Eigen::Success)
    throw NumericalError("allocation: forecast covariance not positive definite");
  const VectorXd ones = VectorXd::Ones(input.f.size());
  const VectorXd qf = llt.solve(input.f);
  const VectorXd q1 = llt.solve(ones);
  const double a = ones.dot(q1);   // 1'Q^{-1}1
  const double b = ones.dot(qf);   // 1'Q^{-1}f
  const double c = input.f.dot(qf);
  const double denom = a * c - b * b;  // positive unless f || 1 (Cauchy-Schwarz)
  if (!(denom > 1e-12 * std::max(a * c, 1e-300)))
    throw NumericalError("constrained allocation: constraints degenerate (f proportional to 1)");
  const double m = input.m;
  // a_t = Q^{-1} [ (1'Q^{-1}(1m - f)) f - (f'Q^{-1}(1m - f)) 1 ] / denom
  const double w_f = a * m - b;
  const double w_1 = b * m - c;
  return (w_f * qf - w_1 * q1) / denom;
}

/// Naive equal weights 1/p, defined for p >= 2.
inline VectorXd allocate_ewp(int p) {
  if (p < 2) throw DataError("equal-weight portfolio needs p >= 2");
  return VectorXd::Constant(p, 1.0 / p);
}

/// One strategy's backtest path.
struct StrategyPath {
  Strategy strategy;
  MatrixXd weights;             // one row per step
  VectorXd realized;            // r_t = a_t' y_t
  VectorXd cumulative;          // running sum (or compounded) of realized
  std::vector<int> flagged;     // times where allocation failed (zero investment)
  double summary = 0.0;         // 100 * mean of cumulative path
};

struct BacktestReport {
  std::vector<int> times;  // t = d+2..N
  std::vector<StrategyPath> paths;
  double target_return = 0.0;
  bool compounded = false;
};

/// Sequential backtest: at each t = d+2..N take the one-step forecast made
/// at t-1, form the weights, and realize a_t' y_t. Allocation failures at a
/// step mean zero investment for that step and are flagged. The cumulative
/// path is additive by default; compounding is opt-in.
inline BacktestReport backtest(const SeriesFrame& series, const ModelConfig& cfg,
                               const Prior& prior, double target_return,
                               const std::set<Strategy>& strategies,
                               bool compound = false) {
  if (!std::isfinite(target_return)) throw DataError("target return must be finite");
  if (series.n() < cfg.d + 2)
    throw DataError("backtest needs at least d+2 observations");
  if (strategies.empty()) throw DataError("backtest needs at least one strategy");

  const FilterResult run = run_filter(series, cfg, prior);
  const int first = cfg.d + 2;
  const int steps = series.n() - first + 1;

  BacktestReport report;
  report.target_return = target_return;
  report.compounded = compound;
  for (int t = first; t <= series.n(); ++t) report.times.push_back(t);
  for (Strategy s : strategies) {
    StrategyPath path;
    path.strategy = s;
    path.weights = MatrixXd::Zero(steps, cfg.p);
    path.realized = VectorXd::Zero(steps);
    path.cumulative = VectorXd::Zero(steps);
    report.paths.push_back(std::move(path));
  }

  for (int i = 0; i < steps; ++i) {
    const int t = first + i;
    const PosteriorState& st = run.snapshots[t - 1 - cfg.d];  // posterior at t-1
    const ForecastResult fr = forecast(st, cfg, 1);
    AllocationInput input{fr.mean, fr.covariance, target_return};
    const VectorXd y = series.at(t);
    for (auto& path : report.paths) {
      VectorXd a = VectorXd::Zero(cfg.p);
      try {
        switch (path.strategy) {
          case Strategy::kUnconstrained: a = allocate_up(input); break;
          case Strategy::kConstrained: a = allocate_cp(input); break;
          case Strategy::kEqualWeight: a = allocate_ewp(cfg.p); break;
        }
      } catch (const NumericalError&) {
        path.flagged.push_back(t);
      }
      path.weights.row(i) = a.transpose();
      path.realized[i] = a.dot(y);
      const double prev = i == 0 ? 0.0 : path.cumulative[i - 1];
      path.cumulative[i] = compound ? (1.0 + prev) * (1.0 + path.realized[i]) - 1.0
                                    : prev + path.realized[i];
    }
  }
  for (auto& path : report.paths) path.summary = 100.0 * path.cumulative.mean();
  return report;
}

}  // namespace tvvar

#endif
