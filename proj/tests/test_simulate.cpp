#include <catch2/catch_amalgamated.hpp>

#include "tvvar/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tvvar/filter.hpp"
#include "tvvar/forecast.hpp"
#include "support.hpp"

using namespace tvvar;
using Catch::Approx;
using testsupport::random_spd;

TEST_CASE("matrix normal: zero row spread returns the location") {
  auto gen = testsupport::rng(301);
  const MatrixXd m = testsupport::random_matrix(3, 2, gen);
  const MatrixXd u = MatrixXd::Zero(3, 3);
  const MatrixXd v = random_spd(2, gen);
  for (int rep = 0; rep < 5; ++rep)
    CHECK(testsupport::max_abs_diff(sample_matrix_normal(m, u, v, gen), m) == 0.0);
}

TEST_CASE("matrix normal: vec covariance is V (x) U") {
  auto gen = testsupport::rng(303);
  const int r = 2, c = 2;
  const MatrixXd m = MatrixXd::Zero(r, c);
  MatrixXd u(2, 2), v(2, 2);
  u << 1.0, 0.3, 0.3, 0.5;
  v << 2.0, -0.4, -0.4, 1.0;
  const int draws = 40000;
  MatrixXd vecs(draws, r * c);
  for (int i = 0; i < draws; ++i) {
    const MatrixXd x = sample_matrix_normal(m, u, v, gen);
    vecs.row(i) = Eigen::Map<const VectorXd>(x.data(), r * c).transpose();
  }
  const MatrixXd sample_cov =
      vecs.transpose() * vecs / static_cast<double>(draws);

  MatrixXd kron(r * c, r * c);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j)
      kron.block(i * r, j * r, r, r) = v(i, j) * u;

  // 5 standard errors of a covariance entry estimated from `draws` samples
  for (int i = 0; i < r * c; ++i)
    for (int j = 0; j < r * c; ++j) {
      const double se = std::sqrt((kron(i, i) * kron(j, j) + kron(i, j) * kron(i, j)) /
                                  draws);
      CHECK(std::abs(sample_cov(i, j) - kron(i, j)) < 5.0 * se);
    }
}

TEST_CASE("matrix normal: identity spreads give standard normal entries") {
  auto gen = testsupport::rng(307);
  const int draws = 20000;
  std::vector<double> xs;
  xs.reserve(draws);
  for (int i = 0; i < draws / 4; ++i) {
    const MatrixXd x = sample_matrix_normal(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2),
                                            MatrixXd::Identity(2, 2), gen);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) xs.push_back(x(a, b));
  }
  // Kolmogorov-Smirnov against the standard normal at alpha = 0.01
  std::sort(xs.begin(), xs.end());
  double dmax = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-xs[i] / std::sqrt(2.0));
    dmax = std::max(dmax, std::abs(cdf - (i + 1.0) / xs.size()));
    dmax = std::max(dmax, std::abs(cdf - static_cast<double>(i) / xs.size()));
  }
  CHECK(dmax < 1.63 / std::sqrt(static_cast<double>(xs.size())));
}

TEST_CASE("matrix normal rejects non-PSD spreads") {
  auto gen = testsupport::rng(309);
  MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(
      sample_matrix_normal(MatrixXd::Zero(2, 2), bad, MatrixXd::Identity(2, 2), gen),
      NumericalError);
}

TEST_CASE("singular beta: I - B has rank one, eigenvalues in (0, 1]") {
  auto gen = testsupport::rng(311);
  for (int p : {2, 3, 5}) {
    ModelConfig cfg = make_config(p, 1, 0.98, 0.9);
    for (int rep = 0; rep < 200; ++rep) {
      const MatrixXd b = sample_singular_beta(p, cfg.beta_n() + p - 1, gen);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(MatrixXd::Identity(p, p) - b);
      const VectorXd lam = es.eigenvalues();
      const double lmax = lam.maxCoeff();
      REQUIRE(lmax > 0.0);
      int above = 0;
      for (Eigen::Index i = 0; i < lam.size(); ++i) {
        CHECK(lam[i] > -1e-12);
        if (lam[i] > 1e-10 * lmax) ++above;
      }
      CHECK(above == 1);
    }
  }
}

TEST_CASE("volatility evolution preserves the precision mean") {
  auto gen = testsupport::rng(313);
  const int p = 2;
  ModelConfig cfg = make_config(p, 1, 0.98, 0.9);
  MatrixXd sigma(2, 2);
  sigma << 1.0, 0.4, 0.4, 2.0;
  const MatrixXd prec = sigma.inverse();

  const int draws = 20000;
  MatrixXd mean = MatrixXd::Zero(p, p);
  MatrixXd second = MatrixXd::Zero(p, p);  // entrywise second moments
  for (int i = 0; i < draws; ++i) {
    const MatrixXd s = sample_singular_beta_evolution(sigma, cfg, gen);
    const MatrixXd pr = s.inverse();
    mean += pr;
    second += pr.cwiseProduct(pr);
  }
  mean /= draws;
  second /= draws;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const double var = second(i, j) - mean(i, j) * mean(i, j);
      const double se = std::sqrt(std::max(var, 0.0) / draws);
      CHECK(std::abs(mean(i, j) - prec(i, j)) < 5.0 * se);
    }
}

TEST_CASE("p = 1 volatility evolution stays positive") {
  auto gen = testsupport::rng(317);
  ModelConfig cfg = make_config(1, 1, 0.98, 0.9);
  MatrixXd sigma = MatrixXd::Constant(1, 1, 2.5);
  for (int rep = 0; rep < 500; ++rep) {
    sigma = sample_singular_beta_evolution(sigma, cfg, gen);
    REQUIRE(sigma(0, 0) > 0.0);
    REQUIRE(std::isfinite(sigma(0, 0)));
  }
}

TEST_CASE("generation is deterministic in the seed") {
  ModelConfig cfg = make_config(2, 1, 0.98, 0.9);
  SimSpec spec;
  spec.config = cfg;
  spec.phi0 = MatrixXd::Zero(3, 2);
  spec.phi0(1, 0) = 0.4;
  spec.phi0(2, 1) = 0.3;
  spec.sigma0 = MatrixXd::Identity(2, 2);
  spec.n = 50;
  spec.seed = 777;
  const SimOutput a = generate(spec);
  const SimOutput b = generate(spec);
  CHECK(testsupport::max_abs_diff(a.data.values, b.data.values) == 0.0);
  REQUIRE(a.phi_path.size() == b.phi_path.size());
  CHECK(testsupport::max_abs_diff(a.phi_path.back(), b.phi_path.back()) == 0.0);

  spec.seed = 778;
  const SimOutput c = generate(spec);
  CHECK(testsupport::max_abs_diff(a.data.values, c.data.values) > 0.0);
}

TEST_CASE("trajectory and data lengths are consistent") {
  ModelConfig cfg = make_config(2, 3, 0.98, 0.9);
  SimSpec spec;
  spec.config = cfg;
  spec.phi0 = MatrixXd::Zero(cfg.state_dim(), 2);
  spec.sigma0 = MatrixXd::Identity(2, 2);
  spec.n = 40;
  spec.seed = 5;
  const SimOutput out = generate(spec);
  CHECK(out.data.n() == 40);
  CHECK(static_cast<int>(out.phi_path.size()) == 40 - cfg.d + 1);
  CHECK(static_cast<int>(out.sigma_path.size()) == 40 - cfg.d + 1);
  for (const auto& s : out.sigma_path) CHECK(is_spd(s));
}

TEST_CASE("frozen coefficients and fixed volatility give a plain AR(1)") {
  ModelConfig cfg = make_config(1, 1, 0.98, 0.9);
  SimSpec spec;
  spec.config = cfg;
  spec.phi0 = MatrixXd::Zero(2, 1);
  spec.phi0(1, 0) = 0.5;  // intercept 0, AR coefficient 0.5
  spec.sigma0 = MatrixXd::Identity(1, 1);
  spec.n = 20000;
  spec.seed = 2024;
  spec.pstar = 0.0;  // no coefficient drift
  spec.vol_mode = VolatilityMode::kFixed;
  const SimOutput out = generate(spec);

  const VectorXd y = out.data.values.col(0);
  const double mean = y.mean();
  double num = 0.0, den = 0.0;
  for (int t = 1; t < y.size(); ++t) {
    num += (y[t] - mean) * (y[t - 1] - mean);
    den += (y[t - 1] - mean) * (y[t - 1] - mean);
  }
  CHECK(num / den == Approx(0.5).margin(0.05));
}

TEST_CASE("explosive trajectories abort with the seed in the message") {
  ModelConfig cfg = make_config(1, 1, 0.98, 0.9);
  SimSpec spec;
  spec.config = cfg;
  spec.phi0 = MatrixXd::Zero(2, 1);
  spec.phi0(1, 0) = 1.3;  // explosive AR root
  spec.sigma0 = MatrixXd::Identity(1, 1);
  spec.n = 500;
  spec.seed = 31337;
  spec.pstar = 0.0;
  spec.vol_mode = VolatilityMode::kFixed;
  try {
    generate(spec);
    FAIL("expected explosion guard to fire");
  } catch (const NumericalError& ex) {
    CHECK(std::string(ex.what()).find("31337") != std::string::npos);
  }
}

TEST_CASE("user-supplied volatility path is honored") {
  ModelConfig cfg = make_config(2, 1, 0.98, 0.9);
  SimSpec spec;
  spec.config = cfg;
  spec.phi0 = MatrixXd::Zero(3, 2);
  spec.sigma0 = MatrixXd::Identity(2, 2);
  spec.n = 10;
  spec.seed = 9;
  spec.vol_mode = VolatilityMode::kUserPath;
  for (int t = 0; t < 9; ++t)
    spec.sigma_path.push_back((1.0 + 0.1 * t) * MatrixXd::Identity(2, 2));
  const SimOutput out = generate(spec);
  for (int t = 1; t < 10; ++t)
    CHECK(testsupport::max_abs_diff(out.sigma_path[t], spec.sigma_path[t - 1]) == 0.0);

  spec.sigma_path.pop_back();
  CHECK_THROWS_AS(generate(spec), DataError);
}

TEST_CASE("filter on simulated data is roughly calibrated at one step") {
  // One matched-hyperparameter run; the multi-seed calibration lives in the
  // acceptance suite. Coefficient shocks are frozen: their column covariance
  // is Sigma_t, and the multiplicative volatility walk drifts upward in log
  // scale over long horizons, so any positive shock variance eventually
  // pushes the coefficients into the explosive region.
  ModelConfig cfg = make_config(2, 2, 0.98, 0.9);
  SimSpec spec;
  spec.config = cfg;
  spec.phi0 = MatrixXd::Zero(cfg.state_dim(), 2);
  spec.phi0(1, 0) = 0.3;
  spec.phi0(2, 1) = 0.25;
  spec.phi0(3, 0) = 0.2;
  spec.phi0(4, 1) = 0.15;
  spec.sigma0 = MatrixXd::Identity(2, 2);
  spec.n = 1000;
  spec.seed = 71;
  spec.pstar = 0.0;
  spec.explosion_guard = 1e12;
  const SimOutput out = generate(spec);
  FitMetrics met = rolling_metrics(out.data, cfg, default_prior(cfg), 1);
  CHECK(met.msse.minCoeff() > 0.7);
  CHECK(met.msse.maxCoeff() < 1.3);
}
