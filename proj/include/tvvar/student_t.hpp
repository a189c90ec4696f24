#ifndef TVVAR_STUDENT_T_HPP
#define TVVAR_STUDENT_T_HPP

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "tvvar/errors.hpp"
#include "tvvar/linalg.hpp"

namespace tvvar {

/// log Gamma_p(a), the multivariate gamma function.
inline double log_multigamma(int p, double a) {
  if (a <= 0.5 * (p - 1))
    throw NumericalError("multivariate gamma undefined: argument " + std::to_string(a) +
                         " <= (p-1)/2");
  double s = 0.25 * p * (p - 1) * std::log(M_PI);
  for (int j = 1; j <= p; ++j) s += std::lgamma(a + 0.5 * (1 - j));
  return s;
}

/// Log density of the p-variate Student t used throughout: dof nu, location
/// mu, scale matrix A, with
///   f(y) = Gamma((nu+p)/2) nu^{nu/2} / (Gamma(nu/2) pi^{p/2})
///          * |A|^{-1/2} (nu + (y-mu)'A^{-1}(y-mu))^{-(nu+p)/2}.
/// This is the convention the one-step predictive and the Bayes factors
/// share; under it the predictive covariance is reported as A/(nu-2).
inline double mvt_logpdf(const VectorXd& y, const VectorXd& mu, const MatrixXd& scale,
                         double nu, int t = -1) {
  const int p = static_cast<int>(y.size());
  if (mu.size() != p || scale.rows() != p || scale.cols() != p)
    throw DataError("mvt_logpdf: dimension mismatch");
  if (nu <= 0.0) throw DataError("mvt_logpdf: dof must be positive");
  Eigen::LLT<MatrixXd> llt(symmetrize(scale));
  if (llt.info() != Eigen::Success)
    throw NumericalError("mvt_logpdf: scale not positive definite", t);
  const double logdet =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const VectorXd z = y - mu;
  const double quad = z.dot(llt.solve(z));
  return std::lgamma(0.5 * (nu + p)) - std::lgamma(0.5 * nu) + 0.5 * nu * std::log(nu) -
         0.5 * p * std::log(M_PI) - 0.5 * logdet - 0.5 * (nu + p) * std::log(nu + quad);
}

/// Quantile of the unit-scale variate in the convention above (variance
/// 1/(nu-2)): the standard Student t quantile shrunk by sqrt(nu).
inline double t_unit_quantile(double nu, double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw DataError("quantile probability must be in (0,1)");
  boost::math::students_t_distribution<double> dist(nu);
  return boost::math::quantile(dist, prob) / std::sqrt(nu);
}

}  // namespace tvvar

#endif
