#ifndef TVVAR_TESTS_SUPPORT_HPP
#define TVVAR_TESTS_SUPPORT_HPP

#include <Eigen/Dense>
#include <random>

namespace testsupport {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline VectorXd random_vector(int n, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(gen);
  return v;
}

inline MatrixXd random_matrix(int r, int c, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = normal(gen);
  return m;
}

/// Well-conditioned random symmetric positive-definite matrix.
inline MatrixXd random_spd(int n, std::mt19937_64& gen, double ridge = 0.5) {
  MatrixXd a = random_matrix(n, n, gen);
  return a * a.transpose() / n + ridge * MatrixXd::Identity(n, n);
}

inline double max_abs_diff(const MatrixXd& a, const MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testsupport

#endif
