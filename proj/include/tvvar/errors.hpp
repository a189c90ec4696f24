#ifndef TVVAR_ERRORS_HPP
#define TVVAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tvvar {

/// Bad inputs: malformed files, dimension mismatches, invalid hyperparameters.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical breakdown (failed Cholesky, non-positive eigenvalue in a log, ...).
/// Carries the time index of the failing step when one applies (-1 otherwise).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg, int t = -1)
      : std::runtime_error(t >= 0 ? msg + " (t=" + std::to_string(t) + ")" : msg),
        time_index(t) {}
  int time_index;
};

}  // namespace tvvar

#endif
