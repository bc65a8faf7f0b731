#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hbf {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A linear system or factorization was numerically singular.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument value was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Antenna, RF-chain, stream and subcarrier counts plus the noise variance.
struct SystemDims {
  int n_tx = 16;
  int n_rx = 16;
  int n_rf = 2;
  int n_streams = 2;
  int n_subcarriers = 1;
  double noise_var = 1.0;

  /// Throws InvalidArgument when a count is non-positive, noise_var <= 0,
  /// n_rf < n_streams or n_rf > min(n_tx, n_rx).
  void validate() const;

  bool narrowband() const { return n_subcarriers == 1; }
};

}  // namespace hbf
