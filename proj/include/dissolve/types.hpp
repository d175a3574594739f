#ifndef DISSOLVE_TYPES_HPP
#define DISSOLVE_TYPES_HPP

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace dissolve {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

// Errors fall into three families so the CLI can map them onto exit codes:
// usage/config (1), I/O or malformed data (2), numerical failure (3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};
class DataError : public Error {
 public:
  using Error::Error;
};
class NumericalError : public Error {
 public:
  using Error::Error;
};

class BadConfig : public UsageError {
 public:
  using UsageError::UsageError;
};
class BadSpec : public UsageError {
 public:
  using UsageError::UsageError;
};

class ShapeError : public DataError {
 public:
  using DataError::DataError;
};
class StructuralMismatch : public DataError {
 public:
  using DataError::DataError;
};
class ManifestError : public DataError {
 public:
  using DataError::DataError;
};
class ParseError : public DataError {
 public:
  using DataError::DataError;
};
class IoError : public DataError {
 public:
  using DataError::DataError;
};
class TooFewRows : public DataError {
 public:
  using DataError::DataError;
};
class EmptyProfile : public DataError {
 public:
  using DataError::DataError;
};
class ZeroReference : public DataError {
 public:
  using DataError::DataError;
};
class LengthMismatch : public DataError {
 public:
  using DataError::DataError;
};

class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class DegenerateData : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class NonFiniteLoss : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace dissolve

#endif  // DISSOLVE_TYPES_HPP
