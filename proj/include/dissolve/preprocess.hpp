#ifndef DISSOLVE_PREPROCESS_HPP
#define DISSOLVE_PREPROCESS_HPP

#include "dissolve/types.hpp"

#include <limits>
#include <span>
#include <string>

namespace dissolve {

/// Divisor used for the per-column standard deviation.
enum class StdMode {
  Biased,    // 1/n, the default
  Unbiased,  // 1/(n-1)
};

/// Per-column z-score statistics: means (u) and standard deviations (s).
template <typename Scalar>
struct ScalerModel {
  VectorX<Scalar> means;
  VectorX<Scalar> stds;
  Index n_fit = 0;

  Index n_features() const { return means.size(); }
};

template <typename Derived>
ScalerModel<typename Derived::Scalar> scaler_fit(const Eigen::MatrixBase<Derived>& X,
                                                 StdMode mode = StdMode::Biased) {
  using Scalar = typename Derived::Scalar;
  const Index n = X.rows();
  if (n < 2) throw TooFewRows("scaler_fit needs at least 2 rows, got " + std::to_string(n));

  ScalerModel<Scalar> m;
  m.n_fit = n;
  m.means = X.colwise().mean().transpose();
  const Scalar divisor = static_cast<Scalar>(mode == StdMode::Biased ? n : n - 1);
  m.stds = ((X.rowwise() - m.means.transpose()).array().square().colwise().sum() / divisor)
               .sqrt()
               .transpose();
  // A constant column can still pick up a round-off std (mean of 4.2s != 4.2);
  // treat spreads at round-off level as zero variance.
  const Scalar tol = Scalar(16) * std::numeric_limits<Scalar>::epsilon();
  for (Index j = 0; j < X.cols(); ++j) {
    const Scalar span = X.col(j).maxCoeff() - X.col(j).minCoeff();
    if (span <= tol * X.col(j).cwiseAbs().maxCoeff()) {
      m.stds[j] = Scalar(0);
      m.means[j] = X(0, j);
    }
  }
  return m;
}

/// (x - u) / s per column; zero-variance columns map to 0.
template <typename Scalar, typename Derived>
MatrixX<Scalar> scaler_transform(const ScalerModel<Scalar>& m,
                                 const Eigen::MatrixBase<Derived>& X) {
  if (X.cols() != m.n_features()) {
    throw ShapeError("scaler expects " + std::to_string(m.n_features()) + " columns, got " +
                     std::to_string(X.cols()));
  }
  const VectorX<Scalar> inv =
      (m.stds.array() > Scalar(0)).select(m.stds.array().inverse(), Scalar(0)).matrix();
  return ((X.rowwise() - m.means.transpose()).array().rowwise() * inv.transpose().array())
      .matrix();
}

template <typename Scalar, typename Derived>
MatrixX<Scalar> scaler_inverse(const ScalerModel<Scalar>& m, const Eigen::MatrixBase<Derived>& Z) {
  if (Z.cols() != m.n_features()) {
    throw ShapeError("scaler expects " + std::to_string(m.n_features()) + " columns, got " +
                     std::to_string(Z.cols()));
  }
  return ((Z.array().rowwise() * m.stds.transpose().array()).rowwise() +
          m.means.transpose().array())
      .matrix();
}

/// Appends blocks left to right; every block must have the same row count.
template <typename Scalar>
MatrixX<Scalar> concat_rows(std::span<const MatrixX<Scalar>> blocks) {
  if (blocks.empty()) return {};
  const Index rows = blocks.front().rows();
  Index cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) {
      throw ShapeError("concat_rows: block has " + std::to_string(b.rows()) + " rows, expected " +
                       std::to_string(rows));
    }
    cols += b.cols();
  }
  MatrixX<Scalar> out(rows, cols);
  Index offset = 0;
  for (const auto& b : blocks) {
    out.middleCols(offset, b.cols()) = b;
    offset += b.cols();
  }
  return out;
}

}  // namespace dissolve

#endif  // DISSOLVE_PREPROCESS_HPP
