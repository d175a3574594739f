#ifndef DISSOLVE_PCA_HPP
#define DISSOLVE_PCA_HPP

#include "dissolve/types.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace dissolve {

/// Fitted principal component decomposition.
///
/// `components` holds one unit-norm principal direction per column, ordered
/// by decreasing eigenvalue of the 1/n feature covariance. `retained` is the
/// number of leading columns used by project().
template <typename Scalar>
struct PcaModel {
  VectorX<Scalar> mean;
  MatrixX<Scalar> components;  // m x min(n, m)
  VectorX<Scalar> eigenvalues;  // descending, >= 0
  Index retained = 0;

  Index n_features() const { return mean.size(); }
  Index rank_bound() const { return eigenvalues.size(); }
};

inline constexpr double kEigenvalueClampTol = 1e-10;
inline constexpr double kCumulativeRatioSlack = 1e-12;
inline constexpr double kDefaultRetention = 0.99;

/// Flips each column so that its largest-magnitude entry is positive. Ties
/// go to the lowest row index.
template <typename Derived>
void canonicalize_signs(Eigen::MatrixBase<Derived>& W) {
  for (Index c = 0; c < W.cols(); ++c) {
    Index arg = 0;
    auto best = std::abs(W(0, c));
    for (Index r = 1; r < W.rows(); ++r) {
      if (std::abs(W(r, c)) > best) {
        best = std::abs(W(r, c));
        arg = r;
      }
    }
    if (W(arg, c) < 0) W.col(c) *= -1;
  }
}

/// Eigen-decomposes the covariance of X through a thin SVD of the centered
/// data: eigenvalue_j = singular_value_j^2 / n. All components are retained
/// until select_components() is called.
template <typename Derived>
PcaModel<typename Derived::Scalar> pca_fit(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  const Index n = X.rows();
  if (n < 2) throw TooFewRows("pca_fit needs at least 2 rows, got " + std::to_string(n));

  PcaModel<Scalar> m;
  m.mean = X.colwise().mean().transpose();
  const MatrixX<Scalar> centered = X.rowwise() - m.mean.transpose();

  Eigen::BDCSVD<MatrixX<Scalar>> svd(centered, Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw ConvergenceError("SVD of centered data did not converge");

  m.eigenvalues = svd.singularValues().array().square() / static_cast<Scalar>(n);
  for (Index i = 0; i < m.eigenvalues.size(); ++i) {
    if (std::abs(m.eigenvalues[i]) <= Scalar(kEigenvalueClampTol)) m.eigenvalues[i] = Scalar(0);
  }
  m.components = svd.matrixV();
  canonicalize_signs(m.components);
  m.retained = m.eigenvalues.size();
  return m;
}

/// lambda_j / sum(lambda).
template <typename Scalar>
VectorX<Scalar> explained_ratios(const PcaModel<Scalar>& m) {
  const Scalar total = m.eigenvalues.sum();
  if (!(total > Scalar(0))) throw DegenerateData("all eigenvalues are zero");
  return m.eigenvalues / total;
}

template <typename Scalar>
VectorX<Scalar> cumulative_ratios(const PcaModel<Scalar>& m) {
  VectorX<Scalar> r = explained_ratios(m);
  for (Index i = 1; i < r.size(); ++i) r[i] += r[i - 1];
  return r;
}

/// Smallest v whose cumulative explained ratio reaches `threshold`; stores it
/// in m.retained. A slack of 1e-12 absorbs round-off in the running sum.
template <typename Scalar>
Index select_components(PcaModel<Scalar>& m, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw BadSpec("retention threshold must lie in (0, 1], got " + std::to_string(threshold));
  }
  const VectorX<Scalar> cum = cumulative_ratios(m);
  Index v = cum.size();
  for (Index i = 0; i < cum.size(); ++i) {
    if (static_cast<double>(cum[i]) >= threshold - kCumulativeRatioSlack) {
      v = i + 1;
      break;
    }
  }
  m.retained = v;
  return v;
}

/// Scores (X - mean) W[:, :retained].
template <typename Scalar, typename Derived>
MatrixX<Scalar> project(const PcaModel<Scalar>& m, const Eigen::MatrixBase<Derived>& X) {
  if (X.cols() != m.n_features()) {
    throw ShapeError("PCA expects " + std::to_string(m.n_features()) + " columns, got " +
                     std::to_string(X.cols()));
  }
  return (X.rowwise() - m.mean.transpose()) * m.components.leftCols(m.retained);
}

/// Maps scores back to feature space: scores W[:, :k]^T + mean.
template <typename Scalar, typename Derived>
MatrixX<Scalar> reconstruct(const PcaModel<Scalar>& m, const Eigen::MatrixBase<Derived>& scores) {
  if (scores.cols() > m.components.cols()) {
    throw ShapeError("too many score columns for this PCA model");
  }
  return (scores * m.components.leftCols(scores.cols()).transpose()).rowwise() +
         m.mean.transpose();
}

/// Biased covariance of already-centered data: X^T X / n.
template <typename Derived>
MatrixX<typename Derived::Scalar> covariance(const Eigen::MatrixBase<Derived>& X) {
  using Scalar = typename Derived::Scalar;
  if (X.rows() < 1) throw TooFewRows("covariance of an empty matrix");
  MatrixX<Scalar> cov = (X.transpose() * X) / static_cast<Scalar>(X.rows());
  return (cov + cov.transpose()) / Scalar(2);
}

}  // namespace dissolve

#endif  // DISSOLVE_PCA_HPP
