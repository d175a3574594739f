#include "dissolve/pca.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>

using namespace dissolve;

namespace {

// Brute force: covariance of the centered data, then a dense symmetric
// eigensolver. Eigenvalues descending, vectors matched up to sign.
struct Oracle {
  Vector eigenvalues;
  Matrix vectors;
};

Oracle oracle_pca(const Matrix& X) {
  const Index n = X.rows();
  const Vector mean = X.colwise().mean().transpose();
  Matrix sigma = Matrix::Zero(X.cols(), X.cols());
  for (Index i = 0; i < n; ++i) {
    const Vector d = X.row(i).transpose() - mean;
    sigma += d * d.transpose();
  }
  sigma /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  Oracle o;
  o.eigenvalues = es.eigenvalues().reverse();
  o.vectors = es.eigenvectors().rowwise().reverse();
  return o;
}

double rel(double a, double b, double scale) { return std::abs(a - b) / std::max(1e-300, scale); }

}  // namespace

TEST_CASE("eigenvalues match the covariance oracle on random matrices") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> rows(2, 20), cols(1, 10);
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix X = testutil::random_matrix(rows(rng), cols(rng), rng, 3.0);
    const auto m = pca_fit(X);
    const Oracle o = oracle_pca(X);
    const double scale = o.eigenvalues[0];
    const Index k = m.eigenvalues.size();
    REQUIRE(k == std::min(X.rows(), X.cols()));
    for (Index i = 0; i < k; ++i) CHECK(rel(m.eigenvalues[i], std::max(0.0, o.eigenvalues[i]), scale) <= 1e-8);
    // Remaining oracle eigenvalues are (numerically) zero.
    for (Index i = k; i < o.eigenvalues.size(); ++i) CHECK(std::abs(o.eigenvalues[i]) <= 1e-8 * scale);
    CHECK(std::abs(explained_ratios(m).sum() - 1.0) <= 1e-9);

    // Components agree up to sign where the eigenvalue is well separated.
    for (Index i = 0; i < k; ++i) {
      const double gap_prev = i > 0 ? o.eigenvalues[i - 1] - o.eigenvalues[i] : scale;
      const double gap_next = i + 1 < o.eigenvalues.size() ? o.eigenvalues[i] - o.eigenvalues[i + 1] : scale;
      if (std::min(gap_prev, gap_next) < 1e-3 * scale || o.eigenvalues[i] < 1e-6 * scale) continue;
      const double dot = std::abs(m.components.col(i).dot(o.vectors.col(i)));
      CHECK(dot == doctest::Approx(1.0).epsilon(1e-8));
    }

    // Full-rank reconstruction.
    const Matrix back = reconstruct(m, project(m, X));
    CHECK((back - X).norm() / X.norm() <= 1e-8);
  }
}

TEST_CASE("covariance helper equals the brute-force sum") {
  std::mt19937_64 rng(5);
  const Matrix X = testutil::random_matrix(9, 4, rng);
  const Matrix C = X.rowwise() - X.colwise().mean();
  Matrix sigma = Matrix::Zero(4, 4);
  for (Index i = 0; i < 9; ++i) sigma += C.row(i).transpose() * C.row(i);
  CHECK((covariance(C) - sigma / 9.0).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("perfectly correlated points") {
  Matrix X(3, 2);
  X << 1, 1, 2, 2, 3, 3;
  const auto m = pca_fit(X);
  const Vector r = explained_ratios(m);
  CHECK(std::abs(r[0] - 1.0) <= 1e-12);
  CHECK(std::abs(r[1]) <= 1e-12);
  CHECK(m.eigenvalues[1] == 0.0);  // clamped
}

TEST_CASE("symmetric cross") {
  Matrix X(4, 2);
  X << 1, 0, -1, 0, 0, 1, 0, -1;
  const Vector r = explained_ratios(pca_fit(X));
  CHECK(r[0] == doctest::Approx(0.5));
  CHECK(r[1] == doctest::Approx(0.5));
}

TEST_CASE("explained ratios and component selection from eigenvalues") {
  PcaModel<double> m;
  m.eigenvalues = Vector(2);
  m.eigenvalues << 3, 1;
  const Vector r = explained_ratios(m);
  CHECK(r[0] == doctest::Approx(0.75));
  CHECK(r[1] == doctest::Approx(0.25));

  m.eigenvalues = Vector(4);
  m.eigenvalues << 0.85, 0.10, 0.04, 0.01;
  m.components = Matrix::Identity(4, 4);
  m.mean = Vector::Zero(4);
  CHECK(select_components(m, 0.99) == 3);
  CHECK(m.retained == 3);
  CHECK(select_components(m, 1.0) == 4);
  CHECK(select_components(m, 0.5) == 1);
  CHECK_THROWS_AS(select_components(m, 0.0), BadSpec);
  CHECK_THROWS_AS(select_components(m, 1.5), BadSpec);

  m.eigenvalues = Vector::Ones(1);
  CHECK(select_components(m, 0.3) == 1);

  m.eigenvalues = Vector::Zero(3);
  CHECK_THROWS_AS(explained_ratios(m), DegenerateData);
}

TEST_CASE("score properties") {
  std::mt19937_64 rng(6);
  const Matrix X = testutil::random_matrix(10, 6, rng, 2.0);
  auto m = pca_fit(X);
  const Oracle o = oracle_pca(X);

  const Matrix full = project(m, X);
  const Matrix S = full.rowwise() - full.colwise().mean();
  const Matrix cov = S.transpose() * S / 10.0;
  const double l1 = m.eigenvalues[0];
  for (Index i = 0; i < cov.rows(); ++i)
    for (Index j = 0; j < cov.cols(); ++j)
      if (i != j) CHECK(std::abs(cov(i, j)) <= 1e-8 * l1);
  CHECK(cov.trace() == doctest::Approx(o.eigenvalues.sum()).epsilon(1e-8));

  m.retained = 2;
  const Matrix two = project(m, X);
  REQUIRE(two.cols() == 2);
  for (Index c = 0; c < 2; ++c) {
    const double var = (two.col(c).array() - two.col(c).mean()).square().mean();
    CHECK(var == doctest::Approx(o.eigenvalues[c]).epsilon(1e-8));
  }

  const Matrix mean_row = m.mean.transpose();
  CHECK(project(m, mean_row).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(project(m, Matrix(2, 5)), ShapeError);
}

TEST_CASE("fits are bit-identical and signs canonical") {
  std::mt19937_64 rng(7);
  const Matrix X = testutil::random_matrix(15, 8, rng);
  const auto a = pca_fit(X), b = pca_fit(X);
  CHECK(a.components == b.components);
  CHECK(a.eigenvalues == b.eigenvalues);
  for (Index c = 0; c < a.components.cols(); ++c) {
    Index arg = 0;
    a.components.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(a.components(arg, c) > 0.0);
  }
}

TEST_CASE("one dominant factor gives a first ratio above 0.99") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  Matrix X(40, 30);
  Vector loading = testutil::random_matrix(30, 1, rng);
  for (Index i = 0; i < 40; ++i) X.row(i) = nd(rng) * loading.transpose() + 0.01 * testutil::random_matrix(1, 30, rng);
  CHECK(explained_ratios(pca_fit(X))[0] > 0.99);
}

TEST_CASE("too few rows") {
  CHECK_THROWS_AS(pca_fit(Matrix(1, 3)), TooFewRows);
}
