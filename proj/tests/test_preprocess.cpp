#include "dissolve/preprocess.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <vector>

using namespace dissolve;

TEST_CASE("three-point column") {
  Matrix X(3, 1);
  X << 1, 2, 3;
  const auto m = scaler_fit(X);
  CHECK(m.means[0] == doctest::Approx(2.0));
  CHECK(m.stds[0] == doctest::Approx(0.816496580927726));  // sqrt(2/3)
  const Matrix Z = scaler_transform(m, X);
  CHECK(Z(0, 0) == doctest::Approx(-1.224744871391589));
  CHECK(Z(1, 0) == doctest::Approx(0.0));
  CHECK(Z(2, 0) == doctest::Approx(1.224744871391589));
}

TEST_CASE("unbiased mode divides by n - 1") {
  Matrix X(3, 1);
  X << 1, 2, 3;
  CHECK(scaler_fit(X, StdMode::Unbiased).stds[0] == doctest::Approx(1.0));
}

TEST_CASE("transformed columns have zero mean and unit std; constant columns become zero") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix X = testutil::random_matrix(12 + rep, 7, rng, 5.0);
    X.col(2).setConstant(4.2);
    X.col(5).array() += 1000.0;
    const auto m = scaler_fit(X);
    const Matrix Z = scaler_transform(m, X);
    for (Index j = 0; j < Z.cols(); ++j) {
      if (j == 2) {
        CHECK(Z.col(j).isZero(0.0));
        continue;
      }
      const double mean = Z.col(j).mean();
      const double sd = std::sqrt((Z.col(j).array() - mean).square().mean());
      CHECK(std::abs(mean) <= 1e-9);
      CHECK(std::abs(sd - 1.0) <= 1e-9);
    }
    const Matrix back = scaler_inverse(m, Z);
    for (Index j = 0; j < X.cols(); ++j) {
      if (j != 2) CHECK((back.col(j) - X.col(j)).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("float scalar works") {
  Eigen::MatrixXf X(4, 2);
  X << 1, 5, 2, 5, 3, 5, 4, 5;
  const auto m = scaler_fit(X);
  const Eigen::MatrixXf Z = scaler_transform(m, X);
  CHECK(Z.col(0).mean() == doctest::Approx(0.0f));
  CHECK(Z.col(1).isZero(0.0f));
}

TEST_CASE("scaler errors") {
  Matrix one(1, 3);
  one << 1, 2, 3;
  CHECK_THROWS_AS(scaler_fit(one), TooFewRows);
  Matrix X(3, 2);
  X << 1, 2, 3, 4, 5, 6;
  const auto m = scaler_fit(X);
  CHECK_THROWS_AS(scaler_transform(m, Matrix(3, 3)), ShapeError);
}

TEST_CASE("concat_rows keeps every cell at its offset") {
  std::mt19937_64 rng(4);
  std::vector<Matrix> blocks = {testutil::random_matrix(5, 3, rng), testutil::random_matrix(5, 1, rng),
                                testutil::random_matrix(5, 4, rng)};
  const Matrix C = concat_rows<double>(blocks);
  REQUIRE(C.rows() == 5);
  REQUIRE(C.cols() == 8);
  Index offset = 0;
  for (const auto& b : blocks) {
    for (Index i = 0; i < b.rows(); ++i)
      for (Index j = 0; j < b.cols(); ++j) CHECK(C(i, offset + j) == b(i, j));
    offset += b.cols();
  }
  blocks.push_back(testutil::random_matrix(4, 2, rng));
  CHECK_THROWS_AS(concat_rows<double>(blocks), ShapeError);
}

TEST_CASE("paper channel widths concatenate to 11689 columns") {
  std::vector<Matrix> blocks;
  for (Index w : {1556, 714, 1691, 1691, 6037}) blocks.push_back(Matrix::Zero(2, w));
  CHECK(concat_rows<double>(blocks).cols() == 11689);
}
