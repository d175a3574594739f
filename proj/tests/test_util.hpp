#ifndef DISSOLVE_TEST_UTIL_HPP
#define DISSOLVE_TEST_UTIL_HPP

#include "dissolve/types.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testutil {

inline dissolve::Matrix random_matrix(dissolve::Index rows, dissolve::Index cols, std::mt19937_64& rng,
                                      double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  dissolve::Matrix m(rows, cols);
  for (dissolve::Index j = 0; j < cols; ++j)
    for (dissolve::Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("dissolve_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testutil

#endif
