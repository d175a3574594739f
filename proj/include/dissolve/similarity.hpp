#ifndef DISSOLVE_SIMILARITY_HPP
#define DISSOLVE_SIMILARITY_HPP

#include "dissolve/types.hpp"

namespace dissolve {

using ProfileRef = Eigen::Ref<const Vector>;

struct SimilarityOptions {
  /// Regulatory truncation: keep points only up to the first one where both
  /// profiles exceed 85 % released. Off by default; every point is used.
  bool truncate_after_85 = false;
};

struct SimilarityResult {
  double f1 = 0.0;
  double f2 = 0.0;
  Index n_points = 0;
};

/// Difference factor 100 * sum|R - T| / sum|R|.
double f1(const ProfileRef& reference, const ProfileRef& test, const SimilarityOptions& opt = {});

/// Similarity factor 50 * log10(100 / sqrt(1 + mean((R - T)^2))). Equal
/// profiles give exactly 100.
double f2(const ProfileRef& reference, const ProfileRef& test, const SimilarityOptions& opt = {});

SimilarityResult compare(const ProfileRef& reference, const ProfileRef& test,
                         const SimilarityOptions& opt = {});

/// Number of leading points entering the sums under `opt`.
Index used_points(const ProfileRef& reference, const ProfileRef& test, const SimilarityOptions& opt);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(const Vector& values);

/// Per-row f2 between reference and test profile matrices, summarized.
MeanStd mean_f2(const Matrix& references, const Matrix& tests, const SimilarityOptions& opt = {});

/// f1 in [0, 15] and f2 in [50, 100].
bool equivalent(double f1_value, double f2_value);

}  // namespace dissolve

#endif  // DISSOLVE_SIMILARITY_HPP
