#include "dissolve/similarity.hpp"

#include <cmath>
#include <string>

namespace dissolve {

namespace {

void check_pair(const ProfileRef& r, const ProfileRef& t) {
  if (r.size() == 0 || t.size() == 0) throw EmptyProfile("profile has no points");
  if (r.size() != t.size()) {
    throw LengthMismatch("profiles differ in length: " + std::to_string(r.size()) + " vs " +
                         std::to_string(t.size()));
  }
}

}  // namespace

Index used_points(const ProfileRef& reference, const ProfileRef& test,
                  const SimilarityOptions& opt) {
  check_pair(reference, test);
  if (!opt.truncate_after_85) return reference.size();
  for (Index i = 0; i < reference.size(); ++i) {
    if (reference[i] > 85.0 && test[i] > 85.0) return i + 1;
  }
  return reference.size();
}

double f1(const ProfileRef& reference, const ProfileRef& test, const SimilarityOptions& opt) {
  const Index n = used_points(reference, test, opt);
  const double denom = reference.head(n).cwiseAbs().sum();
  if (denom == 0.0) throw ZeroReference("reference profile sums to zero");
  return 100.0 * (reference.head(n) - test.head(n)).cwiseAbs().sum() / denom;
}

double f2(const ProfileRef& reference, const ProfileRef& test, const SimilarityOptions& opt) {
  const Index n = used_points(reference, test, opt);
  const double msd = (reference.head(n) - test.head(n)).squaredNorm() / static_cast<double>(n);
  return 50.0 * std::log10(100.0 / std::sqrt(1.0 + msd));
}

SimilarityResult compare(const ProfileRef& reference, const ProfileRef& test,
                         const SimilarityOptions& opt) {
  return {f1(reference, test, opt), f2(reference, test, opt), used_points(reference, test, opt)};
}

MeanStd mean_std(const Vector& values) {
  if (values.size() == 0) throw LengthMismatch("no values to summarize");
  const double mean = values.mean();
  const double var = (values.array() - mean).square().mean();
  return {mean, std::sqrt(var)};
}

MeanStd mean_f2(const Matrix& references, const Matrix& tests, const SimilarityOptions& opt) {
  if (references.rows() != tests.rows() || references.rows() == 0) {
    throw LengthMismatch("mean_f2 needs equally many (>= 1) reference and test profiles, got " +
                         std::to_string(references.rows()) + " and " +
                         std::to_string(tests.rows()));
  }
  Vector values(references.rows());
  for (Index i = 0; i < references.rows(); ++i) {
    values[i] = f2(references.row(i).transpose(), tests.row(i).transpose(), opt);
  }
  return mean_std(values);
}

bool equivalent(double f1_value, double f2_value) {
  return f1_value >= 0.0 && f1_value <= 15.0 && f2_value >= 50.0 && f2_value <= 100.0;
}

}  // namespace dissolve
