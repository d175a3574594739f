#ifndef DISSOLVE_CORE_MODEL_HPP
#define DISSOLVE_CORE_MODEL_HPP

#include "dissolve/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dissolve {

enum class MeasurementKind {
  NirReflection,
  NirTransmission,
  RamanReflection,
  RamanTransmission,
  CompressionForce,
};

inline constexpr int kNumKinds = 5;

// Column order of the merged matrix: NIR-TR | NIR-RE | Raman-RE | Raman-TR | force.
inline constexpr std::array<MeasurementKind, kNumKinds> kCanonicalOrder = {
    MeasurementKind::NirTransmission, MeasurementKind::NirReflection,
    MeasurementKind::RamanReflection, MeasurementKind::RamanTransmission,
    MeasurementKind::CompressionForce,
};

/// Position of a kind in kCanonicalOrder.
int canonical_rank(MeasurementKind kind);

/// Short identifier used in file names and on the command line (e.g. "nir_tr").
std::string_view short_name(MeasurementKind kind);
/// Label used in reports (e.g. "NIR TR").
std::string_view display_name(MeasurementKind kind);
std::optional<MeasurementKind> parse_kind(std::string_view name);

/// Instrument feature count: 1556 / 714 / 1691 / 1691 / 6037.
Index default_feature_count(MeasurementKind kind);

inline constexpr Index kTimePoints = 53;
inline constexpr double kProfileCeiling = 110.0;

/// Dissolution sampling times in minutes: 2, 5, 10, 15, 30, 45, 60, then every
/// 30 min through 1440.
Vector time_grid();

struct SpectralBlock {
  MeasurementKind kind{};
  Vector axis;    // wavenumbers (cm^-1) or sample index for the force curve
  Matrix values;  // n_samples x n_features
};

struct SampleMeta {
  std::int64_t sample_id = 0;
  int setting_id = 0;
  std::int64_t tablet_id = 0;
  int replicate_id = 0;
  double dr_content = 0.0;
  double hpmc_content = 0.0;
  double nominal_force = 0.0;

  bool operator==(const SampleMeta&) const = default;
};

/// Rows of every block, of `profiles` and of `meta` describe the same sample.
/// `profiles` holds the 53 measured points; released(0) = 0 is implicit.
struct Dataset {
  std::string name = "dataset";
  std::map<MeasurementKind, SpectralBlock> blocks;
  Vector times;
  Matrix profiles;
  std::vector<SampleMeta> meta;

  Index n_samples() const { return static_cast<Index>(meta.size()); }
  bool has(MeasurementKind kind) const { return blocks.count(kind) != 0; }
  const SpectralBlock& block(MeasurementKind kind) const;

  /// Rows `idx` of every block, profile and meta entry, in the given order.
  Dataset subset(const std::vector<Index>& idx) const;
};

bool operator==(const Dataset& a, const Dataset& b);

enum class ViolationCode {
  RowCountMismatch,
  AxisLengthMismatch,
  NonFinite,
  NegativeValue,
  MissingChannel,
  TimeGridMismatch,
  ProfileOutOfRange,
  BadMeta,
  DuplicateReplicate,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code{};
  std::optional<MeasurementKind> kind;  // empty for profile/meta issues
  Index row = -1;
  Index col = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationCode code) const;
};

/// Checks every dataset invariant; never throws.
ValidationReport validate(const Dataset& ds);

struct CleaningEntry {
  MeasurementKind kind{};
  Index row = 0;
  Index col = 0;
  double old_value = 0.0;
};

using CleaningLog = std::vector<CleaningEntry>;

/// Clamps negative channel values to zero and logs each modified cell.
/// Throws StructuralMismatch when row counts disagree.
std::pair<Dataset, CleaningLog> clean(const Dataset& ds);

/// 64-bit FNV-1a over names, shapes and the bit patterns of all values, as hex.
std::string fingerprint(const Dataset& ds);

}  // namespace dissolve

#endif  // DISSOLVE_CORE_MODEL_HPP
