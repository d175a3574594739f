#ifndef DISSOLVE_INGEST_HPP
#define DISSOLVE_INGEST_HPP

#include "dissolve/core_model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dissolve {

inline constexpr int kManifestFormatVersion = 1;

struct ChannelEntry {
  MeasurementKind kind{};
  std::filesystem::path file;
  std::filesystem::path axis_file;
  Index n_features = 0;
};

/// Contents of manifest.txt. Relative paths resolve against the manifest's
/// directory.
struct Manifest {
  std::string dataset_name;
  Index n_samples = 0;
  int format_version = kManifestFormatVersion;
  std::vector<ChannelEntry> channels;
  std::filesystem::path profile_file;
  std::filesystem::path meta_file;

  /// Throws ManifestError on missing keys or unparseable values.
  static Manifest parse(const std::string& text, const std::string& origin);
  std::string render() const;
};

/// Accepts either a manifest file or a directory holding manifest.txt.
std::filesystem::path resolve_manifest_path(const std::filesystem::path& path);

/// Reads the manifest and every referenced CSV. Rows come back in ascending
/// sample_id order. Throws ManifestError, ShapeError, ParseError or IoError.
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes manifest.txt plus one CSV per channel, axis, profiles and meta into
/// `dir` (created if needed). Values are printed with 17 significant digits.
Manifest save_dataset(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace dissolve

#endif  // DISSOLVE_INGEST_HPP
