#ifndef DISSOLVE_SYNTHDATA_HPP
#define DISSOLVE_SYNTHDATA_HPP

#include "dissolve/core_model.hpp"
#include "dissolve/keyvalue.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace dissolve {

/// Synthetic tablet study with a known latent structure.
///
/// Each setting fixes normalized drug, HPMC and compression-force levels in
/// [0, 1]; each tablet jitters them slightly. Dissolution follows a Weibull
/// curve 100 (1 - exp(-(t/tau)^beta)) with tau rising with HPMC and force and
/// beta set by the drug level. Informative channels carry the tablet latents
/// (seen through a per-channel, per-tablet sampling error); uninformative
/// channels carry only latent-independent nuisance factors.
struct GeneratorConfig {
  int n_settings = 37;
  int tablets_per_setting = 4;
  int replicates = 2;
  std::map<MeasurementKind, Index> features;  // missing kinds use default_feature_count
  std::set<MeasurementKind> informative = {MeasurementKind::NirTransmission,
                                           MeasurementKind::CompressionForce};
  std::map<MeasurementKind, double> noise_sd;  // missing kinds use default_noise_sd
  double default_noise_sd = 0.002;
  double tablet_jitter_sd = 0.03;   // tablet latent vs its setting's nominal level
  double sampling_error_sd = 0.03;  // per channel and tablet, in latent units
  double tau_min = 120.0;
  double tau_max = 900.0;
  double beta_min = 0.75;
  double beta_max = 1.35;
  std::uint64_t seed = 0;

  Index feature_count(MeasurementKind kind) const;
  double noise(MeasurementKind kind) const;
};

enum class Preset { Paper, Small, Test };

/// Paper: 37 x 4 x 2 samples at instrument resolution. Small: same design,
/// 64-point grids. Test: 5 settings, 16-point grids.
GeneratorConfig preset_config(Preset preset);
std::optional<Preset> parse_preset(std::string_view name);

/// Throws BadConfig on invalid counts, noise or kinetics ranges.
void check_config(const GeneratorConfig& cfg);

/// Applies keys of a `[generator]` section on top of `cfg`. Unknown keys throw
/// BadConfig naming the key.
void apply_generator_section(GeneratorConfig& cfg, const KeyValueSection& section);

struct GroundTruth {
  Vector tau;   // per sample
  Vector beta;  // per sample
};

struct GeneratedData {
  Dataset dataset;
  GroundTruth truth;
};

GeneratedData generate_with_truth(const GeneratorConfig& cfg);
Dataset generate(const GeneratorConfig& cfg);

/// Weibull release curve sampled on `times` (minutes).
Vector weibull_release(const Vector& times, double tau, double beta);

}  // namespace dissolve

#endif  // DISSOLVE_SYNTHDATA_HPP
