#ifndef DISSOLVE_EXPERIMENT_HPP
#define DISSOLVE_EXPERIMENT_HPP

#include "dissolve/core_model.hpp"
#include "dissolve/mlp.hpp"
#include "dissolve/pca.hpp"
#include "dissolve/preprocess.hpp"
#include "dissolve/similarity.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace dissolve {

enum class Grouping { SampleLevel, TabletLevel };

std::string_view to_string(Grouping g);
std::optional<Grouping> parse_grouping(std::string_view name);

struct SplitSpec {
  Index test_count = 49;
  std::uint64_t seed = 0;
  Grouping grouping = Grouping::SampleLevel;
};

struct SplitIndices {
  std::vector<Index> train;  // ascending
  std::vector<Index> test;   // ascending
};

/// Seeded random hold-out. TabletLevel moves whole tablets, adding tablets
/// until at least test_count samples are held out. Throws BadSpec unless
/// 0 < test_count < n_samples.
SplitIndices split(const Dataset& ds, const SplitSpec& spec);

/// Candidate networks tried per combination; the lowest training MSE wins.
struct ModelGrid {
  std::vector<std::vector<int>> hidden = {{64}, {128}, {128, 64}};
  std::vector<double> l2_alpha = {1e-4, 1e-3, 1e-2};
};

struct CombinationSpec {
  std::vector<MeasurementKind> channels;
  double pca_threshold = kDefaultRetention;
  Index target_offset = 0;  // leading dissolution points moved to the inputs
  MlpConfig mlp;            // max_iter, grad_tol, history_size (and defaults)
  ModelGrid grid;
};

/// Throws BadSpec on empty/duplicate channels or target_offset >= 53.
void check_spec(const CombinationSpec& spec);

/// Scaler and PCA fitted on the training rows of one channel.
struct ChannelPipeline {
  MeasurementKind kind{};
  ScalerModel<double> scaler;
  PcaModel<double> pca;
};

ChannelPipeline fit_channel(const Dataset& ds, MeasurementKind kind,
                            const std::vector<Index>& train_idx, double threshold);
Matrix apply_channel(const ChannelPipeline& p, const Dataset& ds, const std::vector<Index>& rows);

struct FeatureColumn {
  MeasurementKind kind{};
  Index component = 0;
};

struct FeatureSet {
  Matrix train;
  Matrix test;
  std::vector<FeatureColumn> feature_map;
  std::vector<ChannelPipeline> pipelines;  // canonical channel order
};

/// Per channel: scale, PCA and retention fitted on train rows only, then both
/// partitions projected; scores are concatenated in canonical channel order.
/// Test rows are the complement of train_idx.
FeatureSet build_features(const Dataset& ds, const std::vector<Index>& train_idx,
                          const CombinationSpec& spec);

/// Rows of `idx` in complement order (ascending indices not in idx).
std::vector<Index> complement(const std::vector<Index>& idx, Index n);

struct SweepRow {
  std::vector<MeasurementKind> channels;  // canonical order
  std::vector<Index> retained;            // per channel
  double mean_f2 = 0.0;
  double std_f2 = 0.0;
  double mean_f1 = 0.0;
  double train_loss = 0.0;
  int n_iters = 0;
  bool equivalent = false;
  std::vector<int> hidden;
  double l2_alpha = 0.0;
  Index n_test = 0;
  Index n_targets = 0;
};

std::string combination_label(const std::vector<MeasurementKind>& channels);

struct CombinationResult {
  SweepRow row;
  MlpModel model;
  Matrix test_predictions;  // n_test x n_targets
  Matrix test_targets;
};

/// Trains the selected network on one channel set and scores the held-out
/// profiles with f1/f2. `repeats` > 1 averages over independent splits
/// (split seeds derived from split.seed) by pooling per-profile scores.
CombinationResult run_combination(const Dataset& ds, const SplitSpec& split,
                                  const CombinationSpec& spec, int repeats = 1);

struct SweepReport {
  std::vector<SweepRow> rows;  // descending mean_f2
  std::uint64_t seed = 0;
  std::string fingerprint;
  std::vector<std::pair<std::string, std::string>> config;  // provenance header
};

/// All channel subsets of size 1..max_size, each run as an independent job
/// (sub-seeds derived from the subset), ranked by mean f2 with ties broken
/// by canonical subset order. Output does not depend on `jobs`.
SweepReport sweep(const Dataset& ds, const SplitSpec& split, const CombinationSpec& base,
                  int max_size, int jobs = 1, int repeats = 1);

/// Channel subsets of sizes 1..max_size in canonical enumeration order.
std::vector<std::vector<MeasurementKind>> enumerate_combinations(int max_size);

void write_sweep_csv(const SweepReport& report, const std::filesystem::path& path);
void write_sweep_markdown(const SweepReport& report, const std::filesystem::path& path);
std::string render_sweep_markdown(const SweepReport& report);
SweepReport read_sweep_csv(const std::filesystem::path& path);

}  // namespace dissolve

#endif  // DISSOLVE_EXPERIMENT_HPP
