#ifndef DISSOLVE_CLI_HPP
#define DISSOLVE_CLI_HPP

#include "dissolve/experiment.hpp"
#include "dissolve/synthdata.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dissolve {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

/// Everything a command needs, resolved from defaults, the `--config` file
/// and command-line flags (in increasing precedence).
struct RunConfig {
  Preset preset = Preset::Paper;
  GeneratorConfig generator = preset_config(Preset::Paper);
  SplitSpec split;
  CombinationSpec combination;
  int max_size = 3;
  int repeats = 1;
  int jobs = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";

  /// Resolved settings that affect results, for report headers.
  std::vector<std::pair<std::string, std::string>> provenance() const;
};

/// Applies a key=value config file (sections [generator], [split], [mlp],
/// [sweep]). Unknown sections or keys throw BadConfig naming them.
void apply_config_file(RunConfig& cfg, const KeyValueFile& file);

/// Entry point shared by the executable and the tests. args[0] is the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace dissolve

#endif  // DISSOLVE_CLI_HPP
