#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hydrocast/clustering.hpp"
#include "hydrocast/dataset.hpp"
#include "hydrocast/evaluation.hpp"

namespace hydrocast::cli {

enum class Command { Synth, Cluster, Forecast, Benchmark, Report };

/// Throws ConfigError.
Command parse_command(std::string_view name);

struct RunConfig {
  Command command = Command::Benchmark;
  std::optional<std::filesystem::path> input;  // dataset CSV, or report CSV for `report`
  std::optional<SynthConfig> synth;
  std::vector<std::string> presets;            // D1..D4
  std::optional<ClusterParams> cluster_params;  // explicit thresholds, reported as "custom"
  std::vector<Method> methods{std::begin(kAllMethods), std::end(kAllMethods)};
  TrainConfig train;
  int cluster_epochs = 200;
  std::filesystem::path out = ".";
  std::uint64_t seed = 42;
  unsigned workers = default_workers();

  /// Throws ConfigError when the combination cannot run.
  void validate() const;
};

/// Reads a JSON run configuration. Recognised keys: input, synth (object of
/// SynthConfig fields), preset (name or list), cluster {min_pts, eps,
/// cos_threshold}, methods (list or comma string), train {epochs,
/// learning_rate, beta1, beta2, adam_epsilon, hidden_size, window,
/// clip_norm}, cluster_epochs, out, seed, workers.
RunConfig load_config(const std::filesystem::path& path, Command command);

/// SynthConfig fields from JSON; missing keys keep their defaults.
SynthConfig load_synth_config(const std::filesystem::path& path);

/// Executes one stage and returns the files it wrote, in write order.
/// Prints one summary line per stage to `log`.
std::vector<std::filesystem::path> run(const RunConfig& config, std::ostream& log);

/// Command-line entry point; returns the process exit status.
int main(int argc, char** argv);

}  // namespace hydrocast::cli
