#pragma once

#include "mgmvs/cost_volume.hpp"
#include "mgmvs/features.hpp"
#include "mgmvs/fusion.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mgmvs {

struct StagePlan {
  std::array<int, 4> counts{8, 8, 4, 4};
  // Half-width of each refined window in units of the previous stage's
  // inverse-depth interval. Stage 0 always spans the full range.
  std::array<double, 4> interval_multipliers{0.5, 0.5, 0.5, 0.5};
  std::array<int, 4> groups{8, 8, 4, 4};
};

struct PipelineConfig {
  StagePlan plan;
  double lambda = 0.3;
  double keep_fraction = 0.8;
  double gamma = 0.1;
  int rc_pairs = 4096;
  std::uint64_t seed = 0;
  FeatureConfig features;
  RegularizerConfig regularizer{0, 1, 1, 50.0};
  FusionConfig fusion;
  double max_dist = 20.0;
  bool enable_cvpe = true;
  bool enable_dynamic_sampling = true;
  bool enable_mono_fusion = true;
  int threads = 1;
  std::filesystem::path manifest;
  std::filesystem::path out_dir = "out";
};

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

// Reads key=value lines (unknown keys rejected), then applies overrides in
// order, then validates. Errors are ConfigError naming the key and line.
PipelineConfig parse_config(std::istream& in, const ConfigOverrides& overrides = {});
PipelineConfig parse_config(const std::filesystem::path& path,
                            const ConfigOverrides& overrides = {});

void validate(const PipelineConfig& config);

// Every recognised key with its current value, in a stable order.
std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& config);

}  // namespace mgmvs
