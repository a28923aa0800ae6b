#pragma once

#include "mgmvs/alignment.hpp"
#include "mgmvs/camera.hpp"
#include "mgmvs/config.hpp"
#include "mgmvs/evaluation.hpp"
#include "mgmvs/point_cloud.hpp"
#include "mgmvs/sampling.hpp"
#include "mgmvs/synth.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace mgmvs {

// Everything the estimator consumes. gt_depths may be empty; valid masks
// are all-true when no ground truth is available.
struct SceneData {
  std::vector<Camera> views;
  std::vector<Grid> images;
  std::vector<Grid> mono;
  std::vector<Grid> gt_depths;
  std::vector<Mask> valid;

  int size() const { return int(views.size()); }
  bool has_ground_truth() const { return !gt_depths.empty(); }
};

SceneData load_scene(const std::filesystem::path& manifest);
SceneData scene_data(const SyntheticScene& scene, const std::vector<Grid>& mono);

struct StageOutput {
  int stage = 0;
  Grid depth;        // WTA
  Grid confidence;   // probability of the WTA candidate
  Grid expected;     // probability-weighted depth
  DepthHypotheses hypotheses;
  double mean_confidence = 0;
  double mean_entropy = 0;
  std::optional<AlignmentParams> alignment;  // stages >= 1 with dynamic sampling
  int replaced_pixels = 0;
  std::optional<double> cross_entropy;
};

struct ViewEstimate {
  int view = 0;
  std::vector<StageOutput> stages;
  std::optional<double> relative_consistency;
  std::optional<double> overall_loss;

  const StageOutput& final_stage() const { return stages.back(); }
};

// Runs the four coarse-to-fine stages with `reference` as the reference
// view and every other view as a source.
ViewEstimate estimate_view(const SceneData& scene, int reference,
                           const PipelineConfig& config);

std::vector<ViewEstimate> estimate_depths(const SceneData& scene,
                                          const PipelineConfig& config);

PointCloud fuse_estimates(const SceneData& scene, const std::vector<ViewEstimate>& estimates,
                          const PipelineConfig& config);

// Ground-truth depths back-projected at valid pixels of every view.
PointCloud ground_truth_cloud(const SceneData& scene);

Report make_report(const SceneData& scene, const std::vector<ViewEstimate>& estimates,
                   const PointCloud* cloud, const PipelineConfig& config);

struct PipelineResult {
  std::vector<ViewEstimate> views;
  PointCloud cloud;
  Report report;
};

PipelineResult run_pipeline(const SceneData& scene, const PipelineConfig& config);

// depth_N.pfm, confidence_N.pfm, cloud.ply and report.txt under `dir`.
void write_depth_outputs(const std::vector<ViewEstimate>& estimates,
                         const std::filesystem::path& dir);
void write_outputs(const PipelineResult& result, const std::filesystem::path& dir);

}  // namespace mgmvs
