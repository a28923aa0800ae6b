#pragma once

#include "mgmvs/camera.hpp"
#include "mgmvs/sampling.hpp"
#include "mgmvs/types.hpp"

#include <span>
#include <utility>
#include <vector>

namespace mgmvs {

// Group-wise correlations averaged over visible source views.
struct CostVolume {
  int groups = 0;
  int height = 0;
  int width = 0;
  std::vector<Eigen::MatrixXd> correlation;  // per group: D x (H*W)
  Eigen::MatrixXi visible;                   // D x (H*W) source-view counts

  int count() const { return int(visible.rows()); }
};

// Feature maps and cameras must all be at the hypotheses' resolution.
CostVolume build_cost_volume(const FeatureMap& reference,
                             std::span<const FeatureMap> sources,
                             const Camera& reference_view,
                             std::span<const Camera> source_views,
                             const DepthHypotheses& hyp, int groups);

// Per-candidate matching scores; invalid cells have no visible source.
struct ScoreVolume {
  int height = 0;
  int width = 0;
  Eigen::MatrixXd scores;  // D x (H*W)
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid;
};

struct RegularizerConfig {
  int radius_depth = 1;
  int radius_height = 1;
  int radius_width = 1;
  // Logit scale applied after smoothing.
  double gain = 1.0;
};

class Regularizer {
 public:
  virtual ~Regularizer() = default;
  virtual ScoreVolume operator()(const CostVolume& volume) const = 0;
};

// Group average followed by separable box smoothing over (depth, row,
// column). Each box averages only valid in-bounds cells.
class BoxRegularizer final : public Regularizer {
 public:
  explicit BoxRegularizer(RegularizerConfig config = {}) : config_(config) {}
  ScoreVolume operator()(const CostVolume& volume) const override;

 private:
  RegularizerConfig config_;
};

ScoreVolume regularize(const CostVolume& volume, const RegularizerConfig& config);

struct ProbabilityVolume {
  int height = 0;
  int width = 0;
  Eigen::MatrixXd prob;  // D x (H*W), columns sum to 1

  int count() const { return int(prob.rows()); }
};

// Softmax over candidates; invalid cells get zero mass and pixels with no
// valid cell are uniform.
ProbabilityVolume to_probability(const ScoreVolume& scores);

// Winner-take-all depth and its probability (lowest index on ties).
std::pair<Grid, Grid> wta_depth(const ProbabilityVolume& prob,
                                const DepthHypotheses& hyp);

// Probability-weighted mean of the candidates.
Grid expected_depth(const ProbabilityVolume& prob, const DepthHypotheses& hyp);

}  // namespace mgmvs
