#pragma once

#include "mgmvs/camera.hpp"
#include "mgmvs/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace mgmvs {

// Zero-mean 3x3 intensity patch (9) plus x/y central differences (2).
inline constexpr int kBaseChannels = 11;
// Standardized mono depth plus its x/y gradients.
inline constexpr int kMonoChannels = 3;
// Two flattened 4x4 image-to-world matrices.
inline constexpr int kCameraParams = 32;

struct FeatureConfig {
  std::array<int, 4> channels{16, 8, 8, 4};
  int mono_stride = 4;
  int window = 8;
  // Add the position encoding to attention values as well as queries/keys.
  bool pe_on_values = false;
  // Output scales of the stand-in projections that feed back into features.
  double mono_gain = 0.05;
  double attention_gain = 0.1;
};

struct AttentionWeights {
  Eigen::MatrixXd query, key, value, output;
};

struct CameraEmbeddingWeights {
  Eigen::MatrixXd flatten;     // C x (C * D0)
  Eigen::MatrixXd mlp_hidden;  // C x kCameraParams
  Eigen::MatrixXd mlp_out;     // C x C
  Eigen::MatrixXd se_squeeze;  // max(C/4,1) x C
  Eigen::MatrixXd se_excite;   // C x max(C/4,1)
  Eigen::MatrixXd out;         // C x C
};

// Deterministic stand-in parameters, fully determined by (seed, config, D0).
struct SeededWeights {
  std::uint64_t seed = 0;
  std::array<Eigen::MatrixXd, 4> mixer;  // C_s x kBaseChannels
  Eigen::MatrixXd mono_projection;       // C_0 x C'
  CameraEmbeddingWeights ref_embedding;
  CameraEmbeddingWeights src_embedding;
  AttentionWeights intra;
  AttentionWeights inter;
  std::array<Eigen::MatrixXd, 3> cascade;  // C_{s+1} x C_s

  static SeededWeights generate(std::uint64_t seed, const FeatureConfig& config,
                                int hypotheses_d0);
};

// Raw per-pixel channels before mixing: kBaseChannels x (H*W).
Eigen::MatrixXd base_channels(const Grid& image);

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual FeaturePyramid extract(const Grid& image) const = 0;
};

// Box-downsampled patch/gradient channels pushed through a seeded mixer and
// normalized per pixel to unit RMS.
class GradientMixerExtractor final : public FeatureExtractor {
 public:
  GradientMixerExtractor(FeatureConfig config, SeededWeights weights)
      : config_(std::move(config)), weights_(std::move(weights)) {}
  FeaturePyramid extract(const Grid& image) const override;

 private:
  FeatureConfig config_;
  SeededWeights weights_;
};

FeaturePyramid extract_pyramid(const Grid& image, const FeatureConfig& config,
                               const SeededWeights& weights);

using MonoFeature = FeatureMap;

// Stand-in for a monocular encoder: standardized mono depth and its
// gradients at 1/mono_stride resolution.
MonoFeature mono_feature(const Grid& mono, const FeatureConfig& config);

// F0 = F0_enc + Bilinear(Conv1x1(F_mono)).
FeatureMap fuse_mono_feature(const FeatureMap& ref_enc, const MonoFeature& mono,
                             const SeededWeights& weights);

// Pushes the scale-0 change (fused - encoder) down the pyramid:
// each scale adds Bilinear(Conv1x1(previous change)).
FeaturePyramid cascade_delta(const FeaturePyramid& pyramid,
                             const FeatureMap& updated_scale0,
                             const SeededWeights& weights);

// Features of one view forward-scattered onto D hypothesis planes of another
// view's frame. Nearest-pixel rounding, row-major scan, last write wins.
struct Frustum {
  std::vector<FeatureMap> planes;
  std::vector<Mask> occupied;
};

Frustum scatter_to_frustum(const FeatureMap& from, const Camera& from_view,
                           const Camera& to_view, std::span<const double> depths);

// Camera parameter vector: image-to-world of `owner` then of `other`.
Eigen::VectorXd camera_parameters(const Camera& owner, const Camera& other);

// Flatten depth into channels (linear -> normalize -> ReLU), add the camera
// MLP embedding, squeeze-excitation gate, then a 1x1 projection.
FeatureMap camera_embedding(const Frustum& frustum,
                            const Eigen::VectorXd& camera_params,
                            const CameraEmbeddingWeights& weights);

// Cross-view position encodings for one (reference, source) pair at scale 0.
// ref_side lives in the reference frame (source features scattered there),
// src_side in the source frame.
struct Cvpe {
  FeatureMap ref_side;
  FeatureMap src_side;
};

Cvpe build_cvpe(const FeatureMap& ref_feat, const FeatureMap& src_feat,
                const Camera& ref_view, const Camera& src_view,
                std::span<const double> depths, const SeededWeights& weights);

struct AttentionResult {
  Eigen::MatrixXd output;   // C x n_queries
  Eigen::MatrixXd weights;  // n_queries x n_keys, rows sum to 1
};

// Single-head scaled dot-product attention; columns are tokens.
AttentionResult attend(const Eigen::MatrixXd& queries,
                       const Eigen::MatrixXd& keys,
                       const Eigen::MatrixXd& values);

// Attention restricted to non-overlapping window x window tiles. Query and
// key/value maps must share a shape. Returns the projected residual term.
FeatureMap windowed_attention(const FeatureMap& query_in,
                              const FeatureMap& key_in,
                              const FeatureMap& value_in,
                              const AttentionWeights& weights, int window);

// Source enhancement at scale 0 (CVPE, intra-view then inter-view attention)
// cascaded into scales 1..3. `cvpes` is indexed like `sources`; pass an empty
// span to run without position encoding.
std::vector<FeaturePyramid> enhance_features(
    const FeaturePyramid& reference, std::span<const FeaturePyramid> sources,
    std::span<const Cvpe> cvpes, const SeededWeights& weights,
    const FeatureConfig& config);

}  // namespace mgmvs
