#pragma once

#include "mgmvs/camera.hpp"
#include "mgmvs/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mgmvs {

enum class SceneKind { Plane, Step, SphereOnPlane };

// Converging: sources on a circle around the reference, aimed at a common
// target. Rectified: sources translated along x with parallel optical axes.
enum class Rig { Converging, Rectified };
Rig parse_rig(const std::string& name);
std::string to_string(Rig rig);

SceneKind parse_scene_kind(const std::string& name);
std::string to_string(SceneKind kind);

// World frame coincides with the reference camera (view 0): x right, y down,
// z along the optical axis. Lengths in mm.
struct SceneConfig {
  SceneKind kind = SceneKind::Plane;
  int width = 80;
  int height = 64;
  int n_views = 3;
  std::uint64_t texture_seed = 1;

  double focal = 100.0;
  Rig rig = Rig::Converging;
  // Converging: radius of the source circle, sources look at
  // (0, 0, target_depth). Rectified: spacing along x, alternating sides.
  double baseline = 120.0;
  double target_depth = 650.0;
  DepthRange range{425.0, 935.0};

  double plane_depth = 600.0;
  // Step: columns left of step_column (reference view) see step_near, the
  // rest see step_far. A negative column means width / 2.
  double step_near = 500.0;
  double step_far = 700.0;
  int step_column = -1;
  double sphere_radius = 100.0;
  double sphere_center_depth = 600.0;
  double background_depth = 700.0;
};

struct SyntheticScene {
  SceneConfig config;
  std::vector<Camera> views;
  std::vector<Grid> images;
  std::vector<Grid> gt_depths;
  std::vector<Mask> valid_masks;

  // Analytic camera depth of the first surface hit through `pixel`.
  std::optional<double> cast_depth(int view, const PixelCoord& pixel) const;
  // True when `world` is the first surface point seen by `view`.
  bool visible(int view, const Vector3<double>& world,
               double rel_tol = 1e-6) const;
};

// Minimum per-8x8-block intensity variance the generator guarantees.
inline constexpr double kTextureVarianceFloor = 1e-4;

SyntheticScene generate_scene(const SceneConfig& config);

struct MonoOracleParams {
  double a_true = 1e-3;  // 1/mm per mono unit
  double b_true = 5e-4;  // 1/mm
  double noise_sigma = 0.0;
  std::uint64_t seed = 7;
};

// Disparity-like relative depth: (1/gt - b_true) / a_true + noise. Pixels
// outside `valid` (or with non-positive gt) are set to 0.
Grid make_mono_depth(const Grid& gt_depth, const MonoOracleParams& params,
                     const Mask* valid = nullptr);

// Writes images (PPM), cameras (text), ground-truth and mono depth (PFM) and
// a manifest.txt listing them. Returns the manifest path.
std::filesystem::path write_scene(const SyntheticScene& scene,
                                  const std::vector<Grid>& mono,
                                  const std::filesystem::path& dir);

}  // namespace mgmvs
