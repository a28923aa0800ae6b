#pragma once

#include "mgmvs/camera.hpp"
#include "mgmvs/point_cloud.hpp"
#include "mgmvs/types.hpp"

#include <span>
#include <vector>

namespace mgmvs {

// Forward-backward reprojection of one reference depth map against every
// other view. Errors are +inf where the check cannot be made (out of frame,
// behind a camera, or no valid source depth).
struct ConsistencyRecord {
  int height = 0;
  int width = 0;
  std::vector<int> sources;
  std::vector<Grid> pixel_error;       // |p' - p| in reference pixels
  std::vector<Grid> depth_error;       // |d' - d| / d
  std::vector<Grid> reprojected_depth; // d', the source estimate in the reference frame
  Eigen::ArrayXXi count;               // views within the thresholds (row, col)
};

ConsistencyRecord check_consistency(int reference, std::span<const Grid> depths,
                                    std::span<const Camera> views,
                                    double max_pixel_error = 1.0,
                                    double max_relative_error = 0.01);

struct FusionTier {
  int min_views = 2;
  double max_pixel_error = 1.0;
  double max_relative_error = 0.01;
};

struct FusionConfig {
  std::vector<FusionTier> tiers{{2, 1.0, 0.01}, {3, 2.0, 0.02}};
  double conf_min = 0.3;
};

// A pixel with confidence >= conf_min is kept when some tier finds at least
// min_views consistent sources. Its depth is averaged with the consistent
// source estimates of the first such tier and back-projected. Points are
// ordered by view, then row-major pixel. Throws EmptyCloud when nothing is
// accepted. `images`, when given, color the points.
PointCloud fuse_point_cloud(std::span<const Grid> depths,
                            std::span<const Grid> confidences,
                            std::span<const Camera> views,
                            const FusionConfig& config,
                            std::span<const Grid> images = {});

}  // namespace mgmvs
