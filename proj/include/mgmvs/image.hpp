#pragma once

#include "mgmvs/camera.hpp"
#include "mgmvs/types.hpp"

#include <optional>

namespace mgmvs {

// Bilinear interpolation of the four neighbours of `c`. Coordinates outside
// [0, W-1] x [0, H-1] (beyond a 1e-9 px round-off allowance) are invalid and
// yield an empty optional.
std::optional<double> bilinear_sample(const Grid& grid, const PixelCoord& c);
std::optional<Eigen::VectorXd> bilinear_sample(const FeatureMap& map,
                                               const PixelCoord& c);

// Resize with half-pixel centers and edge clamping.
Grid resize_bilinear(const Grid& grid, int height, int width);
FeatureMap resize_bilinear(const FeatureMap& map, int height, int width);

// Mean over non-overlapping factor x factor blocks; dimensions must divide.
Grid box_downsample(const Grid& grid, int factor);

// Sobel gradient magnitude with replicated borders.
Grid sobel_magnitude(const Grid& grid);

}  // namespace mgmvs
