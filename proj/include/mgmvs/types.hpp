#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace mgmvs {

// Row-major H x W image grid, indexed (row v, column u).
template <typename Scalar>
using GridT =
    Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Grid = GridT<double>;
using Mask = GridT<bool>;

struct DepthRange {
  double min = 425.0;
  double max = 935.0;
};

inline int pixel_index(int u, int v, int width) { return v * width + u; }

// C x H x W descriptor map stored as a C x (H*W) matrix, one column per pixel
// in row-major pixel order.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  Eigen::MatrixXd values;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w)
      : channels(c), height(h), width(w), values(Eigen::MatrixXd::Zero(c, h * w)) {}

  int pixels() const { return height * width; }
  bool empty() const { return values.size() == 0; }

  auto pixel(int u, int v) { return values.col(pixel_index(u, v, width)); }
  auto pixel(int u, int v) const { return values.col(pixel_index(u, v, width)); }

  Grid channel(int c) const {
    Grid g(height, width);
    for (int p = 0; p < pixels(); ++p) g(p / width, p % width) = values(c, p);
    return g;
  }

  void set_channel(int c, const Grid& g) {
    for (int p = 0; p < pixels(); ++p) values(c, p) = g(p / width, p % width);
  }
};

// Scales 0..3 at H/8, H/4, H/2, H.
struct FeaturePyramid {
  std::vector<FeatureMap> scales;
};

}  // namespace mgmvs
