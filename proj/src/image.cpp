#include "mgmvs/image.hpp"

#include "mgmvs/error.hpp"

#include <algorithm>
#include <cmath>

namespace mgmvs {

namespace {

struct Bilinear {
  int u0, v0, u1, v1;
  double fu, fv;
};

std::optional<Bilinear> bilinear_weights(const PixelCoord& c, int width,
                                         int height) {
  // Round-off from a warp can put a border sample a hair outside the frame.
  constexpr double tol = 1e-9;
  if (!(c.x() >= -tol && c.y() >= -tol && c.x() <= width - 1 + tol &&
        c.y() <= height - 1 + tol))
    return std::nullopt;
  const double u = std::clamp(c.x(), 0.0, double(width - 1));
  const double v = std::clamp(c.y(), 0.0, double(height - 1));
  const int u0 = std::min(static_cast<int>(u), width - 1);
  const int v0 = std::min(static_cast<int>(v), height - 1);
  return Bilinear{u0, v0, std::min(u0 + 1, width - 1),
                  std::min(v0 + 1, height - 1), u - u0, v - v0};
}

// Source coordinate of a destination sample under half-pixel alignment.
double source_coord(int dst, int dst_size, int src_size) {
  const double x = (dst + 0.5) * double(src_size) / double(dst_size) - 0.5;
  return std::clamp(x, 0.0, double(src_size - 1));
}

}  // namespace

std::optional<double> bilinear_sample(const Grid& grid, const PixelCoord& c) {
  const auto w = bilinear_weights(c, int(grid.cols()), int(grid.rows()));
  if (!w) return std::nullopt;
  const double top = (1 - w->fu) * grid(w->v0, w->u0) + w->fu * grid(w->v0, w->u1);
  const double bottom =
      (1 - w->fu) * grid(w->v1, w->u0) + w->fu * grid(w->v1, w->u1);
  return (1 - w->fv) * top + w->fv * bottom;
}

std::optional<Eigen::VectorXd> bilinear_sample(const FeatureMap& map,
                                               const PixelCoord& c) {
  const auto w = bilinear_weights(c, map.width, map.height);
  if (!w) return std::nullopt;
  Eigen::VectorXd out = (1 - w->fv) * ((1 - w->fu) * map.pixel(w->u0, w->v0) +
                                       w->fu * map.pixel(w->u1, w->v0)) +
                        w->fv * ((1 - w->fu) * map.pixel(w->u0, w->v1) +
                                 w->fu * map.pixel(w->u1, w->v1));
  return out;
}

Grid resize_bilinear(const Grid& grid, int height, int width) {
  Grid out(height, width);
  const int H = int(grid.rows());
  const int W = int(grid.cols());
  for (int v = 0; v < height; ++v) {
    const double y = source_coord(v, height, H);
    for (int u = 0; u < width; ++u) {
      const double x = source_coord(u, width, W);
      out(v, u) = *bilinear_sample(grid, PixelCoord(x, y));
    }
  }
  return out;
}

FeatureMap resize_bilinear(const FeatureMap& map, int height, int width) {
  FeatureMap out(map.channels, height, width);
  for (int v = 0; v < height; ++v) {
    const double y = source_coord(v, height, map.height);
    for (int u = 0; u < width; ++u) {
      const double x = source_coord(u, width, map.width);
      out.pixel(u, v) = *bilinear_sample(map, PixelCoord(x, y));
    }
  }
  return out;
}

Grid box_downsample(const Grid& grid, int factor) {
  if (factor < 1 || grid.rows() % factor != 0 || grid.cols() % factor != 0)
    throw Error(ErrorKind::InvalidConfig,
                "box_downsample: size not divisible by factor");
  if (factor == 1) return grid;
  const int h = int(grid.rows()) / factor;
  const int w = int(grid.cols()) / factor;
  Grid out(h, w);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      out(v, u) = grid.block(v * factor, u * factor, factor, factor).mean();
  return out;
}

Grid sobel_magnitude(const Grid& grid) {
  const int H = int(grid.rows());
  const int W = int(grid.cols());
  auto at = [&](int v, int u) {
    return grid(std::clamp(v, 0, H - 1), std::clamp(u, 0, W - 1));
  };
  Grid out(H, W);
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const double gx = (at(v - 1, u + 1) + 2 * at(v, u + 1) + at(v + 1, u + 1)) -
                        (at(v - 1, u - 1) + 2 * at(v, u - 1) + at(v + 1, u - 1));
      const double gy = (at(v + 1, u - 1) + 2 * at(v + 1, u) + at(v + 1, u + 1)) -
                        (at(v - 1, u - 1) + 2 * at(v - 1, u) + at(v - 1, u + 1));
      out(v, u) = std::hypot(gx, gy);
    }
  }
  return out;
}

}  // namespace mgmvs
