#include "mgmvs/fusion.hpp"

#include "mgmvs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mgmvs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bilinear depth lookup that refuses to mix in pixels without depth.
std::optional<double> sample_depth(const Grid& depth, const PixelCoord& c) {
  const int W = int(depth.cols());
  const int H = int(depth.rows());
  if (!(c.x() >= 0 && c.y() >= 0 && c.x() <= W - 1 && c.y() <= H - 1)) return std::nullopt;
  const int u0 = std::min(int(c.x()), W - 1);
  const int v0 = std::min(int(c.y()), H - 1);
  const int u1 = std::min(u0 + 1, W - 1);
  const int v1 = std::min(v0 + 1, H - 1);
  const double fu = c.x() - u0;
  const double fv = c.y() - v0;
  const double a = depth(v0, u0), b = depth(v0, u1), e = depth(v1, u0), f = depth(v1, u1);
  if (!(a > 0 && b > 0 && e > 0 && f > 0)) return std::nullopt;
  return (1 - fv) * ((1 - fu) * a + fu * b) + fv * ((1 - fu) * e + fu * f);
}

}  // namespace

ConsistencyRecord check_consistency(int reference, std::span<const Grid> depths,
                                    std::span<const Camera> views,
                                    double max_pixel_error, double max_relative_error) {
  if (depths.size() != views.size() || reference < 0 || reference >= int(views.size()))
    throw Error(ErrorKind::InvalidConfig, "check_consistency: bad view indices");
  const Camera& ref = views[reference];
  const Grid& ref_depth = depths[reference];
  const int H = int(ref_depth.rows());
  const int W = int(ref_depth.cols());

  ConsistencyRecord rec;
  rec.height = H;
  rec.width = W;
  rec.count = Eigen::ArrayXXi::Zero(H, W);
  for (int j = 0; j < int(views.size()); ++j) {
    if (j == reference) continue;
    const Camera& src = views[j];
    Grid pix_err = Grid::Constant(H, W, kInf);
    Grid rel_err = Grid::Constant(H, W, kInf);
    Grid reproj = Grid::Zero(H, W);
    for (int v = 0; v < H; ++v) {
      for (int u = 0; u < W; ++u) {
        const double d = ref_depth(v, u);
        if (!(d > 0)) continue;
        const PixelCoord p(u, v);
        const Vector3<double> X = ref.backproject(p, d);
        const auto q = src.project(X);
        if (!q) continue;
        const auto ds = sample_depth(depths[j], *q);
        if (!ds) continue;
        const Vector3<double> Xs = src.backproject(*q, *ds);
        double d_back = 0;
        const auto p_back = ref.project(Xs, &d_back);
        if (!p_back) continue;
        pix_err(v, u) = (*p_back - p).norm();
        rel_err(v, u) = std::abs(d_back - d) / d;
        reproj(v, u) = d_back;
        if (pix_err(v, u) < max_pixel_error && rel_err(v, u) < max_relative_error)
          ++rec.count(v, u);
      }
    }
    rec.sources.push_back(j);
    rec.pixel_error.push_back(std::move(pix_err));
    rec.depth_error.push_back(std::move(rel_err));
    rec.reprojected_depth.push_back(std::move(reproj));
  }
  return rec;
}

PointCloud fuse_point_cloud(std::span<const Grid> depths, std::span<const Grid> confidences,
                            std::span<const Camera> views, const FusionConfig& config,
                            std::span<const Grid> images) {
  if (views.size() < 2) throw Error(ErrorKind::InvalidConfig, "fusion needs at least 2 views");
  if (depths.size() != views.size() || confidences.size() != views.size())
    throw Error(ErrorKind::InvalidConfig, "fusion: one depth and confidence map per view");
  if (config.tiers.empty()) throw Error(ErrorKind::InvalidConfig, "fusion: no tiers");
  for (std::size_t t = 1; t < config.tiers.size(); ++t)
    if (config.tiers[t].min_views < config.tiers[t - 1].min_views)
      throw Error(ErrorKind::InvalidConfig, "fusion tiers must be sorted by view count");

  PointCloud cloud;
  const bool colored = images.size() == views.size();
  for (int r = 0; r < int(views.size()); ++r) {
    const ConsistencyRecord rec = check_consistency(r, depths, views, 0.0, 0.0);
    const Grid& depth = depths[r];
    for (int v = 0; v < rec.height; ++v) {
      for (int u = 0; u < rec.width; ++u) {
        const double d = depth(v, u);
        if (!(d > 0) || !(confidences[r](v, u) >= config.conf_min)) continue;
        for (const FusionTier& tier : config.tiers) {
          int hits = 0;
          double sum = d;
          for (std::size_t j = 0; j < rec.sources.size(); ++j) {
            if (rec.pixel_error[j](v, u) < tier.max_pixel_error &&
                rec.depth_error[j](v, u) < tier.max_relative_error) {
              ++hits;
              sum += rec.reprojected_depth[j](v, u);
            }
          }
          if (hits < tier.min_views) continue;
          const Vector3<double> X = views[r].backproject(PixelCoord(u, v), sum / (hits + 1));
          cloud.points.push_back(X.cast<float>());
          if (colored) {
            const auto g = static_cast<std::uint8_t>(
                std::lround(std::clamp(images[r](v, u), 0.0, 1.0) * 255.0));
            cloud.colors.push_back({g, g, g});
          }
          break;
        }
      }
    }
  }
  if (cloud.empty()) throw Error(ErrorKind::EmptyCloud, "no pixel passed the fusion tiers");
  return cloud;
}

}  // namespace mgmvs
