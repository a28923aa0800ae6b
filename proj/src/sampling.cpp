#include "mgmvs/sampling.hpp"

#include "mgmvs/error.hpp"
#include "mgmvs/image.hpp"

#include <algorithm>
#include <cmath>

namespace mgmvs {

namespace {

void fill_window(Eigen::Ref<Eigen::VectorXd> out, double inv_near, double inv_far) {
  // inv_near > inv_far; ascending depth means descending inverse depth.
  const int n = int(out.size());
  for (int i = 0; i < n; ++i) {
    const double t = double(i) / double(n - 1);
    out(i) = 1.0 / (inv_near + t * (inv_far - inv_near));
  }
}

}  // namespace

DepthHypotheses init_hypotheses(const DepthRange& range, int count, int height,
                                int width) {
  if (count < 2) throw Error(ErrorKind::InvalidConfig, "need at least 2 hypotheses");
  if (!(range.min > 0 && range.min < range.max))
    throw Error(ErrorKind::InvalidConfig, "invalid depth range");
  if (height < 1 || width < 1)
    throw Error(ErrorKind::InvalidConfig, "invalid stage resolution");
  DepthHypotheses hyp;
  hyp.stage = 0;
  hyp.height = height;
  hyp.width = width;
  Eigen::VectorXd shared(count);
  fill_window(shared, 1.0 / range.min, 1.0 / range.max);
  shared(0) = range.min;
  shared(count - 1) = range.max;
  hyp.depths = shared.replicate(1, height * width);
  hyp.inv_range = Grid::Constant(height, width, 1.0 / range.min - 1.0 / range.max);
  return hyp;
}

DepthHypotheses refine_hypotheses(const Grid& prev_depth, const DepthHypotheses& prev,
                                  int count, double interval_multiplier,
                                  const DepthRange& range) {
  if (count < 2) throw Error(ErrorKind::InvalidConfig, "need at least 2 hypotheses");
  if (!(interval_multiplier > 0))
    throw Error(ErrorKind::InvalidConfig, "interval multiplier must be positive");
  const int H = int(prev_depth.rows());
  const int W = int(prev_depth.cols());
  const Grid prev_interval =
      (prev.height == H && prev.width == W)
          ? prev.inv_interval()
          : resize_bilinear(prev.inv_interval(), H, W);

  const double inv_lo = 1.0 / range.max;
  const double inv_hi = 1.0 / range.min;

  DepthHypotheses hyp;
  hyp.stage = prev.stage + 1;
  hyp.height = H;
  hyp.width = W;
  hyp.depths.resize(count, H * W);
  hyp.inv_range.resize(H, W);
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      const double center = 1.0 / std::clamp(prev_depth(v, u), range.min, range.max);
      double half = interval_multiplier * prev_interval(v, u);
      half = std::min(half, 0.5 * (inv_hi - inv_lo));
      double near = center + half;
      double far = center - half;
      if (near > inv_hi) {
        far -= near - inv_hi;
        near = inv_hi;
      }
      if (far < inv_lo) {
        near += inv_lo - far;
        far = inv_lo;
      }
      const int p = pixel_index(u, v, W);
      fill_window(hyp.depths.col(p), near, far);
      hyp.inv_range(v, u) = near - far;
    }
  }
  return hyp;
}

Grid edge_confidence(const Grid& image) {
  Grid mag = sobel_magnitude(image);
  const double peak = mag.maxCoeff();
  if (!(peak > 1e-12)) return Grid::Zero(image.rows(), image.cols());
  return mag / peak;
}

EdgeMask edge_mask(const Grid& image, double lambda, int height, int width) {
  if (!(lambda > 0 && lambda <= 1))
    throw Error(ErrorKind::InvalidConfig, "edge threshold must be in (0,1]");
  EdgeMask out;
  out.lambda = lambda;
  const Grid conf = edge_confidence(image);
  out.confidence = (conf.rows() == height && conf.cols() == width)
                       ? conf
                       : resize_bilinear(conf, height, width);
  out.mask = out.confidence > lambda;
  return out;
}

DepthHypotheses dynamic_replace(const DepthHypotheses& hyp, const Grid& aligned_mono,
                                const Mask& mask) {
  if (aligned_mono.rows() != hyp.height || aligned_mono.cols() != hyp.width ||
      mask.rows() != hyp.height || mask.cols() != hyp.width)
    throw Error(ErrorKind::InvalidConfig, "dynamic_replace: shape mismatch");
  DepthHypotheses out = hyp;
  for (int v = 0; v < hyp.height; ++v) {
    for (int u = 0; u < hyp.width; ++u) {
      if (!mask(v, u)) continue;
      auto col = out.depths.col(pixel_index(u, v, hyp.width));
      const double target = aligned_mono(v, u);
      Eigen::Index nearest = 0;
      (col.array() - target).abs().minCoeff(&nearest);
      col(nearest) = target;
      std::sort(col.data(), col.data() + col.size());
    }
  }
  return out;
}

}  // namespace mgmvs
