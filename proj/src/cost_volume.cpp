#include "mgmvs/cost_volume.hpp"

#include "mgmvs/error.hpp"
#include "mgmvs/image.hpp"

#include <cmath>

namespace mgmvs {

CostVolume build_cost_volume(const FeatureMap& reference,
                             std::span<const FeatureMap> sources,
                             const Camera& reference_view,
                             std::span<const Camera> source_views,
                             const DepthHypotheses& hyp, int groups) {
  const int C = reference.channels;
  if (groups < 1 || C % groups != 0)
    throw Error(ErrorKind::InvalidConfig, "channel count must be divisible by groups");
  if (sources.size() != source_views.size())
    throw Error(ErrorKind::InvalidConfig, "one camera per source feature required");
  if (reference.height != hyp.height || reference.width != hyp.width)
    throw Error(ErrorKind::InvalidConfig, "reference feature / hypotheses mismatch");
  for (const auto& s : sources)
    if (s.channels != C) throw Error(ErrorKind::InvalidConfig, "source channel mismatch");

  const int D = hyp.count();
  const int N = hyp.pixels();
  const int per_group = C / groups;

  CostVolume vol;
  vol.groups = groups;
  vol.height = hyp.height;
  vol.width = hyp.width;
  vol.correlation.assign(groups, Eigen::MatrixXd::Zero(D, N));
  vol.visible = Eigen::MatrixXi::Zero(D, N);

  std::vector<RelativePose<double>> poses;
  for (const auto& view : source_views) poses.push_back(relative_pose(reference_view, view));

  for (int p = 0; p < N; ++p) {
    const PixelCoord c(p % hyp.width, p / hyp.width);
    const auto f_ref = reference.values.col(p);
    for (int i = 0; i < D; ++i) {
      const double d = hyp.depths(i, p);
      for (std::size_t j = 0; j < sources.size(); ++j) {
        const auto at = try_warp<double>(c, d, poses[j], reference_view.intrinsics_inverse(),
                                         source_views[j].intrinsics());
        if (!at) continue;
        const auto f_src = bilinear_sample(sources[j], *at);
        if (!f_src) continue;
        for (int g = 0; g < groups; ++g)
          vol.correlation[g](i, p) +=
              f_ref.segment(g * per_group, per_group).dot(f_src->segment(g * per_group, per_group)) /
              double(per_group);
        ++vol.visible(i, p);
      }
      if (vol.visible(i, p) > 0)
        for (int g = 0; g < groups; ++g) vol.correlation[g](i, p) /= vol.visible(i, p);
    }
  }
  return vol;
}

ScoreVolume BoxRegularizer::operator()(const CostVolume& volume) const {
  return regularize(volume, config_);
}

ScoreVolume regularize(const CostVolume& volume, const RegularizerConfig& config) {
  const int D = volume.count();
  const int H = volume.height;
  const int W = volume.width;
  const int N = H * W;

  Eigen::MatrixXd value = Eigen::MatrixXd::Zero(D, N);
  for (const auto& g : volume.correlation) value += g;
  value /= double(volume.groups);
  Eigen::MatrixXd weight = (volume.visible.array() > 0).cast<double>().matrix();
  value = value.cwiseProduct(weight);

  // Separable box sums of value and weight; the ratio is the valid-cell mean.
  auto smooth = [&](Eigen::MatrixXd& m, int axis, int radius) {
    if (radius <= 0) return;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(D, N);
    for (int i = 0; i < D; ++i) {
      for (int p = 0; p < N; ++p) {
        const int u = p % W, v = p / W;
        double s = 0;
        for (int k = -radius; k <= radius; ++k) {
          int ii = i, uu = u, vv = v;
          if (axis == 0) ii += k;
          if (axis == 1) vv += k;
          if (axis == 2) uu += k;
          if (ii < 0 || ii >= D || vv < 0 || vv >= H || uu < 0 || uu >= W) continue;
          s += m(ii, vv * W + uu);
        }
        out(i, p) = s;
      }
    }
    m = std::move(out);
  };
  const int radii[3] = {config.radius_depth, config.radius_height, config.radius_width};
  for (int axis = 0; axis < 3; ++axis) {
    smooth(value, axis, radii[axis]);
    smooth(weight, axis, radii[axis]);
  }

  ScoreVolume out;
  out.height = H;
  out.width = W;
  out.valid = volume.visible.array() > 0;
  out.scores = Eigen::MatrixXd::Zero(D, N);
  for (int i = 0; i < D; ++i)
    for (int p = 0; p < N; ++p)
      if (out.valid(i, p) && weight(i, p) > 0)
        out.scores(i, p) = config.gain * value(i, p) / weight(i, p);
  return out;
}

ProbabilityVolume to_probability(const ScoreVolume& scores) {
  const int D = int(scores.scores.rows());
  const int N = int(scores.scores.cols());
  ProbabilityVolume out;
  out.height = scores.height;
  out.width = scores.width;
  out.prob.resize(D, N);
  for (int p = 0; p < N; ++p) {
    const bool any = scores.valid.size() == 0 || scores.valid.col(p).any();
    if (!any) {
      out.prob.col(p).setConstant(1.0 / D);
      continue;
    }
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < D; ++i)
      if (scores.valid.size() == 0 || scores.valid(i, p)) m = std::max(m, scores.scores(i, p));
    double sum = 0;
    for (int i = 0; i < D; ++i) {
      const bool ok = scores.valid.size() == 0 || scores.valid(i, p);
      const double e = ok ? std::exp(scores.scores(i, p) - m) : 0.0;
      out.prob(i, p) = e;
      sum += e;
    }
    out.prob.col(p) /= sum;
  }
  return out;
}

std::pair<Grid, Grid> wta_depth(const ProbabilityVolume& prob, const DepthHypotheses& hyp) {
  if (prob.count() != hyp.count() || prob.prob.cols() != hyp.pixels())
    throw Error(ErrorKind::InvalidConfig, "wta_depth: shape mismatch");
  Grid depth(hyp.height, hyp.width);
  Grid conf(hyp.height, hyp.width);
  for (int p = 0; p < hyp.pixels(); ++p) {
    Eigen::Index best = 0;
    const double m = prob.prob.col(p).maxCoeff(&best);
    depth(p / hyp.width, p % hyp.width) = hyp.depths(best, p);
    conf(p / hyp.width, p % hyp.width) = m;
  }
  return {std::move(depth), std::move(conf)};
}

Grid expected_depth(const ProbabilityVolume& prob, const DepthHypotheses& hyp) {
  if (prob.count() != hyp.count() || prob.prob.cols() != hyp.pixels())
    throw Error(ErrorKind::InvalidConfig, "expected_depth: shape mismatch");
  Grid out(hyp.height, hyp.width);
  for (int p = 0; p < hyp.pixels(); ++p)
    out(p / hyp.width, p % hyp.width) = prob.prob.col(p).dot(hyp.depths.col(p));
  return out;
}

}  // namespace mgmvs
