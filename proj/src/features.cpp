#include "mgmvs/features.hpp"

#include "mgmvs/error.hpp"
#include "mgmvs/image.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>

namespace mgmvs {

namespace {

class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  Eigen::MatrixXd matrix(int rows, int cols, double scale) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = scale * dist_(rng_);
    return m;
  }

  // rows x cols with orthonormal columns (rows >= cols) or rows.
  Eigen::MatrixXd orthonormal(int rows, int cols) {
    if (rows >= cols) {
      const Eigen::MatrixXd g = matrix(rows, cols, 1.0);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
      return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    }
    return orthonormal(cols, rows).transpose();
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

CameraEmbeddingWeights make_embedding(Gaussian& g, int C, int d0) {
  const int r = std::max(C / 4, 1);
  CameraEmbeddingWeights w;
  w.flatten = g.matrix(C, C * d0, 1.0 / std::sqrt(double(C * d0)));
  w.mlp_hidden = g.matrix(C, kCameraParams, 1.0 / std::sqrt(double(kCameraParams)));
  w.mlp_out = g.matrix(C, C, 1.0 / std::sqrt(double(C)));
  w.se_squeeze = g.matrix(r, C, 1.0 / std::sqrt(double(C)));
  w.se_excite = g.matrix(C, r, 1.0 / std::sqrt(double(r)));
  w.out = g.matrix(C, C, 1.0 / std::sqrt(double(C)));
  return w;
}

AttentionWeights make_attention(Gaussian& g, int C, double gain) {
  const double s = 1.0 / std::sqrt(double(C));
  return {g.matrix(C, C, s), g.matrix(C, C, s), g.matrix(C, C, s),
          g.matrix(C, C, s * gain)};
}

Eigen::ArrayXd relu(const Eigen::ArrayXd& x) { return x.max(0.0); }

void normalize_columns(Eigen::MatrixXd& m) {
  const double target = std::sqrt(double(m.rows()));
  for (Eigen::Index p = 0; p < m.cols(); ++p) {
    const double n = m.col(p).norm();
    if (n > 1e-12)
      m.col(p) *= target / n;
    else
      m.col(p).setZero();
  }
}

}  // namespace

SeededWeights SeededWeights::generate(std::uint64_t seed,
                                      const FeatureConfig& config,
                                      int hypotheses_d0) {
  if (hypotheses_d0 < 1)
    throw Error(ErrorKind::InvalidConfig, "D0 must be positive");
  for (int c : config.channels)
    if (c < 1) throw Error(ErrorKind::InvalidConfig, "channel counts must be positive");

  Gaussian g(seed);
  SeededWeights w;
  w.seed = seed;
  const int C0 = config.channels[0];
  for (int s = 0; s < 4; ++s) w.mixer[s] = g.orthonormal(config.channels[s], kBaseChannels);
  w.mono_projection =
      g.matrix(C0, kMonoChannels, config.mono_gain / std::sqrt(double(kMonoChannels)));
  w.ref_embedding = make_embedding(g, C0, hypotheses_d0);
  w.src_embedding = make_embedding(g, C0, hypotheses_d0);
  w.intra = make_attention(g, C0, config.attention_gain);
  w.inter = make_attention(g, C0, config.attention_gain);
  for (int s = 0; s < 3; ++s)
    w.cascade[s] = g.matrix(config.channels[s + 1], config.channels[s],
                            1.0 / std::sqrt(double(config.channels[s])));
  return w;
}

Eigen::MatrixXd base_channels(const Grid& image) {
  const int H = int(image.rows());
  const int W = int(image.cols());
  auto at = [&](int v, int u) {
    return image(std::clamp(v, 0, H - 1), std::clamp(u, 0, W - 1));
  };
  Eigen::MatrixXd out(kBaseChannels, H * W);
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      double patch[9];
      double mean = 0;
      for (int k = 0; k < 9; ++k) {
        patch[k] = at(v + k / 3 - 1, u + k % 3 - 1);
        mean += patch[k];
      }
      mean /= 9.0;
      auto col = out.col(pixel_index(u, v, W));
      for (int k = 0; k < 9; ++k) col(k) = patch[k] - mean;
      col(9) = 0.5 * (at(v, u + 1) - at(v, u - 1));
      col(10) = 0.5 * (at(v + 1, u) - at(v - 1, u));
    }
  }
  return out;
}

FeaturePyramid GradientMixerExtractor::extract(const Grid& image) const {
  return extract_pyramid(image, config_, weights_);
}

FeaturePyramid extract_pyramid(const Grid& image, const FeatureConfig& config,
                               const SeededWeights& weights) {
  if (image.rows() % 8 != 0 || image.cols() % 8 != 0 || image.size() == 0)
    throw Error(ErrorKind::InvalidConfig,
                "image dimensions must be divisible by 8");
  FeaturePyramid pyramid;
  for (int s = 0; s < 4; ++s) {
    const int factor = 8 >> s;
    const Grid level = box_downsample(image, factor);
    FeatureMap map(config.channels[s], int(level.rows()), int(level.cols()));
    map.values = weights.mixer[s] * base_channels(level);
    normalize_columns(map.values);
    pyramid.scales.push_back(std::move(map));
  }
  return pyramid;
}

MonoFeature mono_feature(const Grid& mono, const FeatureConfig& config) {
  const Grid level = box_downsample(mono, config.mono_stride);
  const double mean = level.mean();
  const double stddev = std::sqrt((level - mean).square().mean());
  const Grid z = stddev > 1e-12 ? Grid((level - mean) / stddev)
                                : Grid(Grid::Zero(level.rows(), level.cols()));
  const int H = int(z.rows());
  const int W = int(z.cols());
  auto at = [&](int v, int u) {
    return z(std::clamp(v, 0, H - 1), std::clamp(u, 0, W - 1));
  };
  MonoFeature out(kMonoChannels, H, W);
  for (int v = 0; v < H; ++v) {
    for (int u = 0; u < W; ++u) {
      auto col = out.pixel(u, v);
      col(0) = z(v, u);
      col(1) = 0.5 * (at(v, u + 1) - at(v, u - 1));
      col(2) = 0.5 * (at(v + 1, u) - at(v - 1, u));
    }
  }
  return out;
}

FeatureMap fuse_mono_feature(const FeatureMap& ref_enc, const MonoFeature& mono,
                             const SeededWeights& weights) {
  if (weights.mono_projection.cols() != mono.channels ||
      weights.mono_projection.rows() != ref_enc.channels)
    throw Error(ErrorKind::InvalidConfig, "mono projection shape mismatch");
  FeatureMap projected(ref_enc.channels, mono.height, mono.width);
  projected.values = weights.mono_projection * mono.values;
  FeatureMap out = ref_enc;
  out.values += resize_bilinear(projected, ref_enc.height, ref_enc.width).values;
  return out;
}

FeaturePyramid cascade_delta(const FeaturePyramid& pyramid,
                             const FeatureMap& updated_scale0,
                             const SeededWeights& weights) {
  FeaturePyramid out = pyramid;
  FeatureMap delta = updated_scale0;
  delta.values -= pyramid.scales[0].values;
  out.scales[0] = updated_scale0;
  for (std::size_t s = 1; s < out.scales.size(); ++s) {
    FeatureMap projected(out.scales[s].channels, delta.height, delta.width);
    projected.values = weights.cascade[s - 1] * delta.values;
    delta = resize_bilinear(projected, out.scales[s].height, out.scales[s].width);
    out.scales[s].values += delta.values;
  }
  return out;
}

Frustum scatter_to_frustum(const FeatureMap& from, const Camera& from_view,
                           const Camera& to_view, std::span<const double> depths) {
  const auto pose = relative_pose(from_view, to_view);
  const int H = to_view.height();
  const int W = to_view.width();
  Frustum frustum;
  for (double d : depths) {
    FeatureMap plane(from.channels, H, W);
    Mask occupied = Mask::Constant(H, W, false);
    for (int v = 0; v < from.height; ++v) {
      for (int u = 0; u < from.width; ++u) {
        const auto c = try_warp<double>(PixelCoord(u, v), d, pose,
                                        from_view.intrinsics_inverse(),
                                        to_view.intrinsics());
        if (!c) continue;
        const long tu = std::lround(c->x());
        const long tv = std::lround(c->y());
        if (tu < 0 || tv < 0 || tu >= W || tv >= H) continue;
        plane.pixel(int(tu), int(tv)) = from.pixel(u, v);
        occupied(tv, tu) = true;
      }
    }
    frustum.planes.push_back(std::move(plane));
    frustum.occupied.push_back(std::move(occupied));
  }
  return frustum;
}

Eigen::VectorXd camera_parameters(const Camera& owner, const Camera& other) {
  Eigen::VectorXd params(kCameraParams);
  const Matrix4<double> a = owner.image_to_world();
  const Matrix4<double> b = other.image_to_world();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      params(r * 4 + c) = a(r, c);
      params(16 + r * 4 + c) = b(r, c);
    }
  }
  return params;
}

FeatureMap camera_embedding(const Frustum& frustum,
                            const Eigen::VectorXd& camera_params,
                            const CameraEmbeddingWeights& weights) {
  if (frustum.planes.empty())
    throw Error(ErrorKind::InvalidConfig, "camera_embedding: empty frustum");
  const int D = int(frustum.planes.size());
  const FeatureMap& first = frustum.planes.front();
  const int C = first.channels;
  const int N = first.pixels();
  if (weights.flatten.cols() != C * D || weights.flatten.rows() != C)
    throw Error(ErrorKind::InvalidConfig,
                "camera_embedding: weights do not match C x D0");

  Eigen::MatrixXd stacked(C * D, N);
  for (int i = 0; i < D; ++i) stacked.middleRows(i * C, C) = frustum.planes[i].values;
  Eigen::MatrixXd y = weights.flatten * stacked;

  // Per-channel normalization over pixels, then ReLU.
  for (int c = 0; c < C; ++c) {
    const double mean = y.row(c).mean();
    const double var = (y.row(c).array() - mean).square().mean();
    y.row(c) = ((y.row(c).array() - mean) / std::sqrt(var + 1e-5)).max(0.0).matrix();
  }

  // Camera MLP on the standardized parameter vector.
  Eigen::ArrayXd z = camera_params.array();
  const double mean = z.mean();
  const double sd = std::sqrt((z - mean).square().mean());
  z = sd > 1e-12 ? Eigen::ArrayXd((z - mean) / sd) : Eigen::ArrayXd::Zero(z.size());
  const Eigen::VectorXd hidden = relu((weights.mlp_hidden * z.matrix()).array()).matrix();
  const Eigen::VectorXd embed = weights.mlp_out * hidden;
  y.colwise() += embed;

  // Squeeze-and-excitation.
  const Eigen::VectorXd squeezed = y.rowwise().mean();
  const Eigen::VectorXd excite =
      weights.se_excite * relu((weights.se_squeeze * squeezed).array()).matrix();
  const Eigen::ArrayXd gate = 1.0 / (1.0 + (-excite.array()).exp());
  y = gate.matrix().asDiagonal() * y;

  FeatureMap out(C, first.height, first.width);
  out.values = weights.out * y;
  return out;
}

Cvpe build_cvpe(const FeatureMap& ref_feat, const FeatureMap& src_feat,
                const Camera& ref_view, const Camera& src_view,
                std::span<const double> depths, const SeededWeights& weights) {
  Cvpe cvpe;
  cvpe.ref_side = camera_embedding(scatter_to_frustum(src_feat, src_view, ref_view, depths),
                                   camera_parameters(ref_view, src_view),
                                   weights.ref_embedding);
  cvpe.src_side = camera_embedding(scatter_to_frustum(ref_feat, ref_view, src_view, depths),
                                   camera_parameters(src_view, ref_view),
                                   weights.src_embedding);
  return cvpe;
}

AttentionResult attend(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& keys,
                       const Eigen::MatrixXd& values) {
  const double scale = 1.0 / std::sqrt(double(std::max<Eigen::Index>(queries.rows(), 1)));
  Eigen::MatrixXd scores = (queries.transpose() * keys) * scale;
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    const double m = scores.row(r).maxCoeff();
    scores.row(r) = (scores.row(r).array() - m).exp().matrix();
    scores.row(r) /= scores.row(r).sum();
  }
  return {values * scores.transpose(), std::move(scores)};
}

FeatureMap windowed_attention(const FeatureMap& query_in, const FeatureMap& key_in,
                              const FeatureMap& value_in,
                              const AttentionWeights& weights, int window) {
  if (window < 1) throw Error(ErrorKind::InvalidConfig, "window must be positive");
  const int H = query_in.height;
  const int W = query_in.width;
  FeatureMap out(int(weights.output.rows()), H, W);
  std::vector<int> idx;
  for (int v0 = 0; v0 < H; v0 += window) {
    for (int u0 = 0; u0 < W; u0 += window) {
      idx.clear();
      for (int v = v0; v < std::min(v0 + window, H); ++v)
        for (int u = u0; u < std::min(u0 + window, W); ++u)
          idx.push_back(pixel_index(u, v, W));
      const Eigen::MatrixXd q = weights.query * query_in.values(Eigen::all, idx);
      const Eigen::MatrixXd k = weights.key * key_in.values(Eigen::all, idx);
      const Eigen::MatrixXd val = weights.value * value_in.values(Eigen::all, idx);
      const AttentionResult r = attend(q, k, val);
      out.values(Eigen::all, idx) = weights.output * r.output;
    }
  }
  return out;
}

std::vector<FeaturePyramid> enhance_features(const FeaturePyramid& reference,
                                             std::span<const FeaturePyramid> sources,
                                             std::span<const Cvpe> cvpes,
                                             const SeededWeights& weights,
                                             const FeatureConfig& config) {
  if (!cvpes.empty() && cvpes.size() != sources.size())
    throw Error(ErrorKind::InvalidConfig, "one CVPE pair per source view required");
  const FeatureMap& ref0 = reference.scales[0];
  std::vector<FeaturePyramid> out;
  out.reserve(sources.size());
  for (std::size_t n = 0; n < sources.size(); ++n) {
    const FeatureMap& x0 = sources[n].scales[0];
    FeatureMap pe_src(x0.channels, x0.height, x0.width);
    FeatureMap pe_ref(ref0.channels, ref0.height, ref0.width);
    if (!cvpes.empty()) {
      pe_src = cvpes[n].src_side;
      pe_ref = cvpes[n].ref_side;
    }

    FeatureMap q = x0;
    q.values += pe_src.values;
    FeatureMap x1 = x0;
    x1.values += windowed_attention(q, q, config.pe_on_values ? q : x0,
                                    weights.intra, config.window).values;

    FeatureMap q2 = x1;
    q2.values += pe_src.values;
    FeatureMap k2 = ref0;
    k2.values += pe_ref.values;
    FeatureMap x2 = x1;
    x2.values += windowed_attention(q2, k2, config.pe_on_values ? k2 : ref0,
                                    weights.inter, config.window).values;

    out.push_back(cascade_delta(sources[n], x2, weights));
  }
  return out;
}

}  // namespace mgmvs
