#include "mgmvs/losses.hpp"

#include "mgmvs/error.hpp"

#include <cmath>
#include <random>

namespace mgmvs {

double cross_entropy_loss(const ProbabilityVolume& prob, const Grid& gt_depth,
                          const DepthHypotheses& hyp, const Mask& valid) {
  if (prob.count() != hyp.count() || prob.prob.cols() != hyp.pixels() ||
      gt_depth.rows() != hyp.height || gt_depth.cols() != hyp.width ||
      valid.rows() != hyp.height || valid.cols() != hyp.width)
    throw Error(ErrorKind::InvalidConfig, "cross_entropy_loss: shape mismatch");
  double sum = 0;
  int n = 0;
  for (int p = 0; p < hyp.pixels(); ++p) {
    const int v = p / hyp.width, u = p % hyp.width;
    if (!valid(v, u)) continue;
    Eigen::Index gt_index = 0;
    (hyp.depths.col(p).array() - gt_depth(v, u)).abs().minCoeff(&gt_index);
    sum += -std::log(std::max(prob.prob(gt_index, p), 1e-12));
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::EmptyMask, "cross_entropy_loss: no valid pixels");
  return sum / n;
}

PixelPairSample sample_pairs(const Mask& valid, int count, std::uint64_t seed,
                             const Grid* mono, int retry_cap) {
  PixelPairSample out;
  out.seed = seed;
  std::vector<int> pool;
  for (int i = 0; i < int(valid.size()); ++i)
    if (valid.data()[i]) pool.push_back(i);
  if (count <= 0) return out;
  if (pool.size() < 2) throw Error(ErrorKind::EmptyMask, "sample_pairs: fewer than 2 valid pixels");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int m = 0; m < count; ++m) {
    for (int attempt = 0; attempt <= retry_cap; ++attempt) {
      const int a = pool[pick(rng)];
      const int b = pool[pick(rng)];
      if (mono && mono->data()[a] == mono->data()[b]) continue;
      out.first.push_back(a);
      out.second.push_back(b);
      break;
    }
  }
  return out;
}

double relative_consistency_loss(const Grid& depth, const Grid& mono,
                                 const PixelPairSample& pairs) {
  if (depth.rows() != mono.rows() || depth.cols() != mono.cols())
    throw Error(ErrorKind::InvalidConfig, "relative_consistency_loss: shape mismatch");
  if (pairs.size() == 0) return 0.0;
  auto sign = [](double x) { return double((x > 0) - (x < 0)); };
  double sum = 0;
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    const int a = pairs.first[m];
    const int b = pairs.second[m];
    const double e = (depth.data()[a] - depth.data()[b]) * -sign(mono.data()[a] - mono.data()[b]);
    sum += std::max(0.0, -e);
  }
  return sum / double(pairs.size());
}

double overall_loss(const std::array<double, 4>& cross_entropy,
                    double relative_consistency, double gamma) {
  double sum = 0;
  for (double ce : cross_entropy) sum += ce;
  return sum + gamma * relative_consistency;
}

}  // namespace mgmvs
