#pragma once

#include "mgmvs/cost_volume.hpp"
#include "mgmvs/sampling.hpp"
#include "mgmvs/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace mgmvs {

// Mean over valid pixels of -log P[i_gt], i_gt the candidate nearest to the
// ground truth (lowest index on ties). Probabilities floored at 1e-12.
double cross_entropy_loss(const ProbabilityVolume& prob, const Grid& gt_depth,
                          const DepthHypotheses& hyp, const Mask& valid);

struct PixelPairSample {
  std::vector<int> first;   // row-major pixel indices
  std::vector<int> second;
  std::uint64_t seed = 0;

  std::size_t size() const { return first.size(); }
};

// Draws `count` pairs uniformly with replacement from valid pixels. When
// `mono` is given, a pair with equal mono values is redrawn up to
// `retry_cap` times and dropped if it still ties.
PixelPairSample sample_pairs(const Mask& valid, int count, std::uint64_t seed,
                             const Grid* mono = nullptr, int retry_cap = 8);

// Hinge on ordering disagreement between predicted depth and the
// disparity-like mono map:
//   e = (d1 - d2) * -sign(m1 - m2),  loss = mean(max(0, -e)).
double relative_consistency_loss(const Grid& depth, const Grid& mono,
                                 const PixelPairSample& pairs);

double overall_loss(const std::array<double, 4>& cross_entropy,
                    double relative_consistency, double gamma);

}  // namespace mgmvs
