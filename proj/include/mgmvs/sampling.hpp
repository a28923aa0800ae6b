#pragma once

#include "mgmvs/types.hpp"

#include <array>

namespace mgmvs {

// Per-pixel ordered depth candidates (mm) for one stage.
struct DepthHypotheses {
  int stage = 0;
  int height = 0;
  int width = 0;
  Eigen::MatrixXd depths;  // count x (H*W), ascending down each column
  Grid inv_range;          // inverse-depth span of the uniform sampling window

  int count() const { return int(depths.rows()); }
  int pixels() const { return height * width; }
  auto candidates(int p) const { return depths.col(p); }

  // Spacing of the uniform inverse-depth grid at each pixel.
  Grid inv_interval() const { return inv_range / double(count() - 1); }
};

// Candidates uniform in inverse depth over [1/max, 1/min], shared by every
// pixel of an H x W stage.
DepthHypotheses init_hypotheses(const DepthRange& range, int count, int height,
                                int width);

// Next-stage candidates centred at 1/prev_depth in inverse depth. The window
// half-width is interval_multiplier times the previous inverse interval, so
// with a multiplier of 0.5 the new range equals one previous interval.
// Windows leaving the global range are shifted back inside it (width kept
// unless it exceeds the range). `prev_depth` must already be at the new
// resolution; prev.inv_range is resampled as needed.
DepthHypotheses refine_hypotheses(const Grid& prev_depth,
                                  const DepthHypotheses& prev, int count,
                                  double interval_multiplier,
                                  const DepthRange& range);

struct EdgeMask {
  Grid confidence;  // [0,1]
  Mask mask;        // confidence > lambda
  double lambda = 0.3;
};

// Sobel magnitude normalized by its maximum (all zero for flat images).
Grid edge_confidence(const Grid& image);

// Edge confidence bilinearly resized to height x width and thresholded.
EdgeMask edge_mask(const Grid& image, double lambda, int height, int width);

// At each masked pixel the candidate nearest to aligned_mono (lowest index on
// ties) is replaced by the aligned value; the list is kept ascending.
DepthHypotheses dynamic_replace(const DepthHypotheses& hyp,
                                const Grid& aligned_mono, const Mask& mask);

}  // namespace mgmvs
