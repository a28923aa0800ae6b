#pragma once

#include "mgmvs/error.hpp"
#include "mgmvs/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace mgmvs {

// Maps relative mono values to metric inverse depth: 1/d = scale*mono + shift.
template <typename Scalar>
struct AlignmentParamsT {
  Scalar scale = 1;  // 1/mm per mono unit
  Scalar shift = 0;  // 1/mm
};
using AlignmentParams = AlignmentParamsT<double>;

using ConfidenceMap = Grid;

namespace detail {

// Pairwise summation over a fixed index order.
template <typename Scalar, typename F>
Scalar pairwise_sum(std::size_t begin, std::size_t end, const F& term) {
  if (end - begin <= 8) {
    Scalar s = 0;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_sum<Scalar>(begin, mid, term) + pairwise_sum<Scalar>(mid, end, term);
}

}  // namespace detail

// Row-major pixel indices of the ceil(keep_fraction * N) most confident
// pixels among those with `valid` set (all pixels when valid is null) and
// finite confidence. Ties keep row-major order. Returned in row-major order.
std::vector<int> select_confident(const ConfidenceMap& confidence,
                                  double keep_fraction,
                                  const Mask* valid = nullptr);

// Closed-form least squares of 1/pred_depth against (mono, 1) over `coords`,
// solved on mean-centred data.
template <typename Scalar>
AlignmentParamsT<Scalar> fit_scale_shift(const GridT<Scalar>& pred_depth,
                                         const GridT<Scalar>& mono,
                                         std::span<const int> coords) {
  if (pred_depth.rows() != mono.rows() || pred_depth.cols() != mono.cols())
    throw Error(ErrorKind::InvalidConfig, "fit_scale_shift: shape mismatch");
  if (coords.size() < 2)
    throw Error(ErrorKind::DegenerateFit, "fit_scale_shift: fewer than 2 pixels");
  const Scalar* depth = pred_depth.data();
  const Scalar* x = mono.data();
  const std::size_t n = coords.size();
  const Scalar inv_n = Scalar(1) / Scalar(n);

  const Scalar x_mean =
      detail::pairwise_sum<Scalar>(0, n, [&](std::size_t i) { return x[coords[i]]; }) * inv_n;
  const Scalar y_mean = detail::pairwise_sum<Scalar>(0, n, [&](std::size_t i) {
                          return Scalar(1) / depth[coords[i]];
                        }) * inv_n;
  const Scalar sxx = detail::pairwise_sum<Scalar>(0, n, [&](std::size_t i) {
    const Scalar dx = x[coords[i]] - x_mean;
    return dx * dx;
  });
  const Scalar sxy = detail::pairwise_sum<Scalar>(0, n, [&](std::size_t i) {
    return (x[coords[i]] - x_mean) * (Scalar(1) / depth[coords[i]] - y_mean);
  });
  const Scalar spread = detail::pairwise_sum<Scalar>(0, n, [&](std::size_t i) {
    return std::abs(x[coords[i]]);
  }) * inv_n;
  if (!(sxx > Scalar(n) * Scalar(1e-24) * std::max(spread * spread, Scalar(1e-300))))
    throw Error(ErrorKind::DegenerateFit,
                "fit_scale_shift: mono values are constant on the selected pixels");
  AlignmentParamsT<Scalar> params;
  params.scale = sxy / sxx;
  params.shift = y_mean - params.scale * x_mean;
  return params;
}

// Metric depth 1/(scale*mono + shift) clamped to the range; non-positive
// inverse depth maps to range.max.
template <typename Scalar>
GridT<Scalar> apply_alignment(const GridT<Scalar>& mono,
                              const AlignmentParamsT<Scalar>& params,
                              const DepthRange& range) {
  GridT<Scalar> out(mono.rows(), mono.cols());
  for (Eigen::Index i = 0; i < mono.size(); ++i) {
    const Scalar inv = params.scale * mono.data()[i] + params.shift;
    out.data()[i] = inv > 0 ? std::clamp<Scalar>(Scalar(1) / inv, range.min, range.max)
                            : Scalar(range.max);
  }
  return out;
}

// Stage-0 mapping with no prediction available: affine in inverse depth with
// max(mono) -> 1/range.min and min(mono) -> 1/range.max.
template <typename Scalar>
GridT<Scalar> initial_scale(const GridT<Scalar>& mono, const DepthRange& range,
                            const Mask* valid = nullptr) {
  Scalar lo = std::numeric_limits<Scalar>::infinity();
  Scalar hi = -lo;
  for (Eigen::Index i = 0; i < mono.size(); ++i) {
    if (valid && !valid->data()[i]) continue;
    lo = std::min(lo, mono.data()[i]);
    hi = std::max(hi, mono.data()[i]);
  }
  if (!(hi > lo))
    throw Error(ErrorKind::DegenerateFit, "initial_scale: mono has no spread");
  AlignmentParamsT<Scalar> params;
  params.scale = (Scalar(1) / range.min - Scalar(1) / range.max) / (hi - lo);
  params.shift = Scalar(1) / range.max - params.scale * lo;
  return apply_alignment(mono, params, range);
}

}  // namespace mgmvs
