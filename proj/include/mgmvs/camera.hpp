#pragma once

#include "mgmvs/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>

namespace mgmvs {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;

// Continuous pixel coordinate (u = column, v = row).
template <typename Scalar>
using PixelCoordT = Vector2<Scalar>;
using PixelCoord = PixelCoordT<double>;

// Pinhole camera: x_cam = R * x_world + t, pixel = K * x_cam / z.
template <typename Scalar>
class CameraView {
 public:
  CameraView() = default;

  CameraView(const Matrix3<Scalar>& intrinsics, const Matrix3<Scalar>& rotation,
             const Vector3<Scalar>& translation, Scalar depth_min,
             Scalar depth_max, int width, int height)
      : K_(intrinsics),
        K_inv_(intrinsics.inverse()),
        R_(rotation),
        t_(translation),
        depth_min_(depth_min),
        depth_max_(depth_max),
        width_(width),
        height_(height) {
    validate();
  }

  const Matrix3<Scalar>& intrinsics() const { return K_; }
  const Matrix3<Scalar>& intrinsics_inverse() const { return K_inv_; }
  const Matrix3<Scalar>& rotation() const { return R_; }
  const Vector3<Scalar>& translation() const { return t_; }
  Scalar depth_min() const { return depth_min_; }
  Scalar depth_max() const { return depth_max_; }
  int width() const { return width_; }
  int height() const { return height_; }

  Vector3<Scalar> center() const { return -R_.transpose() * t_; }
  Vector3<Scalar> to_camera(const Vector3<Scalar>& world) const {
    return R_ * world + t_;
  }
  Vector3<Scalar> to_world(const Vector3<Scalar>& cam) const {
    return R_.transpose() * (cam - t_);
  }

  // World point at camera depth `depth` along the ray through `pixel`.
  Vector3<Scalar> backproject(const PixelCoordT<Scalar>& pixel,
                              Scalar depth) const {
    return to_world(K_inv_ * pixel.homogeneous() * depth);
  }

  // Pixel and camera depth of a world point; empty when behind the camera.
  std::optional<PixelCoordT<Scalar>> project(const Vector3<Scalar>& world,
                                             Scalar* depth = nullptr) const {
    const Vector3<Scalar> cam = to_camera(world);
    if (depth) *depth = cam.z();
    if (!(cam.z() > Scalar(1e-6))) return std::nullopt;
    return (K_ * cam).hnormalized();
  }

  bool in_frame(const PixelCoordT<Scalar>& c) const {
    return c.x() >= 0 && c.y() >= 0 && c.x() <= width_ - 1 &&
           c.y() <= height_ - 1;
  }

  // Same camera at a resampled resolution. Pixel centers follow the
  // half-pixel convention so that box downsampling by 1/factor lines up.
  CameraView scaled(Scalar factor) const {
    Matrix3<Scalar> K = K_;
    K(0, 0) *= factor;
    K(1, 1) *= factor;
    K(0, 1) *= factor;
    K(0, 2) = (K_(0, 2) + Scalar(0.5)) * factor - Scalar(0.5);
    K(1, 2) = (K_(1, 2) + Scalar(0.5)) * factor - Scalar(0.5);
    return CameraView(K, R_, t_, depth_min_, depth_max_,
                      static_cast<int>(std::lround(width_ * factor)),
                      static_cast<int>(std::lround(height_ * factor)));
  }

  // Homogeneous image-to-world matrix: inverse of [K 0; 0 1] * [R t; 0 1].
  Matrix4<Scalar> image_to_world() const {
    Matrix4<Scalar> P = Matrix4<Scalar>::Identity();
    P.template topLeftCorner<3, 3>() = K_ * R_;
    P.template topRightCorner<3, 1>() = K_ * t_;
    return P.inverse();
  }

 private:
  void validate() const {
    if (!(K_(0, 0) > 0 && K_(1, 1) > 0) ||
        std::abs(K_.determinant()) < Scalar(1e-12))
      throw Error(ErrorKind::InvalidConfig,
                  "intrinsics must be invertible with positive focal lengths");
    const Scalar ortho =
        (R_.transpose() * R_ - Matrix3<Scalar>::Identity()).cwiseAbs().maxCoeff();
    if (!(ortho <= Scalar(1e-9)) || R_.determinant() < 0)
      throw Error(ErrorKind::InvalidConfig, "rotation is not orthonormal");
    if (!(depth_min_ > 0 && depth_min_ < depth_max_))
      throw Error(ErrorKind::InvalidConfig, "require 0 < depth_min < depth_max");
    if (width_ <= 0 || height_ <= 0)
      throw Error(ErrorKind::InvalidConfig, "image size must be positive");
  }

  Matrix3<Scalar> K_ = Matrix3<Scalar>::Identity();
  Matrix3<Scalar> K_inv_ = Matrix3<Scalar>::Identity();
  Matrix3<Scalar> R_ = Matrix3<Scalar>::Identity();
  Vector3<Scalar> t_ = Vector3<Scalar>::Zero();
  Scalar depth_min_ = 1;
  Scalar depth_max_ = 2;
  int width_ = 1;
  int height_ = 1;
};

using Camera = CameraView<double>;

// Maps points from a source camera frame into a target camera frame.
template <typename Scalar>
struct RelativePose {
  Matrix3<Scalar> rotation = Matrix3<Scalar>::Identity();
  Vector3<Scalar> translation = Vector3<Scalar>::Zero();

  static RelativePose identity() { return {}; }

  Vector3<Scalar> operator*(const Vector3<Scalar>& p) const {
    return rotation * p + translation;
  }

  RelativePose operator*(const RelativePose& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  RelativePose inverse() const {
    return {rotation.transpose(), -rotation.transpose() * translation};
  }
};

// Pose taking src-camera coordinates to ref-camera coordinates.
template <typename Scalar>
RelativePose<Scalar> relative_pose(const CameraView<Scalar>& src,
                                   const CameraView<Scalar>& ref) {
  const Matrix3<Scalar> R = ref.rotation() * src.rotation().transpose();
  return {R, ref.translation() - R * src.translation()};
}

// Pixel in the target view of the point at depth `depth` along the ray
// through `c` in the origin view. Empty when that point is at or behind the
// target camera.
template <typename Scalar>
std::optional<PixelCoordT<Scalar>> try_warp(const PixelCoordT<Scalar>& c,
                                            Scalar depth,
                                            const RelativePose<Scalar>& pose,
                                            const Matrix3<Scalar>& K_from_inv,
                                            const Matrix3<Scalar>& K_to,
                                            Scalar* target_depth = nullptr) {
  const Vector3<Scalar> p =
      pose.rotation * (K_from_inv * c.homogeneous()) * depth + pose.translation;
  if (target_depth) *target_depth = p.z();
  if (!(p.z() > Scalar(1e-6))) return std::nullopt;
  return (K_to * p).hnormalized();
}

// Source pixel -> reference pixel for a hypothesis on the source ray. The
// result is not clamped to the reference frame.
template <typename Scalar>
PixelCoordT<Scalar> forward_warp_coord(const PixelCoordT<Scalar>& c, Scalar d,
                                       const RelativePose<Scalar>& pose,
                                       const Matrix3<Scalar>& K_src,
                                       const Matrix3<Scalar>& K_ref) {
  const auto out = try_warp<Scalar>(c, d, pose, K_src.inverse(), K_ref);
  if (!out)
    throw Error(ErrorKind::BehindCamera,
                "warped point at depth " + std::to_string(double(d)) +
                    " lies behind the target camera");
  return *out;
}

// Reference pixel -> source pixel for a hypothesis on the reference ray; the
// sampling coordinate used by plane-sweep cost construction.
template <typename Scalar>
PixelCoordT<Scalar> backward_lookup(const PixelCoordT<Scalar>& c_ref, Scalar d,
                                    const RelativePose<Scalar>& pose_ref_to_src,
                                    const Matrix3<Scalar>& K_ref,
                                    const Matrix3<Scalar>& K_src) {
  return forward_warp_coord<Scalar>(c_ref, d, pose_ref_to_src, K_ref, K_src);
}

}  // namespace mgmvs
