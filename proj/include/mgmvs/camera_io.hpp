#pragma once

#include "mgmvs/camera.hpp"

#include <filesystem>
#include <iosfwd>

namespace mgmvs {

// Text camera files:
//
//   extrinsic
//   r11 r12 r13 t1
//   r21 r22 r23 t2
//   r31 r32 r33 t3
//   0 0 0 1
//
//   intrinsic
//   fx 0 cx
//   0 fy cy
//   0 0 1
//
//   depth_min depth_interval [num_planes [depth_max]]
//
// When depth_max is absent it is depth_min + depth_interval * (num_planes - 1)
// with num_planes defaulting to 192. Image size is not part of the file.
Camera read_camera(std::istream& in, int width, int height);
Camera read_camera(const std::filesystem::path& path, int width, int height);

void write_camera(std::ostream& out, const Camera& camera);
void write_camera(const std::filesystem::path& path, const Camera& camera);

}  // namespace mgmvs
