#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace mgmvs {

struct PointCloud {
  std::vector<Eigen::Vector3f> points;             // mm
  std::vector<std::array<std::uint8_t, 3>> colors; // empty or one per point

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
};

// Binary little-endian PLY: float x, y, z and, when colored, uchar
// red, green, blue.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace mgmvs
