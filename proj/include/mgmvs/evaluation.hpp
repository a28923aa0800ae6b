#pragma once

#include "mgmvs/point_cloud.hpp"
#include "mgmvs/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace mgmvs {

struct DepthMetrics {
  double mae = 0;  // mm
  double e2 = 0;   // % of pixels with |error| > 2 mm
  double e4 = 0;
  double e8 = 0;
};

DepthMetrics depth_metrics(const Grid& pred, const Grid& gt, const Mask& valid);

struct CloudMetrics {
  double acc = 0;   // mean pred -> gt distance, mm
  double comp = 0;  // mean gt -> pred distance, mm
  double overall = 0;
};

// Nearest-neighbour distances farther than max_dist are dropped as
// outliers; a direction with no inlier reports max_dist.
CloudMetrics cloud_metrics(const PointCloud& pred, const PointCloud& gt,
                           double max_dist = 20.0);

// Uniform hash grid for nearest-neighbour queries within a radius.
class PointGrid {
 public:
  PointGrid(const PointCloud& cloud, double cell_size);
  // Distance to the nearest point if one lies within the cell radius
  // (at least cell_size), otherwise +inf.
  double nearest_distance(const Eigen::Vector3d& q) const;

 private:
  using Key = std::tuple<long, long, long>;
  Key key(const Eigen::Vector3d& p) const;

  double cell_;
  std::vector<Eigen::Vector3d> points_;
  std::map<Key, std::vector<int>> cells_;
};

// Ordered key=value report writer: one "key=value" per line, values printed
// with 10 significant digits.
class Report {
 public:
  void add(const std::string& key, double value);
  void add(const std::string& key, const std::string& value);
  void add(const std::string& prefix, const DepthMetrics& m);
  void add(const std::string& prefix, const CloudMetrics& m);

  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

}  // namespace mgmvs
