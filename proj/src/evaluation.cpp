#include "mgmvs/evaluation.hpp"

#include "mgmvs/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace mgmvs {

DepthMetrics depth_metrics(const Grid& pred, const Grid& gt, const Mask& valid) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols() || valid.rows() != gt.rows() ||
      valid.cols() != gt.cols())
    throw Error(ErrorKind::InvalidConfig, "depth_metrics: shape mismatch");
  double abs_sum = 0;
  long n = 0, over2 = 0, over4 = 0, over8 = 0;
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    if (!valid.data()[i]) continue;
    const double err = std::abs(pred.data()[i] - gt.data()[i]);
    abs_sum += err;
    over2 += err > 2.0;
    over4 += err > 4.0;
    over8 += err > 8.0;
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::EmptyMask, "depth_metrics: empty mask");
  return {abs_sum / n, 100.0 * over2 / n, 100.0 * over4 / n, 100.0 * over8 / n};
}

PointGrid::PointGrid(const PointCloud& cloud, double cell_size) : cell_(cell_size) {
  if (!(cell_size > 0)) throw Error(ErrorKind::InvalidConfig, "cell size must be positive");
  points_.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    points_.push_back(p.cast<double>());
    cells_[key(points_.back())].push_back(int(points_.size()) - 1);
  }
}

PointGrid::Key PointGrid::key(const Eigen::Vector3d& p) const {
  return {long(std::floor(p.x() / cell_)), long(std::floor(p.y() / cell_)),
          long(std::floor(p.z() / cell_))};
}

double PointGrid::nearest_distance(const Eigen::Vector3d& q) const {
  const auto [kx, ky, kz] = key(q);
  double best = std::numeric_limits<double>::infinity();
  for (long dx = -1; dx <= 1; ++dx)
    for (long dy = -1; dy <= 1; ++dy)
      for (long dz = -1; dz <= 1; ++dz) {
        const auto it = cells_.find({kx + dx, ky + dy, kz + dz});
        if (it == cells_.end()) continue;
        for (int i : it->second) best = std::min(best, (points_[i] - q).squaredNorm());
      }
  best = std::sqrt(best);
  return best <= cell_ ? best : std::numeric_limits<double>::infinity();
}

namespace {

double mean_inlier_distance(const PointCloud& from, const PointGrid& to, double max_dist) {
  double sum = 0;
  long n = 0;
  for (const auto& p : from.points) {
    const double d = to.nearest_distance(p.cast<double>());
    if (d > max_dist) continue;
    sum += d;
    ++n;
  }
  return n > 0 ? sum / n : max_dist;
}

}  // namespace

CloudMetrics cloud_metrics(const PointCloud& pred, const PointCloud& gt, double max_dist) {
  if (pred.empty() || gt.empty()) throw Error(ErrorKind::EmptyCloud, "cloud_metrics: empty cloud");
  const PointGrid gt_grid(gt, max_dist);
  const PointGrid pred_grid(pred, max_dist);
  CloudMetrics m;
  m.acc = mean_inlier_distance(pred, gt_grid, max_dist);
  m.comp = mean_inlier_distance(gt, pred_grid, max_dist);
  m.overall = 0.5 * (m.acc + m.comp);
  return m;
}

void Report::add(const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  lines_.emplace_back(key, buf);
}

void Report::add(const std::string& key, const std::string& value) {
  lines_.emplace_back(key, value);
}

void Report::add(const std::string& prefix, const DepthMetrics& m) {
  add(prefix + ".mae", m.mae);
  add(prefix + ".e2", m.e2);
  add(prefix + ".e4", m.e4);
  add(prefix + ".e8", m.e8);
}

void Report::add(const std::string& prefix, const CloudMetrics& m) {
  add(prefix + ".acc", m.acc);
  add(prefix + ".comp", m.comp);
  add(prefix + ".overall", m.overall);
}

void Report::write(std::ostream& out) const {
  for (const auto& [k, v] : lines_) out << k << '=' << v << '\n';
}

void Report::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write(out);
}

}  // namespace mgmvs
