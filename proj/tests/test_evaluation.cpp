#include "mgmvs/error.hpp"
#include "mgmvs/evaluation.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace mgmvs;

namespace {

PointCloud plane_cloud(int n, double spacing, double z) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c.points.push_back(Eigen::Vector3f(i * spacing, j * spacing, z));
  return c;
}

PointCloud random_cloud(int n, std::uint64_t seed, float extent) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0, extent);
  PointCloud c;
  for (int i = 0; i < n; ++i) c.points.push_back({u(rng), u(rng), u(rng)});
  return c;
}

double brute_nearest(const PointCloud& c, const Eigen::Vector3d& q) {
  double best = 1e300;
  for (const auto& p : c.points) best = std::min(best, (p.cast<double>() - q).norm());
  return best;
}

}  // namespace

TEST_CASE("depth metrics on constructed errors") {
  const Grid gt = Grid::Constant(4, 4, 600);
  const Mask all = Mask::Constant(4, 4, true);
  const auto zero = depth_metrics(gt, gt, all);
  CHECK(zero.mae == 0);
  CHECK(zero.e2 == 0);
  CHECK(zero.e8 == 0);

  const auto three = depth_metrics(Grid(gt + 3), gt, all);
  CHECK(three.mae == doctest::Approx(3));
  CHECK(three.e2 == 100);
  CHECK(three.e4 == 0);
  CHECK(three.e8 == 0);

  Grid half = gt;
  half.topRows(2) += 5;
  const auto h = depth_metrics(half, gt, all);
  CHECK(h.mae == doctest::Approx(2.5));
  CHECK(h.e2 == 50);
  CHECK(h.e4 == 50);
  CHECK(h.e8 == 0);

  Mask top = Mask::Constant(4, 4, false);
  top.topRows(2).setConstant(true);
  CHECK(depth_metrics(half, gt, top).mae == doctest::Approx(5));
  CHECK_THROWS_AS(depth_metrics(gt, gt, Mask::Constant(4, 4, false)), Error);
}

TEST_CASE("error ratios are ordered") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 5);
  Grid pred(16, 16);
  const Grid gt = Grid::Constant(16, 16, 700);
  for (Eigen::Index i = 0; i < pred.size(); ++i) pred.data()[i] = 700 + n(rng);
  const auto m = depth_metrics(pred, gt, Mask::Constant(16, 16, true));
  CHECK(m.e2 >= m.e4);
  CHECK(m.e4 >= m.e8);
  CHECK(m.e2 <= 100);
  CHECK(m.mae > 0);
}

TEST_CASE("cloud metrics of identical and shifted clouds") {
  const auto c = plane_cloud(40, 0.25, 600);
  const auto same = cloud_metrics(c, c);
  CHECK(same.acc == 0);
  CHECK(same.comp == 0);
  CHECK(same.overall == 0);

  const auto shifted = plane_cloud(40, 0.25, 601);
  const auto m = cloud_metrics(shifted, c);
  CHECK(m.acc == doctest::Approx(1).epsilon(1e-5));
  CHECK(m.comp == doctest::Approx(1).epsilon(1e-5));
  CHECK(m.overall == doctest::Approx((m.acc + m.comp) / 2));

  CHECK_THROWS_AS(cloud_metrics(PointCloud{}, c), Error);
  CHECK_THROWS_AS(cloud_metrics(c, PointCloud{}), Error);
}

TEST_CASE("hash-grid nearest neighbours agree with brute force") {
  const auto cloud = random_cloud(500, 2, 100);
  const auto queries = random_cloud(500, 3, 100);
  const auto dense = random_cloud(500, 4, 40);
  const PointGrid grid(cloud, 20);
  int found = 0;
  for (const auto& q : queries.points) {
    const double brute = brute_nearest(cloud, q.cast<double>());
    const double fast = grid.nearest_distance(q.cast<double>());
    if (brute <= 20) {
      CHECK(std::abs(fast - brute) < 1e-12);
      ++found;
    } else {
      CHECK(std::isinf(fast));
    }
  }
  CHECK(found > 400);

  const auto metrics = cloud_metrics(queries, dense, 20);
  double acc = 0;
  int inliers = 0;
  for (const auto& q : queries.points) {
    const double d = brute_nearest(dense, q.cast<double>());
    if (d > 20) continue;
    acc += d;
    ++inliers;
  }
  CHECK(inliers > 0);
  CHECK(inliers < 500);
  CHECK(std::abs(metrics.acc - acc / inliers) < 1e-12);
}

TEST_CASE("swapping clouds swaps accuracy and completeness") {
  const auto a = random_cloud(300, 4, 50);
  const auto b = random_cloud(200, 5, 50);
  const auto ab = cloud_metrics(a, b);
  const auto ba = cloud_metrics(b, a);
  CHECK(ab.acc == ba.comp);
  CHECK(ab.comp == ba.acc);
  CHECK(ab.acc >= 0);
}

TEST_CASE("far outliers do not change accuracy") {
  const auto gt = random_cloud(300, 6, 50);
  auto pred = random_cloud(300, 7, 50);
  const auto before = cloud_metrics(pred, gt, 20);
  pred.points.push_back({1000, 1000, 1000});
  const auto after = cloud_metrics(pred, gt, 20);
  CHECK(after.acc == before.acc);
  CHECK(after.comp <= before.comp);

  PointCloud far;
  far.points.push_back({5000, 0, 0});
  const auto none = cloud_metrics(far, gt, 20);
  CHECK(none.acc == 20);
  CHECK(none.comp == 20);
}

TEST_CASE("report lines") {
  Report r;
  r.add("a", 1.0 / 3);
  r.add("name", std::string("plane"));
  r.add("d", DepthMetrics{1, 2, 3, 4});
  r.add("c", CloudMetrics{0.5, 1.5, 1.0});
  std::ostringstream out;
  r.write(out);
  CHECK(out.str() ==
        "a=0.3333333333\nname=plane\nd.mae=1\nd.e2=2\nd.e4=3\nd.e8=4\n"
        "c.acc=0.5\nc.comp=1.5\nc.overall=1\n");
}
