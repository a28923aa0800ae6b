#include "mgmvs/synth.hpp"

#include "mgmvs/camera_io.hpp"
#include "mgmvs/error.hpp"
#include "mgmvs/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

namespace mgmvs {

namespace {

using Vec3 = Vector3<double>;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double lattice(std::int64_t i, std::int64_t j, std::int64_t k,
               std::uint64_t seed) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(i));
  h = splitmix(h ^ static_cast<std::uint64_t>(j));
  h = splitmix(h ^ static_cast<std::uint64_t>(k));
  return double(h >> 11) * 0x1.0p-53;
}

double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

// Smooth 3D value noise in [0,1].
double value_noise(const Vec3& p, std::uint64_t seed) {
  const double fx = std::floor(p.x()), fy = std::floor(p.y()),
               fz = std::floor(p.z());
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const auto iz = static_cast<std::int64_t>(fz);
  const double tx = fade(p.x() - fx), ty = fade(p.y() - fy),
               tz = fade(p.z() - fz);
  double acc = 0;
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    const double w = (dx ? tx : 1 - tx) * (dy ? ty : 1 - ty) * (dz ? tz : 1 - tz);
    acc += w * lattice(ix + dx, iy + dy, iz + dz, seed);
  }
  return acc;
}

struct Hit {
  double depth = std::numeric_limits<double>::infinity();
  int surface = -1;
};

// Analytic first hit of the ray origin + lambda * dir. `dir` has unit camera
// z so lambda equals camera depth.
Hit cast(const SceneConfig& cfg, const Vec3& origin, const Vec3& dir) {
  Hit best;
  auto consider = [&](double lambda, int surface) {
    if (lambda > 1e-9 && lambda < best.depth) best = {lambda, surface};
  };
  auto plane = [&](double z) -> double {
    if (std::abs(dir.z()) < 1e-15) return -1;
    return (z - origin.z()) / dir.z();
  };

  switch (cfg.kind) {
    case SceneKind::Plane:
      consider(plane(cfg.plane_depth), 0);
      break;
    case SceneKind::Step: {
      const int column = cfg.step_column < 0 ? cfg.width / 2 : cfg.step_column;
      const double cx = (cfg.width - 1) / 2.0;
      const double slope = (column - 0.5 - cx) / cfg.focal;
      const double lambda = plane(cfg.step_near);
      if (lambda > 0) {
        const Vec3 p = origin + lambda * dir;
        if (p.x() < slope * p.z()) consider(lambda, 1);
      }
      consider(plane(cfg.step_far), 0);
      break;
    }
    case SceneKind::SphereOnPlane: {
      consider(plane(cfg.background_depth), 0);
      const Vec3 center(0, 0, cfg.sphere_center_depth);
      const Vec3 oc = origin - center;
      const double a = dir.squaredNorm();
      const double b = 2 * oc.dot(dir);
      const double c = oc.squaredNorm() - cfg.sphere_radius * cfg.sphere_radius;
      const double disc = b * b - 4 * a * c;
      if (disc >= 0) {
        const double s = std::sqrt(disc);
        consider((-b - s) / (2 * a), 1);
        consider((-b + s) / (2 * a), 1);
      }
      break;
    }
  }
  return best;
}

double albedo(const Vec3& p, int surface, std::uint64_t seed) {
  static constexpr double cells[] = {48.0, 24.0, 12.0};
  static constexpr double amps[] = {0.45, 0.3, 0.2};
  double value = 0.5 + (surface == 0 ? -0.12 : 0.12);
  for (int o = 0; o < 3; ++o)
    value += amps[o] * (value_noise(p / cells[o], seed + 101 * o + surface) - 0.5);
  return std::clamp(value, 0.0, 1.0);
}

Matrix3<double> look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 z = (target - eye).normalized();
  const Vec3 x = Vec3(0, 1, 0).cross(z).normalized();
  const Vec3 y = z.cross(x);
  Matrix3<double> R;
  R.row(0) = x.transpose();
  R.row(1) = y.transpose();
  R.row(2) = z.transpose();
  return R;
}

}  // namespace

SceneKind parse_scene_kind(const std::string& name) {
  if (name == "plane") return SceneKind::Plane;
  if (name == "step") return SceneKind::Step;
  if (name == "sphere-on-plane" || name == "sphere")
    return SceneKind::SphereOnPlane;
  throw Error(ErrorKind::InvalidConfig, "unknown scene kind '" + name + "'");
}

Rig parse_rig(const std::string& name) {
  if (name == "converging") return Rig::Converging;
  if (name == "rectified") return Rig::Rectified;
  throw Error(ErrorKind::InvalidConfig, "unknown rig '" + name + "'");
}

std::string to_string(Rig rig) {
  return rig == Rig::Rectified ? "rectified" : "converging";
}

std::string to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::Plane: return "plane";
    case SceneKind::Step: return "step";
    case SceneKind::SphereOnPlane: return "sphere-on-plane";
  }
  return "plane";
}

std::optional<double> SyntheticScene::cast_depth(int view,
                                                 const PixelCoord& pixel) const {
  const Camera& cam = views.at(view);
  const Vec3 dir = cam.rotation().transpose() *
                   (cam.intrinsics_inverse() * pixel.homogeneous());
  const Hit hit = cast(config, cam.center(), dir);
  if (!std::isfinite(hit.depth)) return std::nullopt;
  return hit.depth;
}

bool SyntheticScene::visible(int view, const Vec3& world, double rel_tol) const {
  const Camera& cam = views.at(view);
  double depth = 0;
  const auto pixel = cam.project(world, &depth);
  if (!pixel || !cam.in_frame(*pixel)) return false;
  const auto hit = cast_depth(view, *pixel);
  return hit && std::abs(*hit - depth) <= rel_tol * depth;
}

SyntheticScene generate_scene(const SceneConfig& cfg) {
  if (cfg.n_views < 2)
    throw Error(ErrorKind::InvalidConfig, "need at least 2 views");
  if (cfg.width < 16 || cfg.height < 16)
    throw Error(ErrorKind::InvalidConfig, "resolution must be at least 16x16");
  if (!(cfg.baseline > 0) || !(cfg.focal > 0) || !(cfg.target_depth > 0))
    throw Error(ErrorKind::InvalidConfig,
                "degenerate camera layout: baseline, focal and target depth "
                "must be positive");

  SyntheticScene scene;
  scene.config = cfg;

  Matrix3<double> K = Matrix3<double>::Identity();
  K(0, 0) = K(1, 1) = cfg.focal;
  K(0, 2) = (cfg.width - 1) / 2.0;
  K(1, 2) = (cfg.height - 1) / 2.0;

  const Vec3 target(0, 0, cfg.target_depth);
  for (int n = 0; n < cfg.n_views; ++n) {
    Vec3 eye = Vec3::Zero();
    if (n > 0) {
      if (cfg.rig == Rig::Rectified) {
        const int k = (n + 1) / 2;
        eye = Vec3((n % 2 ? 1 : -1) * k * cfg.baseline, 0, 0);
      } else {
        const double angle = 2 * std::numbers::pi * (n - 1) / (cfg.n_views - 1);
        eye = Vec3(cfg.baseline * std::cos(angle), cfg.baseline * std::sin(angle), 0);
      }
    }
    const Matrix3<double> R = n == 0 || cfg.rig == Rig::Rectified
                                  ? Matrix3<double>::Identity()
                                  : look_at(eye, target);
    scene.views.emplace_back(K, R, -R * eye, cfg.range.min, cfg.range.max,
                             cfg.width, cfg.height);
  }

  for (int n = 0; n < cfg.n_views; ++n) {
    const Camera& cam = scene.views[n];
    Grid image(cfg.height, cfg.width);
    Grid depth = Grid::Zero(cfg.height, cfg.width);
    Mask valid = Mask::Constant(cfg.height, cfg.width, false);
    for (int v = 0; v < cfg.height; ++v) {
      for (int u = 0; u < cfg.width; ++u) {
        const Vec3 dir = cam.rotation().transpose() *
                         (cam.intrinsics_inverse() * Vec3(u, v, 1));
        const Hit hit = cast(cfg, cam.center(), dir);
        if (!std::isfinite(hit.depth)) {
          image(v, u) = 0;
          continue;
        }
        image(v, u) = albedo(cam.center() + hit.depth * dir, hit.surface,
                             cfg.texture_seed);
        if (hit.depth >= cfg.range.min && hit.depth <= cfg.range.max) {
          depth(v, u) = hit.depth;
          valid(v, u) = true;
        }
      }
    }

    for (int v = 0; v + 8 <= cfg.height; v += 8) {
      for (int u = 0; u + 8 <= cfg.width; u += 8) {
        const auto block = image.block(v, u, 8, 8);
        const double mean = block.mean();
        const double var = (block - mean).square().mean();
        if (var < kTextureVarianceFloor)
          throw Error(ErrorKind::InvalidConfig,
                      "texture variance below floor in view " +
                          std::to_string(n) + " block (" + std::to_string(u) +
                          "," + std::to_string(v) + ")");
      }
    }

    scene.images.push_back(std::move(image));
    scene.gt_depths.push_back(std::move(depth));
    scene.valid_masks.push_back(std::move(valid));
  }
  return scene;
}

Grid make_mono_depth(const Grid& gt_depth, const MonoOracleParams& params,
                     const Mask* valid) {
  if (!(params.a_true > 0))
    throw Error(ErrorKind::InvalidConfig, "a_true must be positive");
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Grid mono = Grid::Zero(gt_depth.rows(), gt_depth.cols());
  for (Eigen::Index v = 0; v < gt_depth.rows(); ++v) {
    for (Eigen::Index u = 0; u < gt_depth.cols(); ++u) {
      // Draw for every pixel so the noise field does not depend on the mask.
      const double n = params.noise_sigma > 0 ? params.noise_sigma * noise(rng) : 0.0;
      const double d = gt_depth(v, u);
      if ((valid && !(*valid)(v, u)) || !(d > 0)) continue;
      mono(v, u) = (1.0 / d - params.b_true) / params.a_true + n;
    }
  }
  return mono;
}

std::filesystem::path write_scene(const SyntheticScene& scene,
                                  const std::vector<Grid>& mono,
                                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto manifest = dir / "manifest.txt";
  std::ofstream out(manifest);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + manifest.string());
  out << "kind=" << to_string(scene.config.kind) << '\n'
      << "views=" << scene.views.size() << '\n'
      << "width=" << scene.config.width << '\n'
      << "height=" << scene.config.height << '\n';
  for (std::size_t n = 0; n < scene.views.size(); ++n) {
    const std::string id = std::to_string(n);
    const std::string image = "image_" + id + ".ppm";
    const std::string camera = "cam_" + id + ".txt";
    const std::string gt = "gt_depth_" + id + ".pfm";
    write_ppm(dir / image, scene.images[n]);
    write_camera(dir / camera, scene.views[n]);
    write_pfm(dir / gt, scene.gt_depths[n]);
    out << "view." << id << ".image=" << image << '\n'
        << "view." << id << ".camera=" << camera << '\n'
        << "view." << id << ".gt_depth=" << gt << '\n';
    if (n < mono.size()) {
      const std::string m = "mono_" + id + ".pfm";
      write_pfm(dir / m, mono[n]);
      out << "view." << id << ".mono=" << m << '\n';
    }
  }
  return manifest;
}

}  // namespace mgmvs
