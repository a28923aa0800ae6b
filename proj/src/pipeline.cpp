#include "mgmvs/pipeline.hpp"

#include "mgmvs/camera_io.hpp"
#include "mgmvs/cost_volume.hpp"
#include "mgmvs/error.hpp"
#include "mgmvs/features.hpp"
#include "mgmvs/fusion.hpp"
#include "mgmvs/image.hpp"
#include "mgmvs/io.hpp"
#include "mgmvs/losses.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace mgmvs {

namespace {

int to_int(const KeyValueFile& file, const std::string& key) {
  try {
    return std::stoi(file.at(key));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorKind::MalformedFile, "manifest: '" + key + "' is not an integer");
  }
}

Mask positive(const Grid& depth) { return depth > 0.0; }

// Full-resolution pixel whose area contains the centre of each target pixel.
template <typename T>
GridT<T> nearest_resize(const GridT<T>& grid, int height, int width) {
  GridT<T> out(height, width);
  for (int v = 0; v < height; ++v) {
    const int sv = std::min(int(grid.rows()) - 1, int((v + 0.5) * grid.rows() / height));
    for (int u = 0; u < width; ++u) {
      const int su = std::min(int(grid.cols()) - 1, int((u + 0.5) * grid.cols() / width));
      out(v, u) = grid(sv, su);
    }
  }
  return out;
}

Mask resize_mask(const Mask& mask, int height, int width) {
  if (mask.rows() == height && mask.cols() == width) return mask;
  // A coarse pixel is valid only when every fine pixel its bilinear sample
  // touches is valid.
  const Grid soft = resize_bilinear(mask.cast<double>().eval(), height, width);
  return soft > 1.0 - 1e-9;
}

double mean_entropy(const ProbabilityVolume& prob) {
  double total = 0;
  for (Eigen::Index p = 0; p < prob.prob.cols(); ++p) {
    double h = 0;
    for (Eigen::Index d = 0; d < prob.prob.rows(); ++d) {
      const double q = prob.prob(d, p);
      if (q > 0) h -= q * std::log(q);
    }
    total += h;
  }
  return prob.prob.cols() ? total / double(prob.prob.cols()) : 0.0;
}

std::string context(int view, int stage) {
  return "view " + std::to_string(view) + (stage >= 0 ? " stage " + std::to_string(stage) : "");
}

}  // namespace

SceneData load_scene(const std::filesystem::path& manifest) {
  const KeyValueFile file = read_key_values(manifest);
  const auto dir = manifest.parent_path();
  const int n = to_int(file, "views");
  const int width = to_int(file, "width");
  const int height = to_int(file, "height");
  if (n < 2) throw Error(ErrorKind::MalformedFile, "manifest: at least two views required");
  if (width <= 0 || height <= 0)
    throw Error(ErrorKind::MalformedFile, "manifest: image size must be positive");

  const auto path = [&](int i, const std::string& what) {
    return dir / file.at("view." + std::to_string(i) + "." + what);
  };
  const auto check = [&](const Grid& g, const std::string& what) {
    if (g.rows() != height || g.cols() != width)
      throw Error(ErrorKind::MalformedFile, "manifest: " + what + " has the wrong size");
  };

  SceneData scene;
  bool all_gt = true;
  for (int i = 0; i < n; ++i)
    all_gt = all_gt && file.has("view." + std::to_string(i) + ".gt_depth");
  for (int i = 0; i < n; ++i) {
    scene.views.push_back(read_camera(path(i, "camera"), width, height));
    scene.images.push_back(read_ppm(path(i, "image")));
    check(scene.images.back(), "image " + std::to_string(i));
    scene.mono.push_back(read_pfm(path(i, "mono")));
    check(scene.mono.back(), "mono " + std::to_string(i));
    if (all_gt) {
      scene.gt_depths.push_back(read_pfm(path(i, "gt_depth")));
      check(scene.gt_depths.back(), "gt_depth " + std::to_string(i));
      scene.valid.push_back(positive(scene.gt_depths.back()));
    } else {
      scene.valid.push_back(Mask::Constant(height, width, true));
    }
  }
  return scene;
}

SceneData scene_data(const SyntheticScene& scene, const std::vector<Grid>& mono) {
  if (mono.size() != scene.views.size())
    throw Error(ErrorKind::InvalidConfig, "one mono map per view required");
  return {scene.views, scene.images, mono, scene.gt_depths, scene.valid_masks};
}

ViewEstimate estimate_view(const SceneData& scene, int reference, const PipelineConfig& config) {
  const int n = scene.size();
  if (reference < 0 || reference >= n)
    throw Error(ErrorKind::InvalidConfig, "reference view out of range");
  const Camera& ref_cam = scene.views[reference];
  const int H = ref_cam.height();
  const int W = ref_cam.width();
  if (H % 8 || W % 8)
    throw Error(ErrorKind::InvalidConfig,
                context(reference, -1) + ": image size must be divisible by 8");
  const DepthRange range{ref_cam.depth_min(), ref_cam.depth_max()};
  const auto& plan = config.plan;

  ViewEstimate est;
  est.view = reference;

  std::vector<int> sources;
  for (int i = 0; i < n; ++i)
    if (i != reference) sources.push_back(i);

  // Features and their enhancement are computed once at scale 0 and cascaded.
  const SeededWeights weights =
      SeededWeights::generate(config.seed, config.features, plan.counts[0]);
  FeaturePyramid ref_pyr;
  std::vector<FeaturePyramid> src_pyr;
  try {
    ref_pyr = extract_pyramid(scene.images[reference], config.features, weights);
    for (int i : sources)
      src_pyr.push_back(extract_pyramid(scene.images[i], config.features, weights));
    if (config.enable_mono_fusion) {
      const FeatureMap fused = fuse_mono_feature(
          ref_pyr.scales[0], mono_feature(scene.mono[reference], config.features), weights);
      ref_pyr = cascade_delta(ref_pyr, fused, weights);
    }
    std::vector<Cvpe> cvpes;
    if (config.enable_cvpe) {
      const DepthHypotheses h0 = init_hypotheses(range, plan.counts[0], H / 8, W / 8);
      std::vector<double> planes(h0.depths.col(0).data(),
                                 h0.depths.col(0).data() + h0.count());
      const Camera ref0 = ref_cam.scaled(0.125);
      for (std::size_t k = 0; k < sources.size(); ++k)
        cvpes.push_back(build_cvpe(ref_pyr.scales[0], src_pyr[k].scales[0], ref0,
                                   scene.views[sources[k]].scaled(0.125), planes, weights));
    }
    src_pyr = enhance_features(ref_pyr, src_pyr, cvpes, weights, config.features);
  } catch (const Error& e) {
    throw Error(e.kind(), context(reference, -1) + " features: " + e.message());
  }

  const Grid& mono = scene.mono[reference];
  const Mask& valid = scene.valid[reference];
  std::array<double, 4> ce{};
  bool have_ce = scene.has_ground_truth();

  for (int s = 0; s < 4; ++s) {
    try {
      const int scale = 8 >> s;
      const int Hs = H / scale;
      const int Ws = W / scale;
      const Camera ref_s = ref_cam.scaled(1.0 / scale);
      std::vector<Camera> src_s;
      std::vector<FeatureMap> src_feat;
      for (std::size_t k = 0; k < sources.size(); ++k) {
        src_s.push_back(scene.views[sources[k]].scaled(1.0 / scale));
        src_feat.push_back(src_pyr[k].scales[s]);
      }

      StageOutput out;
      out.stage = s;
      Grid prev_depth, prev_conf;
      if (s == 0) {
        out.hypotheses = init_hypotheses(range, plan.counts[0], Hs, Ws);
      } else {
        const StageOutput& prev = est.stages.back();
        prev_depth = resize_bilinear(prev.depth, Hs, Ws);
        prev_conf = resize_bilinear(prev.confidence, Hs, Ws);
        out.hypotheses = refine_hypotheses(prev_depth, prev.hypotheses, plan.counts[s],
                                           plan.interval_multipliers[s], range);
      }
      out.hypotheses.stage = s;

      if (config.enable_dynamic_sampling) {
        const Grid mono_s = resize_bilinear(mono, Hs, Ws);
        const Mask valid_s = resize_mask(valid, Hs, Ws);
        // A mono map without spread (e.g. a fronto-parallel plane) cannot be
        // aligned; that stage then keeps its uniform candidates.
        std::optional<Grid> aligned;
        try {
          if (s == 0) {
            aligned = initial_scale(mono_s, range, &valid_s);
          } else {
            const auto coords = select_confident(prev_conf, config.keep_fraction, &valid_s);
            out.alignment = fit_scale_shift(prev_depth, mono_s, coords);
            aligned = apply_alignment(mono_s, *out.alignment, range);
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::DegenerateFit) throw;
          out.alignment.reset();
        }
        if (aligned) {
          const EdgeMask edges = edge_mask(scene.images[reference], config.lambda, Hs, Ws);
          const Mask mask = edges.mask && valid_s;
          out.replaced_pixels = int(mask.count());
          out.hypotheses = dynamic_replace(out.hypotheses, *aligned, mask);
        }
      }

      const CostVolume cost = build_cost_volume(ref_pyr.scales[s], src_feat, ref_s, src_s,
                                                out.hypotheses, plan.groups[s]);
      const ProbabilityVolume prob = to_probability(regularize(cost, config.regularizer));
      auto [depth, conf] = wta_depth(prob, out.hypotheses);
      out.depth = std::move(depth);
      out.confidence = std::move(conf);
      out.expected = expected_depth(prob, out.hypotheses);
      out.mean_confidence = out.confidence.mean();
      out.mean_entropy = mean_entropy(prob);

      if (scene.has_ground_truth()) {
        const Grid gt_s = nearest_resize(scene.gt_depths[reference], Hs, Ws);
        const Mask valid_s = nearest_resize(valid, Hs, Ws) && gt_s > 0.0;
        if (valid_s.any()) {
          out.cross_entropy = cross_entropy_loss(prob, gt_s, out.hypotheses, valid_s);
          ce[s] = *out.cross_entropy;
        } else {
          have_ce = false;
        }
      }

      if (s == 3) {
        const PixelPairSample pairs = sample_pairs(
            valid, config.rc_pairs, config.seed * 1000003ULL + std::uint64_t(reference), &mono);
        if (pairs.size() > 0) {
          est.relative_consistency = relative_consistency_loss(out.expected, mono, pairs);
          if (have_ce) est.overall_loss = overall_loss(ce, *est.relative_consistency, config.gamma);
        }
      }
      est.stages.push_back(std::move(out));
    } catch (const Error& e) {
      throw Error(e.kind(), context(reference, s) + ": " + e.message());
    }
  }
  return est;
}

std::vector<ViewEstimate> estimate_depths(const SceneData& scene, const PipelineConfig& config) {
  std::vector<ViewEstimate> out(scene.size());
  std::vector<std::exception_ptr> errors(scene.size());
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i; (i = next.fetch_add(1)) < scene.size();) {
      try {
        out[i] = estimate_view(scene, i, config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min(config.threads, std::max(scene.size(), 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  // Report the lowest failing view so the error does not depend on timing.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

PointCloud fuse_estimates(const SceneData& scene, const std::vector<ViewEstimate>& estimates,
                          const PipelineConfig& config) {
  std::vector<Grid> depths, confs;
  for (const auto& e : estimates) {
    depths.push_back(e.final_stage().depth);
    confs.push_back(e.final_stage().confidence);
  }
  return fuse_point_cloud(depths, confs, scene.views, config.fusion, scene.images);
}

PointCloud ground_truth_cloud(const SceneData& scene) {
  PointCloud cloud;
  for (int i = 0; i < int(scene.gt_depths.size()); ++i) {
    const Grid& gt = scene.gt_depths[i];
    for (int v = 0; v < gt.rows(); ++v)
      for (int u = 0; u < gt.cols(); ++u)
        if (scene.valid[i](v, u) && gt(v, u) > 0)
          cloud.points.push_back(
              scene.views[i].backproject(PixelCoord(u, v), gt(v, u)).cast<float>());
  }
  return cloud;
}

Report make_report(const SceneData& scene, const std::vector<ViewEstimate>& estimates,
                   const PointCloud* cloud, const PipelineConfig& config) {
  Report report;
  report.add("views", double(estimates.size()));
  DepthMetrics mean;
  for (const auto& e : estimates) {
    const std::string prefix = "view." + std::to_string(e.view);
    for (const auto& s : e.stages) {
      const std::string sp = prefix + ".stage." + std::to_string(s.stage);
      report.add(sp + ".mean_confidence", s.mean_confidence);
      report.add(sp + ".mean_entropy", s.mean_entropy);
      report.add(sp + ".replaced_pixels", double(s.replaced_pixels));
      if (s.alignment) {
        report.add(sp + ".align_scale", s.alignment->scale);
        report.add(sp + ".align_shift", s.alignment->shift);
      }
      if (s.cross_entropy) report.add(sp + ".cross_entropy", *s.cross_entropy);
    }
    if (e.relative_consistency) report.add(prefix + ".rc_loss", *e.relative_consistency);
    if (e.overall_loss) report.add(prefix + ".overall_loss", *e.overall_loss);
    if (scene.has_ground_truth()) {
      const DepthMetrics m =
          depth_metrics(e.final_stage().depth, scene.gt_depths[e.view], scene.valid[e.view]);
      report.add(prefix + ".depth", m);
      mean.mae += m.mae / double(estimates.size());
      mean.e2 += m.e2 / double(estimates.size());
      mean.e4 += m.e4 / double(estimates.size());
      mean.e8 += m.e8 / double(estimates.size());
    }
  }
  if (scene.has_ground_truth() && !estimates.empty()) report.add("depth", mean);
  if (cloud) {
    report.add("cloud.points", double(cloud->points.size()));
    if (scene.has_ground_truth())
      report.add("cloud", cloud_metrics(*cloud, ground_truth_cloud(scene), config.max_dist));
  }
  return report;
}

PipelineResult run_pipeline(const SceneData& scene, const PipelineConfig& config) {
  validate(config);
  PipelineResult result;
  result.views = estimate_depths(scene, config);
  result.cloud = fuse_estimates(scene, result.views, config);
  result.report = make_report(scene, result.views, &result.cloud, config);
  return result;
}

void write_depth_outputs(const std::vector<ViewEstimate>& estimates,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& e : estimates) {
    const std::string id = std::to_string(e.view);
    write_pfm(dir / ("depth_" + id + ".pfm"), e.final_stage().depth);
    write_pfm(dir / ("confidence_" + id + ".pfm"), e.final_stage().confidence);
  }
}

void write_outputs(const PipelineResult& result, const std::filesystem::path& dir) {
  write_depth_outputs(result.views, dir);
  write_ply(result.cloud, dir / "cloud.ply");
  result.report.write(dir / "report.txt");
}

}  // namespace mgmvs
