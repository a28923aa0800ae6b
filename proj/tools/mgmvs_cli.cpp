#include "mgmvs/config.hpp"
#include "mgmvs/error.hpp"
#include "mgmvs/evaluation.hpp"
#include "mgmvs/fusion.hpp"
#include "mgmvs/io.hpp"
#include "mgmvs/pipeline.hpp"
#include "mgmvs/point_cloud.hpp"
#include "mgmvs/synth.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

using namespace mgmvs;

namespace {

struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::string stage_plan, interval_multipliers, group_plan;
  std::optional<double> lambda, gamma, keep_fraction, conf_min, max_dist;
  std::optional<long long> seed;
  std::optional<int> threads;
  std::string manifest, out_dir;
  bool no_cvpe = false, no_dynamic = false, no_mono_fusion = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key=value configuration file");
    app->add_option("--set", sets, "Override any config key (key=value)");
    app->add_option("--manifest", manifest, "Scene manifest");
    app->add_option("--out-dir", out_dir, "Output directory");
    app->add_option("--stage-plan", stage_plan, "Hypotheses per stage, e.g. 8,8,4,4");
    app->add_option("--interval-multipliers", interval_multipliers, "e.g. 0.5,0.5,0.5,0.5");
    app->add_option("--group-plan", group_plan, "Correlation groups per stage");
    app->add_option("--lambda", lambda, "Edge mask threshold");
    app->add_option("--gamma", gamma, "Relative consistency loss weight");
    app->add_option("--keep-fraction", keep_fraction, "Confident fraction used for alignment");
    app->add_option("--conf-min", conf_min, "Minimum confidence for fusion");
    app->add_option("--max-dist", max_dist, "Outlier distance for cloud metrics (mm)");
    app->add_option("--seed", seed, "Seed for weights and pair sampling");
    app->add_option("--threads", threads, "Worker threads (views in parallel)");
    app->add_flag("--no-cvpe", no_cvpe, "Disable cross-view position encoding");
    app->add_flag("--no-dynamic-sampling", no_dynamic, "Disable mono-guided candidates");
    app->add_flag("--no-mono-fusion", no_mono_fusion, "Disable mono feature fusion");
  }

  PipelineConfig resolve() const {
    ConfigOverrides o;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorKind::Config, "flag: --set expects key=value, got '" + s + "'");
      o.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    const auto num = [](double v) {
      std::ostringstream s;
      s.precision(17);
      s << v;
      return s.str();
    };
    if (!stage_plan.empty()) o.emplace_back("stage_plan", stage_plan);
    if (!interval_multipliers.empty())
      o.emplace_back("interval_multipliers", interval_multipliers);
    if (!group_plan.empty()) o.emplace_back("group_plan", group_plan);
    if (lambda) o.emplace_back("lambda", num(*lambda));
    if (gamma) o.emplace_back("gamma", num(*gamma));
    if (keep_fraction) o.emplace_back("keep_fraction", num(*keep_fraction));
    if (conf_min) o.emplace_back("conf_min", num(*conf_min));
    if (max_dist) o.emplace_back("max_dist", num(*max_dist));
    if (seed) o.emplace_back("seed", std::to_string(*seed));
    if (threads) o.emplace_back("threads", std::to_string(*threads));
    if (!manifest.empty()) o.emplace_back("manifest", manifest);
    if (!out_dir.empty()) o.emplace_back("out_dir", out_dir);
    if (no_cvpe) o.emplace_back("enable_cvpe", "false");
    if (no_dynamic) o.emplace_back("enable_dynamic_sampling", "false");
    if (no_mono_fusion) o.emplace_back("enable_mono_fusion", "false");

    PipelineConfig config;
    if (config_file.empty()) {
      std::istringstream empty;
      config = parse_config(empty, o);
    } else {
      config = parse_config(std::filesystem::path(config_file), o);
    }
    if (config.manifest.empty())
      throw Error(ErrorKind::Config, "key 'manifest': no scene manifest given");
    return config;
  }
};

std::vector<ViewEstimate> load_estimates(const SceneData& scene,
                                         const std::filesystem::path& dir) {
  std::vector<ViewEstimate> out;
  for (int i = 0; i < scene.size(); ++i) {
    ViewEstimate e;
    e.view = i;
    StageOutput s;
    s.stage = 3;
    s.depth = read_pfm(dir / ("depth_" + std::to_string(i) + ".pfm"));
    s.confidence = read_pfm(dir / ("confidence_" + std::to_string(i) + ".pfm"));
    e.stages.push_back(std::move(s));
    out.push_back(std::move(e));
  }
  return out;
}

Report evaluation_report(const SceneData& scene, const std::vector<ViewEstimate>& estimates,
                         const PointCloud* cloud, double max_dist) {
  if (!scene.has_ground_truth())
    throw Error(ErrorKind::MalformedFile, "manifest lists no ground-truth depth");
  Report report;
  for (const auto& e : estimates)
    report.add("view." + std::to_string(e.view) + ".depth",
               depth_metrics(e.final_stage().depth, scene.gt_depths[e.view],
                             scene.valid[e.view]));
  if (cloud) {
    report.add("cloud.points", double(cloud->points.size()));
    report.add("cloud", cloud_metrics(*cloud, ground_truth_cloud(scene), max_dist));
  }
  return report;
}

void emit(const Report& report, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  report.write(path);
  report.write(std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocular-prior multi-view stereo on synthetic or file scenes"};
  app.require_subcommand(1);

  SceneConfig scene_config;
  MonoOracleParams mono_params;
  std::string kind = "plane", rig = "converging", synth_dir = "scene";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene and its manifest");
  synth->add_option("--kind", kind, "plane, step or sphere")->capture_default_str();
  synth->add_option("--out-dir", synth_dir, "Output directory")->capture_default_str();
  synth->add_option("--rig", rig, "converging or rectified")->capture_default_str();
  synth->add_option("--baseline", scene_config.baseline, "Source offset (mm)")
      ->capture_default_str();
  synth->add_option("--views", scene_config.n_views)->capture_default_str();
  synth->add_option("--width", scene_config.width)->capture_default_str();
  synth->add_option("--height", scene_config.height)->capture_default_str();
  synth->add_option("--texture-seed", scene_config.texture_seed)->capture_default_str();
  synth->add_option("--mono-noise", mono_params.noise_sigma)->capture_default_str();
  synth->add_option("--mono-seed", mono_params.seed)->capture_default_str();

  ConfigFlags depth_flags, fuse_flags, eval_flags, all_flags;
  std::string fuse_depth_dir, eval_depth_dir, eval_cloud;
  auto* depth = app.add_subcommand("depth", "Estimate per-view depth and confidence maps");
  depth_flags.attach(depth);
  auto* fuse = app.add_subcommand("fuse", "Fuse depth maps into a point cloud");
  fuse_flags.attach(fuse);
  fuse->add_option("--depth-dir", fuse_depth_dir, "Directory holding depth_N/confidence_N")
      ->required();
  auto* eval = app.add_subcommand("eval", "Score depth maps and a cloud against ground truth");
  eval_flags.attach(eval);
  eval->add_option("--depth-dir", eval_depth_dir, "Directory holding depth_N.pfm")->required();
  eval->add_option("--cloud", eval_cloud, "PLY cloud to score");
  auto* all = app.add_subcommand("all", "Depth, fusion and evaluation in one run");
  all_flags.attach(all);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      scene_config.kind = parse_scene_kind(kind);
      scene_config.rig = parse_rig(rig);
      const SyntheticScene scene = generate_scene(scene_config);
      std::vector<Grid> mono;
      for (std::size_t i = 0; i < scene.views.size(); ++i) {
        MonoOracleParams p = mono_params;
        p.seed += i;
        mono.push_back(make_mono_depth(scene.gt_depths[i], p, &scene.valid_masks[i]));
      }
      std::cout << write_scene(scene, mono, synth_dir).string() << '\n';
    } else if (depth->parsed()) {
      const PipelineConfig config = depth_flags.resolve();
      const SceneData scene = load_scene(config.manifest);
      const auto estimates = estimate_depths(scene, config);
      write_depth_outputs(estimates, config.out_dir);
      emit(make_report(scene, estimates, nullptr, config), config.out_dir / "report.txt");
    } else if (fuse->parsed()) {
      const PipelineConfig config = fuse_flags.resolve();
      const SceneData scene = load_scene(config.manifest);
      const PointCloud cloud =
          fuse_estimates(scene, load_estimates(scene, fuse_depth_dir), config);
      std::filesystem::create_directories(config.out_dir);
      write_ply(cloud, config.out_dir / "cloud.ply");
      std::cout << "points=" << cloud.points.size() << '\n';
    } else if (eval->parsed()) {
      const PipelineConfig config = eval_flags.resolve();
      const SceneData scene = load_scene(config.manifest);
      std::optional<PointCloud> cloud;
      if (!eval_cloud.empty()) cloud = read_ply(eval_cloud);
      emit(evaluation_report(scene, load_estimates(scene, eval_depth_dir),
                             cloud ? &*cloud : nullptr, config.max_dist),
           config.out_dir / "eval.txt");
    } else if (all->parsed()) {
      const PipelineConfig config = all_flags.resolve();
      const PipelineResult result = run_pipeline(load_scene(config.manifest), config);
      write_outputs(result, config.out_dir);
      result.report.write(std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
