#include "mgmvs/config.hpp"

#include "mgmvs/error.hpp"
#include "mgmvs/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mgmvs {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

long long to_int(const std::string& s) {
  std::size_t used = 0;
  const long long v = std::stoll(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "off" || s == "no") return false;
  throw std::invalid_argument(s);
}

template <typename T, std::size_t N, typename F>
std::array<T, N> to_array(const std::string& s, F convert) {
  const auto parts = split(s, ',');
  if (parts.size() != N) throw std::invalid_argument(s);
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = static_cast<T>(convert(parts[i]));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename T, std::size_t N>
std::string join(const std::array<T, N>& a) {
  std::string out;
  for (std::size_t i = 0; i < N; ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>)
      out += fmt(a[i]);
    else
      out += std::to_string(a[i]);
  }
  return out;
}

std::vector<FusionTier> to_tiers(const std::string& s) {
  std::vector<FusionTier> tiers;
  for (const auto& t : split(s, ';')) {
    const auto f = split(t, ':');
    if (f.size() != 3) throw std::invalid_argument(s);
    tiers.push_back({int(to_int(f[0])), to_double(f[1]), to_double(f[2])});
  }
  if (tiers.empty()) throw std::invalid_argument(s);
  return tiers;
}

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"stage_plan", [](PipelineConfig& c, const std::string& v) {
         c.plan.counts = to_array<int, 4>(v, to_int);
       }},
      {"interval_multipliers", [](PipelineConfig& c, const std::string& v) {
         c.plan.interval_multipliers = to_array<double, 4>(v, to_double);
       }},
      {"group_plan", [](PipelineConfig& c, const std::string& v) {
         c.plan.groups = to_array<int, 4>(v, to_int);
       }},
      {"channel_plan", [](PipelineConfig& c, const std::string& v) {
         c.features.channels = to_array<int, 4>(v, to_int);
       }},
      {"lambda", [](PipelineConfig& c, const std::string& v) { c.lambda = to_double(v); }},
      {"keep_fraction",
       [](PipelineConfig& c, const std::string& v) { c.keep_fraction = to_double(v); }},
      {"gamma", [](PipelineConfig& c, const std::string& v) { c.gamma = to_double(v); }},
      {"rc_pairs", [](PipelineConfig& c, const std::string& v) { c.rc_pairs = int(to_int(v)); }},
      {"seed", [](PipelineConfig& c, const std::string& v) {
         c.seed = static_cast<std::uint64_t>(to_int(v));
       }},
      {"window", [](PipelineConfig& c, const std::string& v) {
         c.features.window = int(to_int(v));
       }},
      {"mono_gain",
       [](PipelineConfig& c, const std::string& v) { c.features.mono_gain = to_double(v); }},
      {"attention_gain", [](PipelineConfig& c, const std::string& v) {
         c.features.attention_gain = to_double(v);
       }},
      {"pe_on_values",
       [](PipelineConfig& c, const std::string& v) { c.features.pe_on_values = to_bool(v); }},
      {"smoothing_radii", [](PipelineConfig& c, const std::string& v) {
         const auto r = to_array<int, 3>(v, to_int);
         c.regularizer.radius_depth = r[0];
         c.regularizer.radius_height = r[1];
         c.regularizer.radius_width = r[2];
       }},
      {"score_gain",
       [](PipelineConfig& c, const std::string& v) { c.regularizer.gain = to_double(v); }},
      {"fusion_tiers",
       [](PipelineConfig& c, const std::string& v) { c.fusion.tiers = to_tiers(v); }},
      {"conf_min", [](PipelineConfig& c, const std::string& v) { c.fusion.conf_min = to_double(v); }},
      {"max_dist", [](PipelineConfig& c, const std::string& v) { c.max_dist = to_double(v); }},
      {"enable_cvpe", [](PipelineConfig& c, const std::string& v) { c.enable_cvpe = to_bool(v); }},
      {"enable_dynamic_sampling", [](PipelineConfig& c, const std::string& v) {
         c.enable_dynamic_sampling = to_bool(v);
       }},
      {"enable_mono_fusion",
       [](PipelineConfig& c, const std::string& v) { c.enable_mono_fusion = to_bool(v); }},
      {"threads", [](PipelineConfig& c, const std::string& v) { c.threads = int(to_int(v)); }},
      {"manifest", [](PipelineConfig& c, const std::string& v) { c.manifest = v; }},
      {"out_dir", [](PipelineConfig& c, const std::string& v) { c.out_dir = v; }},
  };
  return table;
}

void apply(PipelineConfig& config, const std::string& key, const std::string& value,
           const std::string& where) {
  const auto it = setters().find(key);
  if (it == setters().end())
    throw Error(ErrorKind::Config, where + ": unknown key '" + key + "'");
  try {
    it->second(config, value);
  } catch (const std::exception&) {
    throw Error(ErrorKind::Config,
                where + ": invalid value '" + value + "' for key '" + key + "'");
  }
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::Config, "key '" + key + "': " + why);
}

}  // namespace

PipelineConfig parse_config(std::istream& in, const ConfigOverrides& overrides) {
  PipelineConfig config;
  const KeyValueFile file = parse_key_values(in);
  // Apply in line order so error messages point at the first bad line.
  std::vector<std::pair<int, std::string>> order;
  for (const auto& [key, entry] : file.entries) order.emplace_back(entry.line, key);
  std::sort(order.begin(), order.end());
  for (const auto& [line, key] : order)
    apply(config, key, file.entries.at(key).value, "line " + std::to_string(line));
  for (const auto& [key, value] : overrides) apply(config, key, value, "flag");
  validate(config);
  return config;
}

PipelineConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return parse_config(in, overrides);
}

void validate(const PipelineConfig& c) {
  for (int s = 0; s < 4; ++s) {
    if (c.plan.counts[s] < 2) bad("stage_plan", "each stage needs at least 2 hypotheses");
    if (!(c.plan.interval_multipliers[s] > 0)) bad("interval_multipliers", "must be positive");
    if (c.plan.groups[s] < 1) bad("group_plan", "must be positive");
    if (c.features.channels[s] < 1) bad("channel_plan", "must be positive");
    if (c.features.channels[s] % c.plan.groups[s] != 0)
      bad("group_plan", "channels of stage " + std::to_string(s) + " not divisible by groups");
  }
  if (!(c.lambda > 0 && c.lambda < 1)) bad("lambda", "must be in (0,1)");
  if (!(c.keep_fraction > 0 && c.keep_fraction <= 1)) bad("keep_fraction", "must be in (0,1]");
  if (!(c.gamma >= 0)) bad("gamma", "must be non-negative");
  if (c.rc_pairs < 0) bad("rc_pairs", "must be non-negative");
  if (c.features.window < 1) bad("window", "must be positive");
  if (c.regularizer.radius_depth < 0 || c.regularizer.radius_height < 0 ||
      c.regularizer.radius_width < 0)
    bad("smoothing_radii", "must be non-negative");
  if (!(c.regularizer.gain > 0)) bad("score_gain", "must be positive");
  for (std::size_t t = 0; t < c.fusion.tiers.size(); ++t) {
    const auto& tier = c.fusion.tiers[t];
    if (tier.min_views < 1 || !(tier.max_pixel_error > 0) || !(tier.max_relative_error > 0))
      bad("fusion_tiers", "tiers need k >= 1 and positive thresholds");
    if (t > 0 && tier.min_views < c.fusion.tiers[t - 1].min_views)
      bad("fusion_tiers", "tiers must be sorted by view count");
  }
  if (!(c.fusion.conf_min >= 0 && c.fusion.conf_min <= 1)) bad("conf_min", "must be in [0,1]");
  if (!(c.max_dist > 0)) bad("max_dist", "must be positive");
  if (c.threads < 1) bad("threads", "must be at least 1");
}

std::vector<std::pair<std::string, std::string>> config_entries(const PipelineConfig& c) {
  std::string tiers;
  for (const auto& t : c.fusion.tiers) {
    if (!tiers.empty()) tiers += ';';
    tiers += std::to_string(t.min_views) + ':' + fmt(t.max_pixel_error) + ':' +
             fmt(t.max_relative_error);
  }
  return {
      {"stage_plan", join(c.plan.counts)},
      {"interval_multipliers", join(c.plan.interval_multipliers)},
      {"group_plan", join(c.plan.groups)},
      {"channel_plan", join(c.features.channels)},
      {"lambda", fmt(c.lambda)},
      {"keep_fraction", fmt(c.keep_fraction)},
      {"gamma", fmt(c.gamma)},
      {"rc_pairs", std::to_string(c.rc_pairs)},
      {"seed", std::to_string(c.seed)},
      {"window", std::to_string(c.features.window)},
      {"mono_gain", fmt(c.features.mono_gain)},
      {"attention_gain", fmt(c.features.attention_gain)},
      {"pe_on_values", c.features.pe_on_values ? "true" : "false"},
      {"smoothing_radii", std::to_string(c.regularizer.radius_depth) + ',' +
                              std::to_string(c.regularizer.radius_height) + ',' +
                              std::to_string(c.regularizer.radius_width)},
      {"score_gain", fmt(c.regularizer.gain)},
      {"fusion_tiers", tiers},
      {"conf_min", fmt(c.fusion.conf_min)},
      {"max_dist", fmt(c.max_dist)},
      {"enable_cvpe", c.enable_cvpe ? "true" : "false"},
      {"enable_dynamic_sampling", c.enable_dynamic_sampling ? "true" : "false"},
      {"enable_mono_fusion", c.enable_mono_fusion ? "true" : "false"},
      {"threads", std::to_string(c.threads)},
      {"manifest", c.manifest.string()},
      {"out_dir", c.out_dir.string()},
  };
}

}  // namespace mgmvs
