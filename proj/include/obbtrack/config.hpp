#pragma once

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "obbtrack/classes.hpp"
#include "obbtrack/error.hpp"
#include "obbtrack/metrics.hpp"
#include "obbtrack/simulate.hpp"
#include "obbtrack/tracker.hpp"

namespace obbtrack {

inline constexpr const char* kConfigEnvVar = "OBBTRACK_CONFIG";

/// Everything a run needs besides the trial and the seed.
struct RunConfig {
  TrackerConfig tracker;
  sim::NoiseModel noise;
  sim::SimConfig sim;
  ClassRegistry classes = default_class_registry();
  bool alpha_sweep = false;
  double iou_threshold = kDefaultIouThreshold;
  std::string output_dir = ".";

  void validate() const {
    tracker.validate();
    noise.validate();
    sim.validate();
    if (!(iou_threshold >= 0.0 && iou_threshold < 1.0)) throw ConfigError("metrics.iou_threshold must lie in [0, 1)");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& text, std::size_t line, const std::string& key) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) throw ParseError(line, key, "expected a number, got '" + text + "'");
  return v;
}

inline long long parse_int(const std::string& text, std::size_t line, const std::string& key) {
  long long v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(line, key, "expected an integer, got '" + text + "'");
  return v;
}

inline bool parse_bool(const std::string& text, std::size_t line, const std::string& key) {
  if (text == "true" || text == "1" || text == "on") return true;
  if (text == "false" || text == "0" || text == "off") return false;
  throw ParseError(line, key, "expected true or false, got '" + text + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, std::size_t, const std::string&)>;

template <typename F>
Setter number(F assign) {
  return [assign](RunConfig& c, const std::string& v, std::size_t line, const std::string& key) {
    assign(c, parse_double(v, line, key));
  };
}

template <typename F>
Setter integer(F assign) {
  return [assign](RunConfig& c, const std::string& v, std::size_t line, const std::string& key) {
    const long long n = parse_int(v, line, key);
    if (n < 0) throw ParseError(line, key, "must not be negative");
    assign(c, n);
  };
}

inline const std::map<std::string, Setter>& fixed_keys() {
  static const std::map<std::string, Setter> keys = [] {
    std::map<std::string, Setter> k;
    // tracker
    k["tracker.move_pos_threshold"] = number([](RunConfig& c, double v) { c.tracker.move_pos_threshold = v; });
    k["tracker.move_yaw_threshold_deg"] =
        number([](RunConfig& c, double v) { c.tracker.move_yaw_threshold = deg2rad(v); });
    k["tracker.confirm_count"] = integer([](RunConfig& c, long long v) { c.tracker.confirm_count = static_cast<int>(v); });
    k["tracker.confirm_window"] = number([](RunConfig& c, double v) { c.tracker.confirm_window = v; });
    k["tracker.history_capacity"] =
        integer([](RunConfig& c, long long v) { c.tracker.history_capacity = static_cast<std::size_t>(v); });
    k["tracker.prune_after_tentative"] = number([](RunConfig& c, double v) { c.tracker.prune_after_tentative = v; });
    k["tracker.prune_after_confirmed"] = number([](RunConfig& c, double v) { c.tracker.prune_after_confirmed = v; });
    k["tracker.stationary_reentry_frames"] =
        integer([](RunConfig& c, long long v) { c.tracker.stationary_reentry_frames = static_cast<int>(v); });
    k["tracker.orientation_outlier_threshold_deg"] =
        number([](RunConfig& c, double v) { c.tracker.orientation_outlier_threshold = deg2rad(v); });
    k["tracker.orientation_outlier_frames"] =
        integer([](RunConfig& c, long long v) { c.tracker.orientation_outlier_frames = static_cast<int>(v); });
    k["tracker.gate_scale"] = number([](RunConfig& c, double v) { c.tracker.gate_scale = v; });
    k["tracker.motion_confidence"] = number([](RunConfig& c, double v) { c.tracker.motion_confidence = v; });
    // sensor mounting, shared by the simulator and the tracker
    k["sensor.offset_x"] = number([](RunConfig& c, double v) {
      c.tracker.sensor_offset = PlanarPose(v, c.tracker.sensor_offset.y, c.tracker.sensor_offset.heading);
      c.sim.sensor_offset = c.tracker.sensor_offset;
    });
    k["sensor.offset_y"] = number([](RunConfig& c, double v) {
      c.tracker.sensor_offset = PlanarPose(c.tracker.sensor_offset.x, v, c.tracker.sensor_offset.heading);
      c.sim.sensor_offset = c.tracker.sensor_offset;
    });
    k["sensor.offset_heading_deg"] = number([](RunConfig& c, double v) {
      c.tracker.sensor_offset = PlanarPose(c.tracker.sensor_offset.x, c.tracker.sensor_offset.y, deg2rad(v));
      c.sim.sensor_offset = c.tracker.sensor_offset;
    });
    // noise
    k["noise.pos_sigma"] = number([](RunConfig& c, double v) { c.noise.pos_sigma = v; });
    k["noise.yaw_sigma_deg"] = number([](RunConfig& c, double v) { c.noise.yaw_sigma = deg2rad(v); });
    k["noise.flip_prob"] = number([](RunConfig& c, double v) { c.noise.flip_prob = v; });
    k["noise.dropout.none"] = number([](RunConfig& c, double v) { c.noise.dropout_prob[0] = v; });
    k["noise.dropout.lt20"] = number([](RunConfig& c, double v) { c.noise.dropout_prob[1] = v; });
    k["noise.dropout.gt40"] = number([](RunConfig& c, double v) { c.noise.dropout_prob[2] = v; });
    k["noise.sigma_scale.none"] = number([](RunConfig& c, double v) { c.noise.occlusion_sigma_scale[0] = v; });
    k["noise.sigma_scale.lt20"] = number([](RunConfig& c, double v) { c.noise.occlusion_sigma_scale[1] = v; });
    k["noise.sigma_scale.gt40"] = number([](RunConfig& c, double v) { c.noise.occlusion_sigma_scale[2] = v; });
    k["noise.fp_rate"] = number([](RunConfig& c, double v) { c.noise.fp_rate = v; });
    k["noise.fp_extent_jitter"] = number([](RunConfig& c, double v) { c.noise.fp_extent_jitter = v; });
    k["noise.latency"] = number([](RunConfig& c, double v) { c.noise.latency = v; });
    k["noise.rng_seed"] = integer([](RunConfig& c, long long v) { c.noise.rng_seed = static_cast<std::uint64_t>(v); });
    // simulation
    k["sim.duration"] = number([](RunConfig& c, double v) { c.sim.duration = v; });
    k["sim.rate"] = number([](RunConfig& c, double v) { c.sim.rate = v; });
    k["sim.object_speed"] = number([](RunConfig& c, double v) { c.sim.object_speed = v; });
    k["sim.object_turn_rate"] = number([](RunConfig& c, double v) { c.sim.object_turn_rate = v; });
    k["sim.object_spacing"] = number([](RunConfig& c, double v) { c.sim.object_spacing = v; });
    k["sim.scene.x_min"] = number([](RunConfig& c, double v) { c.sim.scene.x_min = v; });
    k["sim.scene.x_max"] = number([](RunConfig& c, double v) { c.sim.scene.x_max = v; });
    k["sim.scene.y_min"] = number([](RunConfig& c, double v) { c.sim.scene.y_min = v; });
    k["sim.scene.y_max"] = number([](RunConfig& c, double v) { c.sim.scene.y_max = v; });
    // metrics and output
    k["metrics.alpha_sweep"] = [](RunConfig& c, const std::string& v, std::size_t line, const std::string& key) {
      c.alpha_sweep = parse_bool(v, line, key);
    };
    k["metrics.iou_threshold"] = number([](RunConfig& c, double v) { c.iou_threshold = v; });
    k["output.dir"] = [](RunConfig& c, const std::string& v, std::size_t, const std::string&) { c.output_dir = v; };
    return k;
  }();
  return keys;
}

/// Keys with a class id in the middle: noise.fp_rate.<ID> and class.<ID>.<field>.
inline bool apply_class_key(RunConfig& c, const std::string& key, const std::string& value, std::size_t line) {
  const std::string fp_prefix = "noise.fp_rate.";
  if (key.rfind(fp_prefix, 0) == 0) {
    const std::string cls = key.substr(fp_prefix.size());
    if (cls.empty()) throw ParseError(line, key, "missing class id");
    const double v = parse_double(value, line, key);
    if (v < 0.0) throw ParseError(line, key, "must not be negative");
    c.noise.fp_rate_by_class[cls] = v;
    return true;
  }
  if (key.rfind("class.", 0) != 0) return false;
  const auto dot = key.rfind('.');
  const std::string cls = key.substr(6, dot - 6);
  const std::string field = key.substr(dot + 1);
  if (cls.empty() || dot <= 6) throw ParseError(line, key, "expected class.<ID>.<field>");
  if (!c.classes.contains(cls)) c.classes.add({cls, {1.0, 1.0, 1.0}, 0});
  ClassSpec spec = c.classes.at(cls);
  if (field == "length") {
    spec.nominal_extent.x = parse_double(value, line, key);
  } else if (field == "width") {
    spec.nominal_extent.y = parse_double(value, line, key);
  } else if (field == "height") {
    spec.nominal_extent.z = parse_double(value, line, key);
  } else if (field == "symmetry_planes") {
    spec.symmetry_planes = static_cast<int>(parse_int(value, line, key));
  } else {
    throw ParseError(line, key, "unknown class field '" + field + "'");
  }
  try {
    c.classes.add(spec);
  } catch (const ConfigError& e) {
    throw ParseError(line, key, e.what());
  }
  return true;
}

}  // namespace detail

/// Applies `key = value` lines on top of `base`. `#` starts a comment. Unknown keys are errors.
inline RunConfig parse_config(std::istream& is, RunConfig base = {}) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (const auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    text = detail::trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(line, "", "expected 'key = value'");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    if (key.empty()) throw ParseError(line, "", "empty key");
    if (value.empty()) throw ParseError(line, key, "empty value");
    const auto& keys = detail::fixed_keys();
    if (auto it = keys.find(key); it != keys.end()) {
      it->second(base, value, line, key);
    } else if (!detail::apply_class_key(base, key, value, line)) {
      throw ParseError(line, key, "unknown configuration key");
    }
  }
  try {
    base.validate();
  } catch (const ConfigError& e) {
    throw ParseError(line, "", e.what());
  }
  return base;
}

inline RunConfig parse_config_string(const std::string& text, RunConfig base = {}) {
  std::istringstream is(text);
  return parse_config(is, std::move(base));
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  return parse_config(in, std::move(base));
}

/// Explicit path wins; otherwise the environment variable; otherwise built-in defaults.
inline RunConfig resolve_config(const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_config_file(explicit_path);
  if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') return load_config_file(env);
  return RunConfig{};
}

}  // namespace obbtrack
