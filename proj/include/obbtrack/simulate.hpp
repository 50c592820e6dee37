#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "obbtrack/classes.hpp"
#include "obbtrack/doe.hpp"
#include "obbtrack/frame.hpp"
#include "obbtrack/geometry.hpp"
#include "obbtrack/rng.hpp"

namespace obbtrack::sim {

/// Stochastic detector stand-in. Occlusion acts twice: as a dropout probability and as a
/// multiplier on the position and yaw noise.
struct NoiseModel {
  double pos_sigma = 0.10;                  // m, per axis
  double yaw_sigma = deg2rad(5.0);          // rad
  double flip_prob = 0.2;                   // per frame, symmetric classes only
  std::array<double, 3> dropout_prob{0.02, 0.15, 0.40};     // None, <20%, >40%
  std::array<double, 3> occlusion_sigma_scale{1.0, 1.5, 2.5};
  double fp_rate = 0.1;                     // expected false positives per frame
  std::map<std::string, double> fp_rate_by_class{{"MW", 0.3}, {"SW", 0.3}, {"MSU", 0.05}};
  double fp_extent_jitter = 0.15;           // relative
  double latency = 0.1;                     // s, pose lag at map reconstruction
  std::uint64_t rng_seed = 0;

  /// No corruption at all.
  static NoiseModel null() {
    NoiseModel n;
    n.pos_sigma = 0.0;
    n.yaw_sigma = 0.0;
    n.flip_prob = 0.0;
    n.dropout_prob = {0.0, 0.0, 0.0};
    n.occlusion_sigma_scale = {1.0, 1.0, 1.0};
    n.fp_rate = 0.0;
    n.fp_rate_by_class.clear();
    n.fp_extent_jitter = 0.0;
    n.latency = 0.0;
    return n;
  }

  double fp_rate_for(const std::string& class_id) const {
    auto it = fp_rate_by_class.find(class_id);
    return it == fp_rate_by_class.end() ? fp_rate : it->second;
  }

  void validate() const {
    auto prob = [](double p, const std::string& name) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("noise." + name + " must lie in [0, 1]");
    };
    auto nonneg = [](double v, const std::string& name) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("noise." + name + " must be non-negative");
    };
    nonneg(pos_sigma, "pos_sigma");
    nonneg(yaw_sigma, "yaw_sigma");
    prob(flip_prob, "flip_prob");
    for (double p : dropout_prob) prob(p, "dropout");
    for (double s : occlusion_sigma_scale) nonneg(s, "sigma_scale");
    nonneg(fp_rate, "fp_rate");
    for (const auto& [k, v] : fp_rate_by_class) nonneg(v, "fp_rate." + k);
    nonneg(fp_extent_jitter, "fp_extent_jitter");
    if (fp_extent_jitter >= 1.0) throw ConfigError("noise.fp_extent_jitter must be below 1");
    nonneg(latency, "latency");
  }
};

/// Axis-aligned map-frame rectangle where false positives may appear.
struct SceneBounds {
  double x_min = 1.0;
  double x_max = 6.0;
  double y_min = -3.0;
  double y_max = 3.0;
};

struct SimConfig {
  double duration = 20.0;       // s
  double rate = 10.0;           // Hz
  double object_speed = 0.2;    // m/s for translating objects
  double object_turn_rate = 0.2;  // rad/s for rotating objects
  double object_spacing = 1.5;  // m between the two objects of a two-object layout
  SceneBounds scene{};
  PlanarPose sensor_offset{};

  void validate() const {
    if (!(duration > 0.0) || !(rate > 0.0)) throw ConfigError("sim.duration and sim.rate must be positive");
    if (!(object_speed >= 0.0) || !(object_turn_rate >= 0.0)) throw ConfigError("sim object rates must be >= 0");
    if (!(object_spacing > 0.0)) throw ConfigError("sim.object_spacing must be positive");
    if (!(scene.x_max > scene.x_min) || !(scene.y_max > scene.y_min)) throw ConfigError("sim scene bounds are empty");
  }
};

inline std::size_t frame_count(const SimConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.duration * cfg.rate));
}

/// Robot ego pose at time t: constant-rate heading change plus constant-speed lateral drive
/// along the map y axis (the base is omnidirectional).
inline PlanarPose robot_pose_at(const doe::TrialSpec& trial, double t) {
  return PlanarPose(0.0, trial.robot_linear_speed() * t, trial.robot_angular_speed() * t, t);
}

struct ObjectInit {
  std::int64_t id = 0;
  Vec3 center;
  double yaw = 0.0;
  double direction = 1.0;  // sign of lateral travel for translating objects
};

/// Ground-truth stream for a trial. Objects start `initial_distance` ahead of the robot's
/// start pose; initial yaws are drawn from `seed`. Poses are closed-form functions of time.
inline FrameStream generate_ground_truth(const doe::TrialSpec& trial, const ClassRegistry& classes,
                                         const SimConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const ClassSpec& spec = classes.at(trial.class_id);
  Rng rng(mix_seed(seed, 0x67740000ULL + static_cast<std::uint64_t>(trial.trial_id)));

  std::vector<ObjectInit> objects;
  for (int i = 0; i < trial.num_objects; ++i) {
    const double lateral =
        trial.num_objects == 1 ? 0.0 : cfg.object_spacing * (static_cast<double>(i) - 0.5 * (trial.num_objects - 1));
    objects.push_back({i + 1, {trial.factors.initial_distance, lateral, 0.5 * spec.nominal_extent.z},
                       rng.uniform(-kPi, kPi), i % 2 == 0 ? 1.0 : -1.0});
  }
  const bool translates = doe::object_translates(trial.factors.object_motion);
  const bool rotates = doe::object_rotates(trial.factors.object_motion);

  FrameStream out;
  const std::size_t n = frame_count(cfg);
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / cfg.rate;
    FrameRecord f{t, robot_pose_at(trial, t), {}};
    for (const auto& o : objects) {
      Vec3 c = o.center;
      if (translates) c.y += o.direction * cfg.object_speed * t;
      const double yaw = rotates ? o.yaw + cfg.object_turn_rate * t : o.yaw;
      f.boxes.push_back({o.id, OrientedBox(c, spec.nominal_extent, yaw, spec.class_id, 1.0)});
    }
    out.push_back(std::move(f));
  }
  return out;
}

/// Corrupts a ground-truth stream into sensor-frame detections without identities.
///
/// Per visible object and frame: optional dropout, Gaussian center and yaw noise (scaled by the
/// occlusion level), and for symmetric classes a flip to a random non-identity symmetry
/// hypothesis. Poisson-distributed false positives of the `fp_classes` are scattered inside the
/// scene bounds. Each frame carries the true robot pose at emission time.
inline FrameStream emulate_detector(const FrameStream& gt, const ClassRegistry& classes, const NoiseModel& noise,
                                    doe::Occlusion occlusion, const std::vector<std::string>& fp_classes,
                                    const SimConfig& cfg = {}) {
  noise.validate();
  Rng rng(mix_seed(noise.rng_seed, 0xde7ec7ULL));
  const auto level = static_cast<std::size_t>(occlusion);
  const double scale = noise.occlusion_sigma_scale[level];
  const double dropout = noise.dropout_prob[level];

  FrameStream out;
  out.reserve(gt.size());
  for (const auto& g : gt) {
    FrameRecord d{g.t, g.robot, {}};
    for (const auto& fb : g.boxes) {
      const OrientedBox& truth = fb.box;
      const double u_drop = rng.uniform();
      const double nx = rng.normal();
      const double ny = rng.normal();
      const double nz = rng.normal();
      const double nyaw = rng.normal();
      const double u_flip = rng.uniform();
      const std::uint64_t flip_pick = rng.next();
      const double score = rng.uniform(0.5, 1.0);
      if (u_drop < dropout) continue;

      const double ps = noise.pos_sigma * scale;
      Vec3 c = truth.center() + Vec3{ps * nx, ps * ny, ps * nz};
      double yaw = truth.yaw() + noise.yaw_sigma * scale * nyaw;
      const ClassSpec& spec = classes.at(truth.class_id());
      const std::size_t hyps = hypothesis_count(spec);
      if (hyps > 1 && u_flip < noise.flip_prob) {
        const std::uint64_t k = 1 + flip_pick % (hyps - 1);
        yaw += static_cast<double>(k) * kTwoPi / static_cast<double>(hyps);
      }
      const OrientedBox map_box(c, truth.extent(), yaw, truth.class_id(), score);
      d.boxes.push_back({std::nullopt, transform_to_sensor(map_box, g.robot, cfg.sensor_offset)});
    }

    for (const auto& cls : fp_classes) {
      const ClassSpec& spec = classes.at(cls);
      const std::uint64_t n_fp = rng.poisson(noise.fp_rate_for(cls));
      for (std::uint64_t i = 0; i < n_fp; ++i) {
        const double x = rng.uniform(cfg.scene.x_min, cfg.scene.x_max);
        const double y = rng.uniform(cfg.scene.y_min, cfg.scene.y_max);
        const double yaw = rng.uniform(-kPi, kPi);
        const double j = noise.fp_extent_jitter;
        const Vec3 e{spec.nominal_extent.x * (1.0 + rng.uniform(-j, j)),
                     spec.nominal_extent.y * (1.0 + rng.uniform(-j, j)),
                     spec.nominal_extent.z * (1.0 + rng.uniform(-j, j))};
        const double score = rng.uniform(0.3, 0.8);
        const OrientedBox fp({x, y, 0.5 * e.z}, e, yaw, cls, score);
        d.boxes.push_back({std::nullopt, transform_to_sensor(fp, g.robot, cfg.sensor_offset)});
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// Robot pose at time t, linearly interpolated (shortest-arc in heading) between samples and
/// clamped to the first/last sample outside the covered span.
inline PlanarPose interpolate_pose(const std::vector<PlanarPose>& poses, double t) {
  if (poses.empty()) throw InvalidInput("no robot poses to interpolate");
  if (t <= poses.front().timestamp) return PlanarPose(poses.front().x, poses.front().y, poses.front().heading, t);
  if (t >= poses.back().timestamp) return PlanarPose(poses.back().x, poses.back().y, poses.back().heading, t);
  auto hi = std::upper_bound(poses.begin(), poses.end(), t,
                             [](double v, const PlanarPose& p) { return v < p.timestamp; });
  const PlanarPose& b = *hi;
  const PlanarPose& a = *(hi - 1);
  const double s = (t - a.timestamp) / (b.timestamp - a.timestamp);
  return PlanarPose(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), a.heading + s * wrap_angle(b.heading - a.heading), t);
}

/// Replaces each frame's ego pose by the pose `latency` seconds earlier, so map reconstruction
/// uses a stale pose. Frames earlier than the lag use the first available pose.
inline FrameStream apply_latency(const FrameStream& detections, const std::vector<PlanarPose>& robot_poses,
                                 double latency) {
  if (!(latency >= 0.0) || !std::isfinite(latency)) throw ConfigError("latency must be non-negative");
  if (latency == 0.0) return detections;
  if (robot_poses.empty()) throw ConfigError("latency needs a robot pose track");
  const double span = robot_poses.back().timestamp - robot_poses.front().timestamp;
  if (latency > span) {
    throw ConfigError("latency " + std::to_string(latency) + " s exceeds the pose stream span " +
                      std::to_string(span) + " s");
  }
  FrameStream out = detections;
  for (auto& f : out) {
    const PlanarPose stale = interpolate_pose(robot_poses, f.t - latency);
    f.robot = PlanarPose(stale.x, stale.y, stale.heading, f.t);
  }
  return out;
}

inline std::vector<PlanarPose> robot_track(const FrameStream& stream) {
  std::vector<PlanarPose> out;
  out.reserve(stream.size());
  for (const auto& f : stream) out.push_back(PlanarPose(f.robot.x, f.robot.y, f.robot.heading, f.t));
  return out;
}

/// Detection boxes lifted back into the map frame with each frame's recorded ego pose.
inline FrameStream detections_to_map(const FrameStream& detections, const PlanarPose& sensor_offset = {}) {
  FrameStream out = detections;
  for (auto& f : out) {
    for (auto& b : f.boxes) b.box = transform_to_map(b.box, f.robot, sensor_offset);
  }
  return out;
}

}  // namespace obbtrack::sim
