#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "obbtrack/association.hpp"
#include "obbtrack/classes.hpp"
#include "obbtrack/frame.hpp"
#include "obbtrack/geometry.hpp"

namespace obbtrack {

enum class Lifecycle { Tentative, Confirmed, Lost };
enum class MotionState { Stationary, Moving };

inline const char* to_string(Lifecycle l) {
  switch (l) {
    case Lifecycle::Tentative: return "tentative";
    case Lifecycle::Confirmed: return "confirmed";
    case Lifecycle::Lost: return "lost";
  }
  return "?";
}

inline const char* to_string(MotionState m) { return m == MotionState::Moving ? "moving" : "stationary"; }

struct TrackerConfig {
  double move_pos_threshold = 0.05;                     // m between consecutive poses
  double move_yaw_threshold = deg2rad(2.5);             // rad between consecutive poses
  int confirm_count = 3;
  double confirm_window = 2.0;                          // s
  std::size_t history_capacity = 20;
  double prune_after_tentative = 3.0;                   // s without a match
  double prune_after_confirmed = 5.0;
  int stationary_reentry_frames = 5;
  double orientation_outlier_threshold = deg2rad(45.0);
  int orientation_outlier_frames = 3;
  double gate_scale = 1.0;
  double motion_confidence = 2.0;                       // standard errors subtracted from the fitted step
  PlanarPose sensor_offset{};

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("tracker.") + name + " must be positive");
    };
    positive(move_pos_threshold, "move_pos_threshold");
    positive(move_yaw_threshold, "move_yaw_threshold");
    positive(confirm_window, "confirm_window");
    positive(prune_after_tentative, "prune_after_tentative");
    positive(prune_after_confirmed, "prune_after_confirmed");
    positive(orientation_outlier_threshold, "orientation_outlier_threshold");
    positive(gate_scale, "gate_scale");
    if (!(motion_confidence >= 0.0) || !std::isfinite(motion_confidence)) {
      throw ConfigError("tracker.motion_confidence must be non-negative");
    }
    if (confirm_count < 1) throw ConfigError("tracker.confirm_count must be at least 1");
    if (history_capacity < 1) throw ConfigError("tracker.history_capacity must be at least 1");
    if (stationary_reentry_frames < 1) throw ConfigError("tracker.stationary_reentry_frames must be at least 1");
    if (orientation_outlier_frames < 1) throw ConfigError("tracker.orientation_outlier_frames must be at least 1");
    if (!sensor_offset.finite()) throw ConfigError("tracker.sensor_offset must be finite");
  }
};

struct Observation {
  double t = 0.0;
  OrientedBox box;  // map frame, yaw as detected
};

/// One entry of the orientation history. `offset` counts symmetry steps: resolved = raw + offset * step.
struct OrientationSample {
  double t = 0.0;
  double raw_yaw = 0.0;
  double resolved_yaw = 0.0;
  int offset = 0;
};

struct Tracklet {
  TrackletId id = 0;
  std::string class_id;
  std::deque<Observation> history;
  std::deque<OrientationSample> orientation;
  Lifecycle lifecycle = Lifecycle::Tentative;
  MotionState motion_state = MotionState::Stationary;
  OrientedBox output_pose;
  std::deque<double> match_timestamps;
  int miss_count = 0;
  int quiet_frames = 0;
  int outlier_streak = 0;
  std::vector<int> symmetry_votes;  // lifetime count per symmetry offset, relative to the current anchor

  double last_match() const {
    return match_timestamps.empty() ? -std::numeric_limits<double>::infinity() : match_timestamps.back();
  }
};

struct SnapshotEntry {
  TrackletId id = 0;
  std::string class_id;
  Lifecycle lifecycle = Lifecycle::Tentative;
  MotionState motion_state = MotionState::Stationary;
  OrientedBox output_pose;
};

struct TrackerSnapshot {
  double timestamp = 0.0;
  std::vector<SnapshotEntry> entries;  // ascending id
};

// ---------------------------------------------------------------------------
// Prediction / stabilization
// ---------------------------------------------------------------------------

inline MotionState detect_motion(const OrientedBox& prev, const OrientedBox& curr, const TrackerConfig& config) {
  const bool moved = center_distance(prev, curr) > config.move_pos_threshold;
  const bool turned = yaw_difference(prev.yaw(), curr.yaw()) > config.move_yaw_threshold;
  return (moved || turned) ? MotionState::Moving : MotionState::Stationary;
}

/// Symmetry hypothesis of `yaw` closest to `reference`. Returns (resolved yaw, step offset).
inline std::pair<double, int> resolve_symmetry(double yaw, double reference, const ClassSpec& spec) {
  const auto hyps = symmetry_hypotheses(yaw, spec);
  std::size_t best = 0;
  double best_diff = yaw_difference(hyps[0], reference);
  for (std::size_t k = 1; k < hyps.size(); ++k) {
    const double d = yaw_difference(hyps[k], reference);
    if (d < best_diff) {
      best = k;
      best_diff = d;
    }
  }
  return {hyps[best], static_cast<int>(best)};
}

namespace detail {

/// Least-squares line through (t, v) evaluated at two times. The slope is shrunk toward zero
/// by `confidence` standard errors, so noise alone rarely produces an apparent step.
inline std::pair<double, double> linear_trend(std::span<const double> t, std::span<const double> v, double t_prev,
                                              double t_curr, double confidence = 0.0) {
  const std::size_t n = t.size();
  double tm = 0.0;
  double vm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tm += t[i];
    vm += v[i];
  }
  tm /= static_cast<double>(n);
  vm /= static_cast<double>(n);
  double stt = 0.0;
  double stv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    stv += (t[i] - tm) * (v[i] - vm);
  }
  double slope = stt > 0.0 ? stv / stt : 0.0;
  if (confidence > 0.0) {
    if (n < 3) {
      slope = 0.0;
    } else {
      double ssr = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = v[i] - (vm + slope * (t[i] - tm));
        ssr += r * r;
      }
      const double se = std::sqrt(ssr / static_cast<double>(n - 2) / stt);
      const double mag = std::max(0.0, std::abs(slope) - confidence * se);
      slope = std::copysign(mag, slope);
    }
  }
  return {vm + slope * (t_prev - tm), vm + slope * (t_curr - tm)};
}

/// Poses at the last two observation times on the least-squares trajectory through the
/// history. Position and (unwrapped, symmetry-resolved) yaw are fitted independently.
inline std::optional<std::pair<OrientedBox, OrientedBox>> trend_pair(const Tracklet& track, double confidence = 0.0) {
  const auto& h = track.history;
  if (h.size() < 2) return std::nullopt;
  const double t_prev = h[h.size() - 2].t;
  const double t_curr = h.back().t;

  std::vector<double> ts, xs, ys, zs;
  for (const auto& o : h) {
    ts.push_back(o.t);
    xs.push_back(o.box.center().x);
    ys.push_back(o.box.center().y);
    zs.push_back(o.box.center().z);
  }
  const auto [x0, x1] = linear_trend(ts, xs, t_prev, t_curr, confidence);
  const auto [y0, y1] = linear_trend(ts, ys, t_prev, t_curr, confidence);
  const auto [z0, z1] = linear_trend(ts, zs, t_prev, t_curr, confidence);

  double yaw0 = track.orientation.back().resolved_yaw;
  double yaw1 = yaw0;
  if (track.orientation.size() >= 2) {
    std::vector<double> yt, yv;
    double unwrapped = track.orientation.front().resolved_yaw;
    for (std::size_t i = 0; i < track.orientation.size(); ++i) {
      const auto& s = track.orientation[i];
      if (i > 0) unwrapped += wrap_angle(s.resolved_yaw - track.orientation[i - 1].resolved_yaw);
      yt.push_back(s.t);
      yv.push_back(unwrapped);
    }
    std::tie(yaw0, yaw1) = linear_trend(yt, yv, t_prev, t_curr, confidence);
  }

  const OrientedBox& last = h.back().box;
  return std::make_pair(last.with_center({x0, y0, z0}).with_yaw(yaw0), last.with_center({x1, y1, z1}).with_yaw(yaw1));
}

inline std::size_t symmetry_slot(int offset, std::size_t n) {
  const int m = static_cast<int>(n);
  return static_cast<std::size_t>(((offset % m) + m) % m);
}

inline void recount_votes(Tracklet& track, std::size_t n) {
  track.symmetry_votes.assign(n, 0);
  for (const auto& s : track.orientation) ++track.symmetry_votes[symmetry_slot(s.offset, n)];
}

/// Re-anchors the orientation history on the symmetry hypothesis most observations over the
/// tracklet's lifetime agree with.
inline void reanchor_orientation(Tracklet& track, const ClassSpec& spec) {
  const std::size_t n = hypothesis_count(spec);
  if (n < 2 || track.orientation.empty()) return;
  if (track.symmetry_votes.size() != n) recount_votes(track, n);
  const auto& votes = track.symmetry_votes;
  std::size_t best = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (votes[k] > votes[best]) best = k;
  }
  if (best == 0) return;
  const double step = kTwoPi / static_cast<double>(n);
  for (auto& s : track.orientation) {
    s.resolved_yaw = wrap_angle(s.resolved_yaw - static_cast<double>(best) * step);
    s.offset -= static_cast<int>(best);
  }
  std::rotate(track.symmetry_votes.begin(), track.symmetry_votes.begin() + static_cast<std::ptrdiff_t>(best),
              track.symmetry_votes.end());
}

inline double mean_orientation(const std::deque<OrientationSample>& samples, double fallback) {
  std::vector<double> yaws;
  yaws.reserve(samples.size());
  for (const auto& s : samples) yaws.push_back(s.resolved_yaw);
  try {
    return circular_mean(yaws);
  } catch (const UndefinedMean&) {
    return fallback;
  }
}

}  // namespace detail

/// Folds a matched observation into the tracklet and returns its new stabilized pose.
///
/// Order: symmetry resolution against the previous output yaw, orientation-outlier
/// bookkeeping, history update, lifetime-majority re-anchoring of the symmetry choice, motion-state
/// update on the fitted trajectory, then output selection (history average when stationary,
/// the resolved observation when moving).
inline OrientedBox stabilize_pose(Tracklet& track, const Observation& obs, const ClassSpec& spec,
                                  const TrackerConfig& config) {
  if (track.history.empty() || track.orientation.empty()) {
    throw InternalStateError("stabilize_pose on tracklet " + std::to_string(track.id) + " with empty history");
  }
  if (obs.t <= track.history.back().t) {
    throw InternalStateError("observation not newer than tracklet history");
  }

  const auto [resolved, offset] = resolve_symmetry(obs.box.yaw(), track.output_pose.yaw(), spec);

  const double hist_mean = detail::mean_orientation(track.orientation, track.output_pose.yaw());
  if (yaw_difference(resolved, hist_mean) > config.orientation_outlier_threshold) {
    ++track.outlier_streak;
  } else {
    track.outlier_streak = 0;
  }

  const std::size_t hyps = hypothesis_count(spec);
  if (track.symmetry_votes.size() != hyps) detail::recount_votes(track, hyps);
  track.history.push_back(obs);
  while (track.history.size() > config.history_capacity) track.history.pop_front();
  track.orientation.push_back({obs.t, obs.box.yaw(), resolved, offset});
  while (track.orientation.size() > config.history_capacity) track.orientation.pop_front();
  ++track.symmetry_votes[detail::symmetry_slot(offset, hyps)];

  if (track.outlier_streak >= config.orientation_outlier_frames) {
    const auto keep = static_cast<std::size_t>(config.orientation_outlier_frames);
    while (track.orientation.size() > keep) track.orientation.pop_front();
    detail::recount_votes(track, hyps);
    track.outlier_streak = 0;
  }

  detail::reanchor_orientation(track, spec);

  if (const auto trend = detail::trend_pair(track, config.motion_confidence)) {
    const MotionState signal = detect_motion(trend->first, trend->second, config);
    if (signal == MotionState::Moving) {
      track.motion_state = MotionState::Moving;
      track.quiet_frames = 0;
    } else if (track.motion_state == MotionState::Moving) {
      if (++track.quiet_frames >= config.stationary_reentry_frames) {
        track.motion_state = MotionState::Stationary;
        track.quiet_frames = 0;
      }
    }
  }

  const double latest_yaw = track.orientation.back().resolved_yaw;
  if (track.motion_state == MotionState::Moving) {
    return obs.box.with_yaw(latest_yaw).with_class(track.class_id);
  }

  Vec3 center{};
  Vec3 extent{};
  for (const auto& o : track.history) {
    center = center + o.box.center();
    extent = extent + o.box.extent();
  }
  const double inv = 1.0 / static_cast<double>(track.history.size());
  const double yaw = detail::mean_orientation(track.orientation, latest_yaw);
  return OrientedBox(center * inv, extent * inv, yaw, track.class_id, obs.box.confidence());
}

// ---------------------------------------------------------------------------
// Management
// ---------------------------------------------------------------------------

/// True when some `count` consecutive (sorted) timestamps span at most `window` seconds.
inline bool has_confirming_window(std::span<const double> sorted_ts, int count, double window) {
  const auto c = static_cast<std::size_t>(count);
  if (c == 0 || sorted_ts.size() < c) return false;
  for (std::size_t i = 0; i + c - 1 < sorted_ts.size(); ++i) {
    if (sorted_ts[i + c - 1] - sorted_ts[i] <= window) return true;
  }
  return false;
}

/// Promotes tentative tracklets with enough recent support and retires stale ones to `archive`.
inline void manage(std::vector<Tracklet>& active, std::vector<Tracklet>& archive, double now,
                   const TrackerConfig& config) {
  for (auto& t : active) {
    if (t.lifecycle == Lifecycle::Tentative) {
      const std::vector<double> ts(t.match_timestamps.begin(), t.match_timestamps.end());
      if (has_confirming_window(ts, config.confirm_count, config.confirm_window)) t.lifecycle = Lifecycle::Confirmed;
    }
    const double limit =
        t.lifecycle == Lifecycle::Confirmed ? config.prune_after_confirmed : config.prune_after_tentative;
    if (now - t.last_match() > limit) t.lifecycle = Lifecycle::Lost;
  }
  auto lost = std::stable_partition(active.begin(), active.end(),
                                    [](const Tracklet& t) { return t.lifecycle != Lifecycle::Lost; });
  std::move(lost, active.end(), std::back_inserter(archive));
  active.erase(lost, active.end());
}

inline TrackerSnapshot snapshot(std::span<const Tracklet> active, double now, bool confirmed_only = false) {
  TrackerSnapshot snap;
  snap.timestamp = now;
  for (const auto& t : active) {
    if (t.lifecycle == Lifecycle::Lost) continue;
    if (confirmed_only && t.lifecycle != Lifecycle::Confirmed) continue;
    snap.entries.push_back({t.id, t.class_id, t.lifecycle, t.motion_state, t.output_pose});
  }
  std::sort(snap.entries.begin(), snap.entries.end(),
            [](const SnapshotEntry& a, const SnapshotEntry& b) { return a.id < b.id; });
  return snap;
}

// ---------------------------------------------------------------------------
// Tracker
// ---------------------------------------------------------------------------

/// Single-owner tracking engine. Frames must arrive in strictly increasing time order.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config = {}, ClassRegistry classes = default_class_registry())
      : config_(std::move(config)), classes_(std::move(classes)) {
    config_.validate();
  }

  const TrackerConfig& config() const { return config_; }

  /// Runs association, stabilization and management for one frame. The returned
  /// snapshot lists every active (tentative or confirmed) tracklet.
  TrackerSnapshot ingest_frame(const FrameRecord& frame) {
    if (!std::isfinite(frame.t)) throw InvalidInput("non-finite frame timestamp");
    if (last_t_ && frame.t <= *last_t_) {
      throw StreamOrderError("frame timestamp " + std::to_string(frame.t) + " not after " + std::to_string(*last_t_));
    }
    last_t_ = frame.t;

    std::vector<OrientedBox> dets;
    dets.reserve(frame.boxes.size());
    for (const auto& fb : frame.boxes) {
      classes_.at(fb.box.class_id());
      dets.push_back(transform_to_map(fb.box, frame.robot, config_.sensor_offset));
    }

    std::vector<TrackedBox> predictions;
    predictions.reserve(active_.size());
    for (const auto& t : active_) predictions.push_back({t.id, t.output_pose});

    const AssociationResult assoc = associate(dets, predictions, config_.gate_scale);

    for (const auto& m : assoc.matches) {
      Tracklet& t = find(m.tracklet_id);
      const Observation obs{frame.t, dets[m.detection_index]};
      t.output_pose = stabilize_pose(t, obs, classes_.at(t.class_id), config_);
      t.match_timestamps.push_back(frame.t);
      while (t.match_timestamps.size() > kMaxMatchTimestamps) t.match_timestamps.pop_front();
      t.miss_count = 0;
    }
    for (const TrackletId id : assoc.unmatched_tracklets) ++find(id).miss_count;
    for (const std::size_t di : assoc.unmatched_detections) {
      if (!near_existing(dets[di], predictions)) spawn(frame.t, dets[di]);
    }

    manage(active_, archive_, frame.t, config_);
    return obbtrack::snapshot(active_, frame.t);
  }

  TrackerSnapshot snapshot(bool confirmed_only = false) const {
    return obbtrack::snapshot(active_, last_t_.value_or(0.0), confirmed_only);
  }

  std::span<const Tracklet> active() const { return active_; }
  std::span<const Tracklet> archive() const { return archive_; }

 private:
  static constexpr std::size_t kMaxMatchTimestamps = 64;

  Tracklet& find(TrackletId id) {
    auto it = std::find_if(active_.begin(), active_.end(), [id](const Tracklet& t) { return t.id == id; });
    if (it == active_.end()) throw InternalStateError("tracklet " + std::to_string(id) + " vanished");
    return *it;
  }

  // A detection inside the gate of a tracklet that was claimed by a closer detection is a
  // duplicate, not a new object.
  bool near_existing(const OrientedBox& det, std::span<const TrackedBox> tracks) const {
    for (const auto& tb : tracks) {
      if (tb.box.class_id() != det.class_id()) continue;
      if (center_distance(det, tb.box) <= gate_threshold(det, tb.box, config_.gate_scale)) return true;
    }
    return false;
  }

  void spawn(double t, const OrientedBox& det) {
    Tracklet track;
    track.id = next_id_++;
    track.class_id = det.class_id();
    track.history.push_back({t, det});
    track.orientation.push_back({t, det.yaw(), det.yaw(), 0});
    track.output_pose = det;
    track.match_timestamps.push_back(t);
    active_.push_back(std::move(track));
  }

  TrackerConfig config_;
  ClassRegistry classes_;
  std::vector<Tracklet> active_;
  std::vector<Tracklet> archive_;
  std::optional<double> last_t_;
  TrackletId next_id_ = 1;
};

}  // namespace obbtrack
