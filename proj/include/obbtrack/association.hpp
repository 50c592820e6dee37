#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include "obbtrack/geometry.hpp"

namespace obbtrack {

using TrackletId = std::int64_t;

struct Match {
  TrackletId tracklet_id = 0;
  std::size_t detection_index = 0;
  double distance = 0.0;

  friend bool operator==(const Match&, const Match&) = default;
};

struct AssociationResult {
  std::vector<Match> matches;
  std::vector<std::size_t> unmatched_detections;  // ascending
  std::vector<TrackletId> unmatched_tracklets;    // ascending
};

struct TrackedBox {
  TrackletId id = 0;
  OrientedBox box;
};

/// Half the larger footprint diagonal of the two boxes, times `scale`.
inline double gate_threshold(const OrientedBox& det, const OrientedBox& track_box, double scale = 1.0) {
  if (!(scale > 0.0)) throw InvalidInput("gate scale must be positive");
  return 0.5 * scale * std::max(det.footprint_diagonal(), track_box.footprint_diagonal());
}

/// Greedy nearest-center assignment of detections to tracklet predictions.
///
/// Candidate pairs share a class label and lie within the size gate. They are accepted in
/// ascending (distance, tracklet_id, detection_index) order whenever both ends are still free,
/// so the result does not depend on input order.
inline AssociationResult associate(std::span<const OrientedBox> detections, std::span<const TrackedBox> tracklets,
                                   double gate_scale = 1.0) {
  {
    std::unordered_set<TrackletId> seen;
    for (const auto& t : tracklets) {
      if (!seen.insert(t.id).second) throw InvalidInput("duplicate tracklet id " + std::to_string(t.id));
    }
  }

  struct Candidate {
    double distance;
    TrackletId id;
    std::size_t det;
    std::size_t track_pos;
  };
  std::vector<Candidate> candidates;
  for (std::size_t ti = 0; ti < tracklets.size(); ++ti) {
    const auto& t = tracklets[ti];
    for (std::size_t di = 0; di < detections.size(); ++di) {
      const auto& d = detections[di];
      if (d.class_id() != t.box.class_id()) continue;
      const double dist = center_distance(d, t.box);
      if (dist <= gate_threshold(d, t.box, gate_scale)) candidates.push_back({dist, t.id, di, ti});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.distance, a.id, a.det) < std::tie(b.distance, b.id, b.det);
  });

  std::vector<bool> det_used(detections.size(), false);
  std::vector<bool> track_used(tracklets.size(), false);
  AssociationResult result;
  for (const auto& c : candidates) {
    if (det_used[c.det] || track_used[c.track_pos]) continue;
    det_used[c.det] = true;
    track_used[c.track_pos] = true;
    result.matches.push_back({c.id, c.det, c.distance});
  }
  for (std::size_t di = 0; di < detections.size(); ++di) {
    if (!det_used[di]) result.unmatched_detections.push_back(di);
  }
  for (std::size_t ti = 0; ti < tracklets.size(); ++ti) {
    if (!track_used[ti]) result.unmatched_tracklets.push_back(tracklets[ti].id);
  }
  std::sort(result.unmatched_tracklets.begin(), result.unmatched_tracklets.end());
  return result;
}

}  // namespace obbtrack
