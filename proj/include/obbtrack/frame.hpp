#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "obbtrack/geometry.hpp"

namespace obbtrack {

/// A box on the wire. Ground truth and tracker output carry a persistent id; raw detections do not.
struct FrameBox {
  std::optional<std::int64_t> id;
  OrientedBox box;

  friend bool operator==(const FrameBox&, const FrameBox&) = default;
};

/// One timestamped bundle: the robot pose used for ego-motion compensation and the boxes seen.
struct FrameRecord {
  double t = 0.0;
  PlanarPose robot;
  std::vector<FrameBox> boxes;

  std::vector<OrientedBox> plain_boxes() const {
    std::vector<OrientedBox> out;
    out.reserve(boxes.size());
    for (const auto& b : boxes) out.push_back(b.box);
    return out;
  }
};

using FrameStream = std::vector<FrameRecord>;

}  // namespace obbtrack
