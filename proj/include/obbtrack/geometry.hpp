#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "obbtrack/error.hpp"

namespace obbtrack {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);  // [-pi, pi]
  if (r <= -kPi) r += kTwoPi;
  return r;
}

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// Robot (or sensor mount) pose on the ground plane. Heading is wrapped on construction.
struct PlanarPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double timestamp = 0.0;

  PlanarPose() = default;
  PlanarPose(double x_, double y_, double heading_, double t = 0.0)
      : x(x_), y(y_), heading(wrap_angle(heading_)), timestamp(t) {}

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(heading) && std::isfinite(timestamp);
  }

  friend bool operator==(const PlanarPose&, const PlanarPose&) = default;
};

/// parent * child: child expressed in parent's frame, result in parent's reference frame.
/// Keeps the parent's timestamp.
inline PlanarPose compose(const PlanarPose& parent, const PlanarPose& child) {
  const double c = std::cos(parent.heading);
  const double s = std::sin(parent.heading);
  return PlanarPose(parent.x + c * child.x - s * child.y, parent.y + s * child.x + c * child.y,
                    parent.heading + child.heading, parent.timestamp);
}

inline PlanarPose inverse(const PlanarPose& p) {
  const double c = std::cos(p.heading);
  const double s = std::sin(p.heading);
  return PlanarPose(-(c * p.x + s * p.y), s * p.x - c * p.y, -p.heading, p.timestamp);
}

/// Oriented 3D box with yaw-only rotation (roll = pitch = 0).
///
/// Extent is (length along the heading axis, width, height). The constructor rejects
/// non-finite values and non-positive extents, and stores yaw wrapped to (-pi, pi].
class OrientedBox {
 public:
  OrientedBox() = default;

  OrientedBox(Vec3 center, Vec3 extent, double yaw, std::string class_id = {}, double confidence = 1.0)
      : center_(center), extent_(extent), yaw_(yaw), class_id_(std::move(class_id)), confidence_(confidence) {
    if (!center_.finite() || !extent_.finite() || !std::isfinite(yaw_) || !std::isfinite(confidence_)) {
      throw InvalidInput("oriented box has non-finite fields");
    }
    if (extent_.x <= 0.0 || extent_.y <= 0.0 || extent_.z <= 0.0) {
      throw InvalidInput("oriented box extent must be strictly positive");
    }
    if (confidence_ < 0.0 || confidence_ > 1.0) {
      throw InvalidInput("oriented box confidence must lie in [0, 1]");
    }
    yaw_ = wrap_angle(yaw_);
  }

  const Vec3& center() const { return center_; }
  const Vec3& extent() const { return extent_; }
  double yaw() const { return yaw_; }
  const std::string& class_id() const { return class_id_; }
  double confidence() const { return confidence_; }

  double length() const { return extent_.x; }
  double width() const { return extent_.y; }
  double height() const { return extent_.z; }
  double volume() const { return extent_.x * extent_.y * extent_.z; }
  double footprint_diagonal() const { return std::hypot(extent_.x, extent_.y); }

  OrientedBox with_center(Vec3 c) const { return {c, extent_, yaw_, class_id_, confidence_}; }
  OrientedBox with_yaw(double y) const { return {center_, extent_, y, class_id_, confidence_}; }
  OrientedBox with_extent(Vec3 e) const { return {center_, e, yaw_, class_id_, confidence_}; }
  OrientedBox with_confidence(double c) const { return {center_, extent_, yaw_, class_id_, c}; }
  OrientedBox with_class(std::string id) const { return {center_, extent_, yaw_, std::move(id), confidence_}; }

  /// Footprint corners, counter-clockwise.
  std::array<std::array<double, 2>, 4> footprint() const {
    const double c = std::cos(yaw_);
    const double s = std::sin(yaw_);
    const double hl = 0.5 * extent_.x;
    const double hw = 0.5 * extent_.y;
    std::array<std::array<double, 2>, 4> out{};
    constexpr std::array<std::array<double, 2>, 4> signs{{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
    for (std::size_t i = 0; i < 4; ++i) {
      const double lx = signs[i][0] * hl;
      const double ly = signs[i][1] * hw;
      out[i] = {center_.x + c * lx - s * ly, center_.y + s * lx + c * ly};
    }
    return out;
  }

  friend bool operator==(const OrientedBox&, const OrientedBox&) = default;

 private:
  Vec3 center_{};
  Vec3 extent_{1.0, 1.0, 1.0};
  double yaw_ = 0.0;
  std::string class_id_;
  double confidence_ = 1.0;
};

/// Per-class geometry prior: nominal size and the number of vertical symmetry planes
/// of the footprint (0: none, 1: half-turn ambiguity, 2: quarter-turn ambiguity).
struct ClassSpec {
  std::string class_id;
  Vec3 nominal_extent{1.0, 1.0, 1.0};
  int symmetry_planes = 0;
};

inline std::size_t hypothesis_count(const ClassSpec& spec) {
  switch (spec.symmetry_planes) {
    case 0: return 1;
    case 1: return 2;
    case 2: return 4;
    default:
      throw ConfigError("class '" + spec.class_id + "': unsupported symmetry plane count " +
                        std::to_string(spec.symmetry_planes));
  }
}

/// Yaw spacing between neighbouring symmetry hypotheses of a class.
inline double hypothesis_step(const ClassSpec& spec) {
  return kTwoPi / static_cast<double>(hypothesis_count(spec));
}

// ---------------------------------------------------------------------------
// Frame transforms
// ---------------------------------------------------------------------------

/// Moves a sensor-frame box into the map frame through robot * sensor_offset.
/// Height is untouched (planar transform).
inline OrientedBox transform_to_map(const OrientedBox& box, const PlanarPose& robot,
                                    const PlanarPose& sensor_offset = {}) {
  if (!robot.finite() || !sensor_offset.finite()) throw InvalidInput("non-finite pose");
  const PlanarPose t = compose(robot, sensor_offset);
  const double c = std::cos(t.heading);
  const double s = std::sin(t.heading);
  const Vec3& p = box.center();
  return box.with_center({t.x + c * p.x - s * p.y, t.y + s * p.x + c * p.y, p.z}).with_yaw(box.yaw() + t.heading);
}

/// Inverse of transform_to_map.
inline OrientedBox transform_to_sensor(const OrientedBox& box, const PlanarPose& robot,
                                       const PlanarPose& sensor_offset = {}) {
  if (!robot.finite() || !sensor_offset.finite()) throw InvalidInput("non-finite pose");
  const PlanarPose t = compose(robot, sensor_offset);
  const double c = std::cos(t.heading);
  const double s = std::sin(t.heading);
  const double dx = box.center().x - t.x;
  const double dy = box.center().y - t.y;
  return box.with_center({c * dx + s * dy, -s * dx + c * dy, box.center().z}).with_yaw(box.yaw() - t.heading);
}

// ---------------------------------------------------------------------------
// Rotated IoU
// ---------------------------------------------------------------------------

namespace detail {

using Point2 = std::array<double, 2>;

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

inline double polygon_area(std::span<const Point2> poly) {
  if (poly.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    acc += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * std::abs(acc);
}

/// Sutherland-Hodgman clip of `subject` against a convex counter-clockwise `clip` polygon.
inline std::vector<Point2> clip_convex(std::vector<Point2> subject, std::span<const Point2> clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const Point2& a = clip[e];
    const Point2& b = clip[(e + 1) % clip.size()];
    std::vector<Point2> out;
    out.reserve(subject.size() + 2);
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Point2& p = subject[i];
      const Point2& q = subject[(i + 1) % subject.size()];
      const double dp = cross(a, b, p);
      const double dq = cross(a, b, q);
      if (dp >= 0.0) out.push_back(p);
      if ((dp >= 0.0) != (dq >= 0.0)) {
        const double t = dp / (dp - dq);
        out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
      }
    }
    subject = std::move(out);
  }
  return subject;
}

}  // namespace detail

/// Area of the intersection of two box footprints (bird's-eye view).
inline double footprint_intersection_area(const OrientedBox& a, const OrientedBox& b) {
  const auto fa = a.footprint();
  const auto fb = b.footprint();
  std::vector<detail::Point2> subject(fa.begin(), fa.end());
  const auto clipped = detail::clip_convex(std::move(subject), std::span<const detail::Point2>(fb));
  const double area = detail::polygon_area(clipped);
  return area < 1e-12 ? 0.0 : area;
}

inline double vertical_overlap(const OrientedBox& a, const OrientedBox& b) {
  const double lo = std::max(a.center().z - 0.5 * a.height(), b.center().z - 0.5 * b.height());
  const double hi = std::min(a.center().z + 0.5 * a.height(), b.center().z + 0.5 * b.height());
  return std::max(0.0, hi - lo);
}

/// Volumetric IoU of two yaw-oriented boxes.
inline double iou_3d(const OrientedBox& a, const OrientedBox& b) {
  const double dz = vertical_overlap(a, b);
  if (dz <= 0.0) return 0.0;
  // Cheap reject on circumscribed circles.
  const double dx = a.center().x - b.center().x;
  const double dy = a.center().y - b.center().y;
  const double reach = 0.5 * (a.footprint_diagonal() + b.footprint_diagonal());
  if (dx * dx + dy * dy > reach * reach) return 0.0;

  const double inter = footprint_intersection_area(a, b) * dz;
  if (inter <= 0.0) return 0.0;
  const double uni = a.volume() + b.volume() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Distances and angles
// ---------------------------------------------------------------------------

inline double center_distance(const OrientedBox& a, const OrientedBox& b) {
  return (a.center() - b.center()).norm();
}

/// Smallest absolute wrapped difference, in [0, pi].
inline double yaw_difference(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidInput("non-finite angle");
  return std::abs(wrap_angle(a - b));
}

/// Yaw values indistinguishable from `yaw` for a class, starting with `yaw` itself.
inline std::vector<double> symmetry_hypotheses(double yaw, const ClassSpec& spec) {
  const std::size_t n = hypothesis_count(spec);
  const double step = kTwoPi / static_cast<double>(n);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(wrap_angle(yaw + static_cast<double>(k) * step));
  return out;
}

class UndefinedMean : public Error {
 public:
  using Error::Error;
};

/// Weighted circular mean: atan2 of the mean sine and cosine.
inline double circular_mean(std::span<const double> angles, std::span<const double> weights = {}) {
  if (angles.empty()) throw InvalidInput("circular mean of an empty set");
  if (!weights.empty() && weights.size() != angles.size()) {
    throw InvalidInput("circular mean: weight count does not match angle count");
  }
  double s = 0.0;
  double c = 0.0;
  double wsum = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (!std::isfinite(angles[i]) || !std::isfinite(w) || w < 0.0) {
      throw InvalidInput("circular mean: non-finite angle or negative weight");
    }
    s += w * std::sin(angles[i]);
    c += w * std::cos(angles[i]);
    wsum += w;
  }
  if (wsum <= 0.0) throw InvalidInput("circular mean: weights sum to zero");
  s /= wsum;
  c /= wsum;
  if (std::hypot(s, c) < 1e-9) throw UndefinedMean("circular mean undefined: resultant vanishes");
  return wrap_angle(std::atan2(s, c));
}

}  // namespace obbtrack
