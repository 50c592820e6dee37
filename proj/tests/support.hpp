#pragma once

// Shared oracles and fixtures for the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "obbtrack/frame.hpp"
#include "obbtrack/geometry.hpp"
#include "obbtrack/rng.hpp"

namespace obbtrack::test {

inline double interval_overlap(double ca, double ea, double cb, double eb) {
  return std::max(0.0, std::min(ca + ea / 2, cb + eb / 2) - std::max(ca - ea / 2, cb - eb / 2));
}

inline double aabb_iou(Vec3 ca, Vec3 ea, Vec3 cb, Vec3 eb) {
  const double inter = interval_overlap(ca.x, ea.x, cb.x, eb.x) * interval_overlap(ca.y, ea.y, cb.y, eb.y) *
                       interval_overlap(ca.z, ea.z, cb.z, eb.z);
  return inter / (ea.x * ea.y * ea.z + eb.x * eb.y * eb.z - inter);
}

inline bool contains(const OrientedBox& b, double x, double y, double z) {
  const double dx = x - b.center().x;
  const double dy = y - b.center().y;
  const double c = std::cos(b.yaw());
  const double s = std::sin(b.yaw());
  const double u = c * dx + s * dy;
  const double v = -s * dx + c * dy;
  return std::abs(u) <= b.length() / 2 && std::abs(v) <= b.width() / 2 && std::abs(z - b.center().z) <= b.height() / 2;
}

/// Volume IoU by uniform sampling of the union's bounding region.
inline double monte_carlo_iou(const OrientedBox& a, const OrientedBox& b, int samples, std::uint64_t seed) {
  const double ra = a.footprint_diagonal() / 2;
  const double rb = b.footprint_diagonal() / 2;
  const double x0 = std::min(a.center().x - ra, b.center().x - rb);
  const double x1 = std::max(a.center().x + ra, b.center().x + rb);
  const double y0 = std::min(a.center().y - ra, b.center().y - rb);
  const double y1 = std::max(a.center().y + ra, b.center().y + rb);
  const double z0 = std::min(a.center().z - a.height() / 2, b.center().z - b.height() / 2);
  const double z1 = std::max(a.center().z + a.height() / 2, b.center().z + b.height() / 2);
  Rng rng(seed);
  long in_a = 0, in_b = 0, in_both = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = rng.uniform(x0, x1);
    const double y = rng.uniform(y0, y1);
    const double z = rng.uniform(z0, z1);
    const bool pa = contains(a, x, y, z);
    const bool pb = contains(b, x, y, z);
    in_a += pa;
    in_b += pb;
    in_both += pa && pb;
  }
  const long uni = in_a + in_b - in_both;
  return uni == 0 ? 0.0 : static_cast<double>(in_both) / static_cast<double>(uni);
}

/// Two randomly rotated boxes placed close enough to overlap most of the time.
inline std::pair<OrientedBox, OrientedBox> random_overlapping_pair(Rng& rng) {
  const OrientedBox a({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.3, 0.7)},
                      {rng.uniform(0.5, 2.0), rng.uniform(0.5, 1.5), rng.uniform(0.5, 2.0)}, rng.uniform(-kPi, kPi));
  const OrientedBox b({a.center().x + rng.uniform(-0.6, 0.6), a.center().y + rng.uniform(-0.6, 0.6),
                       a.center().z + rng.uniform(-0.3, 0.3)},
                      {rng.uniform(0.5, 2.0), rng.uniform(0.5, 1.5), rng.uniform(0.5, 2.0)}, rng.uniform(-kPi, kPi));
  return {a, b};
}

// ---------------------------------------------------------------------------
// Brute-force evaluation oracles
// ---------------------------------------------------------------------------

/// All one-to-one same-class assignments restricted to IoU > threshold; returns the one with
/// the most pairs, ties broken by the larger IoU sum. Exponential; tiny inputs only.
inline std::vector<std::pair<std::size_t, std::size_t>> brute_force_matching(const std::vector<OrientedBox>& gt,
                                                                             const std::vector<OrientedBox>& pred,
                                                                             double threshold) {
  std::vector<std::pair<std::size_t, std::size_t>> best, cur;
  double best_sum = -1.0;
  std::vector<bool> used(pred.size(), false);
  auto rec = [&](auto&& self, std::size_t g, double sum) -> void {
    if (g == gt.size()) {
      if (cur.size() > best.size() || (cur.size() == best.size() && sum > best_sum + 1e-12)) {
        best = cur;
        best_sum = sum;
      }
      return;
    }
    self(self, g + 1, sum);  // leave gt g unmatched
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (used[p] || gt[g].class_id() != pred[p].class_id()) continue;
      const double iou = iou_3d(gt[g], pred[p]);
      if (!(iou > threshold)) continue;
      used[p] = true;
      cur.emplace_back(g, p);
      self(self, g + 1, sum + iou);
      cur.pop_back();
      used[p] = false;
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

struct BruteHota {
  double det_a = 0.0;
  double ass_a = 0.0;
  double hota = 0.0;
  long tp = 0, fp = 0, fn = 0;
};

/// HOTA from first principles: per-TP association score averaged over all TPs, with the pair
/// counts recomputed by scanning every frame for each TP.
inline BruteHota brute_force_hota(const FrameStream& gt, const FrameStream& pred, double alpha) {
  BruteHota r;
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> matched(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto m = brute_force_matching(gt[i].plain_boxes(), pred[i].plain_boxes(), alpha);
    r.tp += static_cast<long>(m.size());
    r.fn += static_cast<long>(gt[i].boxes.size() - m.size());
    r.fp += static_cast<long>(pred[i].boxes.size() - m.size());
    for (const auto& [g, p] : m) matched[i].emplace_back(*gt[i].boxes[g].id, *pred[i].boxes[p].id);
  }
  const long denom = r.tp + r.fp + r.fn;
  r.det_a = denom == 0 ? 0.0 : static_cast<double>(r.tp) / static_cast<double>(denom);
  if (r.tp == 0) return r;
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (const auto& [gid, pid] : matched[i]) {
      long tpa = 0, gt_total = 0, pred_total = 0;
      for (std::size_t j = 0; j < gt.size(); ++j) {
        for (const auto& b : gt[j].boxes) gt_total += *b.id == gid;
        for (const auto& b : pred[j].boxes) pred_total += *b.id == pid;
        for (const auto& mp : matched[j]) tpa += mp.first == gid && mp.second == pid;
      }
      const long fna = gt_total - tpa;
      const long fpa = pred_total - tpa;
      acc += static_cast<double>(tpa) / static_cast<double>(tpa + fna + fpa);
    }
  }
  r.ass_a = acc / static_cast<double>(r.tp);
  r.hota = std::sqrt(r.det_a * r.ass_a);
  return r;
}

// Random tiny sequence: up to 3 gt objects jittering around fixed spots, predictions are
// perturbed copies with shuffled ids plus the occasional spurious box.
inline std::pair<FrameStream, FrameStream> micro_sequence(Rng& rng) {
  const std::size_t frames = 1 + rng.uniform_int(5);
  const std::size_t objects = 1 + rng.uniform_int(3);
  const std::vector<std::string> classes{"A", "B"};
  std::vector<Vec3> spots;
  std::vector<std::string> cls;
  for (std::size_t o = 0; o < objects; ++o) {
    spots.push_back({rng.uniform(0, 2.5), rng.uniform(0, 2.5), 0.5});
    cls.push_back(classes[rng.uniform_int(2)]);
  }
  FrameStream gt, pred;
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = 0.1 * static_cast<double>(f);
    FrameRecord g{t, PlanarPose(0, 0, 0, t), {}};
    FrameRecord p{t, PlanarPose(0, 0, 0, t), {}};
    for (std::size_t o = 0; o < objects; ++o) {
      if (rng.bernoulli(0.15)) continue;  // object absent this frame
      const OrientedBox b(spots[o] + Vec3{rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 0}, {1, 0.8, 1},
                          rng.uniform(-0.3, 0.3), cls[o]);
      g.boxes.push_back({static_cast<std::int64_t>(o + 1), b});
      if (rng.bernoulli(0.2)) continue;  // missed
      const OrientedBox q = b.with_center(b.center() + Vec3{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), 0})
                                .with_yaw(b.yaw() + rng.uniform(-0.5, 0.5));
      p.boxes.push_back({static_cast<std::int64_t>(1 + rng.uniform_int(4)), q});
    }
    if (rng.bernoulli(0.3)) {
      p.boxes.push_back({static_cast<std::int64_t>(5 + rng.uniform_int(2)),
                         OrientedBox({rng.uniform(0, 2.5), rng.uniform(0, 2.5), 0.5}, {1, 0.8, 1}, 0.0,
                                     classes[rng.uniform_int(2)])});
    }
    // prediction ids must be unique within a frame
    std::set<std::int64_t> used;
    for (auto& b : p.boxes) {
      while (!used.insert(*b.id).second) b.id = *b.id + 10;
    }
    gt.push_back(std::move(g));
    pred.push_back(std::move(p));
  }
  return {gt, pred};
}


}  // namespace obbtrack::test
