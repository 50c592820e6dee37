#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "obbtrack/assignment.hpp"
#include "obbtrack/frame.hpp"
#include "obbtrack/geometry.hpp"

namespace obbtrack {

struct TpPair {
  std::size_t gt_index = 0;
  std::size_t pred_index = 0;
  double iou = 0.0;

  friend bool operator==(const TpPair&, const TpPair&) = default;
};

struct FramePairing {
  double timestamp = 0.0;
  std::vector<TpPair> tp_pairs;  // ascending gt_index
  std::vector<std::size_t> fp_indices;
  std::vector<std::size_t> fn_indices;
};

inline constexpr double kDefaultIouThreshold = 0.5;

/// One-to-one same-class matching of ground truth to predictions with IoU > threshold.
/// Maximizes the number of true positives first, then their summed IoU.
inline FramePairing match_frame(std::span<const OrientedBox> gt, std::span<const OrientedBox> pred,
                                double threshold = kDefaultIouThreshold, double timestamp = 0.0) {
  WeightMatrix w(gt.size(), pred.size());
  std::vector<double> ious(gt.size() * pred.size(), 0.0);
  // Any extra match outweighs the largest possible IoU gain.
  const double bonus = static_cast<double>(std::min(gt.size(), pred.size())) + 1.0;
  for (std::size_t g = 0; g < gt.size(); ++g) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (gt[g].class_id() != pred[p].class_id()) continue;
      const double iou = iou_3d(gt[g], pred[p]);
      ious[g * pred.size() + p] = iou;
      if (iou > threshold) w.set(g, p, bonus + iou);
    }
  }
  FramePairing out;
  out.timestamp = timestamp;
  std::vector<bool> gt_hit(gt.size(), false), pred_hit(pred.size(), false);
  for (const auto& [g, p] : max_weight_matching(w)) {
    out.tp_pairs.push_back({g, p, ious[g * pred.size() + p]});
    gt_hit[g] = true;
    pred_hit[p] = true;
  }
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (!gt_hit[g]) out.fn_indices.push_back(g);
  }
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (!pred_hit[p]) out.fp_indices.push_back(p);
  }
  return out;
}

/// Summed IoU of the same-class assignment that maximizes total overlap (no threshold).
inline double best_overlap_sum(std::span<const OrientedBox> gt, std::span<const OrientedBox> pred) {
  WeightMatrix w(gt.size(), pred.size());
  for (std::size_t g = 0; g < gt.size(); ++g) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (gt[g].class_id() != pred[p].class_id()) continue;
      const double iou = iou_3d(gt[g], pred[p]);
      if (iou > 0.0) w.set(g, p, iou);
    }
  }
  double sum = 0.0;
  for (const auto& [g, p] : max_weight_matching(w)) sum += *w.at(g, p);
  return sum;
}

struct DetectionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

inline DetectionCounts count_detections(std::span<const FramePairing> pairings) {
  DetectionCounts c;
  for (const auto& f : pairings) {
    c.tp += static_cast<std::int64_t>(f.tp_pairs.size());
    c.fp += static_cast<std::int64_t>(f.fp_indices.size());
    c.fn += static_cast<std::int64_t>(f.fn_indices.size());
  }
  return c;
}

inline double det_a(const DetectionCounts& c) {
  const std::int64_t denom = c.tp + c.fp + c.fn;
  if (denom == 0) throw UndefinedMetric("DetA undefined: no ground truth and no predictions");
  return static_cast<double>(c.tp) / static_cast<double>(denom);
}

/// TP / (TP + FP + FN) pooled over all frames.
inline double det_a(std::span<const FramePairing> pairings) { return det_a(count_detections(pairings)); }

/// Matched (ground truth, prediction) box pair.
using BoxPair = std::pair<OrientedBox, OrientedBox>;

inline double pos_rmse(std::span<const BoxPair> pairs) {
  if (pairs.empty()) throw UndefinedMetric("position RMSE undefined: no matched pairs");
  double acc = 0.0;
  for (const auto& [g, p] : pairs) {
    const double d = center_distance(g, p);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pairs.size()));
}

/// Per-axis RMSE of center error (x, y, z).
inline Vec3 pos_rmse_axes(std::span<const BoxPair> pairs) {
  if (pairs.empty()) throw UndefinedMetric("position RMSE undefined: no matched pairs");
  Vec3 acc{};
  for (const auto& [g, p] : pairs) {
    const Vec3 d = g.center() - p.center();
    acc = acc + Vec3{d.x * d.x, d.y * d.y, d.z * d.z};
  }
  const double n = static_cast<double>(pairs.size());
  return {std::sqrt(acc.x / n), std::sqrt(acc.y / n), std::sqrt(acc.z / n)};
}

/// Wrapped yaw error RMSE in radians. Blind to class symmetry by construction.
inline double yaw_rmse(std::span<const BoxPair> pairs) {
  if (pairs.empty()) throw UndefinedMetric("yaw RMSE undefined: no matched pairs");
  double acc = 0.0;
  for (const auto& [g, p] : pairs) {
    const double d = yaw_difference(g.yaw(), p.yaw());
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pairs.size()));
}

// ---------------------------------------------------------------------------
// HOTA
// ---------------------------------------------------------------------------

struct HotaResult {
  double hota = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
};

namespace detail {

inline void require_aligned(std::span<const FrameRecord> gt, std::span<const FrameRecord> pred) {
  if (gt.size() != pred.size()) {
    throw AlignmentError("streams differ in length: " + std::to_string(gt.size()) + " vs " +
                         std::to_string(pred.size()) + " frames");
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (std::abs(gt[i].t - pred[i].t) > 1e-6) {
      throw AlignmentError("frame " + std::to_string(i) + ": timestamp " + std::to_string(gt[i].t) + " vs " +
                           std::to_string(pred[i].t));
    }
  }
}

inline std::vector<std::int64_t> frame_ids(const FrameRecord& f, const char* which) {
  std::vector<std::int64_t> ids;
  std::set<std::int64_t> seen;
  for (const auto& b : f.boxes) {
    if (!b.id) throw InvalidInput(std::string(which) + " box without id at t=" + std::to_string(f.t));
    if (!seen.insert(*b.id).second) {
      throw InvalidInput(std::string(which) + " id " + std::to_string(*b.id) + " repeated at t=" + std::to_string(f.t));
    }
    ids.push_back(*b.id);
  }
  return ids;
}

}  // namespace detail

/// HOTA at a single IoU threshold: sqrt(DetA * AssA), where AssA averages, over all true
/// positives, TPA / (TPA + FNA + FPA) of the matched (gt id, pred id) pair.
inline HotaResult hota_at(std::span<const FrameRecord> gt, std::span<const FrameRecord> pred, double alpha) {
  detail::require_aligned(gt, pred);
  DetectionCounts counts;
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> pair_tp;
  std::map<std::int64_t, std::int64_t> gt_n, pred_n;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto gid = detail::frame_ids(gt[i], "ground truth");
    const auto pid = detail::frame_ids(pred[i], "prediction");
    for (auto id : gid) ++gt_n[id];
    for (auto id : pid) ++pred_n[id];
    const auto gb = gt[i].plain_boxes();
    const auto pb = pred[i].plain_boxes();
    const FramePairing f = match_frame(gb, pb, alpha, gt[i].t);
    counts.tp += static_cast<std::int64_t>(f.tp_pairs.size());
    counts.fp += static_cast<std::int64_t>(f.fp_indices.size());
    counts.fn += static_cast<std::int64_t>(f.fn_indices.size());
    for (const auto& tp : f.tp_pairs) ++pair_tp[{gid[tp.gt_index], pid[tp.pred_index]}];
  }
  HotaResult r;
  r.det_a = det_a(counts);
  if (counts.tp == 0) return r;
  double acc = 0.0;
  for (const auto& [key, tpa] : pair_tp) {
    const std::int64_t union_n = gt_n[key.first] + pred_n[key.second] - tpa;
    acc += static_cast<double>(tpa) * static_cast<double>(tpa) / static_cast<double>(union_n);
  }
  r.ass_a = acc / static_cast<double>(counts.tp);
  r.hota = std::sqrt(r.det_a * r.ass_a);
  return r;
}

inline std::vector<double> hota_alpha_grid() {
  std::vector<double> alphas;
  for (int k = 1; k <= 19; ++k) alphas.push_back(0.05 * k);
  return alphas;
}

/// HOTA at `alpha`, or averaged over alpha = 0.05, 0.10, ..., 0.95 when `sweep` is set.
inline HotaResult hota(std::span<const FrameRecord> gt, std::span<const FrameRecord> pred,
                       double alpha = kDefaultIouThreshold, bool sweep = false) {
  if (!sweep) return hota_at(gt, pred, alpha);
  HotaResult mean;
  const auto alphas = hota_alpha_grid();
  for (double a : alphas) {
    const HotaResult r = hota_at(gt, pred, a);
    mean.hota += r.hota;
    mean.det_a += r.det_a;
    mean.ass_a += r.ass_a;
  }
  const double n = static_cast<double>(alphas.size());
  mean.hota /= n;
  mean.det_a /= n;
  mean.ass_a /= n;
  return mean;
}

// ---------------------------------------------------------------------------
// Stream evaluation
// ---------------------------------------------------------------------------

enum class EvalMode { Detection, Tracklet };

struct EvalOptions {
  EvalMode mode = EvalMode::Tracklet;
  double iou_threshold = kDefaultIouThreshold;
  bool alpha_sweep = false;
};

/// One row of results. Undefined quantities (e.g. RMSE without any true positive) are empty.
struct MetricsReport {
  std::optional<double> avg_iou;
  std::optional<double> pos_rmse;
  std::optional<Vec3> pos_rmse_axes;
  std::optional<double> yaw_rmse;  // radians
  std::optional<double> det_a;
  std::optional<double> hota;
  std::optional<double> ass_a;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t id_switches = 0;
  std::int64_t gt_count = 0;
  std::int64_t pred_count = 0;
  std::size_t frames = 0;
};

struct EvaluationResult {
  MetricsReport overall;
  std::map<std::string, MetricsReport> per_class;
};

namespace detail {

inline FrameStream filter_class(std::span<const FrameRecord> s, const std::string& cls) {
  FrameStream out;
  out.reserve(s.size());
  for (const auto& f : s) {
    FrameRecord g{f.t, f.robot, {}};
    for (const auto& b : f.boxes) {
      if (b.box.class_id() == cls) g.boxes.push_back(b);
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline MetricsReport evaluate_rows(std::span<const FrameRecord> gt, std::span<const FrameRecord> pred,
                                   const EvalOptions& opt) {
  require_aligned(gt, pred);
  MetricsReport r;
  r.frames = gt.size();
  std::vector<BoxPair> pairs;
  double overlap = 0.0;
  std::map<std::int64_t, std::int64_t> last_pred_for_gt;
  const bool ids = opt.mode == EvalMode::Tracklet;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto gb = gt[i].plain_boxes();
    const auto pb = pred[i].plain_boxes();
    r.gt_count += static_cast<std::int64_t>(gb.size());
    r.pred_count += static_cast<std::int64_t>(pb.size());
    overlap += best_overlap_sum(gb, pb);
    const FramePairing f = match_frame(gb, pb, opt.iou_threshold, gt[i].t);
    r.tp += static_cast<std::int64_t>(f.tp_pairs.size());
    r.fp += static_cast<std::int64_t>(f.fp_indices.size());
    r.fn += static_cast<std::int64_t>(f.fn_indices.size());
    for (const auto& tp : f.tp_pairs) {
      pairs.emplace_back(gb[tp.gt_index], pb[tp.pred_index]);
      if (!ids) continue;
      const auto& gid = gt[i].boxes[tp.gt_index].id;
      const auto& pid = pred[i].boxes[tp.pred_index].id;
      if (!gid || !pid) continue;
      auto it = last_pred_for_gt.find(*gid);
      if (it != last_pred_for_gt.end() && it->second != *pid) ++r.id_switches;
      last_pred_for_gt[*gid] = *pid;
    }
  }
  if (r.gt_count > 0) r.avg_iou = overlap / static_cast<double>(r.gt_count);
  if (!pairs.empty()) {
    r.pos_rmse = obbtrack::pos_rmse(pairs);
    r.pos_rmse_axes = obbtrack::pos_rmse_axes(pairs);
    r.yaw_rmse = obbtrack::yaw_rmse(pairs);
  }
  if (r.tp + r.fp + r.fn > 0) r.det_a = det_a(DetectionCounts{r.tp, r.fp, r.fn});
  if (ids && r.tp + r.fp + r.fn > 0) {
    const HotaResult h = hota(gt, pred, opt.iou_threshold, opt.alpha_sweep);
    r.hota = h.hota;
    r.ass_a = h.ass_a;
  }
  return r;
}

}  // namespace detail

/// Scores a prediction stream against ground truth, both in the map frame and frame-aligned.
/// Detection mode ignores identities and leaves HOTA empty.
inline EvaluationResult evaluate(std::span<const FrameRecord> gt, std::span<const FrameRecord> pred,
                                 const EvalOptions& opt = {}) {
  EvaluationResult out;
  out.overall = detail::evaluate_rows(gt, pred, opt);
  std::set<std::string> classes;
  for (const auto& f : gt) {
    for (const auto& b : f.boxes) classes.insert(b.box.class_id());
  }
  for (const auto& f : pred) {
    for (const auto& b : f.boxes) classes.insert(b.box.class_id());
  }
  for (const auto& cls : classes) {
    out.per_class[cls] = detail::evaluate_rows(detail::filter_class(gt, cls), detail::filter_class(pred, cls), opt);
  }
  return out;
}

}  // namespace obbtrack
