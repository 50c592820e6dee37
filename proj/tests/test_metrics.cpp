#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "obbtrack/assignment.hpp"
#include "obbtrack/metrics.hpp"
#include "obbtrack/rng.hpp"
#include "support.hpp"

using namespace obbtrack;

namespace {

OrientedBox cube(double x, double y = 0.0, const std::string& cls = "A") {
  return OrientedBox({x, y, 0.5}, {1, 1, 1}, 0.0, cls);
}

FrameRecord rec(double t, std::vector<std::pair<std::int64_t, OrientedBox>> boxes) {
  FrameRecord f{t, PlanarPose(0, 0, 0, t), {}};
  for (auto& [id, b] : boxes) f.boxes.push_back({id, b});
  return f;
}

}  // namespace

TEST(Assignment, SmallKnownProblem) {
  WeightMatrix w(2, 2);
  w.set(0, 0, 1.0);
  w.set(0, 1, 3.0);
  w.set(1, 0, 2.0);
  const auto m = max_weight_matching(w);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0], (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_EQ(m[1], (std::pair<std::size_t, std::size_t>{1, 0}));
}

TEST(Assignment, NeverUsesDisallowedCells) {
  WeightMatrix w(3, 2);
  w.set(2, 1, 0.5);
  const auto m = max_weight_matching(w);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0], (std::pair<std::size_t, std::size_t>{2, 1}));
  EXPECT_TRUE(max_weight_matching(WeightMatrix(0, 4)).empty());
}

TEST(MatchFrame, PartitionsBoxes) {
  const std::vector<OrientedBox> gt{cube(0), cube(3), cube(6, 0, "B")};
  const std::vector<OrientedBox> pred{cube(0.1), cube(6.1, 0, "A"), cube(10)};
  const FramePairing f = match_frame(gt, pred);
  ASSERT_EQ(f.tp_pairs.size(), 1u);
  EXPECT_EQ(f.tp_pairs[0].gt_index, 0u);
  EXPECT_EQ(f.fn_indices, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(f.fp_indices, (std::vector<std::size_t>{1, 2}));
  for (const auto& tp : f.tp_pairs) EXPECT_GT(tp.iou, 0.5);
}

TEST(MatchFrame, ThresholdIsStrict) {
  // Same-size unit cubes shifted by d along x: IoU = (1-d)/(1+d) = 0.5 at d = 1/3.
  const std::vector<OrientedBox> gt{cube(0)};
  const std::vector<OrientedBox> at{cube(1.0 / 3.0)};
  const double iou = iou_3d(gt[0], at[0]);
  EXPECT_TRUE(match_frame(gt, at, iou).tp_pairs.empty());
  EXPECT_EQ(match_frame(gt, at, iou - 1e-9).tp_pairs.size(), 1u);
}

TEST(MatchFrame, MatchesBruteForce) {
  Rng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    auto [gt, pred] = test::micro_sequence(rng);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const auto gb = gt[i].plain_boxes();
      const auto pb = pred[i].plain_boxes();
      const auto got = match_frame(gb, pb);
      const auto want = test::brute_force_matching(gb, pb, 0.5);
      ASSERT_EQ(got.tp_pairs.size(), want.size());
      std::vector<std::pair<std::size_t, std::size_t>> gp;
      for (const auto& tp : got.tp_pairs) gp.emplace_back(tp.gt_index, tp.pred_index);
      std::sort(gp.begin(), gp.end());
      auto w = want;
      std::sort(w.begin(), w.end());
      EXPECT_EQ(gp, w);
      EXPECT_EQ(got.tp_pairs.size() + got.fn_indices.size(), gb.size());
      EXPECT_EQ(got.tp_pairs.size() + got.fp_indices.size(), pb.size());
    }
  }
}

TEST(DetA, HandBuiltCounts) {
  EXPECT_DOUBLE_EQ(det_a(DetectionCounts{6, 2, 2}), 0.6);
  EXPECT_THROW(det_a(DetectionCounts{0, 0, 0}), UndefinedMetric);
  EXPECT_DOUBLE_EQ(det_a(DetectionCounts{0, 3, 0}), 0.0);
}

TEST(Rmse, KnownValues) {
  const std::vector<BoxPair> pairs{{cube(0), cube(0.3)}, {cube(0, 0), cube(0, 0.4)}};
  EXPECT_NEAR(pos_rmse(pairs), std::sqrt((0.09 + 0.16) / 2), 1e-12);
  const Vec3 axes = pos_rmse_axes(pairs);
  EXPECT_NEAR(axes.x, std::sqrt(0.09 / 2), 1e-12);
  EXPECT_NEAR(axes.y, std::sqrt(0.16 / 2), 1e-12);
  EXPECT_EQ(axes.z, 0.0);
  const std::vector<BoxPair> yaws{{cube(0), cube(0).with_yaw(kPi)}};
  EXPECT_NEAR(yaw_rmse(yaws), kPi, 1e-12);  // symmetry-blind
  EXPECT_THROW(pos_rmse(std::vector<BoxPair>{}), UndefinedMetric);
}

TEST(Hota, PerfectTrackingIsOne) {
  const FrameStream gt{rec(0, {{1, cube(0)}, {2, cube(3)}}), rec(0.1, {{1, cube(0)}, {2, cube(3)}})};
  const HotaResult h = hota(gt, gt);
  EXPECT_DOUBLE_EQ(h.hota, 1.0);
  EXPECT_DOUBLE_EQ(h.det_a, 1.0);
  EXPECT_DOUBLE_EQ(h.ass_a, 1.0);
}

TEST(Hota, IdSwitchHalvesAssociation) {
  // One object over 4 frames, prediction changes id halfway.
  FrameStream gt, pred;
  for (int k = 0; k < 4; ++k) {
    gt.push_back(rec(0.1 * k, {{1, cube(0)}}));
    pred.push_back(rec(0.1 * k, {{k < 2 ? 10 : 11, cube(0)}}));
  }
  const HotaResult h = hota(gt, pred);
  EXPECT_DOUBLE_EQ(h.det_a, 1.0);
  EXPECT_DOUBLE_EQ(h.ass_a, 0.5);
  EXPECT_DOUBLE_EQ(h.hota, std::sqrt(0.5));
}

TEST(Hota, AlignmentAndIdErrors) {
  const FrameStream gt{rec(0, {{1, cube(0)}})};
  const FrameStream shifted{rec(0.5, {{1, cube(0)}})};
  EXPECT_THROW(hota(gt, shifted), AlignmentError);
  EXPECT_THROW(hota(gt, FrameStream{}), AlignmentError);
  FrameStream no_id = gt;
  no_id[0].boxes[0].id.reset();
  EXPECT_THROW(hota(gt, no_id), InvalidInput);
}

TEST(Hota, MatchesBruteForceOnMicroSequences) {
  Rng rng(1234);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    auto [gt, pred] = test::micro_sequence(rng);
    const auto brute = test::brute_force_hota(gt, pred, 0.5);
    if (brute.tp + brute.fp + brute.fn == 0) continue;
    const HotaResult h = hota(gt, pred);
    const auto counts = [&] {
      std::vector<FramePairing> f;
      for (std::size_t i = 0; i < gt.size(); ++i) f.push_back(match_frame(gt[i].plain_boxes(), pred[i].plain_boxes()));
      return count_detections(f);
    }();
    ASSERT_EQ(counts.tp, brute.tp);
    ASSERT_EQ(counts.fp, brute.fp);
    ASSERT_EQ(counts.fn, brute.fn);
    EXPECT_EQ(h.det_a, brute.det_a);
    EXPECT_NEAR(h.ass_a, brute.ass_a, 1e-12);
    EXPECT_NEAR(h.hota, brute.hota, 1e-12);
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(Hota, AlphaSweepAveragesGrid) {
  Rng rng(5);
  auto [gt, pred] = test::micro_sequence(rng);
  while (test::brute_force_hota(gt, pred, 0.05).tp == 0) std::tie(gt, pred) = test::micro_sequence(rng);
  double sum = 0.0;
  for (double a : hota_alpha_grid()) sum += hota(gt, pred, a).hota;
  EXPECT_NEAR(hota(gt, pred, 0.5, true).hota, sum / 19.0, 1e-12);
  EXPECT_EQ(hota_alpha_grid().size(), 19u);
}

TEST(Evaluate, SelfComparisonIsPerfect) {
  const FrameStream gt{rec(0, {{1, cube(0)}, {2, cube(3, 0, "B")}}), rec(0.1, {{1, cube(0)}, {2, cube(3, 0, "B")}})};
  const EvaluationResult r = evaluate(gt, gt, {EvalMode::Tracklet});
  EXPECT_DOUBLE_EQ(*r.overall.avg_iou, 1.0);
  EXPECT_DOUBLE_EQ(*r.overall.pos_rmse, 0.0);
  EXPECT_DOUBLE_EQ(*r.overall.yaw_rmse, 0.0);
  EXPECT_DOUBLE_EQ(*r.overall.det_a, 1.0);
  EXPECT_DOUBLE_EQ(*r.overall.hota, 1.0);
  EXPECT_EQ(r.overall.id_switches, 0);
  ASSERT_EQ(r.per_class.size(), 2u);
  EXPECT_DOUBLE_EQ(*r.per_class.at("B").det_a, 1.0);
}

TEST(Evaluate, DetectionModeOmitsHota) {
  const FrameStream gt{rec(0, {{1, cube(0)}})};
  const EvaluationResult r = evaluate(gt, gt, {EvalMode::Detection});
  EXPECT_FALSE(r.overall.hota.has_value());
  EXPECT_TRUE(r.overall.det_a.has_value());
}

TEST(Evaluate, DisjointStreamsScoreZero) {
  const FrameStream gt{rec(0, {{1, cube(0)}})};
  const FrameStream pred{rec(0, {{1, cube(20)}})};
  const EvaluationResult r = evaluate(gt, pred, {EvalMode::Tracklet});
  EXPECT_DOUBLE_EQ(*r.overall.det_a, 0.0);
  EXPECT_DOUBLE_EQ(*r.overall.avg_iou, 0.0);
  EXPECT_FALSE(r.overall.pos_rmse.has_value());
}

TEST(Evaluate, CountsIdSwitches) {
  FrameStream gt, pred;
  for (int k = 0; k < 6; ++k) {
    gt.push_back(rec(0.1 * k, {{1, cube(0)}}));
    pred.push_back(rec(0.1 * k, {{k < 3 ? 4 : 9, cube(0)}}));
  }
  EXPECT_EQ(evaluate(gt, pred).overall.id_switches, 1);
}

TEST(Evaluate, AverageIouCountsMissesAsZero) {
  const FrameStream gt{rec(0, {{1, cube(0)}, {2, cube(5)}})};
  const FrameStream pred{rec(0, {{1, cube(0)}})};
  EXPECT_DOUBLE_EQ(*evaluate(gt, pred).overall.avg_iou, 0.5);
}

TEST(Evaluate, FractionsBounded) {
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    auto [gt, pred] = test::micro_sequence(rng);
    const auto r = evaluate(gt, pred).overall;
    for (const auto& v : {r.avg_iou, r.det_a, r.hota, r.ass_a}) {
      if (!v) continue;
      EXPECT_GE(*v, 0.0);
      EXPECT_LE(*v, 1.0);
    }
    if (r.pos_rmse) {
      EXPECT_GE(*r.pos_rmse, 0.0);
    }
  }
}
