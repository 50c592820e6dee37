#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "obbtrack/config.hpp"
#include "obbtrack/doe.hpp"
#include "obbtrack/io.hpp"
#include "obbtrack/metrics.hpp"
#include "obbtrack/simulate.hpp"
#include "obbtrack/tracker.hpp"

namespace obbtrack {

/// Runs the tracker over a sensor-frame detection stream and returns one record per input
/// frame holding the confirmed tracklets (map frame, with ids).
inline FrameStream track_stream(const FrameStream& detections, const TrackerConfig& config,
                                const ClassRegistry& classes) {
  Tracker tracker(config, classes);
  FrameStream out;
  out.reserve(detections.size());
  for (const auto& f : detections) {
    tracker.ingest_frame(f);
    FrameRecord rec{f.t, f.robot, {}};
    for (const auto& e : tracker.snapshot(true).entries) rec.boxes.push_back({e.id, e.output_pose});
    out.push_back(std::move(rec));
  }
  return out;
}

struct TrialStreams {
  FrameStream ground_truth;  // map frame, ids
  FrameStream detections;    // sensor frame, stale ego pose applied
};

inline std::uint64_t trial_noise_seed(std::uint64_t seed, int trial_id) {
  return mix_seed(seed, 0x6e6f6973ULL + static_cast<std::uint64_t>(trial_id));
}

/// Ground truth plus emulated detections for one trial. False positives are drawn for the
/// trial's own class.
inline TrialStreams simulate_trial(const doe::TrialSpec& trial, const RunConfig& cfg, std::uint64_t seed) {
  TrialStreams s;
  s.ground_truth = sim::generate_ground_truth(trial, cfg.classes, cfg.sim, seed);
  sim::NoiseModel noise = cfg.noise;
  noise.rng_seed = trial_noise_seed(seed, trial.trial_id);
  const FrameStream raw =
      sim::emulate_detector(s.ground_truth, cfg.classes, noise, trial.factors.occlusion, {trial.class_id}, cfg.sim);
  s.detections = sim::apply_latency(raw, sim::robot_track(s.ground_truth), noise.latency);
  return s;
}

struct TrialResult {
  doe::TrialSpec trial;
  MetricsReport detection;
  MetricsReport tracklet;
};

inline TrialResult run_trial(const doe::TrialSpec& trial, const RunConfig& cfg, std::uint64_t seed) {
  const TrialStreams s = simulate_trial(trial, cfg, seed);
  const FrameStream det_map = sim::detections_to_map(s.detections, cfg.tracker.sensor_offset);
  const FrameStream tracks = track_stream(s.detections, cfg.tracker, cfg.classes);

  EvalOptions d_opt{EvalMode::Detection, cfg.iou_threshold, cfg.alpha_sweep};
  EvalOptions t_opt{EvalMode::Tracklet, cfg.iou_threshold, cfg.alpha_sweep};
  return {trial, evaluate(s.ground_truth, det_map, d_opt).overall, evaluate(s.ground_truth, tracks, t_opt).overall};
}

/// Mean of the defined values only; empty when none is defined.
struct MeanRow {
  std::optional<double> avg_iou, pos_rmse, yaw_rmse, det_a, hota;
  int trials = 0;
};

namespace detail {

inline std::optional<double> mean_of(const std::vector<std::optional<double>>& vals) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : vals) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

template <typename Get>
std::optional<double> mean_field(const std::vector<const MetricsReport*>& rows, Get get) {
  std::vector<std::optional<double>> vals;
  for (const auto* r : rows) vals.push_back(get(*r));
  return mean_of(vals);
}

inline MeanRow mean_row(const std::vector<const MetricsReport*>& rows) {
  MeanRow m;
  m.trials = static_cast<int>(rows.size());
  m.avg_iou = mean_field(rows, [](const MetricsReport& r) { return r.avg_iou; });
  m.pos_rmse = mean_field(rows, [](const MetricsReport& r) { return r.pos_rmse; });
  m.yaw_rmse = mean_field(rows, [](const MetricsReport& r) { return r.yaw_rmse; });
  m.det_a = mean_field(rows, [](const MetricsReport& r) { return r.det_a; });
  m.hota = mean_field(rows, [](const MetricsReport& r) { return r.hota; });
  return m;
}

}  // namespace detail

struct CampaignResult {
  std::uint64_t seed = 0;
  std::vector<TrialResult> trials;                // campaign order
  std::vector<std::string> class_order;           // first-appearance order
  std::map<std::string, MeanRow> class_detection;
  std::map<std::string, MeanRow> class_tracklet;
  MeanRow ave_detection;                          // mean of the class rows
  MeanRow ave_tracklet;
};

inline CampaignResult aggregate(std::uint64_t seed, std::vector<TrialResult> trials) {
  CampaignResult out;
  out.seed = seed;
  out.trials = std::move(trials);
  std::map<std::string, std::vector<const MetricsReport*>> d_rows, t_rows;
  for (const auto& r : out.trials) {
    if (std::find(out.class_order.begin(), out.class_order.end(), r.trial.class_id) == out.class_order.end()) {
      out.class_order.push_back(r.trial.class_id);
    }
    d_rows[r.trial.class_id].push_back(&r.detection);
    t_rows[r.trial.class_id].push_back(&r.tracklet);
  }
  std::vector<std::optional<double>> di, dp, dy, dd, ti, tp, ty, td, th;
  for (const auto& cls : out.class_order) {
    const MeanRow d = detail::mean_row(d_rows[cls]);
    const MeanRow t = detail::mean_row(t_rows[cls]);
    out.class_detection[cls] = d;
    out.class_tracklet[cls] = t;
    di.push_back(d.avg_iou);
    dp.push_back(d.pos_rmse);
    dy.push_back(d.yaw_rmse);
    dd.push_back(d.det_a);
    ti.push_back(t.avg_iou);
    tp.push_back(t.pos_rmse);
    ty.push_back(t.yaw_rmse);
    td.push_back(t.det_a);
    th.push_back(t.hota);
  }
  out.ave_detection = {detail::mean_of(di), detail::mean_of(dp), detail::mean_of(dy), detail::mean_of(dd),
                       std::nullopt, static_cast<int>(out.trials.size())};
  out.ave_tracklet = {detail::mean_of(ti), detail::mean_of(tp), detail::mean_of(ty), detail::mean_of(td),
                      detail::mean_of(th), static_cast<int>(out.trials.size())};
  return out;
}

/// Runs every trial; `jobs` > 1 spreads trials over threads. Results do not depend on `jobs`.
inline CampaignResult run_campaign(const std::vector<doe::TrialSpec>& trials, const RunConfig& cfg,
                                   std::uint64_t seed, unsigned jobs = 1) {
  cfg.validate();
  std::vector<TrialResult> results(trials.size());
  if (jobs <= 1 || trials.size() <= 1) {
    for (std::size_t i = 0; i < trials.size(); ++i) results[i] = run_trial(trials[i], cfg, seed);
    return aggregate(seed, std::move(results));
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < trials.size(); i = next++) {
      try {
        results[i] = run_trial(trials[i], cfg, seed);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(trials.size()));
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return aggregate(seed, std::move(results));
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace io {

inline json mean_row_json(const MeanRow& m, EvalMode mode) {
  json j;
  j["avg_iou"] = optional_number(m.avg_iou);
  j["pos_rmse_m"] = optional_number(m.pos_rmse);
  j["yaw_rmse_deg"] = m.yaw_rmse ? json(rad2deg(*m.yaw_rmse)) : json(nullptr);
  j["det_a"] = optional_number(m.det_a);
  j["hota"] = mode == EvalMode::Tracklet ? optional_number(m.hota) : json(nullptr);
  j["trials"] = m.trials;
  return j;
}

inline json campaign_json(const CampaignResult& c) {
  json j;
  j["seed"] = c.seed;
  j["trial_count"] = c.trials.size();
  json trials = json::array();
  for (const auto& r : c.trials) {
    json t;
    t["trial"] = trial_json(r.trial);
    t["detection"] = report_json(r.detection, EvalMode::Detection);
    t["tracklet"] = report_json(r.tracklet, EvalMode::Tracklet);
    trials.push_back(std::move(t));
  }
  json classes = json::object();
  for (const auto& cls : c.class_order) {
    classes[cls] = {{"detection", mean_row_json(c.class_detection.at(cls), EvalMode::Detection)},
                    {"tracklet", mean_row_json(c.class_tracklet.at(cls), EvalMode::Tracklet)}};
  }
  j["per_class"] = std::move(classes);
  j["average"] = {{"detection", mean_row_json(c.ave_detection, EvalMode::Detection)},
                  {"tracklet", mean_row_json(c.ave_tracklet, EvalMode::Tracklet)}};
  j["trials"] = std::move(trials);
  return j;
}

inline TableRow table_row(const std::string& label, const std::string& row, const MeanRow& m) {
  return {label, row, m.avg_iou, m.pos_rmse, m.yaw_rmse, m.det_a, row == "T" ? m.hota : std::nullopt};
}

/// Class rows in the usual display order (MW, SW, MSU first), then the average.
inline std::string campaign_table(const CampaignResult& c) {
  std::vector<std::string> order;
  for (const char* preferred : {"MW", "SW", "MSU"}) {
    if (c.class_detection.count(preferred)) order.emplace_back(preferred);
  }
  for (const auto& cls : c.class_order) {
    if (std::find(order.begin(), order.end(), cls) == order.end()) order.push_back(cls);
  }
  std::vector<TableRow> rows;
  for (const auto& cls : order) {
    rows.push_back(table_row(cls, "D", c.class_detection.at(cls)));
    rows.push_back(table_row("", "T", c.class_tracklet.at(cls)));
  }
  rows.push_back(table_row("Ave", "D", c.ave_detection));
  rows.push_back(table_row("", "T", c.ave_tracklet));
  return format_table(rows);
}

}  // namespace io

}  // namespace obbtrack
