#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "obbtrack/doe.hpp"
#include "obbtrack/error.hpp"
#include "obbtrack/frame.hpp"
#include "obbtrack/metrics.hpp"

namespace obbtrack::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kFrameSchema = "obbtrack.frames";
inline constexpr int kFrameSchemaVersion = 1;

enum class StreamKind { GroundTruth, Detections, Tracklets };
enum class CoordFrame { Map, Sensor };

inline const char* to_string(StreamKind k) {
  switch (k) {
    case StreamKind::GroundTruth: return "ground_truth";
    case StreamKind::Detections: return "detections";
    case StreamKind::Tracklets: return "tracklets";
  }
  return "?";
}

inline const char* to_string(CoordFrame f) { return f == CoordFrame::Map ? "map" : "sensor"; }

/// First line of every frame file.
struct StreamHeader {
  StreamKind kind = StreamKind::GroundTruth;
  CoordFrame frame = CoordFrame::Map;
  PlanarPose sensor_offset{};

  static StreamHeader for_kind(StreamKind k) {
    return {k, k == StreamKind::Detections ? CoordFrame::Sensor : CoordFrame::Map, {}};
  }
};

struct FrameFile {
  StreamHeader header;
  FrameStream frames;
  bool has_header = false;  // false only for empty input
};

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

inline json header_json(const StreamHeader& h) {
  json j;
  j["schema"] = kFrameSchema;
  j["version"] = kFrameSchemaVersion;
  j["kind"] = to_string(h.kind);
  j["frame"] = to_string(h.frame);
  j["sensor_offset"] = {{"x", h.sensor_offset.x}, {"y", h.sensor_offset.y}, {"heading", h.sensor_offset.heading}};
  return j;
}

inline json frame_json(const FrameRecord& f, StreamKind kind) {
  json j;
  j["t"] = f.t;
  j["robot"] = {{"x", f.robot.x}, {"y", f.robot.y}, {"heading", f.robot.heading}};
  json boxes = json::array();
  for (const auto& fb : f.boxes) {
    json b;
    if (fb.id) b["id"] = *fb.id;
    const OrientedBox& box = fb.box;
    b["class"] = box.class_id();
    b["cx"] = box.center().x;
    b["cy"] = box.center().y;
    b["cz"] = box.center().z;
    b["l"] = box.length();
    b["w"] = box.width();
    b["h"] = box.height();
    b["yaw"] = box.yaw();
    if (kind == StreamKind::Detections) b["score"] = box.confidence();
    boxes.push_back(std::move(b));
  }
  j["boxes"] = std::move(boxes);
  return j;
}

inline void write_frames(std::ostream& os, const StreamHeader& header, const FrameStream& frames) {
  os << header_json(header).dump() << '\n';
  for (const auto& f : frames) os << frame_json(f, header.kind).dump() << '\n';
}

inline std::string frames_to_string(const StreamHeader& header, const FrameStream& frames) {
  std::ostringstream os;
  write_frames(os, header, frames);
  return os.str();
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

namespace detail {

inline double number_field(const nlohmann::json& obj, const char* key, std::size_t line, const std::string& ctx) {
  const std::string field = ctx.empty() ? key : ctx + "." + key;
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, field, "missing");
  if (!it->is_number()) throw ParseError(line, field, "expected a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ParseError(line, field, "not finite");
  return v;
}

inline PlanarPose pose_field(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, key, "missing");
  if (!it->is_object()) throw ParseError(line, key, "expected an object");
  return PlanarPose(number_field(*it, "x", line, key), number_field(*it, "y", line, key),
                    number_field(*it, "heading", line, key));
}

inline StreamHeader parse_header(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "", "header must be an object");
  auto schema = j.find("schema");
  if (schema == j.end() || !schema->is_string() || schema->get<std::string>() != kFrameSchema) {
    throw ParseError(line, "schema", std::string("expected \"") + kFrameSchema + "\"");
  }
  auto version = j.find("version");
  if (version == j.end() || !version->is_number_integer() || version->get<int>() != kFrameSchemaVersion) {
    throw ParseError(line, "version", "unsupported schema version");
  }
  StreamHeader h;
  auto kind = j.find("kind");
  if (kind == j.end() || !kind->is_string()) throw ParseError(line, "kind", "missing");
  const std::string k = kind->get<std::string>();
  if (k == "ground_truth") {
    h.kind = StreamKind::GroundTruth;
  } else if (k == "detections") {
    h.kind = StreamKind::Detections;
  } else if (k == "tracklets") {
    h.kind = StreamKind::Tracklets;
  } else {
    throw ParseError(line, "kind", "unknown stream kind '" + k + "'");
  }
  auto frame = j.find("frame");
  if (frame == j.end() || !frame->is_string()) throw ParseError(line, "frame", "missing");
  const std::string fr = frame->get<std::string>();
  if (fr == "map") {
    h.frame = CoordFrame::Map;
  } else if (fr == "sensor") {
    h.frame = CoordFrame::Sensor;
  } else {
    throw ParseError(line, "frame", "expected \"map\" or \"sensor\"");
  }
  h.sensor_offset = pose_field(j, "sensor_offset", line);
  return h;
}

inline FrameRecord parse_record(const nlohmann::json& j, std::size_t line, StreamKind kind) {
  if (!j.is_object()) throw ParseError(line, "", "record must be an object");
  FrameRecord f;
  f.t = number_field(j, "t", line, "");
  const PlanarPose robot = pose_field(j, "robot", line);
  f.robot = PlanarPose(robot.x, robot.y, robot.heading, f.t);
  auto boxes = j.find("boxes");
  if (boxes == j.end()) throw ParseError(line, "boxes", "missing");
  if (!boxes->is_array()) throw ParseError(line, "boxes", "expected an array");
  for (std::size_t i = 0; i < boxes->size(); ++i) {
    const auto& b = (*boxes)[i];
    const std::string ctx = "boxes[" + std::to_string(i) + "]";
    if (!b.is_object()) throw ParseError(line, ctx, "expected an object");
    FrameBox fb;
    if (auto id = b.find("id"); id != b.end()) {
      if (!id->is_number_integer()) throw ParseError(line, ctx + ".id", "expected an integer");
      fb.id = id->get<std::int64_t>();
    }
    auto cls = b.find("class");
    if (cls == b.end() || !cls->is_string()) throw ParseError(line, ctx + ".class", "expected a string");
    double score = 1.0;
    if (b.contains("score")) score = number_field(b, "score", line, ctx);
    if (kind == StreamKind::Detections && !b.contains("score")) throw ParseError(line, ctx + ".score", "missing");
    try {
      fb.box = OrientedBox({number_field(b, "cx", line, ctx), number_field(b, "cy", line, ctx),
                            number_field(b, "cz", line, ctx)},
                           {number_field(b, "l", line, ctx), number_field(b, "w", line, ctx),
                            number_field(b, "h", line, ctx)},
                           number_field(b, "yaw", line, ctx), cls->get<std::string>(), score);
    } catch (const InvalidInput& e) {
      throw ParseError(line, ctx, e.what());
    }
    f.boxes.push_back(std::move(fb));
  }
  return f;
}

}  // namespace detail

/// Reads a header line followed by one frame record per line. Blank lines are skipped.
/// An empty input yields an empty stream with a default header.
inline FrameFile read_frames(std::istream& is, bool require_ordered = true) {
  FrameFile out;
  std::string text;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(is, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, "", std::string("malformed JSON: ") + e.what());
    }
    if (!have_header) {
      out.header = detail::parse_header(j, line_no);
      have_header = true;
      out.has_header = true;
      continue;
    }
    FrameRecord rec = detail::parse_record(j, line_no, out.header.kind);
    if (require_ordered && !out.frames.empty() && rec.t <= out.frames.back().t) {
      throw StreamOrderError("line " + std::to_string(line_no) + ": timestamp " + std::to_string(rec.t) +
                             " not after previous record");
    }
    out.frames.push_back(std::move(rec));
  }
  return out;
}

inline FrameFile read_frames_file(const std::string& path, bool require_ordered = true) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return read_frames(in, require_ordered);
}

inline void write_frames_file(const std::string& path, const StreamHeader& header, const FrameStream& frames) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_frames(out, header, frames);
  if (!out) throw Error("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Trial sheet
// ---------------------------------------------------------------------------

inline json trial_json(const doe::TrialSpec& t) {
  json j;
  j["trial_id"] = t.trial_id;
  j["block"] = t.block;
  j["class"] = t.class_id;
  j["num_objects"] = t.num_objects;
  j["matrix_row"] = t.matrix_row;
  j["series_number"] = t.series_number;
  const auto cells = t.factors.cells();
  j["object_motion"] = cells[0];
  j["robot_angular"] = cells[1];
  j["occlusion"] = cells[2];
  j["initial_distance"] = cells[3];
  j["robot_linear_speed"] = t.robot_linear_speed();
  j["robot_angular_speed"] = t.robot_angular_speed();
  j["initial_distance_m"] = t.factors.initial_distance;
  j["object_motion_collapsed"] = t.object_motion_collapsed;
  return j;
}

inline json trial_sheet_json(const std::vector<doe::TrialSpec>& trials) {
  json arr = json::array();
  for (const auto& t : trials) arr.push_back(trial_json(t));
  return arr;
}

namespace detail {

template <typename Enum, std::size_t N>
Enum level_from_label(const std::array<Enum, N>& levels, const std::string& text, const std::string& field) {
  for (Enum e : levels) {
    if (doe::label(e) == text) return e;
  }
  throw ParseError(0, field, "unknown level '" + text + "'");
}

}  // namespace detail

inline std::vector<doe::TrialSpec> parse_trial_sheet(const nlohmann::json& arr) {
  if (!arr.is_array()) throw ParseError(0, "", "trial sheet must be a JSON array");
  std::vector<doe::TrialSpec> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& j = arr[i];
    const std::string ctx = "[" + std::to_string(i) + "]";
    try {
      doe::TrialSpec t;
      t.trial_id = j.at("trial_id").get<int>();
      t.block = j.at("block").get<std::string>();
      t.class_id = j.at("class").get<std::string>();
      t.num_objects = j.at("num_objects").get<int>();
      t.matrix_row = j.at("matrix_row").get<int>();
      t.series_number = j.at("series_number").get<int>();
      t.factors.object_motion =
          detail::level_from_label(doe::kObjectMotionLevels, j.at("object_motion").get<std::string>(), ctx);
      t.factors.robot_angular =
          detail::level_from_label(doe::kRobotAngularLevels, j.at("robot_angular").get<std::string>(), ctx);
      t.factors.occlusion = detail::level_from_label(doe::kOcclusionLevels, j.at("occlusion").get<std::string>(), ctx);
      t.factors.initial_distance = j.at("initial_distance_m").get<double>();
      doe::distance_label(t.factors.initial_distance);
      t.object_motion_collapsed = j.value("object_motion_collapsed", false);
      if (t.num_objects < 1) throw ParseError(0, ctx + ".num_objects", "must be at least 1");
      out.push_back(t);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(0, ctx, e.what());
    } catch (const InvalidInput& e) {
      throw ParseError(0, ctx, e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metric reports
// ---------------------------------------------------------------------------

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json report_json(const MetricsReport& r, EvalMode mode) {
  json j;
  j["avg_iou"] = optional_number(r.avg_iou);
  j["pos_rmse_m"] = optional_number(r.pos_rmse);
  if (r.pos_rmse_axes) {
    j["pos_rmse_axes_m"] = {{"x", r.pos_rmse_axes->x}, {"y", r.pos_rmse_axes->y}, {"z", r.pos_rmse_axes->z}};
  } else {
    j["pos_rmse_axes_m"] = nullptr;
  }
  j["yaw_rmse_rad"] = optional_number(r.yaw_rmse);
  j["yaw_rmse_deg"] = r.yaw_rmse ? json(rad2deg(*r.yaw_rmse)) : json(nullptr);
  j["det_a"] = optional_number(r.det_a);
  j["hota"] = mode == EvalMode::Tracklet ? optional_number(r.hota) : json(nullptr);
  j["ass_a"] = mode == EvalMode::Tracklet ? optional_number(r.ass_a) : json(nullptr);
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["id_switches"] = r.id_switches;
  j["gt_count"] = r.gt_count;
  j["pred_count"] = r.pred_count;
  j["frames"] = r.frames;
  return j;
}

inline json evaluation_json(const EvaluationResult& e, EvalMode mode) {
  json j;
  j["mode"] = mode == EvalMode::Detection ? "detection" : "tracklet";
  j["overall"] = report_json(e.overall, mode);
  json per = json::object();
  for (const auto& [cls, r] : e.per_class) per[cls] = report_json(r, mode);
  j["per_class"] = std::move(per);
  return j;
}

/// Table cells in the usual result layout: percent, metres, degrees; "-" when absent.
struct TableRow {
  std::string label;
  std::string row;  // "D" or "T"
  std::optional<double> iou, pos, rot_rad, det_a, hota;
};

inline std::string format_cell(const std::optional<double>& v, double scale, const char* unit, int width) {
  std::ostringstream os;
  if (!v) {
    os << std::setw(width) << "-";
  } else {
    std::ostringstream num;
    num << std::fixed << std::setprecision(2) << (*v * scale) << unit;
    os << std::setw(width) << num.str();
  }
  return os.str();
}

inline std::string format_table(const std::vector<TableRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "" << std::setw(3) << "" << std::right << std::setw(10) << "IoU" << std::setw(10)
     << "Pos" << std::setw(11) << "Rot" << std::setw(10) << "DetA" << std::setw(10) << "HOTA" << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(8) << r.label << std::setw(3) << r.row << std::right
       << format_cell(r.iou, 100.0, " %", 10) << format_cell(r.pos, 1.0, " m", 10)
       << format_cell(r.rot_rad ? std::optional<double>(rad2deg(*r.rot_rad)) : std::nullopt, 1.0, " deg", 11)
       << format_cell(r.det_a, 100.0, " %", 10) << format_cell(r.hota, 100.0, " %", 10) << '\n';
  }
  return os.str();
}

inline TableRow table_row(const std::string& label, EvalMode mode, const MetricsReport& r) {
  return {label,     mode == EvalMode::Detection ? "D" : "T", r.avg_iou, r.pos_rmse, r.yaw_rmse, r.det_a,
          mode == EvalMode::Tracklet ? r.hota : std::nullopt};
}

}  // namespace obbtrack::io
