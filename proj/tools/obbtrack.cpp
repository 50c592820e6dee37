// obbtrack command-line front end: design generation, simulation, tracking, scoring.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "obbtrack/config.hpp"
#include "obbtrack/doe.hpp"
#include "obbtrack/io.hpp"
#include "obbtrack/pipeline.hpp"

namespace {

using namespace obbtrack;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Usage problems discovered after CLI parsing (unknown trial, bad block name, ...).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

std::vector<doe::TrialSpec> load_sheet(const std::string& path) {
  if (path.empty()) return doe::default_campaign();
  std::ifstream in(path);
  if (!in) throw Error("cannot open trial sheet '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, "", std::string("trial sheet is not valid JSON: ") + e.what());
  }
  return io::parse_trial_sheet(j);
}

std::vector<doe::TrialSpec> campaign_for(const std::vector<std::string>& blocks) {
  if (blocks.empty()) return doe::default_campaign();
  try {
    return doe::campaign(blocks);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

// Map-frame copy of any stream, using the header's mounting offset for sensor-frame files.
FrameStream to_map(const io::FrameFile& f) {
  if (f.header.frame == io::CoordFrame::Map) return f.frames;
  return sim::detections_to_map(f.frames, f.header.sensor_offset);
}

struct DoeArgs {
  std::vector<std::string> blocks;
  std::string out;
};

struct SimulateArgs {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string sheet;
  std::string config;
  bool zero_noise = false;
  std::string gt_out;
  std::string det_out;
};

struct TrackArgs {
  std::string input;
  std::string config;
  std::string out;
};

struct EvaluateArgs {
  std::string gt;
  std::string pred;
  std::string mode = "tracklet";
  std::string json_out;
  std::string config;
};

struct CampaignArgs {
  std::uint64_t seed = 0;
  std::string config;
  std::string out;
  unsigned jobs = 1;
  std::vector<std::string> blocks;
};

int run_doe(const DoeArgs& a) {
  const auto trials = campaign_for(a.blocks);
  write_text(a.out, io::trial_sheet_json(trials).dump(2) + "\n");
  return kExitOk;
}

int run_simulate(const SimulateArgs& a) {
  RunConfig cfg = resolve_config(a.config);
  if (a.zero_noise) cfg.noise = sim::NoiseModel::null();
  const auto trials = load_sheet(a.sheet);
  const doe::TrialSpec* trial = nullptr;
  for (const auto& t : trials) {
    if (t.trial_id == a.trial) trial = &t;
  }
  if (trial == nullptr) throw UsageError("unknown trial id " + std::to_string(a.trial));
  const TrialStreams s = simulate_trial(*trial, cfg, a.seed);
  io::StreamHeader gt_header = io::StreamHeader::for_kind(io::StreamKind::GroundTruth);
  io::StreamHeader det_header = io::StreamHeader::for_kind(io::StreamKind::Detections);
  det_header.sensor_offset = cfg.sim.sensor_offset;
  io::write_frames_file(a.gt_out, gt_header, s.ground_truth);
  io::write_frames_file(a.det_out, det_header, s.detections);
  return kExitOk;
}

int run_track(const TrackArgs& a) {
  RunConfig cfg = resolve_config(a.config);
  const io::FrameFile in = io::read_frames_file(a.input);
  std::string text;
  if (in.has_header) {
    FrameStream input = in.frames;
    if (in.header.frame == io::CoordFrame::Map) {
      for (auto& f : input) f.robot = PlanarPose(0.0, 0.0, 0.0, f.t);
      cfg.tracker.sensor_offset = PlanarPose{};
    } else {
      cfg.tracker.sensor_offset = in.header.sensor_offset;
    }
    for (auto& f : input) {
      for (auto& b : f.boxes) b.id.reset();
    }
    const FrameStream tracks = track_stream(input, cfg.tracker, cfg.classes);
    io::StreamHeader header = io::StreamHeader::for_kind(io::StreamKind::Tracklets);
    FrameStream out = tracks;
    for (std::size_t i = 0; i < out.size(); ++i) out[i].robot = in.frames[i].robot;
    text = io::frames_to_string(header, out);
  }
  write_text(a.out, text);
  return kExitOk;
}

int run_evaluate(const EvaluateArgs& a) {
  RunConfig cfg = resolve_config(a.config);
  EvalOptions opt;
  if (a.mode == "detection") {
    opt.mode = EvalMode::Detection;
  } else if (a.mode == "tracklet") {
    opt.mode = EvalMode::Tracklet;
  } else {
    throw UsageError("--mode must be 'detection' or 'tracklet'");
  }
  opt.iou_threshold = cfg.iou_threshold;
  opt.alpha_sweep = cfg.alpha_sweep;
  const FrameStream gt = to_map(io::read_frames_file(a.gt));
  const FrameStream pred = to_map(io::read_frames_file(a.pred));
  const EvaluationResult r = evaluate(gt, pred, opt);

  std::vector<io::TableRow> rows;
  for (const auto& [cls, rep] : r.per_class) rows.push_back(io::table_row(cls, opt.mode, rep));
  rows.push_back(io::table_row("All", opt.mode, r.overall));
  std::cout << io::format_table(rows);
  if (!a.json_out.empty()) write_text(a.json_out, io::evaluation_json(r, opt.mode).dump(2) + "\n");
  return kExitOk;
}

int run_campaign_cmd(const CampaignArgs& a) {
  RunConfig cfg = resolve_config(a.config);
  const auto trials = campaign_for(a.blocks);
  const CampaignResult c = run_campaign(trials, cfg, a.seed, a.jobs);
  const std::string dir = a.out.empty() ? cfg.output_dir : a.out;
  std::filesystem::create_directories(dir);
  const std::string table = io::campaign_table(c);
  write_text((std::filesystem::path(dir) / "report.json").string(), io::campaign_json(c).dump(2) + "\n");
  write_text((std::filesystem::path(dir) / "report.txt").string(), table);
  std::cout << table;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oriented-box multi-object tracking: design, simulation, tracking and evaluation"};
  app.require_subcommand(1);

  DoeArgs doe_args;
  auto* doe_cmd = app.add_subcommand("doe", "Experiment design");
  doe_cmd->require_subcommand(1);
  auto* gen = doe_cmd->add_subcommand("gen", "Write the trial sheet as JSON");
  gen->add_option("--block", doe_args.blocks, "Layout block(s) to include (default: all)");
  gen->add_option("--out", doe_args.out, "Output path (default: stdout)");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate ground truth and detections for one trial");
  sim_cmd->add_option("--trial", sim_args.trial, "Trial id")->required();
  sim_cmd->add_option("--seed", sim_args.seed, "Random seed")->required();
  sim_cmd->add_option("--sheet", sim_args.sheet, "Trial sheet (default: built-in campaign)");
  sim_cmd->add_option("--config", sim_args.config, "Configuration file");
  sim_cmd->add_flag("--zero-noise", sim_args.zero_noise, "Emit uncorrupted detections");
  sim_cmd->add_option("--gt-out", sim_args.gt_out, "Ground-truth output")->required();
  sim_cmd->add_option("--det-out", sim_args.det_out, "Detection output")->required();

  TrackArgs track_args;
  auto* track_cmd = app.add_subcommand("track", "Track a detection stream");
  track_cmd->add_option("--input", track_args.input, "Detection stream")->required();
  track_cmd->add_option("--config", track_args.config, "Configuration file");
  track_cmd->add_option("--out", track_args.out, "Tracklet output (default: stdout)");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  eval_cmd->add_option("--gt", eval_args.gt, "Ground-truth stream")->required();
  eval_cmd->add_option("--pred", eval_args.pred, "Prediction stream")->required();
  eval_cmd->add_option("--mode", eval_args.mode, "detection or tracklet");
  eval_cmd->add_option("--json", eval_args.json_out, "Write the JSON report here ('-' for stdout)");
  eval_cmd->add_option("--config", eval_args.config, "Configuration file");

  CampaignArgs camp_args;
  auto* camp_cmd = app.add_subcommand("campaign", "Full campaign");
  camp_cmd->require_subcommand(1);
  auto* camp_run = camp_cmd->add_subcommand("run", "Simulate, track and evaluate every trial");
  camp_run->add_option("--seed", camp_args.seed, "Random seed")->required();
  camp_run->add_option("--config", camp_args.config, "Configuration file");
  camp_run->add_option("--out", camp_args.out, "Report directory (default: output.dir)");
  camp_run->add_option("--jobs", camp_args.jobs, "Worker threads")->check(CLI::PositiveNumber);
  camp_run->add_option("--block", camp_args.blocks, "Restrict to layout block(s)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return run_doe(doe_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (track_cmd->parsed()) return run_track(track_args);
    if (eval_cmd->parsed()) return run_evaluate(eval_args);
    if (camp_run->parsed()) return run_campaign_cmd(camp_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InternalStateError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
