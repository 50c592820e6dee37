#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "obbtrack/error.hpp"

namespace obbtrack::doe {

/// Combined robot-linear / object-motion factor (six levels, mobile classes only).
enum class ObjectMotion {
  StationaryNlNa,  // robot still, object still
  StationaryPlNa,  // object translates
  StationaryNlPa,  // object rotates
  StationaryPlPa,  // object translates and rotates
  Robot025,        // robot drives 0.25 m/s, object still
  Robot050,        // robot drives 0.5 m/s, object still
};

enum class RobotAngular { Stationary, Slow, Fast };  // 0, 0.25, 0.5 rad/s
enum class Occlusion { None, Below20, Above40 };

inline constexpr std::array<ObjectMotion, 6> kObjectMotionLevels{
    ObjectMotion::StationaryNlNa, ObjectMotion::StationaryPlNa, ObjectMotion::StationaryNlPa,
    ObjectMotion::StationaryPlPa, ObjectMotion::Robot025,       ObjectMotion::Robot050};
inline constexpr std::array<RobotAngular, 3> kRobotAngularLevels{RobotAngular::Stationary, RobotAngular::Slow,
                                                                 RobotAngular::Fast};
inline constexpr std::array<Occlusion, 3> kOcclusionLevels{Occlusion::None, Occlusion::Below20, Occlusion::Above40};
inline constexpr std::array<double, 3> kInitialDistances{2.5, 3.5, 4.5};

// Cell labels as printed in the design table.
inline std::string_view label(ObjectMotion m) {
  switch (m) {
    case ObjectMotion::StationaryNlNa: return "Stationary - NL - NA";
    case ObjectMotion::StationaryPlNa: return "Stationary - PL - NA";
    case ObjectMotion::StationaryNlPa: return "Stationary - NL - PA";
    case ObjectMotion::StationaryPlPa: return "Stationary - PL - PA";
    case ObjectMotion::Robot025: return "0.25 m/s";
    case ObjectMotion::Robot050: return "0.5 m/s";
  }
  return "?";
}

inline std::string_view label(RobotAngular a) {
  switch (a) {
    case RobotAngular::Stationary: return "Stationary";
    case RobotAngular::Slow: return "0.25 rad/s";
    case RobotAngular::Fast: return "0.5 rad/s";
  }
  return "?";
}

inline std::string_view label(Occlusion o) {
  switch (o) {
    case Occlusion::None: return "No";
    case Occlusion::Below20: return "< 20%";
    case Occlusion::Above40: return "> 40%";
  }
  return "?";
}

inline std::string distance_label(double d) {
  if (d == 2.5) return "2.5 m";
  if (d == 3.5) return "3.5 m";
  if (d == 4.5) return "4.5 m";
  throw InvalidInput("initial distance " + std::to_string(d) + " is not a design level");
}

inline double robot_linear_speed(ObjectMotion m) {
  switch (m) {
    case ObjectMotion::Robot025: return 0.25;
    case ObjectMotion::Robot050: return 0.5;
    default: return 0.0;
  }
}

inline double robot_angular_speed(RobotAngular a) {
  switch (a) {
    case RobotAngular::Stationary: return 0.0;
    case RobotAngular::Slow: return 0.25;
    case RobotAngular::Fast: return 0.5;
  }
  return 0.0;
}

inline bool object_translates(ObjectMotion m) {
  return m == ObjectMotion::StationaryPlNa || m == ObjectMotion::StationaryPlPa;
}
inline bool object_rotates(ObjectMotion m) {
  return m == ObjectMotion::StationaryNlPa || m == ObjectMotion::StationaryPlPa;
}

struct FactorRow {
  ObjectMotion object_motion;
  RobotAngular robot_angular;
  Occlusion occlusion;
  double initial_distance;

  std::array<std::string, 4> cells() const {
    return {std::string(label(object_motion)), std::string(label(robot_angular)), std::string(label(occlusion)),
            distance_label(initial_distance)};
  }

  friend bool operator==(const FactorRow&, const FactorRow&) = default;
};

/// The 18-row mixed-level orthogonal array used for every layout block.
inline const std::array<FactorRow, 18>& oa_matrix() {
  using M = ObjectMotion;
  using A = RobotAngular;
  using O = Occlusion;
  static const std::array<FactorRow, 18> rows{{
      {M::StationaryNlNa, A::Stationary, O::None, 2.5},
      {M::StationaryNlNa, A::Slow, O::Below20, 3.5},
      {M::StationaryNlNa, A::Fast, O::Above40, 4.5},
      {M::StationaryPlNa, A::Stationary, O::None, 3.5},
      {M::StationaryPlNa, A::Slow, O::Below20, 4.5},
      {M::StationaryPlNa, A::Fast, O::Above40, 2.5},
      {M::StationaryNlPa, A::Stationary, O::Below20, 2.5},
      {M::StationaryNlPa, A::Slow, O::Above40, 3.5},
      {M::StationaryNlPa, A::Fast, O::None, 4.5},
      {M::StationaryPlPa, A::Stationary, O::Above40, 4.5},
      {M::StationaryPlPa, A::Slow, O::None, 2.5},
      {M::StationaryPlPa, A::Fast, O::Below20, 3.5},
      {M::Robot025, A::Stationary, O::Below20, 4.5},
      {M::Robot025, A::Slow, O::Above40, 2.5},
      {M::Robot025, A::Fast, O::None, 3.5},
      {M::Robot050, A::Stationary, O::Above40, 3.5},
      {M::Robot050, A::Slow, O::None, 4.5},
      {M::Robot050, A::Fast, O::Below20, 2.5},
  }};
  return rows;
}

struct ColumnBalance {
  std::string column;
  std::map<std::string, int> level_counts;
  int expected_per_level = 0;
  bool balanced = false;
};

struct PairImbalance {
  std::string columns;  // "a x b"
  std::string detail;
};

struct BalanceReport {
  std::vector<ColumnBalance> columns;
  std::vector<PairImbalance> pair_imbalances;
  bool level_balanced = false;  // every column has equal level counts

  bool ok() const { return level_balanced; }
};

/// Level-balance check per column, plus a list of column pairs whose level combinations
/// do not occur equally often. Pairwise imbalance is reported, not treated as failure:
/// mixed-level arrays of this size are not pairwise orthogonal for the six-level column.
inline BalanceReport balance_check(const std::vector<FactorRow>& rows) {
  std::vector<std::array<std::string, 4>> cells;
  for (const auto& r : rows) cells.push_back(r.cells());
  const std::array<std::string, 4> names{"object_motion", "robot_angular", "occlusion", "initial_distance"};
  const std::array<int, 4> level_count{6, 3, 3, 3};

  BalanceReport report;
  report.level_balanced = !rows.empty();
  for (std::size_t c = 0; c < 4; ++c) {
    ColumnBalance col;
    col.column = names[c];
    for (const auto& row : cells) ++col.level_counts[row[c]];
    col.expected_per_level = static_cast<int>(rows.size()) / level_count[c];
    col.balanced = rows.size() % static_cast<std::size_t>(level_count[c]) == 0 &&
                   static_cast<int>(col.level_counts.size()) == level_count[c];
    for (const auto& [lvl, n] : col.level_counts) {
      if (n != col.expected_per_level) col.balanced = false;
    }
    report.level_balanced = report.level_balanced && col.balanced;
    report.columns.push_back(std::move(col));
  }

  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = a + 1; b < 4; ++b) {
      std::map<std::pair<std::string, std::string>, int> combos;
      for (const auto& row : cells) ++combos[{row[a], row[b]}];
      const int cells_total = level_count[a] * level_count[b];
      const bool full = static_cast<int>(combos.size()) == cells_total;
      int lo = rows.size() > 0 ? static_cast<int>(rows.size()) : 0;
      int hi = 0;
      for (const auto& [k, n] : combos) {
        lo = std::min(lo, n);
        hi = std::max(hi, n);
      }
      if (!full) lo = 0;
      if (lo != hi) {
        report.pair_imbalances.push_back(
            {names[a] + " x " + names[b], "combination counts range " + std::to_string(lo) + ".." + std::to_string(hi)});
      }
    }
  }
  return report;
}

inline BalanceReport balance_check(const std::array<FactorRow, 18>& rows) {
  return balance_check(std::vector<FactorRow>(rows.begin(), rows.end()));
}

// ---------------------------------------------------------------------------
// Campaign
// ---------------------------------------------------------------------------

/// A layout block: which asset class, how many instances, and where its trials are numbered
/// inside that class's own series (e.g. the two-unit storage block continues at 19).
struct LayoutBlock {
  std::string name;
  std::string class_id;
  int num_objects = 1;
  int series_offset = 0;
  bool stationary_asset = false;  // object movement levels collapse to still
};

inline const std::vector<LayoutBlock>& known_blocks() {
  static const std::vector<LayoutBlock> blocks{
      {"single-mw", "MW", 1, 0, false},
      {"single-msu", "MSU", 1, 0, false},
      {"two-msu", "MSU", 2, 18, false},
      {"single-sw", "SW", 1, 0, true},
  };
  return blocks;
}

inline const LayoutBlock& find_block(std::string_view name) {
  for (const auto& b : known_blocks()) {
    if (b.name == name) return b;
  }
  throw ConfigError("unknown layout block '" + std::string(name) + "'");
}

struct TrialSpec {
  int trial_id = 0;        // unique within the campaign, 1-based
  std::string block;
  std::string class_id;
  int num_objects = 1;
  int matrix_row = 1;      // 1..18
  int series_number = 1;   // numbering within the class series (1..36 for MSU)
  FactorRow factors{};
  bool object_motion_collapsed = false;

  double robot_linear_speed() const { return doe::robot_linear_speed(factors.object_motion); }
  double robot_angular_speed() const { return doe::robot_angular_speed(factors.robot_angular); }
};

/// Instantiates the matrix once per block, numbering trials consecutively.
inline std::vector<TrialSpec> campaign(const std::vector<std::string>& block_names) {
  std::vector<TrialSpec> out;
  int next_id = 1;
  for (const auto& name : block_names) {
    const LayoutBlock& block = find_block(name);
    const auto& rows = oa_matrix();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      TrialSpec t;
      t.trial_id = next_id++;
      t.block = block.name;
      t.class_id = block.class_id;
      t.num_objects = block.num_objects;
      t.matrix_row = static_cast<int>(i) + 1;
      t.series_number = block.series_offset + t.matrix_row;
      t.factors = rows[i];
      if (block.stationary_asset && (object_translates(rows[i].object_motion) || object_rotates(rows[i].object_motion))) {
        t.factors.object_motion = ObjectMotion::StationaryNlNa;
        t.object_motion_collapsed = true;
      }
      out.push_back(t);
    }
  }
  return out;
}

inline std::vector<std::string> default_block_names() { return {"single-mw", "single-msu", "two-msu", "single-sw"}; }

inline std::vector<TrialSpec> default_campaign() { return campaign(default_block_names()); }

}  // namespace obbtrack::doe
