#pragma once

#include <optional>
#include <string>
#include <vector>

#include "loro/env.hpp"

namespace loro {

enum class HistoryMode { Summary, Concatenation, None };

struct GridLoc {
  int row = 0, col = 0;
  bool operator==(const GridLoc&) const = default;
};

struct VisitRecord {
  GridLoc loc;
  double reward = 0.0;
  bool hole = false;  // FrozenLake: terminal zero-reward cell
};

struct PrevStep {
  GridLoc loc;              // where the previous action was taken
  int action_external = 0;  // 1-based numbering
  double reward = 0.0;
};

// Reward log for the grid environments. The summary groups are kept
// incrementally and always equal the grouping of `visited`.
struct EnvHistory {
  HistoryMode mode = HistoryMode::Summary;
  std::optional<int> window;  // Concatenation: visits shown
  std::vector<VisitRecord> visited;

  std::vector<GridLoc> holes;  // dedup, first-visit order
  std::vector<std::pair<double, std::vector<GridLoc>>> reward_groups;

  std::optional<PrevStep> prev;

  void record_visit(GridLoc loc, double reward, bool hole);
  bool empty() const { return visited.empty(); }
};

// Summary mode groups locations by observed outcome; Concatenation emits
// per-visit sentences limited to the last `window` visits; None is empty.
// Phrasings differ per environment (holes wording for FrozenLake, cliff
// wording for CliffWalking).
std::string render_history(const EnvHistory& history, EnvKind kind);

}  // namespace loro
