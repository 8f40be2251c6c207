#include "loro/history.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace loro {

namespace {

std::string loc_text(const GridLoc& l) {
  return "(" + std::to_string(l.row) + ", " + std::to_string(l.col) + ")";
}

std::string loc_list_text(const std::vector<GridLoc>& locs) {
  std::string s;
  for (std::size_t i = 0; i < locs.size(); ++i) {
    if (i) s += ", ";
    s += loc_text(locs[i]);
  }
  return s;
}

std::string reward_number(double r, EnvKind kind) {
  if (kind == EnvKind::FrozenLake) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", r);
    return buf;
  }
  if (r == std::floor(r)) return std::to_string(static_cast<long>(r));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", r);
  return buf;
}

// "zero reward" / "one reward" / "a reward of -100"
std::string reward_phrase(double r, EnvKind kind) {
  if (r == 0.0) return "zero reward";
  if (r == 1.0) return "one reward";
  return "a reward of " + reward_number(r, kind);
}

}  // namespace

void EnvHistory::record_visit(GridLoc loc, double reward, bool hole) {
  visited.push_back({loc, reward, hole});
  auto add_unique = [](std::vector<GridLoc>& v, const GridLoc& l) {
    if (std::find(v.begin(), v.end(), l) == v.end()) v.push_back(l);
  };
  if (hole) {
    add_unique(holes, loc);
    return;
  }
  for (auto& [r, locs] : reward_groups) {
    if (r == reward) {
      add_unique(locs, loc);
      return;
    }
  }
  reward_groups.push_back({reward, {loc}});
}

std::string render_history(const EnvHistory& history, EnvKind kind) {
  if (history.mode == HistoryMode::None || history.empty()) return "";

  if (history.mode == HistoryMode::Concatenation) {
    const std::size_t n = history.visited.size();
    std::size_t start = 0;
    if (history.window && static_cast<std::size_t>(*history.window) < n)
      start = n - static_cast<std::size_t>(*history.window);
    std::string s;
    for (std::size_t i = start; i < n; ++i) {
      const VisitRecord& v = history.visited[i];
      if (i > start) s += " ";
      if (v.hole)
        s += "You visit location " + loc_text(v.loc) + " and fall into a hole.";
      else
        s += "You visit location " + loc_text(v.loc) + " and receive " +
             reward_phrase(v.reward, kind) + ".";
    }
    return s;
  }

  // Summary
  std::string s;
  if (kind == EnvKind::FrozenLake) {
    if (!history.holes.empty())
      s += "The holes are in locations: " + loc_list_text(history.holes) + ".";
    for (const auto& [r, locs] : history.reward_groups) {
      if (!s.empty()) s += " ";
      s += "You receive " + reward_phrase(r, kind) + " at locations: " + loc_list_text(locs) + ".";
    }
    return s;
  }

  // CliffWalking groups: the -100 group is the cliff and is listed first.
  std::vector<std::pair<double, const std::vector<GridLoc>*>> ordered;
  for (const auto& [r, locs] : history.reward_groups) ordered.push_back({r, &locs});
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [r, locs] : ordered) {
    if (!s.empty()) s += " ";
    if (r == -100.0) s += "Cliff: ";
    s += "Reward " + reward_number(r, kind) + " at locations: " + loc_list_text(*locs) + ".";
  }
  return s;
}

}  // namespace loro
