#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "hyperplan/domain.hpp"
#include "hyperplan/solution.hpp"

namespace hyperplan {

enum class CostModel { ActionCount };

struct SearchConfig {
  std::size_t max_expansions = 1'000'000;
  CostModel cost_model = CostModel::ActionCount;
};

struct SearchStats {
  std::size_t expansions = 0;
  std::size_t generated = 0;
  std::size_t solution_actions = 0;
  std::size_t makespan = 0;
  std::chrono::nanoseconds wall_time{0};

  double wall_time_ms() const { return std::chrono::duration<double, std::milli>(wall_time).count(); }
};

struct PlanResult {
  SolutionHypergraph graph;
  std::vector<Action> actions;
  SearchStats stats;
};

/// Lower bound on the remaining action count. An object is well placed when
/// it and everything beneath it match its goal stack. Every other goal object
/// needs a Place, plus a Pick unless already held, plus one transfer step when
/// no single robot can carry it from where it is to its goal region.
class Heuristic {
 public:
  explicit Heuristic(const Problem& p) : problem_(&p) {
    const std::size_t n_regions = p.regions.size();
    direct_.assign(n_regions * n_regions, false);
    for (const auto& r : p.robots) {
      for (RegionIndex a : r.reach) {
        for (RegionIndex b : r.reach) direct_[a.get() * n_regions + b.get()] = true;
      }
    }
  }

  int operator()(const WorldState& s) const {
    const Problem& p = *problem_;
    int total = 0;
    for (const auto& g : p.goal) {
      const auto& have = s.regions[g.region.get()];
      std::size_t good = 0;
      while (good < have.size() && good < g.objects.size() && have[good] == g.objects[good]) ++good;
      for (std::size_t i = good; i < g.objects.size(); ++i) total += object_cost(s, g.objects[i], g.region);
    }
    return total;
  }

 private:
  int object_cost(const WorldState& s, ObjectIndex o, RegionIndex target) const {
    const Problem& p = *problem_;
    if (auto r = s.holder_of(o)) return p.robot(*r).reaches(target) ? 1 : 2;
    auto at = s.region_of(o);
    return direct_[at->get() * p.regions.size() + target.get()] ? 2 : 3;
  }

  const Problem* problem_;
  std::vector<bool> direct_;
};

/// Secondary ordering for nodes of equal f. Lower is preferred.
using TieBreak = std::function<int(const WorldState&)>;

/// Estimates how well a state sets up a later goal: the heuristic for that
/// goal plus two actions for every object stacked above one that must enter
/// the same goal stack before it. Among equal estimates, burying an object
/// that is needed sooner ranks worse.
class GoalPreference {
 public:
  explicit GoalPreference(const Problem& final_goal) : problem_(&final_goal), heuristic_(final_goal) {
    slot_.assign(final_goal.objects.size(), {kNone, 0});
    for (std::size_t g = 0; g < final_goal.goal.size(); ++g) {
      const auto& objs = final_goal.goal[g].objects;
      for (std::size_t i = 0; i < objs.size(); ++i) slot_[objs[i].get()] = {g, i};
      depth_ = std::max(depth_, objs.size());
    }
  }

  int operator()(const WorldState& s) const {
    const Problem& p = *problem_;
    int blocked = 0, urgency = 0;
    for (std::size_t r = 0; r < s.regions.size(); ++r) {
      if (!p.regions[r].is_stack()) continue;
      const auto& st = s.regions[r];
      const GoalStack* here = p.goal_for(RegionIndex(r));
      std::size_t good = 0;
      while (here && good < st.size() && good < here->objects.size() && st[good] == here->objects[good]) ++good;
      for (std::size_t i = good + 1; i < st.size(); ++i) {
        auto [gx, px] = slot_[st[i].get()];
        if (gx == kNone) continue;
        for (std::size_t j = good; j < i; ++j) {
          auto [gy, py] = slot_[st[j].get()];
          if (gy == gx && py < px) {
            ++blocked;
            urgency += static_cast<int>(depth_ - py);
            break;
          }
        }
      }
    }
    return (heuristic_(s) + 2 * blocked) * static_cast<int>(depth_ * depth_ + 1) + urgency;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const Problem* problem_;
  Heuristic heuristic_;
  std::size_t depth_ = 0;
  std::vector<std::pair<std::size_t, std::size_t>> slot_;  // goal stack, position
};

/// A* over world states with unit action costs. Successors are generated in
/// ascending Action order and ties on (f, tie_break, h) go to the
/// earlier-generated node, which makes the result deterministic.
inline PlanResult plan(const Problem& p, const SearchConfig& cfg = {}, const TieBreak& tie_break = {}) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.max_expansions < 1) throw ValidationError("max_expansions must be >= 1");

  struct Record {
    WorldState state;
    std::size_t parent;
    std::optional<Action> via;
    int g;
  };
  struct Entry {
    int f, pref, h;
    std::size_t seq;
    std::size_t record;
    bool operator>(const Entry& o) const { return std::tie(f, pref, h, seq) > std::tie(o.f, o.pref, o.h, o.seq); }
  };

  Heuristic heuristic(p);
  SearchStats stats;
  std::vector<Record> records;
  std::unordered_map<WorldState, std::size_t, WorldStateHash> best;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::size_t seq = 0;

  auto finish = [&](std::size_t idx) {
    std::vector<Action> actions;
    for (std::size_t i = idx; records[i].via; i = records[i].parent) actions.push_back(*records[i].via);
    std::reverse(actions.begin(), actions.end());
    PlanResult result;
    result.graph = build_hypergraph(actions, p);
    result.actions = std::move(actions);
    stats.solution_actions = result.actions.size();
    stats.makespan = execute_hypergraph(result.graph, p).makespan;
    stats.wall_time = std::chrono::steady_clock::now() - start;
    result.stats = stats;
    return result;
  };

  records.push_back({p.initial, 0, std::nullopt, 0});
  best.emplace(p.initial, 0);
  stats.generated = 1;
  int h0 = heuristic(p.initial);
  auto pref = [&](const WorldState& s) { return tie_break ? tie_break(s) : 0; };
  open.push({h0, pref(p.initial), h0, seq++, 0});

  while (!open.empty()) {
    Entry top = open.top();
    open.pop();
    const std::size_t idx = top.record;
    if (best.at(records[idx].state) != idx) continue;  // superseded by a cheaper path
    if (is_goal(records[idx].state, p)) return finish(idx);
    if (stats.expansions >= cfg.max_expansions) throw BudgetExhausted(cfg.max_expansions);
    ++stats.expansions;
    const int g = records[idx].g + 1;
    for (const Action& a : applicable_actions(records[idx].state, p)) {
      WorldState next = apply(records[idx].state, a, p);
      auto it = best.find(next);
      if (it != best.end() && records[it->second].g <= g) continue;
      const int h = heuristic(next);
      records.push_back({std::move(next), idx, a, g});
      const std::size_t child = records.size() - 1;
      if (it != best.end()) {
        it->second = child;
      } else {
        best.emplace(records[child].state, child);
      }
      ++stats.generated;
      open.push({g + h, pref(records[child].state), h, seq++, child});
    }
  }
  throw NoSolution("goal is unreachable");
}

struct Unreachable {};

/// Exhaustive breadth-first search for the optimal action count, or
/// Unreachable when no goal state lies within `bound` actions.
inline std::variant<std::size_t, Unreachable> bfs_oracle(const Problem& p, std::size_t bound) {
  if (is_goal(p.initial, p)) return std::size_t{0};
  std::unordered_set<WorldState, WorldStateHash> seen{p.initial};
  std::deque<std::pair<WorldState, std::size_t>> frontier{{p.initial, 0}};
  while (!frontier.empty()) {
    auto [s, depth] = std::move(frontier.front());
    frontier.pop_front();
    if (depth >= bound) continue;
    for (const Action& a : applicable_actions(s, p)) {
      WorldState next = apply(s, a, p);
      if (!seen.insert(next).second) continue;
      if (is_goal(next, p)) return depth + 1;
      frontier.emplace_back(std::move(next), depth + 1);
    }
  }
  return Unreachable{};
}

}  // namespace hyperplan
