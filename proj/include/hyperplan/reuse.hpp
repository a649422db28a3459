#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hyperplan/abstraction.hpp"
#include "hyperplan/planner.hpp"

namespace hyperplan {

struct GroundingAssignment {
  std::vector<ObjectIndex> object_map;  // by abstract object
  std::map<RegionRole, RegionIndex> region_map;

  bool operator==(const GroundingAssignment&) const = default;
};

namespace detail {

// Goal index of the problem matched to each target role: equal height,
// earliest unused declaration.
inline std::vector<std::size_t> match_targets(const AbstractHypergraph& ah, const Problem& p) {
  std::vector<std::size_t> want, have;
  for (const auto& g : ah.goal) want.push_back(g.size());
  for (const auto& g : p.goal) have.push_back(g.objects.size());
  std::sort(want.begin(), want.end());
  std::sort(have.begin(), have.end());
  if (want != have) throw NoGrounding("goal stack heights differ from the strategy's");
  std::vector<std::size_t> match;
  std::vector<bool> used(p.goal.size(), false);
  for (const auto& g : ah.goal) {
    for (std::size_t i = 0; i < p.goal.size(); ++i) {
      if (!used[i] && p.goal[i].objects.size() == g.size()) {
        used[i] = true;
        match.push_back(i);
        break;
      }
    }
  }
  return match;
}

// Object directly beneath each stacked object in the initial state.
inline std::map<ObjectIndex, ObjectIndex> initial_supports(const Problem& p) {
  std::map<ObjectIndex, ObjectIndex> below;
  for (std::size_t r = 0; r < p.regions.size(); ++r) {
    if (!p.regions[r].is_stack()) continue;
    const auto& st = p.initial.regions[r];
    for (std::size_t i = 1; i < st.size(); ++i) below.emplace(st[i], st[i - 1]);
  }
  return below;
}

}  // namespace detail

/// Binds abstract objects to concrete ones by backtracking search. Hard
/// constraints: all-different, and goal positions must agree with the matched
/// goal stacks. Among all solutions the one preserving the most initial
/// above-relations of the strategy's source stacks wins, then the
/// lexicographically smallest.
inline GroundingAssignment ground_strategy(const AbstractHypergraph& ah, const Problem& p) {
  const auto match = detail::match_targets(ah, p);
  const std::size_t k = ah.object_count;

  std::vector<std::optional<ObjectIndex>> required(k);
  for (std::size_t t = 0; t < ah.goal.size(); ++t) {
    for (std::size_t i = 0; i < ah.goal[t].size(); ++i) required[ah.goal[t][i].get()] = p.goal[match[t]].objects[i];
  }
  std::vector<ObjectIndex> goal_objs = p.goal_objects(), other_objs;
  std::sort(goal_objs.begin(), goal_objs.end());
  for (std::size_t o = 0; o < p.objects.size(); ++o) {
    if (!std::binary_search(goal_objs.begin(), goal_objs.end(), ObjectIndex(o))) other_objs.emplace_back(o);
  }

  std::vector<std::pair<AbstractObject, AbstractObject>> relations;  // (below, above)
  for (NodeId s : ah.graph.sources()) {
    const auto& st = ah.graph.node(s).data.stack;
    for (std::size_t i = 1; i < st.size(); ++i) relations.emplace_back(st[i - 1], st[i]);
  }
  const auto below = detail::initial_supports(p);
  auto score = [&](const std::vector<ObjectIndex>& m) {
    std::size_t n = 0;
    for (auto [lo, hi] : relations) {
      auto it = below.find(m[hi.get()]);
      if (it != below.end() && it->second == m[lo.get()]) ++n;
    }
    return n;
  };

  std::optional<std::vector<ObjectIndex>> best;
  std::size_t best_score = 0;
  std::vector<ObjectIndex> current;
  std::set<ObjectIndex> taken;
  std::size_t leaves = 0;
  constexpr std::size_t kLeafLimit = 1'000'000;
  std::function<void(std::size_t)> search = [&](std::size_t var) {
    if (leaves >= kLeafLimit) return;
    if (var == k) {
      ++leaves;
      std::size_t s = score(current);
      if (!best || s > best_score) {
        best = current;
        best_score = s;
      }
      return;
    }
    const bool in_goal = std::any_of(ah.goal.begin(), ah.goal.end(), [&](const auto& g) {
      return std::find(g.begin(), g.end(), AbstractObject(var)) != g.end();
    });
    for (ObjectIndex o : in_goal ? goal_objs : other_objs) {
      if (taken.count(o)) continue;
      if (required[var] && *required[var] != o) continue;
      current.push_back(o);
      taken.insert(o);
      search(var + 1);
      taken.erase(o);
      current.pop_back();
    }
  };
  search(0);
  if (!best) throw NoGrounding("no injective object assignment satisfies the goal constraints");

  GroundingAssignment g;
  g.object_map = *best;
  for (std::size_t t = 0; t < match.size(); ++t) g.region_map.emplace(RegionRole::target(t), p.goal[match[t]].region);
  for (const auto& n : ah.graph.nodes()) {
    const auto& role = n.data.region;
    if (!role || role->kind != RoleKind::Source || g.region_map.count(*role) || n.data.stack.empty()) continue;
    auto where = p.initial.region_of(g.object_map[n.data.stack.front().get()]);
    if (where && p.region(*where).is_stack() && !p.goal_for(*where)) g.region_map.emplace(*role, *where);
  }
  if (ah.uses_buffer()) {
    std::optional<RegionIndex> pick;
    for (std::size_t r = 0; r < p.regions.size(); ++r) {
      const auto& reg = p.regions[r];
      if (!reg.is_buffer() || p.initial.regions[r].size() >= reg.capacity) continue;
      bool reachable = std::any_of(p.robots.begin(), p.robots.end(), [&](const RobotSpec& rs) { return rs.reaches(RegionIndex(r)); });
      if (reachable && (!pick || reg.id < p.region(*pick).id)) pick = RegionIndex(r);
    }
    if (pick) g.region_map.emplace(RegionRole::buffer(), *pick);
  }
  return g;
}

/// Independent check of the hard grounding constraints.
inline std::vector<std::string> verify_grounding(const AbstractHypergraph& ah, const Problem& p,
                                                 const GroundingAssignment& g) {
  std::vector<std::string> out;
  if (g.object_map.size() != ah.object_count) out.push_back("object map size differs from the object count");
  std::set<ObjectIndex> used;
  for (ObjectIndex o : g.object_map) {
    if (o.get() >= p.objects.size()) out.push_back("object map names an unknown object");
    if (!used.insert(o).second) out.push_back("object map is not injective");
  }
  std::set<RegionIndex> targets;
  for (std::size_t t = 0; t < ah.goal.size(); ++t) {
    auto it = g.region_map.find(RegionRole::target(t));
    if (it == g.region_map.end()) {
      out.push_back("target role " + std::to_string(t) + " is unmapped");
      continue;
    }
    if (!targets.insert(it->second).second) out.push_back("two target roles share a region");
    const GoalStack* gs = p.goal_for(it->second);
    if (!gs) {
      out.push_back("target role " + std::to_string(t) + " maps to a region without a goal");
      continue;
    }
    if (gs->objects.size() != ah.goal[t].size()) {
      out.push_back("target role " + std::to_string(t) + " height mismatch");
      continue;
    }
    for (std::size_t i = 0; i < gs->objects.size(); ++i) {
      std::size_t a = ah.goal[t][i].get();
      if (a >= g.object_map.size() || g.object_map[a] != gs->objects[i]) {
        out.push_back("goal position " + std::to_string(i) + " of target role " + std::to_string(t) + " is violated");
      }
    }
  }
  if (targets.size() != p.goal.size()) out.push_back("not every goal region is covered by a target role");
  for (const auto& [role, reg] : g.region_map) {
    if (reg.get() >= p.regions.size()) {
      out.push_back("region map names an unknown region");
    } else if (role.kind == RoleKind::Buffer && !p.region(reg).is_buffer()) {
      out.push_back("buffer role maps to a stack");
    } else if (role.kind != RoleKind::Buffer && !p.region(reg).is_stack()) {
      out.push_back("stack role maps to a buffer");
    }
  }
  return out;
}

struct GroundedNode {
  std::vector<EntityId> composition;  // ascending
  std::vector<Assertion> assertions;  // ascending
  bool abstract_robot = false;
  bool critical = false;

  bool operator==(const GroundedNode&) const = default;
};

inline const std::vector<EntityId>& entities_of(const GroundedNode& n) { return n.composition; }

struct AbstractMarker {
  ArcId abstract_arc;
  bool operator==(const AbstractMarker&) const = default;
};

/// Strategy nodes keep their ids; robot source nodes follow them.
using ReconstructedHypergraph = Hypergraph<GroundedNode, AbstractMarker>;

/// Rewrites the strategy with concrete labels and adds one source node per
/// robot of the problem.
inline ReconstructedHypergraph reconstruct(const AbstractHypergraph& ah, const GroundingAssignment& g,
                                           const Problem& p) {
  ReconstructedHypergraph::Builder b;
  for (const auto& n : ah.graph.nodes()) {
    GroundedNode out;
    out.abstract_robot = n.data.abstract_robot;
    out.critical = n.data.critical;
    for (AbstractObject a : n.data.composition) out.composition.push_back(EntityId::object(g.object_map.at(a.get())));
    if (n.data.region) {
      auto it = g.region_map.find(*n.data.region);
      if (it != g.region_map.end()) {
        for (std::size_t h = 0; h < n.data.stack.size(); ++h) {
          out.assertions.push_back(OnStack{g.object_map.at(n.data.stack[h].get()), it->second, h});
        }
        if (n.data.region->kind == RoleKind::Buffer) {
          for (AbstractObject a : n.data.composition) out.assertions.push_back(InBuffer{g.object_map.at(a.get()), it->second});
        }
      }
    }
    std::sort(out.composition.begin(), out.composition.end());
    std::sort(out.assertions.begin(), out.assertions.end());
    b.add_node(std::move(out));
  }
  for (std::size_t r = 0; r < p.robots.size(); ++r) {
    b.add_node(GroundedNode{{EntityId::robot(RobotIndex(r))}, {}, false, false});
  }
  for (const auto& a : ah.graph.arcs()) b.add_arc(AbstractMarker{a.id}, a.tail, a.head);
  return std::move(b).seal();
}

enum class Fallback { FailHard, ScratchFallback };

struct RefinementConfig {
  SearchConfig search;
  Fallback fallback = Fallback::FailHard;
};

struct ReuseStats {
  std::size_t expansions = 0;
  std::vector<std::size_t> subproblem_expansions;
  bool fallback_used = false;
  std::size_t actions = 0;
  std::size_t makespan = 0;
  std::chrono::nanoseconds wall_time{0};

  double wall_time_ms() const { return std::chrono::duration<double, std::milli>(wall_time).count(); }
};

struct ReuseResult {
  SolutionHypergraph graph;
  std::vector<Action> actions;
  ReuseStats stats;
};

namespace detail {

inline ReuseResult scratch_fallback(const Problem& p, const RefinementConfig& cfg,
                                    std::chrono::steady_clock::time_point start) {
  PlanResult r = plan(p, cfg.search);
  ReuseResult out{std::move(r.graph), std::move(r.actions), {}};
  out.stats.expansions = r.stats.expansions;
  out.stats.fallback_used = true;
  out.stats.actions = out.actions.size();
  out.stats.makespan = r.stats.makespan;
  out.stats.wall_time = std::chrono::steady_clock::now() - start;
  return out;
}

// Objects that already sit in their committed place: per goal region, the
// longest bottom prefix agreeing with `want` (the arc's own target contents
// where given, the final goal elsewhere).
inline std::vector<bool> frozen_prefixes(const WorldState& s, const Problem& p, const std::vector<GoalStack>& sub) {
  std::vector<bool> frozen(p.objects.size(), false);
  for (const auto& g : p.goal) {
    const std::vector<ObjectIndex>* want = &g.objects;
    for (const auto& x : sub) {
      if (x.region == g.region) want = &x.objects;
    }
    const auto& have = s.regions[g.region.get()];
    for (std::size_t i = 0; i < have.size() && i < want->size() && have[i] == (*want)[i]; ++i) frozen[have[i].get()] = true;
  }
  return frozen;
}

}  // namespace detail

/// Solves one planning sub-problem per abstract arc, in topological order,
/// threading the world state through. A sub-problem asks for the exact
/// contents of the arc's critical head nodes on goal regions while objects
/// already in committed places stay frozen. The concatenated actions are
/// compiled into one solution hypergraph.
inline ReuseResult refine(const ReconstructedHypergraph& r, const Problem& p, const RefinementConfig& cfg = {}) {
  const auto start = std::chrono::steady_clock::now();
  ReuseResult out;
  WorldState state = p.initial;
  std::vector<Action> actions;
  const GoalPreference prefer(p);

  auto solve = [&](const std::vector<GoalStack>& sub, std::optional<ArcId> arc) -> bool {
    Problem q = p;
    q.initial = state;
    q.goal = sub;
    q.frozen = detail::frozen_prefixes(state, p, sub);
    try {
      PlanResult pr = plan(q, cfg.search, std::cref(prefer));
      out.stats.subproblem_expansions.push_back(pr.stats.expansions);
      out.stats.expansions += pr.stats.expansions;
      for (const Action& a : pr.actions) {
        state = apply(state, a, p);
        actions.push_back(a);
      }
      return true;
    } catch (const PlanningFailure& e) {
      if (cfg.fallback == Fallback::FailHard) {
        throw SubproblemInfeasible(arc.value_or(ArcId(r.arc_count())), e.what());
      }
      return false;
    }
  };

  // A critical stack already exceeded by a correct prefix of the final goal
  // counts as achieved.
  std::set<NodeId> passed;
  auto surpassed = [&](const GoalStack& g) {
    const auto& have = state.regions[g.region.get()];
    const auto& final_goal = p.goal_for(g.region)->objects;
    return have.size() > g.objects.size() && have.size() <= final_goal.size() &&
           std::equal(have.begin(), have.end(), final_goal.begin()) &&
           std::equal(g.objects.begin(), g.objects.end(), have.begin());
  };

  for (ArcId a : topological_order(r)) {
    std::vector<GoalStack> sub;
    for (NodeId h : r.arc(a).head) {
      const auto& n = r.node(h).data;
      if (!n.critical || n.assertions.empty()) continue;
      auto reg = std::get_if<OnStack>(&n.assertions.front());
      if (!reg || !p.goal_for(reg->region)) continue;
      GoalStack g{reg->region, std::vector<ObjectIndex>(n.assertions.size())};
      for (const auto& x : n.assertions) g.objects.at(std::get<OnStack>(x).height) = std::get<OnStack>(x).object;
      if (surpassed(g)) {
        passed.insert(h);
      } else {
        sub.push_back(std::move(g));
      }
    }
    if (sub.empty()) {
      out.stats.subproblem_expansions.push_back(0);
      continue;
    }
    if (!solve(sub, a)) return detail::scratch_fallback(p, cfg, start);
  }
  if (!is_goal(state, p) && !solve(p.goal, std::nullopt)) return detail::scratch_fallback(p, cfg, start);

  out.graph = build_hypergraph(actions, p);
  auto run = execute_hypergraph(out.graph, p);
  if (!is_goal(run.final_state, p)) throw ExecutionFault(std::nullopt, "refined plan misses the goal");
  for (const auto& n : r.nodes()) {
    if (!n.data.critical || n.data.assertions.empty() || !r.producer(n.id) || passed.count(n.id)) continue;
    const auto* on = std::get_if<OnStack>(&n.data.assertions.front());
    if (!on || !p.goal_for(on->region)) continue;
    bool present = std::any_of(out.graph.nodes().begin(), out.graph.nodes().end(), [&](const auto& m) {
      return m.data.composition == n.data.composition && m.data.assertions == n.data.assertions;
    });
    if (present) continue;
    if (cfg.fallback == Fallback::ScratchFallback) return detail::scratch_fallback(p, cfg, start);
    throw SubproblemInfeasible(r.producer(n.id).value_or(ArcId(0)), "critical node missing from the refined plan");
  }
  out.actions = std::move(actions);
  out.stats.actions = out.actions.size();
  out.stats.makespan = run.makespan;
  out.stats.wall_time = std::chrono::steady_clock::now() - start;
  return out;
}

/// Grounding, reconstruction and refinement in sequence.
inline ReuseResult reuse_pipeline(const AbstractHypergraph& ah, const Problem& p, const RefinementConfig& cfg = {}) {
  const auto start = std::chrono::steady_clock::now();
  GroundingAssignment g;
  try {
    g = ground_strategy(ah, p);
  } catch (const NoGrounding&) {
    if (cfg.fallback == Fallback::FailHard) throw;
    return detail::scratch_fallback(p, cfg, start);
  }
  ReuseResult out = refine(reconstruct(ah, g, p), p, cfg);
  out.stats.wall_time = std::chrono::steady_clock::now() - start;
  return out;
}

}  // namespace hyperplan
