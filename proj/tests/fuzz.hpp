#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "hyperplan/abstraction.hpp"
#include "hyperplan/planner.hpp"
#include "hyperplan/reuse.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace hyperplan::testing {

struct Blob {
  std::vector<int> entities;
};
inline const std::vector<int>& entities_of(const Blob& b) { return b.entities; }
using BlobGraph = Hypergraph<Blob, int>;

// Hyperpath verdict computed from first principles.
inline bool oracle_valid_hyperpath(const BlobGraph& h) {
  const std::size_t n = h.node_count();
  std::vector<int> produced(n, 0), consumed(n, 0);
  for (const auto& node : h.nodes()) {
    if (node.data.entities.empty()) return false;
  }
  for (const auto& a : h.arcs()) {
    if (a.tail.empty() || a.head.empty()) return false;
    std::map<int, int> balance;
    for (NodeId t : a.tail) {
      ++consumed[t.get()];
      for (int e : h.node(t).data.entities) ++balance[e];
    }
    for (NodeId x : a.head) {
      ++produced[x.get()];
      if (std::count(a.tail.begin(), a.tail.end(), x)) return false;
      for (int e : h.node(x).data.entities) --balance[e];
    }
    for (auto [e, b] : balance) {
      if (b != 0) return false;
    }
  }
  std::map<int, int> at_sources;
  for (std::size_t i = 0; i < n; ++i) {
    if (produced[i] > 1 || consumed[i] > 1) return false;
    if (produced[i] == 0) {
      for (int e : h.nodes()[i].data.entities) {
        if (++at_sources[e] > 1) return false;
      }
    }
  }
  // Depth-first search for a cycle over node -> node edges.
  std::vector<std::vector<std::size_t>> next(n);
  for (const auto& a : h.arcs()) {
    for (NodeId t : a.tail) {
      for (NodeId x : a.head) next[t.get()].push_back(x.get());
    }
  }
  std::vector<int> colour(n, 0);
  std::function<bool(std::size_t)> cyclic = [&](std::size_t v) {
    colour[v] = 1;
    for (std::size_t w : next[v]) {
      if (colour[w] == 1 || (colour[w] == 0 && cyclic(w))) return true;
    }
    colour[v] = 2;
    return false;
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (colour[v] == 0 && cyclic(v)) return false;
  }
  return true;
}

// Splits and merges entity sets forward, then optionally breaks something.
inline BlobGraph random_blob_graph(std::mt19937& rng) {
  std::vector<BlobGraph::Node> nodes;
  std::vector<BlobGraph::Arc> arcs;
  const int n_entities = 1 + static_cast<int>(rng() % 6);
  std::vector<std::vector<int>> parts(1 + rng() % n_entities);
  for (int e = 0; e < n_entities; ++e) parts[rng() % parts.size()].push_back(e);
  std::vector<std::size_t> frontier;
  for (auto& p : parts) {
    if (p.empty()) continue;
    frontier.push_back(nodes.size());
    nodes.push_back({NodeId(nodes.size()), {p}});
  }
  const int steps = static_cast<int>(rng() % 6);
  for (int s = 0; s < steps && !frontier.empty(); ++s) {
    std::shuffle(frontier.begin(), frontier.end(), rng);
    const std::size_t take = std::min<std::size_t>(frontier.size(), 1 + rng() % 2);
    std::vector<NodeId> tail;
    std::vector<int> pool;
    for (std::size_t i = 0; i < take; ++i) {
      tail.emplace_back(frontier.back());
      const auto& e = nodes[frontier.back()].data.entities;
      pool.insert(pool.end(), e.begin(), e.end());
      frontier.pop_back();
    }
    std::vector<std::vector<int>> out(1 + rng() % pool.size());
    for (int e : pool) out[rng() % out.size()].push_back(e);
    std::vector<NodeId> head;
    for (auto& o : out) {
      if (o.empty()) continue;
      std::sort(o.begin(), o.end());
      head.emplace_back(nodes.size());
      frontier.push_back(nodes.size());
      nodes.push_back({NodeId(nodes.size()), {o}});
    }
    arcs.push_back({ArcId(arcs.size()), 0, tail, head});
  }
  switch (rng() % 6) {
    case 0:  // extra entity in some node
      nodes[rng() % nodes.size()].data.entities.push_back(99);
      break;
    case 1:  // reuse a node as a second tail or head
      if (!arcs.empty()) {
        auto& a = arcs[rng() % arcs.size()];
        NodeId extra(rng() % nodes.size());
        if (rng() % 2) {
          a.tail.push_back(extra);
        } else {
          a.head.push_back(extra);
        }
      }
      break;
    case 2:  // feed a late node back into an early one
      if (nodes.size() >= 2) {
        NodeId late(nodes.size() - 1), early(0);
        arcs.push_back({ArcId(arcs.size()), 0, {late}, {early}});
      }
      break;
    case 3:  // an empty node
      nodes.push_back({NodeId(nodes.size()), {}});
      break;
    default:
      break;
  }
  return BlobGraph::unchecked(std::move(nodes), std::move(arcs));
}

// Small random problems: at least one stack, every robot reaches something.
inline Problem random_problem(std::mt19937& rng, std::size_t max_objects = 5) {
  Problem p;
  const std::size_t n_regions = 1 + rng() % 4, n_robots = 1 + rng() % 3, n_objects = rng() % (max_objects + 1);
  for (std::size_t r = 0; r < n_regions; ++r) {
    p.regions.push_back(r > 0 && rng() % 3 == 0 ? buffer("buf" + std::to_string(r), 1 + rng() % 2)
                                                : stack("st" + std::to_string(r)));
  }
  for (std::size_t r = 0; r < n_robots; ++r) {
    std::vector<std::size_t> reach;
    for (std::size_t g = 0; g < n_regions; ++g) {
      if (rng() % 3) reach.push_back(g);
    }
    if (reach.empty()) reach.push_back(rng() % n_regions);
    p.robots.push_back(robot_spec("rb" + std::to_string(r), reach, 1 + rng() % 2));
  }
  for (std::size_t o = 0; o < n_objects; ++o) p.objects.push_back("obj" + std::to_string(o));
  p.initial = p.empty_state();
  for (std::size_t o = 0; o < n_objects; ++o) {
    std::vector<std::size_t> room;
    for (std::size_t r = 0; r < n_regions; ++r) {
      if (p.regions[r].is_stack() || p.initial.regions[r].size() < p.regions[r].capacity) room.push_back(r);
    }
    const std::size_t r = room[rng() % room.size()];
    p.initial.regions[r].emplace_back(o);
    if (p.regions[r].is_buffer()) std::sort(p.initial.regions[r].begin(), p.initial.regions[r].end());
  }
  std::vector<std::size_t> stacks;
  for (std::size_t r = 0; r < n_regions; ++r) {
    if (p.regions[r].is_stack()) stacks.push_back(r);
  }
  std::vector<std::size_t> order(n_objects);
  for (std::size_t i = 0; i < n_objects; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t in_goal = n_objects ? 1 + rng() % n_objects : 0;
  std::map<std::size_t, std::vector<ObjectIndex>> goal;
  for (std::size_t i = 0; i < in_goal; ++i) goal[stacks[rng() % stacks.size()]].emplace_back(order[i]);
  for (auto& [r, objs] : goal) p.goal.push_back({RegionIndex(r), objs});
  validate_problem(p);
  return p;
}

inline std::vector<Action> every_action(const Problem& p) {
  std::vector<Action> out;
  for (std::size_t r = 0; r < p.robots.size(); ++r) {
    for (std::size_t o = 0; o < p.objects.size(); ++o) {
      for (std::size_t g = 0; g < p.regions.size(); ++g) {
        out.push_back(Pick{RobotIndex(r), ObjectIndex(o), RegionIndex(g)});
        out.push_back(Place{RobotIndex(r), ObjectIndex(o), RegionIndex(g)});
      }
      for (std::size_t q = 0; q < p.robots.size(); ++q) out.push_back(Handoff{RobotIndex(r), RobotIndex(q), ObjectIndex(o)});
    }
  }
  return out;
}

inline WorldState random_walk(const Problem& p, WorldState s, int steps, std::mt19937& rng, std::vector<Action>* trace) {
  for (int i = 0; i < steps; ++i) {
    auto acts = applicable_actions(s, p);
    if (acts.empty()) break;
    const Action a = acts[rng() % acts.size()];
    s = apply(s, a, p);
    if (trace) trace->push_back(a);
  }
  return s;
}

// Entity sets of a node list, concatenated and sorted.
inline std::vector<EntityId> gather(const SolutionHypergraph& h, const std::vector<NodeId>& ids) {
  std::vector<EntityId> out;
  for (NodeId n : ids) out.insert(out.end(), h.node(n).data.composition.begin(), h.node(n).data.composition.end());
  std::sort(out.begin(), out.end());
  return out;
}

// A grounding exists exactly when the problem has the strategy's goal shape
// and enough non-goal objects for its non-goal abstract objects.
inline bool grounding_exists(const AbstractHypergraph& ah, const Problem& p) {
  std::multiset<std::size_t> want, have;
  std::size_t goal_slots = 0;
  for (const auto& g : ah.goal) {
    want.insert(g.size());
    goal_slots += g.size();
  }
  for (const auto& g : p.goal) have.insert(g.objects.size());
  if (want != have) return false;
  return ah.object_count - goal_slots <= p.objects.size() - p.goal_objects().size();
}

// Checks an assignment against the goal directly.
inline bool oracle_grounding_ok(const AbstractHypergraph& ah, const Problem& p, const GroundingAssignment& g) {
  if (g.object_map.size() != ah.object_count) return false;
  std::set<ObjectIndex> distinct(g.object_map.begin(), g.object_map.end());
  if (distinct.size() != g.object_map.size()) return false;
  for (ObjectIndex o : g.object_map) {
    if (o.get() >= p.objects.size()) return false;
  }
  std::set<std::size_t> covered;
  for (std::size_t t = 0; t < ah.goal.size(); ++t) {
    auto it = g.region_map.find(RegionRole::target(t));
    if (it == g.region_map.end()) return false;
    bool found = false;
    for (std::size_t i = 0; i < p.goal.size(); ++i) {
      if (p.goal[i].region != it->second) continue;
      found = true;
      covered.insert(i);
      if (p.goal[i].objects.size() != ah.goal[t].size()) return false;
      for (std::size_t k = 0; k < ah.goal[t].size(); ++k) {
        if (g.object_map[ah.goal[t][k].get()] != p.goal[i].objects[k]) return false;
      }
    }
    if (!found) return false;
  }
  return covered.size() == p.goal.size();
}

/// Outcome of one fuzz campaign.
struct Tally {
  std::size_t cases = 0;
  std::size_t violations = 0;
  std::string first;  // first violation, for diagnostics
  std::map<std::string, std::size_t> counts;

  void fail(const std::string& what) {
    if (violations++ == 0) first = "case " + std::to_string(cases) + ": " + what;
  }
};

/// Random hypergraphs, checked by validate_hyperpath and by the oracle.
inline Tally fuzz_hyperpaths(std::uint32_t seed, std::size_t n) {
  std::mt19937 rng(seed);
  Tally t;
  for (; t.cases < n; ++t.cases) {
    auto h = random_blob_graph(rng);
    const bool expected = oracle_valid_hyperpath(h);
    if (validate_hyperpath(h).empty() != expected) t.fail("validator disagrees with the oracle");
    ++t.counts[expected ? "valid" : "invalid"];
  }
  return t;
}

/// Every candidate action in random reachable states: listed iff the oracle
/// allows it, and apply agrees with the oracle successor or refuses.
inline Tally fuzz_actions(std::uint32_t seed, std::size_t n) {
  std::mt19937 rng(seed);
  Tally t;
  for (; t.cases < n; ++t.cases) {
    Problem p = random_problem(rng);
    WorldState s = random_walk(p, p.initial, static_cast<int>(rng() % 12), rng, nullptr);
    auto got = applicable_actions(s, p);
    std::set<Action> listed(got.begin(), got.end());
    for (const Action& a : every_action(p)) {
      const bool ok = oracle_applicable(s, a, p);
      ++t.counts["actions"];
      if ((listed.count(a) == 1) != ok) t.fail("applicable_actions disagrees on " + describe(a, p));
      if (ok) {
        WorldState next = apply(s, a, p);
        if (next != oracle_apply(s, a, p)) t.fail("apply disagrees on " + describe(a, p));
        if (!state_violations(next, p).empty()) t.fail("invalid successor after " + describe(a, p));
      } else {
        try {
          apply(s, a, p);
          t.fail("apply accepted " + describe(a, p));
        } catch (const PreconditionViolated&) {
        }
      }
    }
  }
  return t;
}

/// Hypergraphs of random action sequences: discipline, per-arc entity
/// conservation, sources and sinks partitioning the entities, replay.
inline Tally fuzz_solution_graphs(std::uint32_t seed, std::size_t n) {
  std::mt19937 rng(seed);
  Tally t;
  for (; t.cases < n; ++t.cases) {
    Problem p = random_problem(rng);
    std::vector<Action> trace;
    WorldState end = random_walk(p, p.initial, static_cast<int>(rng() % 10), rng, &trace);
    auto h = build_hypergraph(trace, p);
    if (!validate_hyperpath(h).empty()) t.fail("solution hypergraph breaks discipline");
    for (const auto& a : h.arcs()) {
      auto in = gather(h, a.tail), out = gather(h, a.head);
      if (in != out) t.fail("arc " + std::to_string(a.id.value) + " does not conserve entities");
      if (std::adjacent_find(in.begin(), in.end()) != in.end()) t.fail("arc tails share an entity");
    }
    std::vector<EntityId> everything;
    for (std::size_t r = 0; r < p.robots.size(); ++r) everything.push_back(EntityId::robot(RobotIndex(r)));
    for (std::size_t o = 0; o < p.objects.size(); ++o) everything.push_back(EntityId::object(ObjectIndex(o)));
    std::sort(everything.begin(), everything.end());
    if (gather(h, h.sources()) != everything) t.fail("sources do not partition the entities");
    if (gather(h, h.sinks()) != everything) t.fail("sinks do not partition the entities");
    if (execute_hypergraph(h, p).final_state != end) t.fail("replay ends elsewhere");
    auto h_obj = remove_robot_entities(h);
    if (!validate_hyperpath(h_obj).empty()) t.fail("object hypergraph breaks discipline");
    for (const auto& node : h_obj.nodes()) {
      if (node.data.has_robot()) t.fail("object hypergraph mentions a robot");
    }
  }
  return t;
}

/// Strategies from random solved problems, grounded on random problems.
inline Tally fuzz_grounding(std::uint32_t seed, std::size_t n) {
  std::mt19937 rng(seed);
  std::vector<AbstractHypergraph> strategies;
  while (strategies.size() < 100) {
    Problem p = random_problem(rng, 4);
    try {
      strategies.push_back(extract_strategy(plan(p, SearchConfig{20'000}).graph, p));
    } catch (const PlanningFailure&) {
    }
  }
  Tally t;
  const std::size_t per_strategy = (n + strategies.size() - 1) / strategies.size();
  for (const auto& ah : strategies) {
    if (!strategy_problems(ah).empty()) t.fail("extracted strategy is malformed");
    std::size_t local = 0;
    for (int attempt = 0; attempt < 2000 && local < per_strategy; ++attempt) {
      Problem q = random_problem(rng, 5);
      // Keep mostly same-shape problems so most cases exercise the solver.
      if (!grounding_exists(ah, q) && attempt % 4 != 0) continue;
      ++local;
      ++t.cases;
      const bool expected = grounding_exists(ah, q);
      try {
        auto g = ground_strategy(ah, q);
        ++t.counts["grounded"];
        if (!expected) t.fail("grounded a strategy that has no grounding");
        if (!verify_grounding(ah, q, g).empty()) t.fail("verify_grounding rejects the solver's answer");
        if (!oracle_grounding_ok(ah, q, g)) t.fail("the solver's answer breaks a constraint");
        if (g.object_map.size() >= 2) {
          auto broken = g;
          broken.object_map[1] = broken.object_map[0];
          if (verify_grounding(ah, q, broken).empty()) t.fail("verify_grounding misses a duplicate");
        }
        if (!ah.goal.empty() && !ah.goal[0].empty()) {
          auto broken = g;
          auto& slot = broken.object_map[ah.goal[0][0].get()];
          slot = ObjectIndex((slot.get() + 1) % q.objects.size());
          if (verify_grounding(ah, q, broken).empty() != oracle_grounding_ok(ah, q, broken)) {
            t.fail("verify_grounding disagrees with the oracle");
          }
        }
      } catch (const NoGrounding&) {
        ++t.counts["refused"];
        if (expected) t.fail("no grounding found although one exists");
      }
    }
  }
  return t;
}

}  // namespace hyperplan::testing
