#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "hyperplan/domain.hpp"
#include "hyperplan/dot.hpp"
#include "hyperplan/hypergraph.hpp"

namespace hyperplan {

// Local facts carried by a composition node.
struct OnStack {
  ObjectIndex object;
  RegionIndex region;
  std::size_t height = 0;
  friend auto operator<=>(const OnStack&, const OnStack&) = default;
};
struct InBuffer {
  ObjectIndex object;
  RegionIndex region;
  friend auto operator<=>(const InBuffer&, const InBuffer&) = default;
};
struct Holding {
  RobotIndex robot;
  ObjectIndex object;
  friend auto operator<=>(const Holding&, const Holding&) = default;
};
// Held by some robot that has been abstracted away.
struct InTransit {
  ObjectIndex object;
  friend auto operator<=>(const InTransit&, const InTransit&) = default;
};
using Assertion = std::variant<OnStack, InBuffer, Holding, InTransit>;

inline std::vector<EntityId> entities_mentioned(const Assertion& a) {
  if (const auto* h = std::get_if<Holding>(&a)) return {EntityId::robot(h->robot), EntityId::object(h->object)};
  return {EntityId::object(std::visit([](const auto& x) { return x.object; }, a))};
}

/// One entity composition at one moment.
struct SolutionNode {
  std::vector<EntityId> composition;  // ascending
  std::vector<Assertion> assertions;  // ascending

  bool operator==(const SolutionNode&) const = default;

  bool has_robot() const {
    return std::any_of(composition.begin(), composition.end(), [](EntityId e) { return e.is_robot(); });
  }
  std::vector<ObjectIndex> objects() const {
    std::vector<ObjectIndex> out;
    for (EntityId e : composition) {
      if (e.is_object()) out.push_back(e.as_object());
    }
    return out;
  }
};

inline const std::vector<EntityId>& entities_of(const SolutionNode& n) { return n.composition; }

inline std::vector<std::string> node_problems(const SolutionNode& n) {
  std::vector<std::string> out;
  for (const auto& a : n.assertions) {
    for (EntityId e : entities_mentioned(a)) {
      if (!std::binary_search(n.composition.begin(), n.composition.end(), e)) {
        out.push_back("assertion mentions an entity outside the composition");
      }
    }
  }
  return out;
}

using SolutionHypergraph = Hypergraph<SolutionNode, Action>;

/// Stack region of a node whose objects all sit on one stack, if any.
inline std::optional<RegionIndex> stack_region_of(const SolutionNode& n) {
  std::optional<RegionIndex> region;
  for (const auto& a : n.assertions) {
    const auto* s = std::get_if<OnStack>(&a);
    if (!s) return std::nullopt;
    if (region && *region != s->region) return std::nullopt;
    region = s->region;
  }
  return region;
}

inline std::string describe(const Assertion& a, const Problem& p) {
  struct V {
    const Problem& p;
    std::string operator()(const OnStack& x) const {
      return p.object_name(x.object) + "@" + p.region(x.region).id + "[" + std::to_string(x.height) + "]";
    }
    std::string operator()(const InBuffer& x) const { return p.object_name(x.object) + "@" + p.region(x.region).id; }
    std::string operator()(const Holding& x) const { return p.robot(x.robot).id + " holds " + p.object_name(x.object); }
    std::string operator()(const InTransit& x) const { return p.object_name(x.object) + " in transit"; }
  };
  return std::visit(V{p}, a);
}

inline std::string describe(const SolutionNode& n, const Problem& p) {
  std::string out = "{";
  for (std::size_t i = 0; i < n.composition.size(); ++i) {
    if (i) out += ", ";
    out += p.entity_name(n.composition[i]);
  }
  out += "}";
  for (const auto& a : n.assertions) out += "\n" + describe(a, p);
  return out;
}

namespace detail {

inline SolutionNode make_node(std::vector<EntityId> comp, std::vector<Assertion> facts) {
  std::sort(comp.begin(), comp.end());
  std::sort(facts.begin(), facts.end());
  return {std::move(comp), std::move(facts)};
}

inline SolutionNode robot_node(const WorldState& s, RobotIndex r) {
  std::vector<EntityId> comp{EntityId::robot(r)};
  std::vector<Assertion> facts;
  for (ObjectIndex o : s.holdings[r.get()]) {
    comp.push_back(EntityId::object(o));
    facts.push_back(Holding{r, o});
  }
  return make_node(std::move(comp), std::move(facts));
}

inline SolutionNode stack_node(const WorldState& s, RegionIndex reg) {
  std::vector<EntityId> comp;
  std::vector<Assertion> facts;
  const auto& st = s.regions[reg.get()];
  for (std::size_t h = 0; h < st.size(); ++h) {
    comp.push_back(EntityId::object(st[h]));
    facts.push_back(OnStack{st[h], reg, h});
  }
  return make_node(std::move(comp), std::move(facts));
}

inline SolutionNode buffer_node(ObjectIndex o, RegionIndex reg) {
  return make_node({EntityId::object(o)}, {InBuffer{o, reg}});
}

}  // namespace detail

/// Maximal compositions of a state: each robot with what it holds, each
/// non-empty stack as one node, each buffered object on its own. Robots come
/// first, then regions in declaration order.
inline std::vector<SolutionNode> decompose(const WorldState& s, const Problem& p) {
  std::vector<SolutionNode> out;
  for (std::size_t r = 0; r < p.robots.size(); ++r) out.push_back(detail::robot_node(s, RobotIndex(r)));
  for (std::size_t r = 0; r < p.regions.size(); ++r) {
    RegionIndex reg(r);
    if (s.regions[r].empty()) continue;
    if (p.region(reg).is_stack()) {
      out.push_back(detail::stack_node(s, reg));
    } else {
      for (ObjectIndex o : s.regions[r]) out.push_back(detail::buffer_node(o, reg));
    }
  }
  return out;
}

/// Compiles an executable action sequence into its composition hypergraph.
/// Each arc consumes the current nodes of the entities the action touches and
/// produces their new compositions; independent actions stay unordered.
inline SolutionHypergraph build_hypergraph(const std::vector<Action>& actions, const Problem& p) {
  SolutionHypergraph::Builder b;
  WorldState s = p.initial;
  std::map<EntityId, NodeId> frontier;
  auto add = [&](SolutionNode n) {
    NodeId id = b.add_node(std::move(n));
    for (EntityId e : b.node_data(id).composition) frontier[e] = id;
    return id;
  };
  for (auto& n : decompose(s, p)) add(std::move(n));

  for (const Action& a : actions) {
    WorldState next = apply(s, a, p);
    std::vector<NodeId> tail;
    std::vector<SolutionNode> heads;
    auto take = [&](EntityId e) {
      NodeId n = frontier.at(e);
      if (std::find(tail.begin(), tail.end(), n) == tail.end()) tail.push_back(n);
    };
    if (const auto* x = std::get_if<Pick>(&a)) {
      take(EntityId::robot(x->robot));
      take(EntityId::object(x->object));
      heads.push_back(detail::robot_node(next, x->robot));
      if (p.region(x->from).is_stack() && !next.regions[x->from.get()].empty()) {
        heads.push_back(detail::stack_node(next, x->from));
      }
    } else if (const auto* x = std::get_if<Place>(&a)) {
      take(EntityId::robot(x->robot));
      heads.push_back(detail::robot_node(next, x->robot));
      if (p.region(x->to).is_stack()) {
        const auto& below = s.regions[x->to.get()];
        if (!below.empty()) take(EntityId::object(below.front()));
        heads.push_back(detail::stack_node(next, x->to));
      } else {
        heads.push_back(detail::buffer_node(x->object, x->to));
      }
    } else {
      const auto& h = std::get<Handoff>(a);
      take(EntityId::robot(h.giver));
      take(EntityId::robot(h.receiver));
      heads.push_back(detail::robot_node(next, h.giver));
      heads.push_back(detail::robot_node(next, h.receiver));
    }
    std::vector<NodeId> head;
    for (auto& n : heads) head.push_back(add(std::move(n)));
    b.add_arc(a, std::move(tail), std::move(head));
    s = std::move(next);
  }
  return std::move(b).seal();
}

struct ExecutionResult {
  WorldState final_state;
  std::size_t makespan = 0;
  std::size_t actions = 0;
  std::vector<std::vector<ArcId>> layers;
};

/// Replays a hypergraph against a problem. Arcs run in greedy parallel
/// layers: an arc joins the current layer once all its tails exist and none
/// of its robots has acted in the layer. Each action is checked against the
/// evolving state, and each produced node's facts must hold afterwards.
inline ExecutionResult execute_hypergraph(const SolutionHypergraph& h, const Problem& p) {
  if (auto report = validate_hyperpath(h); !report.empty()) {
    throw ExecutionFault(report.front().arc, std::string("not a valid hyperpath: ") + to_string(report.front().kind) +
                                                 " (" + report.front().detail + ")");
  }
  {
    std::vector<SolutionNode> expected = decompose(p.initial, p);
    std::vector<SolutionNode> got;
    for (NodeId n : h.sources()) got.push_back(h.node(n).data);
    auto less = [](const SolutionNode& a, const SolutionNode& b) {
      return std::tie(a.composition, a.assertions) < std::tie(b.composition, b.assertions);
    };
    std::sort(expected.begin(), expected.end(), less);
    std::sort(got.begin(), got.end(), less);
    if (expected != got) throw ExecutionFault(std::nullopt, "sources do not match the initial state");
  }

  auto holds = [&](const WorldState& s, const Assertion& a) {
    struct V {
      const WorldState& s;
      bool operator()(const OnStack& x) const {
        const auto& st = s.regions.at(x.region.get());
        return x.height < st.size() && st[x.height] == x.object;
      }
      bool operator()(const InBuffer& x) const {
        const auto& b = s.regions.at(x.region.get());
        return std::binary_search(b.begin(), b.end(), x.object);
      }
      bool operator()(const Holding& x) const { return s.holds(x.robot, x.object); }
      bool operator()(const InTransit& x) const { return s.holder_of(x.object).has_value(); }
    };
    return std::visit(V{s}, a);
  };

  ExecutionResult result;
  WorldState s = p.initial;
  std::vector<ArcId> pending = topological_order(h);
  std::vector<bool> available(h.node_count(), false);
  for (NodeId n : h.sources()) available[n.get()] = true;

  while (!pending.empty()) {
    std::vector<ArcId> layer, rest;
    std::set<RobotIndex> busy;
    // Buffer occupancy and stacks emptied then refilled are not encoded in
    // node dependencies, so arcs touching one region keep their topological
    // order across layers.
    std::set<RegionIndex> blocked_regions;
    for (ArcId id : pending) {
      const auto& arc = h.arc(id);
      std::optional<RegionIndex> region;
      if (const auto* x = std::get_if<Pick>(&arc.label)) region = x->from;
      if (const auto* x = std::get_if<Place>(&arc.label)) region = x->to;
      bool ready = std::all_of(arc.tail.begin(), arc.tail.end(), [&](NodeId n) { return available[n.get()]; });
      auto robots = actors_of(arc.label);
      bool free = std::none_of(robots.begin(), robots.end(), [&](RobotIndex r) { return busy.count(r) > 0; });
      if (region && blocked_regions.count(*region)) free = false;
      if (ready && free) {
        layer.push_back(id);
        busy.insert(robots.begin(), robots.end());
      } else {
        rest.push_back(id);
        if (region) blocked_regions.insert(*region);
      }
    }
    for (ArcId id : layer) {
      const auto& arc = h.arc(id);
      std::set<EntityId> in_tail;
      for (NodeId n : arc.tail) {
        const auto& comp = h.node(n).data.composition;
        in_tail.insert(comp.begin(), comp.end());
      }
      for (RobotIndex r : actors_of(arc.label)) {
        if (!in_tail.count(EntityId::robot(r))) throw ExecutionFault(id, "acting robot is not in the tail");
      }
      if (!std::holds_alternative<Handoff>(arc.label) && !in_tail.count(EntityId::object(object_of(arc.label)))) {
        throw ExecutionFault(id, "manipulated object is not in the tail");
      }
      if (auto why = inapplicable_reason(s, arc.label, p)) throw ExecutionFault(id, describe(arc.label, p) + ": " + *why);
      s = apply(s, arc.label, p);
      for (NodeId n : arc.head) {
        for (const auto& fact : h.node(n).data.assertions) {
          if (!holds(s, fact)) throw ExecutionFault(id, "produced node asserts " + describe(fact, p) + " which is false");
        }
        available[n.get()] = true;
      }
    }
    result.layers.push_back(layer);
    pending = std::move(rest);
  }
  result.final_state = std::move(s);
  result.makespan = result.layers.size();
  result.actions = h.arc_count();
  return result;
}

/// DOT style for solution hypergraphs; handoff arcs are dashed.
inline RenderStyle<SolutionNode, Action> solution_style(const Problem& p, std::string name = "solution") {
  RenderStyle<SolutionNode, Action> style;
  style.graph_name = std::move(name);
  style.node_label = [&p](const SolutionNode& n) { return describe(n, p); };
  style.arc_label = [&p](const Action& a) { return describe(a, p); };
  style.dashed = [](const Action& a) { return is_handoff(a); };
  return style;
}

}  // namespace hyperplan
