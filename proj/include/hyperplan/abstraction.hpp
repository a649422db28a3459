#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hyperplan/dot.hpp"
#include "hyperplan/domain.hpp"
#include "hyperplan/hypergraph.hpp"
#include "hyperplan/solution.hpp"

namespace hyperplan {

using AbstractObject = Index<struct AbstractObjectTag>;

enum class RoleKind { Source, Target, Buffer };

/// Region placeholder. Target roles are numbered by goal declaration order,
/// source roles by first use; all buffers share one role.
struct RegionRole {
  RoleKind kind = RoleKind::Source;
  std::uint32_t index = 0;

  static RegionRole source(std::size_t i) { return {RoleKind::Source, static_cast<std::uint32_t>(i)}; }
  static RegionRole target(std::size_t i) { return {RoleKind::Target, static_cast<std::uint32_t>(i)}; }
  static RegionRole buffer() { return {RoleKind::Buffer, 0}; }

  bool is_stack() const { return kind != RoleKind::Buffer; }
  friend auto operator<=>(const RegionRole&, const RegionRole&) = default;
};

inline std::string to_string(const RegionRole& r) {
  switch (r.kind) {
    case RoleKind::Source: return "S" + std::to_string(r.index);
    case RoleKind::Target: return "T" + std::to_string(r.index);
    case RoleKind::Buffer: return "B";
  }
  return "?";
}

struct AbstractNode {
  std::vector<AbstractObject> composition;  // ascending
  std::optional<RegionRole> region;
  std::vector<AbstractObject> stack;  // bottom-to-top, stack roles only
  bool abstract_robot = true;
  bool critical = false;

  bool operator==(const AbstractNode&) const = default;
};

inline const std::vector<AbstractObject>& entities_of(const AbstractNode& n) { return n.composition; }

inline std::vector<std::string> node_problems(const AbstractNode& n) {
  std::vector<std::string> out;
  if (!std::is_sorted(n.composition.begin(), n.composition.end()) ||
      std::adjacent_find(n.composition.begin(), n.composition.end()) != n.composition.end()) {
    out.push_back("composition must be ascending without repeats");
  }
  if (!n.stack.empty()) {
    auto sorted = n.stack;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != n.composition) out.push_back("stack order must list exactly the composition");
    if (!n.region || !n.region->is_stack()) out.push_back("stack order without a stack role");
  }
  if (n.region && n.region->is_stack() && n.stack.empty()) out.push_back("stack role without stack order");
  if (n.region && n.region->kind == RoleKind::Buffer && n.composition.size() != 1) {
    out.push_back("buffer nodes hold exactly one object");
  }
  return out;
}

struct AbstractStep {
  bool operator==(const AbstractStep&) const = default;
};

using AbstractGraph = Hypergraph<AbstractNode, AbstractStep>;

/// A reusable strategy: the abstract hypergraph plus the abstract goal, one
/// bottom-to-top list of abstract objects per target role.
struct AbstractHypergraph {
  AbstractGraph graph;
  std::vector<std::vector<AbstractObject>> goal;
  std::size_t object_count = 0;

  bool uses_buffer() const {
    return std::any_of(graph.nodes().begin(), graph.nodes().end(), [](const auto& n) {
      return n.data.region && n.data.region->kind == RoleKind::Buffer;
    });
  }
};

/// Intersects every composition with the object set. Nodes left empty are
/// deleted, arcs over robots alone are dropped, and arcs that leave a single
/// composition unchanged (handoffs, for instance) are contracted.
inline SolutionHypergraph remove_robot_entities(const SolutionHypergraph& h) {
  const std::size_t n = h.node_count();
  std::vector<SolutionNode> data(n);
  std::vector<bool> kept(n, false);
  for (const auto& node : h.nodes()) {
    SolutionNode& d = data[node.id.get()];
    for (EntityId e : node.data.composition) {
      if (e.is_object()) d.composition.push_back(e);
    }
    for (const auto& a : node.data.assertions) {
      if (const auto* x = std::get_if<Holding>(&a)) {
        d.assertions.push_back(InTransit{x->object});
      } else {
        d.assertions.push_back(a);
      }
    }
    std::sort(d.assertions.begin(), d.assertions.end());
    kept[node.id.get()] = !d.composition.empty();
  }

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  struct Pending {
    Action label;
    std::vector<std::size_t> tail, head;
  };
  std::vector<Pending> arcs;
  for (const auto& a : h.arcs()) {
    Pending p{a.label, {}, {}};
    for (NodeId t : a.tail) {
      if (kept[t.get()]) p.tail.push_back(t.get());
    }
    for (NodeId x : a.head) {
      if (kept[x.get()]) p.head.push_back(x.get());
    }
    if (p.tail.empty() && p.head.empty()) continue;
    if (p.tail.size() == 1 && p.head.size() == 1 && data[p.tail[0]] == data[p.head[0]]) {
      parent[find(p.head[0])] = find(p.tail[0]);
      continue;
    }
    arcs.push_back(std::move(p));
  }

  SolutionHypergraph::Builder b;
  std::vector<std::optional<NodeId>> renamed(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (kept[i] && find(i) == i) renamed[i] = b.add_node(data[i]);
  }
  for (auto& p : arcs) {
    std::vector<NodeId> tail, head;
    for (std::size_t t : p.tail) tail.push_back(*renamed[find(t)]);
    for (std::size_t x : p.head) head.push_back(*renamed[find(x)]);
    b.add_arc(p.label, std::move(tail), std::move(head));
  }
  return std::move(b).seal();
}

/// Sources, sinks, and every node created by a Place onto a goal region.
/// Ascending ids.
inline std::vector<NodeId> select_critical_nodes(const SolutionHypergraph& h_obj, const Problem& p) {
  std::set<NodeId> out;
  for (NodeId n : h_obj.sources()) out.insert(n);
  for (NodeId n : h_obj.sinks()) out.insert(n);
  for (const auto& a : h_obj.arcs()) {
    const auto* place = std::get_if<Place>(&a.label);
    if (!place || !p.goal_for(place->to)) continue;
    for (NodeId x : a.head) {
      if (stack_region_of(h_obj.node(x).data) == place->to) out.insert(x);
    }
  }
  return {out.begin(), out.end()};
}

/// Replaces object and region labels with roles and connects the critical
/// nodes. Each non-source critical node c, in topological order, gets one arc
/// whose tail is the current frontier holding c's objects; the head is c plus
/// a non-critical residual node carrying the tail objects c leaves behind.
/// Sources enter the strategy when they are consumed or hold a goal object.
inline AbstractHypergraph abstract_labels(const SolutionHypergraph& h_obj, const std::vector<NodeId>& critical,
                                          const Problem& p) {
  std::set<NodeId> is_critical(critical.begin(), critical.end());
  std::set<ObjectIndex> goal_objects;
  for (ObjectIndex o : p.goal_objects()) goal_objects.insert(o);

  // Objects of a node bottom-to-top, then off-stack objects by `rank`.
  auto ordered_objects = [](const SolutionNode& n, const auto& rank) {
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, ObjectIndex>> keyed;
    for (ObjectIndex o : n.objects()) {
      std::size_t height = SIZE_MAX;
      for (const auto& a : n.assertions) {
        if (const auto* s = std::get_if<OnStack>(&a); s && s->object == o) height = s->height;
      }
      keyed.push_back({{height, rank(o)}, o});
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<ObjectIndex> out;
    for (auto& k : keyed) out.push_back(k.second);
    return out;
  };
  auto by_index = [](ObjectIndex o) { return o.get(); };

  std::vector<NodeId> sources;
  for (NodeId s : h_obj.sources()) {
    const auto& d = h_obj.node(s).data;
    bool has_goal = std::any_of(d.composition.begin(), d.composition.end(),
                                [&](EntityId e) { return e.is_object() && goal_objects.count(e.as_object()); });
    if (h_obj.consumer(s) || has_goal) sources.push_back(s);
  }

  std::vector<NodeId> steps;
  for (NodeId n : topological_nodes(h_obj)) {
    if (is_critical.count(n) && h_obj.producer(n)) steps.push_back(n);
  }

  // Abstract objects by first appearance along the critical progression,
  // then whatever the sources hold beyond that.
  std::map<ObjectIndex, AbstractObject> rename;
  auto number = [&](ObjectIndex o) {
    if (!rename.count(o)) rename.emplace(o, AbstractObject(rename.size()));
  };
  std::map<ObjectIndex, std::size_t> source_rank;
  for (NodeId src : sources) {
    for (ObjectIndex o : ordered_objects(h_obj.node(src).data, by_index)) source_rank.emplace(o, source_rank.size());
  }
  auto by_source = [&](ObjectIndex o) { return source_rank.count(o) ? source_rank.at(o) : SIZE_MAX; };
  for (NodeId c : steps) {
    for (ObjectIndex o : ordered_objects(h_obj.node(c).data, by_source)) number(o);
  }
  for (NodeId src : sources) {
    for (ObjectIndex o : ordered_objects(h_obj.node(src).data, by_index)) number(o);
  }

  struct Draft {
    std::vector<AbstractObject> composition;
    std::optional<RegionIndex> region;
    std::vector<AbstractObject> stack;
    bool critical;
  };
  auto draft_of = [&](const SolutionNode& d, bool crit) {
    Draft out{{}, std::nullopt, {}, crit};
    for (ObjectIndex o : d.objects()) out.composition.push_back(rename.at(o));
    std::sort(out.composition.begin(), out.composition.end());
    if (auto reg = stack_region_of(d)) {
      out.region = reg;
      for (ObjectIndex o : ordered_objects(d, by_index)) out.stack.push_back(rename.at(o));
    } else if (d.assertions.size() == 1 && std::holds_alternative<InBuffer>(d.assertions[0])) {
      out.region = std::get<InBuffer>(d.assertions[0]).region;
    }
    return out;
  };

  std::vector<Draft> drafts;
  struct DraftArc {
    std::vector<std::size_t> tail, head;
  };
  std::vector<DraftArc> draft_arcs;
  std::map<AbstractObject, std::size_t> frontier;
  auto push = [&](Draft d) {
    for (AbstractObject o : d.composition) frontier[o] = drafts.size();
    drafts.push_back(std::move(d));
    return drafts.size() - 1;
  };
  for (NodeId s : sources) push(draft_of(h_obj.node(s).data, true));
  for (NodeId c : steps) {
    Draft head = draft_of(h_obj.node(c).data, true);
    std::set<std::size_t> tail;
    for (AbstractObject o : head.composition) tail.insert(frontier.at(o));
    std::vector<AbstractObject> leftover;
    for (std::size_t t : tail) {
      for (AbstractObject o : drafts[t].composition) {
        if (!std::binary_search(head.composition.begin(), head.composition.end(), o)) leftover.push_back(o);
      }
    }
    std::sort(leftover.begin(), leftover.end());
    DraftArc arc{{tail.begin(), tail.end()}, {push(std::move(head))}};
    if (!leftover.empty()) arc.head.push_back(push(Draft{leftover, std::nullopt, {}, false}));
    draft_arcs.push_back(std::move(arc));
  }

  std::map<RegionIndex, RegionRole> roles;
  for (std::size_t i = 0; i < p.goal.size(); ++i) roles.emplace(p.goal[i].region, RegionRole::target(i));
  std::size_t next_source = 0;
  for (const auto& d : drafts) {
    if (!d.region || roles.count(*d.region)) continue;
    roles.emplace(*d.region, p.region(*d.region).is_buffer() ? RegionRole::buffer() : RegionRole::source(next_source++));
  }

  AbstractHypergraph ah;
  AbstractGraph::Builder b;
  for (auto& d : drafts) {
    AbstractNode node;
    node.composition = std::move(d.composition);
    if (d.region) node.region = roles.at(*d.region);
    node.stack = std::move(d.stack);
    node.critical = d.critical;
    b.add_node(std::move(node));
  }
  for (const auto& a : draft_arcs) {
    std::vector<NodeId> tail, head;
    for (std::size_t t : a.tail) tail.emplace_back(t);
    for (std::size_t x : a.head) head.emplace_back(x);
    b.add_arc(AbstractStep{}, std::move(tail), std::move(head));
  }
  ah.graph = std::move(b).seal();
  ah.object_count = rename.size();
  for (const auto& g : p.goal) {
    std::vector<AbstractObject> stack;
    for (ObjectIndex o : g.objects) stack.push_back(rename.at(o));
    ah.goal.push_back(std::move(stack));
  }
  return ah;
}

/// Robot removal, critical-node selection and label abstraction in sequence.
inline AbstractHypergraph extract_strategy(const SolutionHypergraph& h, const Problem& p) {
  auto h_obj = remove_robot_entities(h);
  return abstract_labels(h_obj, select_critical_nodes(h_obj, p), p);
}

/// Every broken strategy invariant; empty when the strategy is well formed.
inline std::vector<std::string> strategy_problems(const AbstractHypergraph& ah) {
  std::vector<std::string> out;
  for (const auto& v : validate_hyperpath(ah.graph)) {
    out.push_back(std::string(to_string(v.kind)) + ": " + v.detail);
  }
  std::vector<bool> seen(ah.object_count, false);
  for (const auto& n : ah.graph.nodes()) {
    for (AbstractObject o : n.data.composition) {
      if (o.get() >= ah.object_count) {
        out.push_back("node " + std::to_string(n.id.value) + " names an undeclared object");
      } else {
        seen[o.get()] = true;
      }
    }
    if (n.data.region && n.data.region->kind == RoleKind::Target && n.data.region->index >= ah.goal.size()) {
      out.push_back("node " + std::to_string(n.id.value) + " uses an undeclared target role");
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) out.push_back("object roles are not dense");
  std::set<AbstractObject> in_goal;
  for (const auto& g : ah.goal) {
    for (AbstractObject o : g) {
      if (o.get() >= ah.object_count) out.push_back("goal names an undeclared object");
      if (!in_goal.insert(o).second) out.push_back("goal lists an object twice");
    }
  }
  return out;
}

/// Text form used for equality: roles and ids are already assigned by
/// first use, so only arc sides need sorting.
inline std::string canonical_form(const AbstractHypergraph& ah) {
  auto list = [](const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i].value);
    return s;
  };
  std::string out = "objects " + std::to_string(ah.object_count) + "\n";
  for (std::size_t t = 0; t < ah.goal.size(); ++t) out += "goal T" + std::to_string(t) + " [" + list(ah.goal[t]) + "]\n";
  for (const auto& n : ah.graph.nodes()) {
    out += "node " + std::to_string(n.id.value) + " {" + list(n.data.composition) + "}";
    if (n.data.region) out += " " + to_string(*n.data.region);
    if (!n.data.stack.empty()) out += " [" + list(n.data.stack) + "]";
    if (n.data.critical) out += " critical";
    if (n.data.abstract_robot) out += " robot";
    out += "\n";
  }
  for (const auto& a : ah.graph.arcs()) {
    auto tail = a.tail, head = a.head;
    std::sort(tail.begin(), tail.end());
    std::sort(head.begin(), head.end());
    out += "arc {" + list(tail) + "} -> {" + list(head) + "}\n";
  }
  return out;
}

inline std::string describe(const AbstractNode& n) {
  std::string out = "{";
  for (std::size_t i = 0; i < n.composition.size(); ++i) out += (i ? ", " : "") + ("a" + std::to_string(n.composition[i].value));
  out += "}";
  if (n.region) {
    out += "\n@" + to_string(*n.region);
    if (!n.stack.empty()) {
      out += " [";
      for (std::size_t i = 0; i < n.stack.size(); ++i) out += (i ? " " : "") + ("a" + std::to_string(n.stack[i].value));
      out += "]";
    }
  }
  if (!n.critical) out += "\n(residual)";
  return out;
}

/// DOT style for strategies; every abstract arc is dashed.
inline RenderStyle<AbstractNode, AbstractStep> abstract_style(std::string name = "strategy") {
  RenderStyle<AbstractNode, AbstractStep> style;
  style.graph_name = std::move(name);
  style.node_label = [](const AbstractNode& n) { return describe(n); };
  style.arc_label = [](const AbstractStep&) { return std::string("abstract"); };
  style.dashed = [](const AbstractStep&) { return true; };
  return style;
}

}  // namespace hyperplan
