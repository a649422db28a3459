#pragma once

#include <algorithm>
#include <concepts>
#include <iterator>
#include <functional>
#include <optional>
#include <queue>
#include <ranges>
#include <string>
#include <utility>
#include <vector>

#include "hyperplan/errors.hpp"
#include "hyperplan/ids.hpp"

namespace hyperplan {

// Node payloads expose their entities through an ADL-found
// `entities_of(const NodeData&)` returning a range of totally ordered keys.
// They may additionally provide `node_problems(const NodeData&)` returning a
// vector of diagnostics for malformed payloads.
template <class NodeData>
concept ComposedNode = requires(const NodeData& n) {
  { entities_of(n) };
};

template <class NodeData>
concept SelfChecking = requires(const NodeData& n) {
  { node_problems(n) } -> std::convertible_to<std::vector<std::string>>;
};

/// Directed hypergraph whose nodes are entity compositions and whose arcs
/// consume tail nodes and produce head nodes. Instances are immutable; use
/// Builder to create one.
template <class NodeData, class ArcLabel>
class Hypergraph {
 public:
  using node_data_type = NodeData;
  using arc_label_type = ArcLabel;

  struct Node {
    NodeId id;
    NodeData data;
  };

  struct Arc {
    ArcId id;
    ArcLabel label;
    std::vector<NodeId> tail;
    std::vector<NodeId> head;
  };

  class Builder;

  Hypergraph() = default;

  /// Wraps raw tables without enforcing hyperpath discipline. Node and arc
  /// ids must equal their table positions. Used when loading files, whose
  /// content is then checked with validate_hyperpath.
  static Hypergraph unchecked(std::vector<Node> nodes, std::vector<Arc> arcs) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].id.get() != i) throw StructureError("node ids must be dense and ordered");
    }
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      if (arcs[i].id.get() != i) throw StructureError("arc ids must be dense and ordered");
    }
    Hypergraph h;
    h.nodes_ = std::move(nodes);
    h.arcs_ = std::move(arcs);
    h.reindex();
    return h;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }

  bool contains(NodeId n) const { return n.get() < nodes_.size(); }
  const Node& node(NodeId n) const { return nodes_.at(n.get()); }
  const Arc& arc(ArcId a) const { return arcs_.at(a.get()); }

  std::optional<ArcId> producer(NodeId n) const { return producer_.at(n.get()); }
  std::optional<ArcId> consumer(NodeId n) const { return consumer_.at(n.get()); }

  std::vector<NodeId> sources() const {
    std::vector<NodeId> out;
    for (const auto& n : nodes_) {
      if (!producer_[n.id.get()]) out.push_back(n.id);
    }
    return out;
  }

  std::vector<NodeId> sinks() const {
    std::vector<NodeId> out;
    for (const auto& n : nodes_) {
      if (!consumer_[n.id.get()]) out.push_back(n.id);
    }
    return out;
  }

 private:
  void reindex() {
    producer_.assign(nodes_.size(), std::nullopt);
    consumer_.assign(nodes_.size(), std::nullopt);
    for (const auto& a : arcs_) {
      for (NodeId t : a.tail) {
        if (contains(t) && !consumer_[t.get()]) consumer_[t.get()] = a.id;
      }
      for (NodeId h : a.head) {
        if (contains(h) && !producer_[h.get()]) producer_[h.get()] = a.id;
      }
    }
  }

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::optional<ArcId>> producer_;
  std::vector<std::optional<ArcId>> consumer_;
};

/// Incremental construction that rejects anything breaking hyperpath
/// discipline: every node is produced at most once and consumed at most once,
/// and no arc may produce a node that has already been consumed (which also
/// rules out cycles). Entity conservation is left to validate_hyperpath.
template <class NodeData, class ArcLabel>
class Hypergraph<NodeData, ArcLabel>::Builder {
 public:
  NodeId add_node(NodeData data) {
    NodeId id(graph_.nodes_.size());
    graph_.nodes_.push_back({id, std::move(data)});
    graph_.producer_.emplace_back();
    graph_.consumer_.emplace_back();
    return id;
  }

  ArcId add_arc(ArcLabel label, std::vector<NodeId> tail, std::vector<NodeId> head) {
    if (tail.empty() || head.empty()) throw StructureError("hyperarc needs non-empty tail and head");
    for (NodeId n : tail) check_known(n);
    for (NodeId n : head) check_known(n);
    auto sorted = [](std::vector<NodeId> v) {
      std::sort(v.begin(), v.end());
      return v;
    };
    auto st = sorted(tail);
    auto sh = sorted(head);
    if (std::adjacent_find(st.begin(), st.end()) != st.end() ||
        std::adjacent_find(sh.begin(), sh.end()) != sh.end()) {
      throw StructureError("hyperarc lists a node twice");
    }
    std::vector<NodeId> common;
    std::set_intersection(st.begin(), st.end(), sh.begin(), sh.end(), std::back_inserter(common));
    if (!common.empty()) throw StructureError("hyperarc tail and head overlap");
    for (NodeId n : tail) {
      if (graph_.consumer_[n.get()]) {
        throw StructureError("node " + std::to_string(n.value) + " already consumed");
      }
    }
    for (NodeId n : head) {
      if (graph_.producer_[n.get()]) {
        throw StructureError("node " + std::to_string(n.value) + " already produced");
      }
      if (graph_.consumer_[n.get()]) {
        throw StructureError("node " + std::to_string(n.value) + " consumed before production");
      }
    }
    ArcId id(graph_.arcs_.size());
    for (NodeId n : tail) graph_.consumer_[n.get()] = id;
    for (NodeId n : head) graph_.producer_[n.get()] = id;
    graph_.arcs_.push_back({id, std::move(label), std::move(tail), std::move(head)});
    return id;
  }

  const NodeData& node_data(NodeId n) const { return graph_.nodes_.at(n.get()).data; }
  bool consumed(NodeId n) const { return graph_.consumer_.at(n.get()).has_value(); }
  std::size_t node_count() const { return graph_.nodes_.size(); }

  Hypergraph seal() && { return std::move(graph_); }

 private:
  void check_known(NodeId n) const {
    if (n.get() >= graph_.nodes_.size()) {
      throw StructureError("unknown node " + std::to_string(n.value));
    }
  }

  Hypergraph graph_;
};

enum class ViolationKind {
  Cycle,
  DoubleProduction,
  DoubleConsumption,
  EntityConservation,
  DanglingReference,
  EmptyArcSide,
  TailHeadOverlap,
  EmptyComposition,
  MalformedNode,
  OverlappingSources,
};

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Cycle: return "cycle";
    case ViolationKind::DoubleProduction: return "double-production";
    case ViolationKind::DoubleConsumption: return "double-consumption";
    case ViolationKind::EntityConservation: return "entity-conservation";
    case ViolationKind::DanglingReference: return "dangling-reference";
    case ViolationKind::EmptyArcSide: return "empty-arc-side";
    case ViolationKind::TailHeadOverlap: return "tail-head-overlap";
    case ViolationKind::EmptyComposition: return "empty-composition";
    case ViolationKind::MalformedNode: return "malformed-node";
    case ViolationKind::OverlappingSources: return "overlapping-sources";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::optional<ArcId> arc;
  std::optional<NodeId> node;
  std::string detail;
};

using ValidationReport = std::vector<Violation>;

inline bool has_violation(const ValidationReport& r, ViolationKind k) {
  return std::any_of(r.begin(), r.end(), [k](const Violation& v) { return v.kind == k; });
}

namespace detail {

template <class NodeData>
auto sorted_entities(const NodeData& n) {
  auto range = entities_of(n);
  std::vector<std::ranges::range_value_t<decltype(range)>> out(range.begin(), range.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Arc dependency graph: arc b depends on arc a when a produces a tail of b.
// References to unknown nodes are ignored here.
template <class G>
std::vector<std::vector<std::size_t>> arc_successors(const G& h, std::vector<std::size_t>& indegree) {
  std::vector<std::vector<std::size_t>> producers_of(h.node_count());
  for (const auto& a : h.arcs()) {
    for (NodeId n : a.head) {
      if (h.contains(n)) producers_of[n.get()].push_back(a.id.get());
    }
  }
  std::vector<std::vector<std::size_t>> succ(h.arc_count());
  indegree.assign(h.arc_count(), 0);
  for (const auto& a : h.arcs()) {
    for (NodeId n : a.tail) {
      if (!h.contains(n)) continue;
      for (std::size_t p : producers_of[n.get()]) {
        succ[p].push_back(a.id.get());
        ++indegree[a.id.get()];
      }
    }
  }
  return succ;
}

// Kahn's algorithm, smallest ready arc id first. Returns the arcs it could
// order; fewer than arc_count() means a cycle.
template <class G>
std::vector<ArcId> kahn(const G& h) {
  std::vector<std::size_t> indegree;
  auto succ = arc_successors(h, indegree);
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < indegree.size(); ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  std::vector<ArcId> order;
  order.reserve(h.arc_count());
  while (!ready.empty()) {
    std::size_t a = ready.top();
    ready.pop();
    order.emplace_back(a);
    for (std::size_t b : succ[a]) {
      if (--indegree[b] == 0) ready.push(b);
    }
  }
  return order;
}

}  // namespace detail

/// Lists every violated hyperpath invariant. An empty report means `h` is a
/// valid hyperpath.
template <ComposedNode NodeData, class ArcLabel>
ValidationReport validate_hyperpath(const Hypergraph<NodeData, ArcLabel>& h) {
  ValidationReport report;
  const std::size_t n_nodes = h.node_count();

  for (const auto& n : h.nodes()) {
    if (std::ranges::empty(entities_of(n.data))) {
      report.push_back({ViolationKind::EmptyComposition, std::nullopt, n.id, "node has no entities"});
    }
    if constexpr (SelfChecking<NodeData>) {
      for (auto& msg : node_problems(n.data)) {
        report.push_back({ViolationKind::MalformedNode, std::nullopt, n.id, std::move(msg)});
      }
    }
  }

  std::vector<std::size_t> produced(n_nodes, 0), consumed(n_nodes, 0);
  for (const auto& a : h.arcs()) {
    if (a.tail.empty() || a.head.empty()) {
      report.push_back({ViolationKind::EmptyArcSide, a.id, std::nullopt, "empty tail or head"});
    }
    bool dangling = false;
    for (const auto* side : {&a.tail, &a.head}) {
      for (NodeId n : *side) {
        if (!h.contains(n)) {
          dangling = true;
          report.push_back({ViolationKind::DanglingReference, a.id, n,
                            "references unknown node " + std::to_string(n.value)});
        }
      }
    }
    auto st = a.tail, sh = a.head;
    std::sort(st.begin(), st.end());
    std::sort(sh.begin(), sh.end());
    std::vector<NodeId> common;
    std::set_intersection(st.begin(), st.end(), sh.begin(), sh.end(), std::back_inserter(common));
    for (NodeId n : common) {
      report.push_back({ViolationKind::TailHeadOverlap, a.id, n, "node is both tail and head"});
    }
    for (NodeId n : a.tail) {
      if (h.contains(n)) ++consumed[n.get()];
    }
    for (NodeId n : a.head) {
      if (h.contains(n)) ++produced[n.get()];
    }
    if (dangling) continue;

    using Key = typename decltype(detail::sorted_entities(std::declval<const NodeData&>()))::value_type;
    std::vector<Key> in, out;
    for (NodeId n : a.tail) {
      auto e = detail::sorted_entities(h.node(n).data);
      in.insert(in.end(), e.begin(), e.end());
    }
    for (NodeId n : a.head) {
      auto e = detail::sorted_entities(h.node(n).data);
      out.insert(out.end(), e.begin(), e.end());
    }
    std::sort(in.begin(), in.end());
    std::sort(out.begin(), out.end());
    if (in != out) {
      report.push_back({ViolationKind::EntityConservation, a.id, std::nullopt,
                        "tail and head entity multisets differ"});
    }
  }
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (produced[i] > 1) {
      report.push_back({ViolationKind::DoubleProduction, std::nullopt, NodeId(i),
                        "produced by " + std::to_string(produced[i]) + " arcs"});
    }
    if (consumed[i] > 1) {
      report.push_back({ViolationKind::DoubleConsumption, std::nullopt, NodeId(i),
                        "consumed by " + std::to_string(consumed[i]) + " arcs"});
    }
  }

  // Entities may start in only one place.
  {
    using Key = typename decltype(detail::sorted_entities(std::declval<const NodeData&>()))::value_type;
    std::vector<std::pair<Key, NodeId>> seen;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (produced[i] != 0) continue;
      for (const auto& e : detail::sorted_entities(h.node(NodeId(i)).data)) seen.emplace_back(e, NodeId(i));
    }
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 1; i < seen.size(); ++i) {
      if (seen[i].first == seen[i - 1].first) {
        report.push_back({ViolationKind::OverlappingSources, std::nullopt, seen[i].second,
                          "entity appears in more than one source node"});
      }
    }
  }

  auto order = detail::kahn(h);
  if (order.size() != h.arc_count()) {
    std::vector<bool> ordered(h.arc_count(), false);
    for (ArcId a : order) ordered[a.get()] = true;
    std::string members;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      if (!ordered[i]) members += (members.empty() ? "" : ",") + std::to_string(i);
    }
    report.push_back({ViolationKind::Cycle, std::nullopt, std::nullopt, "arcs on or after a cycle: " + members});
  }
  return report;
}

/// Arcs ordered so each follows every arc producing one of its tails; ties go
/// to the smaller arc id.
template <class NodeData, class ArcLabel>
std::vector<ArcId> topological_order(const Hypergraph<NodeData, ArcLabel>& h) {
  auto order = detail::kahn(h);
  if (order.size() != h.arc_count()) throw CycleDetected("hypergraph contains a cycle");
  return order;
}

/// Nodes in production order: sources by id, then each arc's heads as the arc
/// appears in topological order.
template <class NodeData, class ArcLabel>
std::vector<NodeId> topological_nodes(const Hypergraph<NodeData, ArcLabel>& h) {
  std::vector<NodeId> out = h.sources();
  for (ArcId a : topological_order(h)) {
    for (NodeId n : h.arc(a).head) out.push_back(n);
  }
  return out;
}

}  // namespace hyperplan
