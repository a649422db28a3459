#pragma once

#include <functional>
#include <sstream>
#include <string>

#include "hyperplan/hypergraph.hpp"

namespace hyperplan {

/// How to label and style a hypergraph when rendering it as DOT.
template <class NodeData, class ArcLabel>
struct RenderStyle {
  std::string graph_name = "hypergraph";
  std::function<std::string(const NodeData&)> node_label;
  std::function<std::string(const ArcLabel&)> arc_label;
  std::function<bool(const ArcLabel&)> dashed;
};

inline std::string dot_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

// Bipartite encoding: composition nodes are ellipses `nK`, each hyperarc is a
// box junction `aK` with tail -> junction -> head edges.
template <class NodeData, class ArcLabel>
std::string to_dot(const Hypergraph<NodeData, ArcLabel>& h, const RenderStyle<NodeData, ArcLabel>& style) {
  std::ostringstream out;
  out << "digraph \"" << dot_escape(style.graph_name) << "\" {\n";
  out << "  rankdir=LR;\n";
  for (const auto& n : h.nodes()) {
    std::string label = style.node_label ? style.node_label(n.data) : "n" + std::to_string(n.id.value);
    out << "  n" << n.id.value << " [shape=ellipse, label=\"" << dot_escape(label) << "\"];\n";
  }
  for (const auto& a : h.arcs()) {
    std::string label = style.arc_label ? style.arc_label(a.label) : std::to_string(a.id.value);
    bool dashed = style.dashed && style.dashed(a.label);
    out << "  a" << a.id.value << " [shape=box, label=\"" << dot_escape(label) << "\"";
    if (dashed) out << ", style=dashed";
    out << "];\n";
    for (NodeId t : a.tail) {
      out << "  n" << t.value << " -> a" << a.id.value;
      if (dashed) out << " [style=dashed]";
      out << ";\n";
    }
    for (NodeId hd : a.head) {
      out << "  a" << a.id.value << " -> n" << hd.value;
      if (dashed) out << " [style=dashed]";
      out << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace hyperplan
