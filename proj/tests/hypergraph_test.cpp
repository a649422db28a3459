#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "hyperplan/dot.hpp"
#include "hyperplan/hypergraph.hpp"
#include "hyperplan/solution.hpp"
#include "test_support.hpp"

namespace {

using namespace hyperplan;
using hyperplan::testing::fixture;
using hyperplan::testing::fig1_narrative;

struct Blob {
  std::vector<int> entities;
};
const std::vector<int>& entities_of(const Blob& b) { return b.entities; }

using G = Hypergraph<Blob, std::string>;

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

TEST(Hypergraph, Fig1NarrativeIsValidHyperpath) {
  auto p = fixture("fig1");
  auto h = build_hypergraph(fig1_narrative(p), p);
  EXPECT_EQ(h.arc_count(), 6u);
  EXPECT_TRUE(validate_hyperpath(h).empty());
}

TEST(Hypergraph, SourcesOnlyIsVacuouslyValid) {
  G::Builder b;
  b.add_node({{1}});
  b.add_node({{2}});
  b.add_node({{3}});
  auto h = std::move(b).seal();
  EXPECT_TRUE(validate_hyperpath(h).empty());
  EXPECT_EQ(h.sources().size(), 3u);
  EXPECT_EQ(h.sinks().size(), 3u);
}

TEST(Hypergraph, DroppedEntityIsConservationViolation) {
  G::Builder b;
  auto a = b.add_node({{1, 2}});
  auto c = b.add_node({{1}});
  b.add_arc("lossy", {a}, {c});
  auto report = validate_hyperpath(std::move(b).seal());
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].kind, ViolationKind::EntityConservation);
  EXPECT_EQ(report[0].arc, ArcId(0));
}

TEST(Hypergraph, BuilderEnforcesDiscipline) {
  G::Builder b;
  auto x = b.add_node({{1}});
  auto y = b.add_node({{1}});
  auto z = b.add_node({{1}});
  b.add_arc("a", {x}, {y});
  EXPECT_THROW(b.add_arc("b", {x}, {z}), StructureError);  // x consumed twice
  EXPECT_THROW(b.add_arc("c", {z}, {y}), StructureError);  // y produced twice
  EXPECT_THROW(b.add_arc("d", {y}, {x}), StructureError);  // x consumed before production
  EXPECT_THROW(b.add_arc("e", {y}, {y}), StructureError);
  EXPECT_THROW(b.add_arc("f", {}, {z}), StructureError);
  EXPECT_THROW(b.add_arc("g", {NodeId(9)}, {z}), StructureError);
}

TEST(Hypergraph, ValidationReportsEveryViolation) {
  std::vector<G::Node> nodes{{NodeId(0), {{1}}}, {NodeId(1), {{1}}}, {NodeId(2), {{}}}};
  std::vector<G::Arc> arcs{
      {ArcId(0), "x", {NodeId(0)}, {NodeId(1)}},
      {ArcId(1), "y", {NodeId(1)}, {NodeId(0)}},
      {ArcId(2), "z", {NodeId(0)}, {NodeId(7)}},
  };
  auto report = validate_hyperpath(G::unchecked(nodes, arcs));
  EXPECT_TRUE(has_violation(report, ViolationKind::Cycle));
  EXPECT_TRUE(has_violation(report, ViolationKind::DoubleConsumption));
  EXPECT_TRUE(has_violation(report, ViolationKind::DanglingReference));
  EXPECT_TRUE(has_violation(report, ViolationKind::EmptyComposition));
}

TEST(Hypergraph, DoubleProductionAndOverlap) {
  std::vector<G::Node> nodes{{NodeId(0), {{1}}}, {NodeId(1), {{2}}}, {NodeId(2), {{1}}}};
  std::vector<G::Arc> arcs{
      {ArcId(0), "x", {NodeId(0)}, {NodeId(2)}},
      {ArcId(1), "y", {NodeId(1)}, {NodeId(2), NodeId(1)}},
  };
  auto report = validate_hyperpath(G::unchecked(nodes, arcs));
  EXPECT_TRUE(has_violation(report, ViolationKind::DoubleProduction));
  EXPECT_TRUE(has_violation(report, ViolationKind::TailHeadOverlap));
}

TEST(Hypergraph, OverlappingSourcesReported) {
  G::Builder b;
  b.add_node({{1}});
  b.add_node({{1, 2}});
  auto report = validate_hyperpath(std::move(b).seal());
  EXPECT_TRUE(has_violation(report, ViolationKind::OverlappingSources));
}

TEST(Hypergraph, TopologicalOrderFig1) {
  auto p = fixture("fig1");
  auto h = build_hypergraph(fig1_narrative(p), p);
  auto order = topological_order(h);
  ASSERT_EQ(order.size(), 6u);
  auto pos = [&](std::size_t arc) { return std::find(order.begin(), order.end(), ArcId(arc)) - order.begin(); };
  EXPECT_LT(pos(0), pos(1));  // arc 2 follows arc 1
  EXPECT_LT(pos(3), pos(4));  // arc 5 follows arc 4
  // Arcs 2 and 3 are mutually unordered: neither produces a tail of the other.
  for (NodeId n : h.arc(ArcId(2)).tail) EXPECT_NE(h.producer(n), std::optional<ArcId>(ArcId(1)));
  for (NodeId n : h.arc(ArcId(1)).tail) EXPECT_NE(h.producer(n), std::optional<ArcId>(ArcId(2)));
}

TEST(Hypergraph, TopologicalOrderEmptyAndTies) {
  EXPECT_TRUE(topological_order(G{}).empty());
  G::Builder b;
  auto r1 = b.add_node({{1}}), r2 = b.add_node({{2}});
  auto o1 = b.add_node({{3}}), o2 = b.add_node({{4}});
  auto h1 = b.add_node({{1, 3}}), h2 = b.add_node({{2, 4}});
  b.add_arc("a", {r1, o1}, {h1});
  b.add_arc("b", {r2, o2}, {h2});
  auto order = topological_order(std::move(b).seal());
  EXPECT_EQ(order, (std::vector<ArcId>{ArcId(0), ArcId(1)}));
}

TEST(Hypergraph, TopologicalOrderRejectsCycle) {
  std::vector<G::Node> nodes{{NodeId(0), {{1}}}, {NodeId(1), {{1}}}};
  std::vector<G::Arc> arcs{{ArcId(0), "x", {NodeId(0)}, {NodeId(1)}}, {ArcId(1), "y", {NodeId(1)}, {NodeId(0)}}};
  EXPECT_THROW(topological_order(G::unchecked(nodes, arcs)), CycleDetected);
}

TEST(Hypergraph, TopologicalOrderLengthAndConsistency) {
  auto p = fixture("fig1");
  auto h = build_hypergraph(fig1_narrative(p), p);
  auto order = topological_order(h);
  EXPECT_EQ(order.size(), h.arc_count());
  std::vector<bool> done(h.arc_count(), false);
  for (ArcId a : order) {
    for (NodeId t : h.arc(a).tail) {
      if (auto prod = h.producer(t)) {
        EXPECT_TRUE(done[prod->get()]);
      }
    }
    done[a.get()] = true;
  }
}

TEST(Dot, EmptyGraphHasNoNodes) {
  auto dot = to_dot(G{}, RenderStyle<Blob, std::string>{});
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_EQ(count(dot, "shape="), 0u);
  EXPECT_EQ(count(dot, "->"), 0u);
}

TEST(Dot, OneArcStructure) {
  G::Builder b;
  auto n1 = b.add_node({{1}}), n2 = b.add_node({{2}}), n3 = b.add_node({{1, 2}});
  b.add_arc("merge", {n1, n2}, {n3});
  auto dot = to_dot(std::move(b).seal(), RenderStyle<Blob, std::string>{});
  EXPECT_EQ(count(dot, "shape=ellipse"), 3u);
  EXPECT_EQ(count(dot, "shape=box"), 1u);
  EXPECT_EQ(count(dot, "->"), 3u);
  EXPECT_EQ(count(dot, "dashed"), 0u);
}

TEST(Dot, HandoffArcsDashedInSolutions) {
  auto p = fixture("fig2");
  auto loader = p.find_robot("loader").value(), stacker = p.find_robot("stacker").value();
  auto c3 = p.find_object("crate3").value();
  auto west = p.find_region("west_pedestal").value(), east = p.find_region("east_pedestal").value();
  std::vector<Action> acts{Pick{loader, c3, west}, Handoff{loader, stacker, c3}, Place{stacker, c3, east}};
  auto dot = to_dot(build_hypergraph(acts, p), solution_style(p));
  EXPECT_EQ(count(dot, "shape=box"), 3u);
  EXPECT_EQ(count(dot, "shape=box, label=\"handoff(loader -> stacker, crate3)\", style=dashed"), 1u);
}

}  // namespace
