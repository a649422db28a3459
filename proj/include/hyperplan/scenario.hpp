#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "hyperplan/domain.hpp"
#include "hyperplan/errors.hpp"
#include "hyperplan/solution.hpp"

namespace hyperplan {

using Json = nlohmann::ordered_json;

struct Scenario {
  std::string name;
  std::string notes;
  Problem problem;
  bool operator==(const Scenario&) const = default;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw IoFailure("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoFailure("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

namespace detail {

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + std::min(e.byte, text.size()), '\n'));
    throw ParseError(what + ": line " + std::to_string(line) + ": " + e.what());
  }
}

// Field access with diagnostics that name the offending path.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(path_ + ": expected an object");
  }

  void only(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!ok.count(it.key())) throw ParseError(path_ + "." + it.key() + ": unknown field");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const Json& at(const char* key) const {
    if (!j_.contains(key)) throw ParseError(path_ + "." + key + ": missing field");
    return j_.at(key);
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  std::string string(const char* key) const {
    const Json& v = at(key);
    if (!v.is_string()) throw ParseError(path(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::size_t count(const char* key) const {
    const Json& v = at(key);
    if (!v.is_number_unsigned()) throw ParseError(path(key) + ": expected a non-negative integer");
    return v.get<std::size_t>();
  }

  const Json& array(const char* key) const {
    const Json& v = at(key);
    if (!v.is_array()) throw ParseError(path(key) + ": expected an array");
    return v;
  }

  const Json& object(const char* key) const {
    const Json& v = at(key);
    if (!v.is_object()) throw ParseError(path(key) + ": expected an object");
    return v;
  }

 private:
  const Json& j_;
  std::string path_;
};

inline std::vector<std::string> string_list(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path + ": expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) throw ParseError(path + "[" + std::to_string(i) + "]: expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

}  // namespace detail

/// Parses and validates a scenario document. Unknown fields are rejected.
inline Scenario parse_scenario(const std::string& text) {
  using detail::Fields;
  Json doc = detail::parse_json(text, "scenario");
  Fields root(doc, "scenario");
  root.only({"name", "notes", "regions", "objects", "robots", "initial", "held", "goal"});

  Scenario sc;
  sc.name = root.string("name");
  if (root.has("notes")) sc.notes = root.string("notes");
  Problem& p = sc.problem;

  const Json& regions = root.array("regions");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    Fields r(regions[i], "regions[" + std::to_string(i) + "]");
    r.only({"id", "kind", "capacity"});
    Region reg;
    reg.id = r.string("id");
    std::string kind = r.string("kind");
    if (kind == "stack") {
      reg.kind = RegionKind::Stack;
      if (r.has("capacity")) throw ParseError(r.path("capacity") + ": stacks have no capacity");
    } else if (kind == "buffer") {
      reg.kind = RegionKind::Buffer;
      reg.capacity = r.count("capacity");
    } else {
      throw ParseError(r.path("kind") + ": expected \"stack\" or \"buffer\"");
    }
    p.regions.push_back(std::move(reg));
  }
  p.objects = detail::string_list(root.array("objects"), "scenario.objects");

  auto region_ref = [&](const std::string& name, const std::string& path) {
    auto r = p.find_region(name);
    if (!r) throw ValidationError(path + ": unknown region '" + name + "'");
    return *r;
  };
  auto object_ref = [&](const std::string& name, const std::string& path) {
    auto o = p.find_object(name);
    if (!o) throw ValidationError(path + ": undeclared object '" + name + "'");
    return *o;
  };

  const Json& robots = root.array("robots");
  for (std::size_t i = 0; i < robots.size(); ++i) {
    Fields r(robots[i], "robots[" + std::to_string(i) + "]");
    r.only({"id", "reach", "capacity"});
    RobotSpec spec;
    spec.id = r.string("id");
    for (const auto& name : detail::string_list(r.array("reach"), r.path("reach"))) {
      spec.reach.push_back(region_ref(name, r.path("reach")));
    }
    std::sort(spec.reach.begin(), spec.reach.end());
    spec.reach.erase(std::unique(spec.reach.begin(), spec.reach.end()), spec.reach.end());
    if (r.has("capacity")) spec.capacity = r.count("capacity");
    p.robots.push_back(std::move(spec));
  }

  p.initial = p.empty_state();
  const Json& initial = root.object("initial");
  for (auto it = initial.begin(); it != initial.end(); ++it) {
    std::string path = "scenario.initial." + it.key();
    RegionIndex reg = region_ref(it.key(), path);
    auto& contents = p.initial.regions[reg.get()];
    for (const auto& name : detail::string_list(it.value(), path)) contents.push_back(object_ref(name, path));
    if (p.region(reg).is_buffer()) std::sort(contents.begin(), contents.end());
  }
  if (root.has("held")) {
    const Json& held = root.object("held");
    for (auto it = held.begin(); it != held.end(); ++it) {
      std::string path = "scenario.held." + it.key();
      auto r = p.find_robot(it.key());
      if (!r) throw ValidationError(path + ": unknown robot '" + it.key() + "'");
      auto& h = p.initial.holdings[r->get()];
      for (const auto& name : detail::string_list(it.value(), path)) h.push_back(object_ref(name, path));
      std::sort(h.begin(), h.end());
    }
  }

  const Json& goal = root.object("goal");
  for (auto it = goal.begin(); it != goal.end(); ++it) {
    std::string path = "scenario.goal." + it.key();
    GoalStack g{region_ref(it.key(), path), {}};
    for (const auto& name : detail::string_list(it.value(), path)) g.objects.push_back(object_ref(name, path));
    p.goal.push_back(std::move(g));
  }

  validate_problem(p);
  return sc;
}

inline Json scenario_to_json(const Scenario& sc) {
  const Problem& p = sc.problem;
  Json doc;
  doc["name"] = sc.name;
  if (!sc.notes.empty()) doc["notes"] = sc.notes;
  doc["regions"] = Json::array();
  for (const auto& r : p.regions) {
    Json j;
    j["id"] = r.id;
    j["kind"] = r.is_stack() ? "stack" : "buffer";
    if (r.is_buffer()) j["capacity"] = r.capacity;
    doc["regions"].push_back(j);
  }
  doc["objects"] = p.objects;
  doc["robots"] = Json::array();
  for (const auto& r : p.robots) {
    Json j;
    j["id"] = r.id;
    j["reach"] = Json::array();
    for (RegionIndex reg : r.reach) j["reach"].push_back(p.region(reg).id);
    j["capacity"] = r.capacity;
    doc["robots"].push_back(j);
  }
  Json initial = Json::object();
  for (std::size_t r = 0; r < p.regions.size(); ++r) {
    if (p.initial.regions[r].empty()) continue;
    Json list = Json::array();
    for (ObjectIndex o : p.initial.regions[r]) list.push_back(p.object_name(o));
    initial[p.regions[r].id] = list;
  }
  doc["initial"] = initial;
  Json held = Json::object();
  for (std::size_t r = 0; r < p.robots.size(); ++r) {
    if (p.initial.holdings[r].empty()) continue;
    Json list = Json::array();
    for (ObjectIndex o : p.initial.holdings[r]) list.push_back(p.object_name(o));
    held[p.robots[r].id] = list;
  }
  if (!held.empty()) doc["held"] = held;
  Json goal = Json::object();
  for (const auto& g : p.goal) {
    Json list = Json::array();
    for (ObjectIndex o : g.objects) list.push_back(p.object_name(o));
    goal[p.region(g.region).id] = list;
  }
  doc["goal"] = goal;
  return doc;
}

inline std::string serialize_scenario(const Scenario& sc) { return scenario_to_json(sc).dump(2) + "\n"; }

inline Scenario load_scenario(const std::filesystem::path& path) {
  try {
    return parse_scenario(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Plan files: the solution hypergraph with entity names spelled out.

inline Json action_to_json(const Action& a, const Problem& p) {
  Json j;
  if (const auto* x = std::get_if<Pick>(&a)) {
    j["type"] = "pick";
    j["robot"] = p.robot(x->robot).id;
    j["object"] = p.object_name(x->object);
    j["region"] = p.region(x->from).id;
  } else if (const auto* x = std::get_if<Place>(&a)) {
    j["type"] = "place";
    j["robot"] = p.robot(x->robot).id;
    j["object"] = p.object_name(x->object);
    j["region"] = p.region(x->to).id;
  } else {
    const auto& h = std::get<Handoff>(a);
    j["type"] = "handoff";
    j["giver"] = p.robot(h.giver).id;
    j["receiver"] = p.robot(h.receiver).id;
    j["object"] = p.object_name(h.object);
  }
  return j;
}

inline Json assertion_to_json(const Assertion& a, const Problem& p) {
  Json j;
  if (const auto* x = std::get_if<OnStack>(&a)) {
    j["on"] = p.object_name(x->object);
    j["region"] = p.region(x->region).id;
    j["height"] = x->height;
  } else if (const auto* x = std::get_if<InBuffer>(&a)) {
    j["in"] = p.object_name(x->object);
    j["region"] = p.region(x->region).id;
  } else if (const auto* x = std::get_if<Holding>(&a)) {
    j["held"] = p.object_name(x->object);
    j["by"] = p.robot(x->robot).id;
  } else {
    j["in_transit"] = p.object_name(std::get<InTransit>(a).object);
  }
  return j;
}

inline std::string plan_to_json(const SolutionHypergraph& h, const Problem& p, const std::string& scenario_name) {
  Json doc;
  doc["version"] = 1;
  doc["scenario"] = scenario_name;
  doc["nodes"] = Json::array();
  for (const auto& n : h.nodes()) {
    Json j;
    j["id"] = n.id.value;
    j["entities"] = Json::array();
    for (EntityId e : n.data.composition) j["entities"].push_back(p.entity_name(e));
    j["assertions"] = Json::array();
    for (const auto& a : n.data.assertions) j["assertions"].push_back(assertion_to_json(a, p));
    doc["nodes"].push_back(j);
  }
  doc["arcs"] = Json::array();
  for (const auto& a : h.arcs()) {
    Json j;
    j["id"] = a.id.value;
    j["action"] = action_to_json(a.label, p);
    j["tails"] = Json::array();
    for (NodeId n : a.tail) j["tails"].push_back(n.value);
    j["heads"] = Json::array();
    for (NodeId n : a.head) j["heads"].push_back(n.value);
    doc["arcs"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

/// Reads a plan file back against its problem. The result is not validated;
/// callers run validate_hyperpath / execute_hypergraph on it.
inline SolutionHypergraph parse_plan(const std::string& text, const Problem& p) {
  using detail::Fields;
  Json doc = detail::parse_json(text, "plan");
  Fields root(doc, "plan");
  root.only({"version", "scenario", "nodes", "arcs"});
  if (root.count("version") != 1) throw ParseError("plan.version: unsupported version");

  auto robot = [&](const Fields& f, const char* key) {
    auto name = f.string(key);
    auto r = p.find_robot(name);
    if (!r) throw ValidationError(f.path(key) + ": unknown robot '" + name + "'");
    return *r;
  };
  auto object = [&](const Fields& f, const char* key) {
    auto name = f.string(key);
    auto o = p.find_object(name);
    if (!o) throw ValidationError(f.path(key) + ": unknown object '" + name + "'");
    return *o;
  };
  auto region = [&](const Fields& f, const char* key) {
    auto name = f.string(key);
    auto r = p.find_region(name);
    if (!r) throw ValidationError(f.path(key) + ": unknown region '" + name + "'");
    return *r;
  };
  auto ids = [](const Json& v, const std::string& path) {
    if (!v.is_array()) throw ParseError(path + ": expected an array of node ids");
    std::vector<NodeId> out;
    for (const auto& x : v) {
      if (!x.is_number_unsigned()) throw ParseError(path + ": expected node ids");
      out.emplace_back(x.get<std::size_t>());
    }
    return out;
  };

  std::vector<SolutionHypergraph::Node> nodes;
  const Json& jn = root.array("nodes");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    Fields f(jn[i], "plan.nodes[" + std::to_string(i) + "]");
    f.only({"id", "entities", "assertions"});
    if (f.count("id") != i) throw ParseError(f.path("id") + ": node ids must be 0..n-1 in order");
    SolutionNode node;
    for (const auto& name : detail::string_list(f.array("entities"), f.path("entities"))) {
      if (auto r = p.find_robot(name)) {
        node.composition.push_back(EntityId::robot(*r));
      } else if (auto o = p.find_object(name)) {
        node.composition.push_back(EntityId::object(*o));
      } else {
        throw ValidationError(f.path("entities") + ": unknown entity '" + name + "'");
      }
    }
    const Json& ja = f.array("assertions");
    for (std::size_t k = 0; k < ja.size(); ++k) {
      Fields a(ja[k], f.path("assertions") + "[" + std::to_string(k) + "]");
      if (a.has("on")) {
        a.only({"on", "region", "height"});
        node.assertions.push_back(OnStack{object(a, "on"), region(a, "region"), a.count("height")});
      } else if (a.has("in")) {
        a.only({"in", "region"});
        node.assertions.push_back(InBuffer{object(a, "in"), region(a, "region")});
      } else if (a.has("held")) {
        a.only({"held", "by"});
        node.assertions.push_back(Holding{robot(a, "by"), object(a, "held")});
      } else if (a.has("in_transit")) {
        a.only({"in_transit"});
        node.assertions.push_back(InTransit{object(a, "in_transit")});
      } else {
        throw ParseError(f.path("assertions") + ": unrecognised assertion");
      }
    }
    std::sort(node.composition.begin(), node.composition.end());
    std::sort(node.assertions.begin(), node.assertions.end());
    nodes.push_back({NodeId(i), std::move(node)});
  }

  std::vector<SolutionHypergraph::Arc> arcs;
  const Json& ja = root.array("arcs");
  for (std::size_t i = 0; i < ja.size(); ++i) {
    Fields f(ja[i], "plan.arcs[" + std::to_string(i) + "]");
    f.only({"id", "action", "tails", "heads"});
    if (f.count("id") != i) throw ParseError(f.path("id") + ": arc ids must be 0..n-1 in order");
    Fields act(f.object("action"), f.path("action"));
    std::string type = act.string("type");
    Action action;
    if (type == "pick") {
      act.only({"type", "robot", "object", "region"});
      action = Pick{robot(act, "robot"), object(act, "object"), region(act, "region")};
    } else if (type == "place") {
      act.only({"type", "robot", "object", "region"});
      action = Place{robot(act, "robot"), object(act, "object"), region(act, "region")};
    } else if (type == "handoff") {
      act.only({"type", "giver", "receiver", "object"});
      action = Handoff{robot(act, "giver"), robot(act, "receiver"), object(act, "object")};
    } else {
      throw ParseError(act.path("type") + ": unknown action type '" + type + "'");
    }
    arcs.push_back({ArcId(i), action, ids(f.at("tails"), f.path("tails")), ids(f.at("heads"), f.path("heads"))});
  }
  return SolutionHypergraph::unchecked(std::move(nodes), std::move(arcs));
}

}  // namespace hyperplan
