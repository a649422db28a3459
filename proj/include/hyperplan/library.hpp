#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hyperplan/abstraction.hpp"
#include "hyperplan/scenario.hpp"

namespace hyperplan {

struct StrategySignature {
  std::size_t num_abstract_objects = 0;
  std::vector<std::size_t> goal_stack_heights;  // ascending
  bool uses_buffer = false;

  bool operator==(const StrategySignature&) const = default;
};

inline StrategySignature signature_of(const AbstractHypergraph& ah) {
  StrategySignature s;
  s.num_abstract_objects = ah.object_count;
  for (const auto& g : ah.goal) s.goal_stack_heights.push_back(g.size());
  std::sort(s.goal_stack_heights.begin(), s.goal_stack_heights.end());
  s.uses_buffer = ah.uses_buffer();
  return s;
}

struct Provenance {
  std::string scenario;
  std::string created;  // UTC, ISO 8601
  bool operator==(const Provenance&) const = default;
};

struct StrategyRecord {
  std::string id;
  StrategySignature signature;
  AbstractHypergraph ah;
  Provenance provenance;
};

inline std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline bool valid_strategy_id(const std::string& id) {
  return !id.empty() && id.front() != '.' && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

inline StrategyRecord make_record(AbstractHypergraph ah, std::string id, std::string scenario,
                                  std::string created = utc_timestamp()) {
  if (!valid_strategy_id(id)) throw ValidationError("strategy id '" + id + "' must use letters, digits, '_', '-' or '.'");
  StrategyRecord r{std::move(id), signature_of(ah), std::move(ah), {std::move(scenario), std::move(created)}};
  return r;
}

inline constexpr const char* kStrategySuffix = ".strategy.json";

inline std::string strategy_to_json(const StrategyRecord& r) {
  auto ids = [](const auto& v) {
    Json a = Json::array();
    for (const auto& x : v) a.push_back(x.value);
    return a;
  };
  Json doc;
  doc["version"] = 1;
  doc["id"] = r.id;
  doc["signature"] = {{"objects", r.signature.num_abstract_objects},
                      {"goal_heights", r.signature.goal_stack_heights},
                      {"uses_buffer", r.signature.uses_buffer}};
  doc["goal"] = Json::array();
  for (const auto& g : r.ah.goal) doc["goal"].push_back(ids(g));
  doc["nodes"] = Json::array();
  for (const auto& n : r.ah.graph.nodes()) {
    Json j;
    j["id"] = n.id.value;
    j["objects"] = ids(n.data.composition);
    j["role"] = n.data.region ? Json(to_string(*n.data.region)) : Json(nullptr);
    j["stack"] = ids(n.data.stack);
    j["abstract_robot"] = n.data.abstract_robot;
    j["critical"] = n.data.critical;
    doc["nodes"].push_back(j);
  }
  doc["arcs"] = Json::array();
  for (const auto& a : r.ah.graph.arcs()) doc["arcs"].push_back({{"id", a.id.value}, {"tails", ids(a.tail)}, {"heads", ids(a.head)}});
  doc["provenance"] = {{"scenario", r.provenance.scenario}, {"created", r.provenance.created}};
  return doc.dump(2) + "\n";
}

inline std::optional<RegionRole> parse_role(const std::string& s) {
  if (s == "B") return RegionRole::buffer();
  if (s.size() < 2 || s.size() > 10 || (s[0] != 'S' && s[0] != 'T')) return std::nullopt;
  if (!std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) return std::nullopt;
  std::size_t i = std::stoul(s.substr(1));
  return s[0] == 'S' ? RegionRole::source(i) : RegionRole::target(i);
}

/// Parses a strategy document and checks it: the AH invariants must hold and
/// the stored signature must equal the one derived from the AH. `file` only
/// labels diagnostics.
inline StrategyRecord parse_strategy(const std::string& text, const std::string& file) {
  using detail::Fields;
  try {
    Json doc = detail::parse_json(text, "strategy");
    Fields root(doc, "strategy");
    root.only({"version", "id", "signature", "goal", "nodes", "arcs", "provenance"});
    if (root.count("version") != 1) throw ParseError("strategy.version: unsupported version");

    auto ids = [](const Json& v, const std::string& path) {
      if (!v.is_array()) throw ParseError(path + ": expected an array of integers");
      std::vector<std::size_t> out;
      for (const auto& x : v) {
        if (!x.is_number_unsigned()) throw ParseError(path + ": expected non-negative integers");
        out.push_back(x.get<std::size_t>());
      }
      return out;
    };
    auto objects = [&](const Json& v, const std::string& path) {
      std::vector<AbstractObject> out;
      for (std::size_t x : ids(v, path)) out.emplace_back(x);
      return out;
    };

    StrategyRecord r;
    r.id = root.string("id");
    Fields sig(root.object("signature"), root.path("signature"));
    sig.only({"objects", "goal_heights", "uses_buffer"});
    r.signature.num_abstract_objects = sig.count("objects");
    r.signature.goal_stack_heights = ids(sig.at("goal_heights"), sig.path("goal_heights"));
    if (!sig.at("uses_buffer").is_boolean()) throw ParseError(sig.path("uses_buffer") + ": expected a boolean");
    r.signature.uses_buffer = sig.at("uses_buffer").get<bool>();

    r.ah.object_count = r.signature.num_abstract_objects;
    const Json& goal = root.array("goal");
    for (std::size_t t = 0; t < goal.size(); ++t) r.ah.goal.push_back(objects(goal[t], "strategy.goal[" + std::to_string(t) + "]"));

    std::vector<AbstractGraph::Node> nodes;
    const Json& jn = root.array("nodes");
    for (std::size_t i = 0; i < jn.size(); ++i) {
      Fields f(jn[i], "strategy.nodes[" + std::to_string(i) + "]");
      f.only({"id", "objects", "role", "stack", "abstract_robot", "critical"});
      if (f.count("id") != i) throw ParseError(f.path("id") + ": node ids must be 0..n-1 in order");
      AbstractNode n;
      n.composition = objects(f.at("objects"), f.path("objects"));
      const Json& role = f.at("role");
      if (!role.is_null()) {
        if (!role.is_string() || !parse_role(role.get<std::string>())) throw ParseError(f.path("role") + ": expected S<i>, T<i>, B or null");
        n.region = parse_role(role.get<std::string>());
      }
      n.stack = objects(f.at("stack"), f.path("stack"));
      for (const char* key : {"abstract_robot", "critical"}) {
        if (!f.at(key).is_boolean()) throw ParseError(f.path(key) + ": expected a boolean");
      }
      n.abstract_robot = f.at("abstract_robot").get<bool>();
      n.critical = f.at("critical").get<bool>();
      nodes.push_back({NodeId(i), std::move(n)});
    }
    std::vector<AbstractGraph::Arc> arcs;
    const Json& ja = root.array("arcs");
    for (std::size_t i = 0; i < ja.size(); ++i) {
      Fields f(ja[i], "strategy.arcs[" + std::to_string(i) + "]");
      f.only({"id", "tails", "heads"});
      if (f.count("id") != i) throw ParseError(f.path("id") + ": arc ids must be 0..n-1 in order");
      std::vector<NodeId> tail, head;
      for (std::size_t x : ids(f.at("tails"), f.path("tails"))) tail.emplace_back(x);
      for (std::size_t x : ids(f.at("heads"), f.path("heads"))) head.emplace_back(x);
      arcs.push_back({ArcId(i), AbstractStep{}, std::move(tail), std::move(head)});
    }
    r.ah.graph = AbstractGraph::unchecked(std::move(nodes), std::move(arcs));

    Fields prov(root.object("provenance"), root.path("provenance"));
    prov.only({"scenario", "created"});
    r.provenance = {prov.string("scenario"), prov.string("created")};

    if (!valid_strategy_id(r.id)) throw ValidationError("strategy.id: invalid id '" + r.id + "'");
    if (auto problems = strategy_problems(r.ah); !problems.empty()) throw ValidationError(problems.front());
    if (signature_of(r.ah) != r.signature) throw ValidationError("signature does not match the strategy");
    return r;
  } catch (const CorruptRecord&) {
    throw;
  } catch (const InputError& e) {
    throw CorruptRecord(file, e.what());
  } catch (const Error& e) {
    throw CorruptRecord(file, e.what());
  }
}

inline StrategyRecord load_strategy_file(const std::filesystem::path& path) {
  return parse_strategy(read_file(path), path.string());
}

/// Writes `<dir>/<id>.strategy.json` atomically and returns the id.
inline std::string store(const StrategyRecord& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoFailure("cannot create " + dir.string() + ": " + ec.message());
  write_file_atomic(dir / (r.id + kStrategySuffix), strategy_to_json(r));
  return r.id;
}

/// Every strategy file in `dir`, ordered by id.
inline std::vector<StrategyRecord> load(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoFailure(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > std::string(kStrategySuffix).size() &&
        name.ends_with(kStrategySuffix)) {
      files.push_back(entry.path());
    }
  }
  if (ec) throw IoFailure("cannot list " + dir.string() + ": " + ec.message());
  std::vector<StrategyRecord> out;
  for (const auto& f : files) out.push_back(load_strategy_file(f));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

/// Smallest-id record whose goal shape matches the problem exactly.
inline std::optional<StrategyRecord> retrieve(const Problem& p, const std::vector<StrategyRecord>& records) {
  std::vector<std::size_t> heights;
  for (const auto& g : p.goal) heights.push_back(g.objects.size());
  std::sort(heights.begin(), heights.end());
  const std::size_t goal_objects = p.goal_objects().size();
  const StrategyRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.signature.goal_stack_heights != heights || r.signature.num_abstract_objects != goal_objects) continue;
    if (!best || r.id < best->id) best = &r;
  }
  if (!best) return std::nullopt;
  return *best;
}

}  // namespace hyperplan
