#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "hyperplan/errors.hpp"
#include "hyperplan/ids.hpp"

namespace hyperplan {

enum class RegionKind : std::uint8_t { Stack, Buffer };

/// A place objects can rest. Stacks are ordered towers of unbounded height;
/// buffers are unordered surfaces with a fixed capacity.
struct Region {
  std::string id;
  RegionKind kind = RegionKind::Stack;
  std::size_t capacity = 0;  // buffers only

  bool is_stack() const { return kind == RegionKind::Stack; }
  bool is_buffer() const { return kind == RegionKind::Buffer; }
  bool operator==(const Region&) const = default;
};

struct RobotSpec {
  std::string id;
  std::vector<RegionIndex> reach;  // ascending
  std::size_t capacity = 1;

  bool reaches(RegionIndex r) const { return std::binary_search(reach.begin(), reach.end(), r); }
  bool operator==(const RobotSpec&) const = default;
};

struct OnStackAt {
  RegionIndex region;
  std::size_t height = 0;
  bool operator==(const OnStackAt&) const = default;
};
struct InBufferAt {
  RegionIndex region;
  bool operator==(const InBufferAt&) const = default;
};
struct HeldBy {
  RobotIndex robot;
  bool operator==(const HeldBy&) const = default;
};
using Placement = std::variant<OnStackAt, InBufferAt, HeldBy>;

/// Where every object is and what every robot holds. Region contents are
/// bottom-to-top for stacks and ascending for buffers; holdings are ascending.
/// This layout is canonical, so equality is state equality.
struct WorldState {
  std::vector<std::vector<ObjectIndex>> regions;
  std::vector<std::vector<ObjectIndex>> holdings;

  bool operator==(const WorldState&) const = default;

  std::optional<RegionIndex> region_of(ObjectIndex o) const {
    for (std::size_t r = 0; r < regions.size(); ++r) {
      if (std::find(regions[r].begin(), regions[r].end(), o) != regions[r].end()) return RegionIndex(r);
    }
    return std::nullopt;
  }

  std::optional<RobotIndex> holder_of(ObjectIndex o) const {
    for (std::size_t r = 0; r < holdings.size(); ++r) {
      if (std::binary_search(holdings[r].begin(), holdings[r].end(), o)) return RobotIndex(r);
    }
    return std::nullopt;
  }

  bool holds(RobotIndex r, ObjectIndex o) const {
    const auto& h = holdings.at(r.get());
    return std::binary_search(h.begin(), h.end(), o);
  }

  std::size_t hash() const {
    std::size_t seed = regions.size();
    for (const auto& v : regions) {
      seed = hash_combine(seed, 0xabc);
      for (ObjectIndex o : v) seed = hash_combine(seed, o.value);
    }
    for (const auto& v : holdings) {
      seed = hash_combine(seed, 0xdef);
      for (ObjectIndex o : v) seed = hash_combine(seed, o.value);
    }
    return seed;
  }
};

struct WorldStateHash {
  std::size_t operator()(const WorldState& s) const { return s.hash(); }
};

struct Pick {
  RobotIndex robot;
  ObjectIndex object;
  RegionIndex from;
  friend auto operator<=>(const Pick&, const Pick&) = default;
};

struct Place {
  RobotIndex robot;
  ObjectIndex object;
  RegionIndex to;
  friend auto operator<=>(const Place&, const Place&) = default;
};

struct Handoff {
  RobotIndex giver;
  RobotIndex receiver;
  ObjectIndex object;

  // Giver, then object, then receiver.
  friend auto operator<=>(const Handoff& a, const Handoff& b) {
    if (auto c = a.giver <=> b.giver; c != 0) return c;
    if (auto c = a.object <=> b.object; c != 0) return c;
    return a.receiver <=> b.receiver;
  }
  friend bool operator==(const Handoff&, const Handoff&) = default;
};

/// Variant order gives Pick < Place < Handoff.
using Action = std::variant<Pick, Place, Handoff>;

inline ObjectIndex object_of(const Action& a) {
  return std::visit([](const auto& x) { return x.object; }, a);
}

/// Robots taking part in an action.
inline std::vector<RobotIndex> actors_of(const Action& a) {
  if (const auto* h = std::get_if<Handoff>(&a)) return {h->giver, h->receiver};
  if (const auto* p = std::get_if<Pick>(&a)) return {p->robot};
  return {std::get<Place>(a).robot};
}

inline bool is_handoff(const Action& a) { return std::holds_alternative<Handoff>(a); }

struct GoalStack {
  RegionIndex region;
  std::vector<ObjectIndex> objects;  // bottom-to-top
  bool operator==(const GoalStack&) const = default;
};

/// A tabletop manipulation problem. `frozen` marks objects that may not be
/// picked up; it is empty for ordinary problems and used by refinement.
struct Problem {
  std::vector<Region> regions;
  std::vector<RobotSpec> robots;
  std::vector<std::string> objects;
  WorldState initial;
  std::vector<GoalStack> goal;
  std::vector<bool> frozen;

  bool operator==(const Problem&) const = default;

  const Region& region(RegionIndex r) const { return regions.at(r.get()); }
  const RobotSpec& robot(RobotIndex r) const { return robots.at(r.get()); }
  const std::string& object_name(ObjectIndex o) const { return objects.at(o.get()); }

  bool is_frozen(ObjectIndex o) const { return o.get() < frozen.size() && frozen[o.get()]; }

  std::optional<RegionIndex> find_region(const std::string& name) const {
    for (std::size_t i = 0; i < regions.size(); ++i) {
      if (regions[i].id == name) return RegionIndex(i);
    }
    return std::nullopt;
  }
  std::optional<RobotIndex> find_robot(const std::string& name) const {
    for (std::size_t i = 0; i < robots.size(); ++i) {
      if (robots[i].id == name) return RobotIndex(i);
    }
    return std::nullopt;
  }
  std::optional<ObjectIndex> find_object(const std::string& name) const {
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (objects[i] == name) return ObjectIndex(i);
    }
    return std::nullopt;
  }

  std::string entity_name(EntityId e) const {
    return e.is_robot() ? robot(e.as_robot()).id : object_name(e.as_object());
  }

  const GoalStack* goal_for(RegionIndex r) const {
    for (const auto& g : goal) {
      if (g.region == r) return &g;
    }
    return nullptr;
  }

  std::vector<ObjectIndex> goal_objects() const {
    std::vector<ObjectIndex> out;
    for (const auto& g : goal) out.insert(out.end(), g.objects.begin(), g.objects.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  WorldState empty_state() const {
    WorldState s;
    s.regions.resize(regions.size());
    s.holdings.resize(robots.size());
    return s;
  }
};

inline Placement placement_of(const WorldState& s, const Problem& p, ObjectIndex o) {
  if (auto r = s.holder_of(o)) return HeldBy{*r};
  if (auto reg = s.region_of(o)) {
    if (p.region(*reg).is_buffer()) return InBufferAt{*reg};
    const auto& st = s.regions[reg->get()];
    return OnStackAt{*reg, static_cast<std::size_t>(std::find(st.begin(), st.end(), o) - st.begin())};
  }
  throw PreconditionViolated("object " + p.object_name(o) + " is nowhere");
}

inline std::string describe(const Action& a, const Problem& p) {
  struct V {
    const Problem& p;
    std::string operator()(const Pick& x) const {
      return "pick(" + p.robot(x.robot).id + ", " + p.object_name(x.object) + ", " + p.region(x.from).id + ")";
    }
    std::string operator()(const Place& x) const {
      return "place(" + p.robot(x.robot).id + ", " + p.object_name(x.object) + ", " + p.region(x.to).id + ")";
    }
    std::string operator()(const Handoff& x) const {
      return "handoff(" + p.robot(x.giver).id + " -> " + p.robot(x.receiver).id + ", " +
             p.object_name(x.object) + ")";
    }
  };
  return std::visit(V{p}, a);
}

/// Lists every broken WorldState invariant of `s` with respect to `p`.
inline std::vector<std::string> state_violations(const WorldState& s, const Problem& p) {
  std::vector<std::string> out;
  if (s.regions.size() != p.regions.size()) {
    out.push_back("region table size mismatch");
    return out;
  }
  if (s.holdings.size() != p.robots.size()) {
    out.push_back("holdings table size mismatch");
    return out;
  }
  std::vector<int> seen(p.objects.size(), 0);
  auto note = [&](ObjectIndex o, const std::string& where) {
    if (o.get() >= p.objects.size()) {
      out.push_back("unknown object index in " + where);
      return;
    }
    ++seen[o.get()];
  };
  for (std::size_t r = 0; r < s.regions.size(); ++r) {
    const auto& reg = p.regions[r];
    for (ObjectIndex o : s.regions[r]) note(o, reg.id);
    if (reg.is_buffer()) {
      if (!std::is_sorted(s.regions[r].begin(), s.regions[r].end())) out.push_back(reg.id + " contents not canonical");
      if (s.regions[r].size() > reg.capacity) out.push_back(reg.id + " over capacity");
    }
  }
  for (std::size_t r = 0; r < s.holdings.size(); ++r) {
    const auto& robot = p.robots[r];
    for (ObjectIndex o : s.holdings[r]) note(o, robot.id);
    if (!std::is_sorted(s.holdings[r].begin(), s.holdings[r].end())) out.push_back(robot.id + " holdings not canonical");
    if (s.holdings[r].size() > robot.capacity) out.push_back(robot.id + " over capacity");
  }
  for (std::size_t o = 0; o < seen.size(); ++o) {
    if (seen[o] == 0) out.push_back(p.objects[o] + " is nowhere");
    if (seen[o] > 1) out.push_back(p.objects[o] + " is in several places");
  }
  return out;
}

/// Checks the Problem invariants; throws ValidationError naming the field.
inline void validate_problem(const Problem& p) {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };
  std::unordered_set<std::string> names;
  for (const auto& r : p.regions) {
    if (r.id.empty()) fail("regions: empty id");
    if (!names.insert("region:" + r.id).second) fail("regions: duplicate id '" + r.id + "'");
    if (r.is_buffer() && r.capacity < 1) fail("regions." + r.id + ".capacity: buffer capacity must be >= 1");
  }
  std::unordered_set<std::string> entity_names;
  for (const auto& o : p.objects) {
    if (o.empty()) fail("objects: empty id");
    if (!entity_names.insert(o).second) fail("objects: duplicate id '" + o + "'");
  }
  for (const auto& r : p.robots) {
    if (r.id.empty()) fail("robots: empty id");
    if (!entity_names.insert(r.id).second) fail("robots: id '" + r.id + "' clashes with another entity");
    if (r.reach.empty()) fail("robots." + r.id + ".reach: must not be empty");
    if (r.capacity < 1) fail("robots." + r.id + ".capacity: must be >= 1");
    if (!std::is_sorted(r.reach.begin(), r.reach.end()) ||
        std::adjacent_find(r.reach.begin(), r.reach.end()) != r.reach.end()) {
      fail("robots." + r.id + ".reach: not canonical");
    }
    for (RegionIndex reg : r.reach) {
      if (reg.get() >= p.regions.size()) fail("robots." + r.id + ".reach: unknown region");
    }
  }
  if (auto v = state_violations(p.initial, p); !v.empty()) fail("initial: " + v.front());
  std::vector<bool> in_goal(p.objects.size(), false);
  std::vector<bool> region_used(p.regions.size(), false);
  for (const auto& g : p.goal) {
    if (g.region.get() >= p.regions.size()) fail("goal: unknown region");
    const auto& reg = p.region(g.region);
    if (!reg.is_stack()) fail("goal." + reg.id + ": goal regions must be stacks");
    if (region_used[g.region.get()]) fail("goal." + reg.id + ": region listed twice");
    region_used[g.region.get()] = true;
    for (ObjectIndex o : g.objects) {
      if (o.get() >= p.objects.size()) fail("goal." + reg.id + ": unknown object");
      if (in_goal[o.get()]) fail("goal." + reg.id + ": object '" + p.object_name(o) + "' appears in two goal stacks");
      in_goal[o.get()] = true;
    }
  }
}

/// Why `a` cannot be applied in `s`, or nullopt when it can.
inline std::optional<std::string> inapplicable_reason(const WorldState& s, const Action& a, const Problem& p) {
  struct V {
    const WorldState& s;
    const Problem& p;

    std::optional<std::string> robot_ok(RobotIndex r) const {
      if (r.get() >= p.robots.size()) return "unknown robot";
      return std::nullopt;
    }

    std::optional<std::string> operator()(const Pick& x) const {
      if (auto e = robot_ok(x.robot)) return e;
      if (x.object.get() >= p.objects.size() || x.from.get() >= p.regions.size()) return "unknown object or region";
      const auto& robot = p.robot(x.robot);
      const auto& contents = s.regions[x.from.get()];
      if (p.region(x.from).is_stack()) {
        if (contents.empty() || contents.back() != x.object) return "object is not on top of the stack";
      } else if (!std::binary_search(contents.begin(), contents.end(), x.object)) {
        return "object is not in the buffer";
      }
      if (!robot.reaches(x.from)) return "region out of reach";
      if (s.holdings[x.robot.get()].size() >= robot.capacity) return "robot is at capacity";
      if (p.is_frozen(x.object)) return "object is frozen";
      return std::nullopt;
    }

    std::optional<std::string> operator()(const Place& x) const {
      if (auto e = robot_ok(x.robot)) return e;
      if (x.object.get() >= p.objects.size() || x.to.get() >= p.regions.size()) return "unknown object or region";
      if (!s.holds(x.robot, x.object)) return "robot does not hold the object";
      if (!p.robot(x.robot).reaches(x.to)) return "region out of reach";
      const auto& reg = p.region(x.to);
      if (reg.is_buffer() && s.regions[x.to.get()].size() >= reg.capacity) return "buffer is full";
      return std::nullopt;
    }

    std::optional<std::string> operator()(const Handoff& x) const {
      if (auto e = robot_ok(x.giver)) return e;
      if (auto e = robot_ok(x.receiver)) return e;
      if (x.giver == x.receiver) return "giver and receiver are the same robot";
      if (x.object.get() >= p.objects.size()) return "unknown object";
      if (!s.holds(x.giver, x.object)) return "giver does not hold the object";
      const auto& rcv = p.robot(x.receiver);
      if (s.holdings[x.receiver.get()].size() >= rcv.capacity) return "receiver is at capacity";
      const auto& gr = p.robot(x.giver).reach;
      bool overlap = std::any_of(gr.begin(), gr.end(), [&](RegionIndex r) { return rcv.reaches(r); });
      if (!overlap) return "robots share no reachable region";
      return std::nullopt;
    }
  };
  return std::visit(V{s, p}, a);
}

/// Every action applicable in `s`, in ascending Action order.
inline std::vector<Action> applicable_actions(const WorldState& s, const Problem& p) {
  std::vector<Action> out;
  const std::size_t n_robots = p.robots.size();
  for (std::size_t ri = 0; ri < n_robots; ++ri) {
    RobotIndex r(ri);
    const auto& robot = p.robots[ri];
    if (s.holdings[ri].size() >= robot.capacity) continue;
    for (RegionIndex reg : robot.reach) {
      const auto& contents = s.regions[reg.get()];
      if (contents.empty()) continue;
      if (p.region(reg).is_stack()) {
        if (!p.is_frozen(contents.back())) out.push_back(Pick{r, contents.back(), reg});
      } else {
        for (ObjectIndex o : contents) {
          if (!p.is_frozen(o)) out.push_back(Pick{r, o, reg});
        }
      }
    }
  }
  for (std::size_t ri = 0; ri < n_robots; ++ri) {
    RobotIndex r(ri);
    for (ObjectIndex o : s.holdings[ri]) {
      for (RegionIndex reg : p.robots[ri].reach) {
        const auto& region = p.region(reg);
        if (region.is_buffer() && s.regions[reg.get()].size() >= region.capacity) continue;
        out.push_back(Place{r, o, reg});
      }
    }
  }
  for (std::size_t gi = 0; gi < n_robots; ++gi) {
    if (s.holdings[gi].empty()) continue;
    const auto& giver = p.robots[gi];
    for (std::size_t ri = 0; ri < n_robots; ++ri) {
      if (ri == gi) continue;
      const auto& rcv = p.robots[ri];
      if (s.holdings[ri].size() >= rcv.capacity) continue;
      bool overlap = std::any_of(giver.reach.begin(), giver.reach.end(), [&](RegionIndex x) { return rcv.reaches(x); });
      if (!overlap) continue;
      for (ObjectIndex o : s.holdings[gi]) out.push_back(Handoff{RobotIndex(gi), RobotIndex(ri), o});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {
inline void insert_sorted(std::vector<ObjectIndex>& v, ObjectIndex o) {
  v.insert(std::lower_bound(v.begin(), v.end(), o), o);
}
inline void erase_sorted(std::vector<ObjectIndex>& v, ObjectIndex o) {
  v.erase(std::lower_bound(v.begin(), v.end(), o));
}
}  // namespace detail

/// Successor state. Throws PreconditionViolated when `a` is not applicable.
inline WorldState apply(const WorldState& s, const Action& a, const Problem& p) {
  if (auto why = inapplicable_reason(s, a, p)) {
    throw PreconditionViolated(describe(a, p) + ": " + *why);
  }
  WorldState next = s;
  if (const auto* x = std::get_if<Pick>(&a)) {
    auto& contents = next.regions[x->from.get()];
    if (p.region(x->from).is_stack()) {
      contents.pop_back();
    } else {
      detail::erase_sorted(contents, x->object);
    }
    detail::insert_sorted(next.holdings[x->robot.get()], x->object);
  } else if (const auto* x = std::get_if<Place>(&a)) {
    detail::erase_sorted(next.holdings[x->robot.get()], x->object);
    auto& contents = next.regions[x->to.get()];
    if (p.region(x->to).is_stack()) {
      contents.push_back(x->object);
    } else {
      detail::insert_sorted(contents, x->object);
    }
  } else {
    const auto& h = std::get<Handoff>(a);
    detail::erase_sorted(next.holdings[h.giver.get()], h.object);
    detail::insert_sorted(next.holdings[h.receiver.get()], h.object);
  }
  return next;
}

/// Every goal stack matches exactly (bottom-to-top) and no goal object is
/// held. Regions and objects the goal does not mention are unconstrained.
inline bool is_goal(const WorldState& s, const Problem& p) {
  for (const auto& g : p.goal) {
    if (s.regions[g.region.get()] != g.objects) return false;
  }
  return true;
}

}  // namespace hyperplan
