#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace hyperplan {

// Dense integer handle tagged by what it indexes. Ids are assigned in creation
// order, so ordering by value is ordering by creation.
template <class Tag>
struct Index {
  std::uint32_t value = 0;

  constexpr Index() = default;
  constexpr explicit Index(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}

  constexpr std::size_t get() const { return value; }

  friend constexpr bool operator==(Index, Index) = default;
  friend constexpr auto operator<=>(Index, Index) = default;
};

struct RobotTag {};
struct ObjectTag {};
struct RegionTag {};
struct NodeTag {};
struct ArcTag {};

using RobotIndex = Index<RobotTag>;
using ObjectIndex = Index<ObjectTag>;
using RegionIndex = Index<RegionTag>;
using NodeId = Index<NodeTag>;
using ArcId = Index<ArcTag>;

enum class EntityKind : std::uint8_t { Robot = 0, Object = 1 };

/// A planning participant: a robot or a manipulable object. Robots order
/// before objects.
struct EntityId {
  EntityKind kind = EntityKind::Object;
  std::uint32_t index = 0;

  static constexpr EntityId robot(RobotIndex r) { return {EntityKind::Robot, r.value}; }
  static constexpr EntityId object(ObjectIndex o) { return {EntityKind::Object, o.value}; }

  constexpr bool is_robot() const { return kind == EntityKind::Robot; }
  constexpr bool is_object() const { return kind == EntityKind::Object; }
  constexpr RobotIndex as_robot() const { return RobotIndex(index); }
  constexpr ObjectIndex as_object() const { return ObjectIndex(index); }

  friend constexpr bool operator==(EntityId, EntityId) = default;
  friend constexpr auto operator<=>(EntityId, EntityId) = default;
};

inline std::size_t hash_combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace hyperplan

template <class Tag>
struct std::hash<hyperplan::Index<Tag>> {
  std::size_t operator()(hyperplan::Index<Tag> i) const noexcept { return i.value; }
};

template <>
struct std::hash<hyperplan::EntityId> {
  std::size_t operator()(hyperplan::EntityId e) const noexcept {
    return (static_cast<std::size_t>(e.kind) << 32) | e.index;
  }
};
