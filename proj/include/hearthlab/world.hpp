#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hearthlab/rng.hpp"

namespace hearth {

using ObjectIndex = int;

enum class Property : std::uint8_t {
  kGraspable = 1 << 0,
  kOpenable = 1 << 1,
  kToggleable = 1 << 2,
  kContainer = 1 << 3,
  kSurface = 1 << 4,
  kCleaningTool = 1 << 5,
  kAlwaysOpen = 1 << 6,  // container without a door (sink, basket)
};

std::optional<Property> property_from_name(std::string_view name);
std::string_view property_name(Property p);

struct ObjectDef {
  std::string id;
  std::string category;
  std::uint8_t properties = 0;

  bool has(Property p) const {
    return (properties & static_cast<std::uint8_t>(p)) != 0;
  }
};

class Scene {
 public:
  Scene() = default;
  explicit Scene(std::vector<ObjectDef> objects);

  const std::vector<ObjectDef>& objects() const { return objects_; }
  int size() const { return static_cast<int>(objects_.size()); }
  const ObjectDef& at(ObjectIndex i) const { return objects_.at(i); }
  std::optional<ObjectIndex> find(std::string_view id) const;
  // Members of a category in scene order.
  std::vector<ObjectIndex> category_members(std::string_view category) const;

 private:
  std::vector<ObjectDef> objects_;
  std::unordered_map<std::string, ObjectIndex> index_;
};

// Kinds are listed in rendering order.
enum class AtomKind : std::uint8_t {
  kDusty,
  kDirty,
  kOpen,
  kToggledOn,
  kInside,
  kOnTop,
  kUnder,
  kNextTo,
  kInReach,
  kInSameRoom,
  kInFov,
  kHolding,
};

inline constexpr int kNumAtomKinds = 12;

std::optional<AtomKind> atom_kind_from_name(std::string_view name);
std::string_view atom_kind_name(AtomKind kind);
int atom_arity(AtomKind kind);

struct Atom {
  AtomKind kind = AtomKind::kDusty;
  ObjectIndex a = -1;
  ObjectIndex b = -1;  // -1 for unary kinds

  auto operator<=>(const Atom&) const = default;
};

struct WorldState {
  std::set<Atom> atoms;

  bool holds(const Atom& atom) const { return atoms.count(atom) != 0; }
  bool holds(AtomKind kind, ObjectIndex a, ObjectIndex b = -1) const {
    return holds(Atom{kind, a, b});
  }
  // Object in the gripper, if any.
  std::optional<ObjectIndex> held() const;

  bool operator==(const WorldState&) const = default;
};

enum class Primitive : std::uint8_t {
  kGrasp,
  kToggleOn,
  kToggleOff,
  kOpen,
  kClose,
  kPlaceInside,
  kPlaceOnTop,
};

inline constexpr int kNumPrimitives = 7;

std::string_view primitive_name(Primitive p);
std::optional<Primitive> primitive_from_name(std::string_view name);

struct Action {
  Primitive primitive = Primitive::kGrasp;
  ObjectIndex object = 0;

  bool operator==(const Action&) const = default;
};

// Per-primitive success probability of an executable action.
struct ActionModel {
  std::array<double, kNumPrimitives> success_prob{0.5, 1.0, 1.0, 1.0,
                                                  1.0, 1.0, 1.0};

  double probability(Primitive p) const {
    return success_prob[static_cast<int>(p)];
  }
  static ActionModel deterministic();
};

// Throws MalformedActionError when the action does not index the scene.
void check_action(const Scene& scene, const Action& action);

bool executable(const WorldState& state, const Scene& scene,
                const Action& action);

struct StepResult {
  WorldState next;
  bool executed = false;
};

StepResult apply_action(const WorldState& state, const Scene& scene,
                        const Action& action, const ActionModel& model,
                        Rng& rng);

struct Violation {
  std::string subject;  // object id or rendered atom
  std::string rule;
};

std::vector<Violation> validate_scene(const Scene& scene,
                                      const WorldState& initial);

// Debug form such as "inside(cup_0, bottom_cabinet_41)".
std::string atom_to_string(const Atom& atom, const Scene& scene);

}  // namespace hearth
