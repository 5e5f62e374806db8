#include "hearthlab/world.hpp"

#include <utility>

#include "hearthlab/errors.hpp"

namespace hearth {

namespace {

constexpr std::array<std::string_view, kNumAtomKinds> kAtomNames = {
    "dusty",   "dirty",  "open",       "toggled_on", "inside", "ontop",
    "under",   "nextto", "inreach",    "insameroom", "infov",  "holding"};

constexpr std::array<std::string_view, kNumPrimitives> kPrimitiveNames = {
    "grasp", "toggle_on", "toggle_off", "open",
    "close", "place_inside", "place_on_top"};

struct PropertyName {
  std::string_view name;
  Property property;
};

constexpr std::array<PropertyName, 8> kPropertyNames = {{
    {"graspable", Property::kGraspable},
    {"openable", Property::kOpenable},
    {"lockable", Property::kOpenable},
    {"toggleable", Property::kToggleable},
    {"container", Property::kContainer},
    {"surface", Property::kSurface},
    {"cleaning_tool", Property::kCleaningTool},
    {"always_open", Property::kAlwaysOpen},
}};

bool is_placement(AtomKind kind) {
  return kind == AtomKind::kInside || kind == AtomKind::kOnTop ||
         kind == AtomKind::kNextTo || kind == AtomKind::kUnder;
}

}  // namespace

std::optional<Property> property_from_name(std::string_view name) {
  for (const auto& entry : kPropertyNames) {
    if (entry.name == name) return entry.property;
  }
  return std::nullopt;
}

std::string_view property_name(Property p) {
  for (const auto& entry : kPropertyNames) {
    if (entry.property == p) return entry.name;
  }
  return "?";
}

Scene::Scene(std::vector<ObjectDef> objects) : objects_(std::move(objects)) {
  for (ObjectIndex i = 0; i < size(); ++i) {
    index_.emplace(objects_[i].id, i);  // duplicates are reported by validate
  }
}

std::optional<ObjectIndex> Scene::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<ObjectIndex> Scene::category_members(
    std::string_view category) const {
  std::vector<ObjectIndex> members;
  for (ObjectIndex i = 0; i < size(); ++i) {
    if (objects_[i].category == category) members.push_back(i);
  }
  return members;
}

std::optional<AtomKind> atom_kind_from_name(std::string_view name) {
  for (int k = 0; k < kNumAtomKinds; ++k) {
    if (kAtomNames[k] == name) return static_cast<AtomKind>(k);
  }
  return std::nullopt;
}

std::string_view atom_kind_name(AtomKind kind) {
  return kAtomNames[static_cast<int>(kind)];
}

int atom_arity(AtomKind kind) {
  switch (kind) {
    case AtomKind::kInside:
    case AtomKind::kOnTop:
    case AtomKind::kUnder:
    case AtomKind::kNextTo:
      return 2;
    default:
      return 1;
  }
}

std::optional<ObjectIndex> WorldState::held() const {
  // holding atoms sort last, so scan from the back.
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
    if (it->kind == AtomKind::kHolding) return it->a;
    if (it->kind < AtomKind::kHolding) break;
  }
  return std::nullopt;
}

std::string_view primitive_name(Primitive p) {
  return kPrimitiveNames[static_cast<int>(p)];
}

std::optional<Primitive> primitive_from_name(std::string_view name) {
  for (int k = 0; k < kNumPrimitives; ++k) {
    if (kPrimitiveNames[k] == name) return static_cast<Primitive>(k);
  }
  return std::nullopt;
}

ActionModel ActionModel::deterministic() {
  ActionModel model;
  model.success_prob.fill(1.0);
  return model;
}

void check_action(const Scene& scene, const Action& action) {
  const int prim = static_cast<int>(action.primitive);
  if (prim < 0 || prim >= kNumPrimitives) {
    throw MalformedActionError("primitive index " + std::to_string(prim) +
                               " out of range");
  }
  if (action.object < 0 || action.object >= scene.size()) {
    throw MalformedActionError("object index " +
                               std::to_string(action.object) +
                               " out of range for scene of " +
                               std::to_string(scene.size()) + " objects");
  }
}

bool executable(const WorldState& state, const Scene& scene,
                const Action& action) {
  check_action(scene, action);
  const ObjectIndex o = action.object;
  const ObjectDef& obj = scene.at(o);
  const bool reach = state.holds(AtomKind::kInReach, o);
  const std::optional<ObjectIndex> held = state.held();

  switch (action.primitive) {
    case Primitive::kGrasp:
      return obj.has(Property::kGraspable) && reach && !held;
    case Primitive::kOpen:
      return obj.has(Property::kOpenable) && reach &&
             !state.holds(AtomKind::kOpen, o);
    case Primitive::kClose:
      return obj.has(Property::kOpenable) && reach &&
             state.holds(AtomKind::kOpen, o);
    case Primitive::kToggleOn:
      return obj.has(Property::kToggleable) && reach &&
             !state.holds(AtomKind::kToggledOn, o);
    case Primitive::kToggleOff:
      return obj.has(Property::kToggleable) && reach &&
             state.holds(AtomKind::kToggledOn, o);
    case Primitive::kPlaceInside:
      return held && *held != o && obj.has(Property::kContainer) && reach &&
             (obj.has(Property::kAlwaysOpen) ||
              state.holds(AtomKind::kOpen, o));
    case Primitive::kPlaceOnTop:
      return held && *held != o &&
             (obj.has(Property::kSurface) || obj.has(Property::kContainer)) &&
             reach;
  }
  return false;
}

namespace {

void remove_placement(WorldState& s, ObjectIndex o) {
  for (auto it = s.atoms.begin(); it != s.atoms.end();) {
    const Atom& at = *it;
    const bool own = is_placement(at.kind) && at.a == o &&
                     at.kind != AtomKind::kUnder;
    // Relations that mirror o's placement: nextto(x, o) and under(x, o).
    const bool mirrored =
        (at.kind == AtomKind::kNextTo || at.kind == AtomKind::kUnder) &&
        at.b == o;
    if (own || mirrored) {
      it = s.atoms.erase(it);
    } else {
      ++it;
    }
  }
}

void clean_with_tool(WorldState& s, const Scene& scene, ObjectIndex tool,
                     ObjectIndex target) {
  if (!scene.at(tool).has(Property::kCleaningTool)) return;
  s.atoms.erase(Atom{AtomKind::kDusty, target});
  s.atoms.erase(Atom{AtomKind::kDirty, target});
}

}  // namespace

StepResult apply_action(const WorldState& state, const Scene& scene,
                        const Action& action, const ActionModel& model,
                        Rng& rng) {
  if (!executable(state, scene, action)) return {state, false};
  // One draw per executable action, whatever its probability.
  const bool success = rng.uniform() < model.probability(action.primitive);
  if (!success) return {state, true};

  WorldState next = state;
  const ObjectIndex o = action.object;
  switch (action.primitive) {
    case Primitive::kGrasp:
      remove_placement(next, o);
      next.atoms.insert({AtomKind::kHolding, o});
      break;
    case Primitive::kOpen:
      next.atoms.insert({AtomKind::kOpen, o});
      break;
    case Primitive::kClose:
      next.atoms.erase({AtomKind::kOpen, o});
      break;
    case Primitive::kToggleOn:
      next.atoms.insert({AtomKind::kToggledOn, o});
      break;
    case Primitive::kToggleOff:
      next.atoms.erase({AtomKind::kToggledOn, o});
      break;
    case Primitive::kPlaceInside: {
      const ObjectIndex h = *state.held();
      next.atoms.erase({AtomKind::kHolding, h});
      for (const Atom& at : state.atoms) {
        if (at.kind == AtomKind::kInside && at.b == o && at.a != h) {
          next.atoms.insert({AtomKind::kNextTo, h, at.a});
        }
      }
      next.atoms.insert({AtomKind::kInside, h, o});
      clean_with_tool(next, scene, h, o);
      break;
    }
    case Primitive::kPlaceOnTop: {
      const ObjectIndex h = *state.held();
      next.atoms.erase({AtomKind::kHolding, h});
      next.atoms.insert({AtomKind::kOnTop, h, o});
      next.atoms.insert({AtomKind::kUnder, o, h});
      clean_with_tool(next, scene, h, o);
      break;
    }
  }
  return {std::move(next), true};
}

std::string atom_to_string(const Atom& atom, const Scene& scene) {
  auto name = [&](ObjectIndex i) -> std::string {
    if (i >= 0 && i < scene.size()) return scene.at(i).id;
    return "#" + std::to_string(i);
  };
  std::string out(atom_kind_name(atom.kind));
  out += "(" + name(atom.a);
  if (atom_arity(atom.kind) == 2) out += ", " + name(atom.b);
  out += ")";
  return out;
}

std::vector<Violation> validate_scene(const Scene& scene,
                                      const WorldState& initial) {
  std::vector<Violation> out;
  std::set<std::string> seen;
  for (const ObjectDef& obj : scene.objects()) {
    if (!seen.insert(obj.id).second) {
      out.push_back({obj.id, "duplicate object id"});
    }
    if (obj.id.empty()) out.push_back({obj.id, "empty object id"});
    if (obj.category.empty()) out.push_back({obj.id, "empty category"});
    if (obj.has(Property::kContainer) && !obj.has(Property::kOpenable) &&
        !obj.has(Property::kAlwaysOpen)) {
      out.push_back({obj.id, "container must be openable or always_open"});
    }
  }

  auto valid_index = [&](ObjectIndex i) { return i >= 0 && i < scene.size(); };
  int holding_count = 0;
  std::set<ObjectIndex> placed;
  for (const Atom& at : initial.atoms) {
    const std::string label = atom_to_string(at, scene);
    const int arity = atom_arity(at.kind);
    if (!valid_index(at.a) || (arity == 2 && !valid_index(at.b))) {
      out.push_back({label, "argument is not a scene object"});
      continue;
    }
    if ((arity == 1 && at.b != -1) || (arity == 2 && at.b == -1)) {
      out.push_back({label, "wrong number of arguments"});
      continue;
    }
    switch (at.kind) {
      case AtomKind::kHolding:
        ++holding_count;
        break;
      case AtomKind::kInside:
        if (!scene.at(at.b).has(Property::kContainer)) {
          out.push_back({label, "inside target must be a container"});
        }
        placed.insert(at.a);
        break;
      case AtomKind::kOnTop:
        if (!scene.at(at.b).has(Property::kSurface) &&
            !scene.at(at.b).has(Property::kContainer)) {
          out.push_back({label, "ontop target must be a surface or container"});
        }
        placed.insert(at.a);
        break;
      default:
        break;
    }
  }
  if (holding_count > 1) {
    out.push_back({"robot", "more than one holding atom (one gripper)"});
  }
  if (auto h = initial.held(); h && valid_index(*h) && placed.count(*h)) {
    out.push_back({scene.at(*h).id, "held object is also inside/ontop"});
  }
  return out;
}

}  // namespace hearth
