#include <doctest.h>

#include "hearthlab/activity.hpp"
#include "hearthlab/errors.hpp"
#include "hearthlab/rng.hpp"
#include "hearthlab/world.hpp"
#include "support.hpp"

using namespace hearth;

namespace {

struct Fixture {
  Activity act = parse_activity(testing_support::kCupboardLite);
  ObjectIndex idx(const char* id) const { return *act.scene.find(id); }
  Action a(Primitive p, const char* id) const { return {p, idx(id)}; }
};

// Number of draws between two snapshots of one stream.
int draws_used(const Rng& before, const Rng& after) {
  for (int n = 0; n < 8; ++n) {
    Rng x = before;
    Rng y = after;
    for (int k = 0; k < n; ++k) x.next_u64();
    if (x.next_u64() == y.next_u64()) return n;
  }
  return -1;
}

}  // namespace

TEST_CASE("grasp preconditions") {
  Fixture f;
  const WorldState& s = f.act.initial;
  CHECK(executable(s, f.act.scene, f.a(Primitive::kGrasp, "bowl_0")));
  CHECK_FALSE(executable(s, f.act.scene, f.a(Primitive::kGrasp, "countertop_26")));
  // not in reach
  WorldState far = s;
  far.atoms.erase(Atom{AtomKind::kInReach, f.idx("bowl_0")});
  CHECK_FALSE(executable(far, f.act.scene, f.a(Primitive::kGrasp, "bowl_0")));
  // hand full
  WorldState full = s;
  full.atoms.insert(Atom{AtomKind::kHolding, f.idx("bath_towel_0")});
  full.atoms.erase(Atom{AtomKind::kOnTop, f.idx("bath_towel_0"), f.idx("countertop_26")});
  CHECK_FALSE(executable(full, f.act.scene, f.a(Primitive::kGrasp, "bowl_0")));
}

TEST_CASE("toggle off a cup is not executable") {
  Fixture f;
  CHECK_FALSE(executable(f.act.initial, f.act.scene,
                         f.a(Primitive::kToggleOff, "cup_0")));
  CHECK_FALSE(executable(f.act.initial, f.act.scene,
                         f.a(Primitive::kToggleOn, "cup_0")));
}

TEST_CASE("open and close depend on the current door state") {
  Fixture f;
  WorldState s = f.act.initial;
  CHECK(executable(s, f.act.scene, f.a(Primitive::kOpen, "top_cabinet_47")));
  CHECK_FALSE(executable(s, f.act.scene, f.a(Primitive::kClose, "top_cabinet_47")));
  CHECK_FALSE(executable(s, f.act.scene, f.a(Primitive::kOpen, "bowl_0")));
  Rng rng(1);
  auto r = apply_action(s, f.act.scene, f.a(Primitive::kOpen, "top_cabinet_47"),
                        f.act.action_model, rng);
  CHECK(r.executed);
  CHECK(r.next.holds(AtomKind::kOpen, f.idx("top_cabinet_47")));
  CHECK(executable(r.next, f.act.scene, f.a(Primitive::kClose, "top_cabinet_47")));
  CHECK_FALSE(executable(r.next, f.act.scene, f.a(Primitive::kOpen, "top_cabinet_47")));
}

TEST_CASE("place inside a closed cabinet is not executable") {
  Fixture f;
  WorldState s = f.act.initial;
  const ObjectIndex cup = f.idx("cup_0");
  s.atoms.erase(Atom{AtomKind::kInside, cup, f.idx("bottom_cabinet_41")});
  s.atoms.insert(Atom{AtomKind::kHolding, cup});
  const Action place = f.a(Primitive::kPlaceInside, "bottom_cabinet_41");
  CHECK_FALSE(executable(s, f.act.scene, place));
  s.atoms.insert(Atom{AtomKind::kOpen, f.idx("bottom_cabinet_41")});
  CHECK(executable(s, f.act.scene, place));
  // countertop is not a container
  CHECK_FALSE(executable(s, f.act.scene, f.a(Primitive::kPlaceInside, "countertop_26")));
  // cannot place onto the held object itself
  CHECK_FALSE(executable(s, f.act.scene, f.a(Primitive::kPlaceOnTop, "cup_0")));
  // empty hand
  CHECK_FALSE(executable(f.act.initial, f.act.scene,
                         f.a(Primitive::kPlaceOnTop, "countertop_26")));
}

TEST_CASE("malformed actions throw instead of returning false") {
  Fixture f;
  CHECK_THROWS_AS(executable(f.act.initial, f.act.scene, Action{Primitive::kGrasp, 99}),
                  MalformedActionError);
  CHECK_THROWS_AS(executable(f.act.initial, f.act.scene, Action{Primitive::kGrasp, -1}),
                  MalformedActionError);
  Action bad{static_cast<Primitive>(7), 0};
  Rng rng(0);
  CHECK_THROWS_AS(apply_action(f.act.initial, f.act.scene, bad, f.act.action_model, rng),
                  MalformedActionError);
}

TEST_CASE("grasp success removes placement and adds holding") {
  Fixture f;
  const ActionModel det = ActionModel::deterministic();
  Rng rng(3);
  auto r = apply_action(f.act.initial, f.act.scene, f.a(Primitive::kGrasp, "cup_0"),
                        det, rng);
  CHECK(r.executed);
  CHECK(r.next.held() == f.idx("cup_0"));
  CHECK_FALSE(r.next.holds(AtomKind::kInside, f.idx("cup_0"), f.idx("bottom_cabinet_41")));
  CHECK(r.next.holds(AtomKind::kInReach, f.idx("cup_0")));
  // bath towel: ontop and the paired under atom both go
  Rng rng2(3);
  auto t = apply_action(f.act.initial, f.act.scene, f.a(Primitive::kGrasp, "bath_towel_0"),
                        det, rng2);
  CHECK_FALSE(t.next.holds(AtomKind::kOnTop, f.idx("bath_towel_0"), f.idx("countertop_26")));
  CHECK_FALSE(t.next.holds(AtomKind::kUnder, f.idx("countertop_26"), f.idx("bath_towel_0")));
}

TEST_CASE("grasp failure follows the rng trace") {
  Fixture f;
  const Action grasp = f.a(Primitive::kGrasp, "cup_0");
  // Oracle: success iff the single uniform draw is below 0.5.
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    Rng twin(seed);
    const bool expect_success = twin.uniform() < 0.5;
    Rng rng(seed);
    auto r = apply_action(f.act.initial, f.act.scene, grasp, f.act.action_model, rng);
    CHECK(r.executed);
    if (expect_success) {
      CHECK(r.next.held() == f.idx("cup_0"));
    } else {
      ++failures;
      CHECK(r.next == f.act.initial);
    }
    CHECK(rng.next_u64() == twin.next_u64());
  }
  CHECK(failures > 0);
  CHECK(failures < 64);
}

TEST_CASE("non-executable actions leave the stream untouched") {
  Fixture f;
  Rng rng(11);
  const Rng before = rng;
  auto r = apply_action(f.act.initial, f.act.scene, f.a(Primitive::kToggleOn, "cup_0"),
                        f.act.action_model, rng);
  CHECK_FALSE(r.executed);
  CHECK(r.next == f.act.initial);
  CHECK(draws_used(before, rng) == 0);
  auto ok = apply_action(f.act.initial, f.act.scene, f.a(Primitive::kOpen, "top_cabinet_47"),
                         f.act.action_model, rng);
  CHECK(ok.executed);
  CHECK(draws_used(before, rng) == 1);
}

TEST_CASE("placing a cleaning tool on a dusty cabinet removes dust") {
  Fixture f;
  const ActionModel det = ActionModel::deterministic();
  Rng rng(0);
  auto held = apply_action(f.act.initial, f.act.scene,
                           f.a(Primitive::kGrasp, "bath_towel_0"), det, rng);
  auto r = apply_action(held.next, f.act.scene,
                        f.a(Primitive::kPlaceOnTop, "top_cabinet_47"), det, rng);
  CHECK(r.executed);
  // Hand-computed effect set.
  WorldState expected = held.next;
  expected.atoms.erase(Atom{AtomKind::kHolding, f.idx("bath_towel_0")});
  expected.atoms.erase(Atom{AtomKind::kDusty, f.idx("top_cabinet_47")});
  expected.atoms.insert(Atom{AtomKind::kOnTop, f.idx("bath_towel_0"), f.idx("top_cabinet_47")});
  expected.atoms.insert(Atom{AtomKind::kUnder, f.idx("top_cabinet_47"), f.idx("bath_towel_0")});
  CHECK(r.next == expected);
}

TEST_CASE("non-tool placement leaves dust alone") {
  Fixture f;
  const ActionModel det = ActionModel::deterministic();
  Rng rng(0);
  auto held = apply_action(f.act.initial, f.act.scene,
                           f.a(Primitive::kGrasp, "bowl_0"), det, rng);
  auto r = apply_action(held.next, f.act.scene,
                        f.a(Primitive::kPlaceOnTop, "top_cabinet_47"), det, rng);
  CHECK(r.next.holds(AtomKind::kDusty, f.idx("top_cabinet_47")));
}

TEST_CASE("place inside adds nextto for current contents") {
  Fixture f;
  const ActionModel det = ActionModel::deterministic();
  Rng rng(0);
  WorldState s = f.act.initial;
  s.atoms.insert(Atom{AtomKind::kOpen, f.idx("bottom_cabinet_41")});
  auto held = apply_action(s, f.act.scene, f.a(Primitive::kGrasp, "bowl_0"), det, rng);
  auto r = apply_action(held.next, f.act.scene,
                        f.a(Primitive::kPlaceInside, "bottom_cabinet_41"), det, rng);
  CHECK(r.next.holds(AtomKind::kInside, f.idx("bowl_0"), f.idx("bottom_cabinet_41")));
  CHECK(r.next.holds(AtomKind::kNextTo, f.idx("bowl_0"), f.idx("cup_0")));
  CHECK_FALSE(r.next.held().has_value());
}

TEST_CASE("validate_scene") {
  Fixture f;
  CHECK(validate_scene(f.act.scene, f.act.initial).empty());

  WorldState two = f.act.initial;
  two.atoms.insert(Atom{AtomKind::kHolding, f.idx("bowl_0")});
  two.atoms.erase(Atom{AtomKind::kOnTop, f.idx("bowl_0"), f.idx("countertop_26")});
  two.atoms.insert(Atom{AtomKind::kHolding, f.idx("bath_towel_0")});
  two.atoms.erase(Atom{AtomKind::kOnTop, f.idx("bath_towel_0"), f.idx("countertop_26")});
  CHECK(validate_scene(f.act.scene, two).size() == 1);

  WorldState bowl = f.act.initial;
  bowl.atoms.insert(Atom{AtomKind::kInside, f.idx("cup_0"), f.idx("bowl_0")});
  auto v = validate_scene(f.act.scene, bowl);
  REQUIRE(v.size() == 1);
  CHECK(v[0].subject == "inside(cup_0, bowl_0)");

  WorldState held_and_placed = f.act.initial;
  held_and_placed.atoms.insert(Atom{AtomKind::kHolding, f.idx("cup_0")});
  CHECK_FALSE(validate_scene(f.act.scene, held_and_placed).empty());

  Scene dup({{"a", "x", 0}, {"a", "x", 0}});
  CHECK_FALSE(validate_scene(dup, {}).empty());
  Scene nocat({{"a", "", 0}});
  CHECK_FALSE(validate_scene(nocat, {}).empty());
  Scene box({{"box_0", "box", static_cast<std::uint8_t>(Property::kContainer)}});
  CHECK_FALSE(validate_scene(box, {}).empty());
}

TEST_CASE("random walks from every catalog activity stay valid") {
  for (const Activity& act : load_catalog(testing_support::source_path("catalog"))) {
    Rng rng(42);
    for (int episode = 0; episode < 20; ++episode) {
      WorldState s = act.initial;
      for (int t = 0; t < 64; ++t) {
        Action a{static_cast<Primitive>(rng.below(kNumPrimitives)),
                 static_cast<ObjectIndex>(rng.below(act.scene.size()))};
        const bool ex = executable(s, act.scene, a);
        CHECK(ex == executable(s, act.scene, a));
        auto r = apply_action(s, act.scene, a, act.action_model, rng);
        CHECK(r.executed == ex);
        s = r.next;
        const auto v = validate_scene(act.scene, s);
        if (!v.empty()) {
          FAIL_CHECK(act.name << ": " << v[0].subject << " " << v[0].rule);
          break;
        }
      }
    }
  }
}

TEST_CASE("deterministic model ignores the seed and replays") {
  const Activity act = testing_support::catalog_activity("cleaning_kitchen_cupboard");
  const ActionModel det = ActionModel::deterministic();
  std::vector<Action> script;
  Rng pick(5);
  for (int i = 0; i < 200; ++i) {
    script.push_back({static_cast<Primitive>(pick.below(kNumPrimitives)),
                      static_cast<ObjectIndex>(pick.below(act.scene.size()))});
  }
  auto run = [&](const ActionModel& model, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<WorldState> trace;
    WorldState s = act.initial;
    for (const Action& a : script) {
      s = apply_action(s, act.scene, a, model, rng).next;
      trace.push_back(s);
    }
    return trace;
  };
  CHECK(run(det, 1) == run(det, 999));
  CHECK(run(act.action_model, 7) == run(act.action_model, 7));
}

TEST_CASE("names round-trip") {
  for (int k = 0; k < kNumAtomKinds; ++k) {
    const auto kind = static_cast<AtomKind>(k);
    CHECK(atom_kind_from_name(atom_kind_name(kind)) == kind);
  }
  for (int p = 0; p < kNumPrimitives; ++p) {
    const auto prim = static_cast<Primitive>(p);
    CHECK(primitive_from_name(primitive_name(prim)) == prim);
  }
  CHECK(property_from_name("lockable") == Property::kOpenable);
  CHECK_FALSE(property_from_name("edible").has_value());
  CHECK(ActionModel{}.probability(Primitive::kGrasp) == 0.5);
  CHECK(ActionModel{}.probability(Primitive::kClose) == 1.0);
}
