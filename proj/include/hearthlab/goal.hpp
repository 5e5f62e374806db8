#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "hearthlab/world.hpp"

namespace hearth {

// Argument of a goal literal: a quantified variable or a scene object id.
struct Term {
  bool is_variable = false;
  std::string name;

  static Term var(std::string name) { return {true, std::move(name)}; }
  static Term obj(std::string id) { return {false, std::move(id)}; }
  bool operator==(const Term&) const = default;
};

struct Formula {
  enum class Kind { kForAll, kForAtLeastOne, kAnd, kNot, kLit };

  Kind kind = Kind::kLit;
  std::string category;  // quantifiers
  std::string variable;  // quantifiers
  AtomKind atom = AtomKind::kDusty;  // literals
  std::vector<Term> args;            // literals
  std::vector<Formula> children;

  static Formula for_all(std::string category, std::string variable,
                         Formula body);
  static Formula for_at_least_one(std::string category, std::string variable,
                                  Formula body);
  static Formula all_of(std::vector<Formula> children);
  static Formula negate(Formula child);
  static Formula lit(AtomKind atom, std::vector<Term> args);

  bool operator==(const Formula&) const = default;
};

// Implicit conjunction of top-level goal clauses; each clause renders as one
// sentence.
struct GoalFormula {
  std::vector<Formula> clauses;
};

// Structural problems: unbound or re-bound variables, misplaced negation,
// arity mismatches. Object ids are checked only when a scene is supplied.
std::vector<std::string> check_formula(const GoalFormula& goal,
                                       const Scene* scene = nullptr);

struct Literal {
  Atom atom;
  bool negated = false;

  auto operator<=>(const Literal&) const = default;
  bool holds(const WorldState& state) const {
    return state.holds(atom) != negated;
  }
};

struct Grounding {
  std::vector<Literal> literals;  // sorted, deduplicated
  // Choice made for each at-least-one quantifier, as (label, object id).
  // Labels carry enclosing bindings, e.g. "c" or "c[b=bowl_0]".
  std::vector<std::pair<std::string, std::string>> witness;
};

struct GroundedGoal {
  std::vector<Grounding> groundings;
  std::vector<std::string> warnings;
};

// Expands quantifiers against the scene. Groundings that contain both a
// literal and its negation cannot be satisfied and are dropped; groundings
// with equal literal sets are merged (first witness kept).
GroundedGoal ground_goal(const GoalFormula& goal, const Scene& scene);

int count_satisfied(const WorldState& state, const Grounding& grounding);

struct Progress {
  int satisfied = 0;
  int total = 0;
  bool success = false;

  double fraction() const {
    return total == 0 ? 1.0 : static_cast<double>(satisfied) / total;
  }
};

// Best grounding by satisfied fraction, compared exactly as rationals.
Progress progress(const WorldState& state, const GroundedGoal& goal);

std::string literal_to_string(const Literal& lit, const Scene& scene);

}  // namespace hearth
