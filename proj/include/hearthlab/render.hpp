#pragma once

#include <string>

#include "hearthlab/goal.hpp"
#include "hearthlab/world.hpp"

namespace hearth {

// One sentence per atom, grouped by first argument in scene order, then by
// atom kind. Sentences are separated by a single space.
std::string render_state(const WorldState& state, const Scene& scene);

// One sentence per top-level clause, separated by "\n".
std::string render_goal(const GoalFormula& goal);

// State text, a newline, then goal text: the activity description that is
// embedded for similarity.
std::string render_activity(const WorldState& initial, const GoalFormula& goal,
                            const Scene& scene);

// Goal texts print object ids without the underscore before the instance
// number ("cup_1" -> "cup1").
std::string goal_object_name(const std::string& id);

}  // namespace hearth
