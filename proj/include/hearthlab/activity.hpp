#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hearthlab/goal.hpp"
#include "hearthlab/world.hpp"

namespace hearth {

// A household activity: scene, initial state, goal and action model, as
// loaded from a `.act` JSON file.
struct Activity {
  std::string name;        // e.g. "cleaning_kitchen_cupboard"
  std::string short_name;  // e.g. "cupboard"; matrix labels use this
  bool source_only = false;
  std::string notes;
  Scene scene;
  WorldState initial;
  GoalFormula goal;
  GroundedGoal grounded;
  ActionModel action_model;

  std::string description() const;  // render_activity of the initial state
  std::string goal_text() const;
};

// Parses, validates and grounds. Throws LoadError with a line/column (JSON
// syntax) or a JSON pointer (content) locating the problem.
Activity parse_activity(std::string_view json_text,
                        const std::string& origin = "<string>");
Activity load_activity(const std::string& path);

// All `*.act` files in a directory, sorted by file name.
std::vector<Activity> load_catalog(const std::string& dir);

// Finds by full or short name.
const Activity* find_activity(const std::vector<Activity>& catalog,
                              std::string_view name);

}  // namespace hearth
