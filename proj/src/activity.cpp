#include "hearthlab/activity.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hearthlab/errors.hpp"
#include "hearthlab/render.hpp"

namespace hearth {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& where,
                       const std::string& msg) {
  throw LoadError(origin + ": " + where + ": " + msg);
}

std::string line_col(std::string_view text, std::size_t byte) {
  int line = 1;
  int col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& member(const json& obj, const char* key, const std::string& origin,
                   const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(origin, where, std::string("missing key '") + key + "'");
  }
  return obj.at(key);
}

std::string as_string(const json& j, const std::string& origin,
                      const std::string& where) {
  if (!j.is_string()) fail(origin, where, "expected a string");
  return j.get<std::string>();
}

class GoalParser {
 public:
  GoalParser(const Scene& scene, std::string origin)
      : scene_(scene), origin_(std::move(origin)) {}

  Formula parse(const json& node, const std::string& where) {
    if (!node.is_array() || node.empty() || !node[0].is_string()) {
      fail(origin_, where,
           "goal node must be an array starting with a keyword");
    }
    const std::string head = node[0].get<std::string>();
    if (head == "forall" || head == "atleastone" || head == "exists") {
      if (node.size() != 4) {
        fail(origin_, where,
             "'" + head + "' takes a category, a variable and a body");
      }
      const std::string category = as_string(node[1], origin_, where + "/1");
      const std::string variable = as_string(node[2], origin_, where + "/2");
      if (category.empty() || variable.empty()) {
        fail(origin_, where, "empty category or variable name");
      }
      if (scene_.find(variable)) {
        fail(origin_, where + "/2",
             "variable '" + variable + "' shadows an object id");
      }
      bound_.push_back(variable);
      Formula body = parse(node[3], where + "/3");
      bound_.pop_back();
      return head == "forall"
                 ? Formula::for_all(category, variable, std::move(body))
                 : Formula::for_at_least_one(category, variable,
                                             std::move(body));
    }
    if (head == "and") {
      std::vector<Formula> children;
      for (std::size_t i = 1; i < node.size(); ++i) {
        children.push_back(parse(node[i], where + "/" + std::to_string(i)));
      }
      if (children.empty()) fail(origin_, where, "empty 'and'");
      return Formula::all_of(std::move(children));
    }
    if (head == "not") {
      if (node.size() != 2) fail(origin_, where, "'not' takes one child");
      return Formula::negate(parse(node[1], where + "/1"));
    }
    const auto kind = atom_kind_from_name(head);
    if (!kind) fail(origin_, where, "unknown predicate kind '" + head + "'");
    const int arity = atom_arity(*kind);
    if (static_cast<int>(node.size()) != arity + 1) {
      fail(origin_, where,
           "'" + head + "' expects " + std::to_string(arity) + " argument(s)");
    }
    std::vector<Term> args;
    for (int i = 1; i <= arity; ++i) {
      const std::string name =
          as_string(node[i], origin_, where + "/" + std::to_string(i));
      if (std::find(bound_.begin(), bound_.end(), name) != bound_.end()) {
        args.push_back(Term::var(name));
      } else if (scene_.find(name)) {
        args.push_back(Term::obj(name));
      } else {
        fail(origin_, where + "/" + std::to_string(i),
             "unbound goal variable '" + name + "' (not a quantified "
             "variable or object id)");
      }
    }
    return Formula::lit(*kind, std::move(args));
  }

 private:
  const Scene& scene_;
  std::string origin_;
  std::vector<std::string> bound_;
};

}  // namespace

std::string Activity::description() const {
  return render_activity(initial, goal, scene);
}

std::string Activity::goal_text() const { return render_goal(goal); }

Activity parse_activity(std::string_view json_text,
                        const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw LoadError(origin + ": parse error at " + line_col(json_text, at) +
                    ": " + e.what());
  }
  if (!doc.is_object()) fail(origin, "/", "activity must be a JSON object");

  Activity act;
  act.name = as_string(member(doc, "name", origin, "/"), origin, "/name");
  if (act.name.empty()) fail(origin, "/name", "empty activity name");
  act.short_name = doc.contains("short")
                       ? as_string(doc["short"], origin, "/short")
                       : act.name;
  if (doc.contains("source_only")) {
    if (!doc["source_only"].is_boolean()) {
      fail(origin, "/source_only", "expected true or false");
    }
    act.source_only = doc["source_only"].get<bool>();
  }
  if (doc.contains("notes")) {
    act.notes = as_string(doc["notes"], origin, "/notes");
  }

  const json& objects = member(doc, "objects", origin, "/");
  if (!objects.is_array() || objects.empty()) {
    fail(origin, "/objects", "expected a nonempty array");
  }
  std::vector<ObjectDef> defs;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string where = "/objects/" + std::to_string(i);
    ObjectDef def;
    def.id = as_string(member(objects[i], "id", origin, where), origin,
                       where + "/id");
    def.category = as_string(member(objects[i], "category", origin, where),
                             origin, where + "/category");
    if (objects[i].contains("properties")) {
      const json& props = objects[i]["properties"];
      if (!props.is_array()) fail(origin, where + "/properties", "expected array");
      for (std::size_t k = 0; k < props.size(); ++k) {
        const std::string pname =
            as_string(props[k], origin, where + "/properties");
        const auto p = property_from_name(pname);
        if (!p) {
          fail(origin, where + "/properties/" + std::to_string(k),
               "unknown property '" + pname + "'");
        }
        def.properties |= static_cast<std::uint8_t>(*p);
      }
    }
    defs.push_back(std::move(def));
  }
  act.scene = Scene(std::move(defs));

  const json& initial = member(doc, "initial", origin, "/");
  if (!initial.is_array()) fail(origin, "/initial", "expected an array");
  for (std::size_t i = 0; i < initial.size(); ++i) {
    const std::string where = "/initial/" + std::to_string(i);
    const json& row = initial[i];
    if (!row.is_array() || row.empty()) {
      fail(origin, where, "atom must be [kind, args...]");
    }
    const std::string kname = as_string(row[0], origin, where + "/0");
    const auto kind = atom_kind_from_name(kname);
    if (!kind) fail(origin, where, "unknown predicate kind '" + kname + "'");
    const int arity = atom_arity(*kind);
    if (static_cast<int>(row.size()) != arity + 1) {
      fail(origin, where,
           "'" + kname + "' expects " + std::to_string(arity) +
               " argument(s)");
    }
    Atom atom{*kind, -1, -1};
    for (int k = 1; k <= arity; ++k) {
      const std::string id =
          as_string(row[k], origin, where + "/" + std::to_string(k));
      const auto idx = act.scene.find(id);
      if (!idx) fail(origin, where, "unknown object '" + id + "'");
      (k == 1 ? atom.a : atom.b) = *idx;
    }
    act.initial.atoms.insert(atom);
  }

  if (doc.contains("action_model")) {
    const json& model = doc["action_model"];
    if (!model.is_object()) fail(origin, "/action_model", "expected object");
    for (const auto& [key, value] : model.items()) {
      const auto prim = primitive_from_name(key);
      if (!prim) {
        fail(origin, "/action_model/" + key,
             "unknown action primitive '" + key + "'");
      }
      if (!value.is_number() || value.get<double>() < 0.0 ||
          value.get<double>() > 1.0) {
        fail(origin, "/action_model/" + key,
             "success probability must be a number in [0, 1]");
      }
      act.action_model.success_prob[static_cast<int>(*prim)] =
          value.get<double>();
    }
  }

  const json& goal = member(doc, "goal", origin, "/");
  if (!goal.is_array() || goal.empty()) {
    fail(origin, "/goal", "expected a nonempty array of goal clauses");
  }
  GoalParser parser(act.scene, origin);
  if (goal[0].is_string()) {
    act.goal.clauses.push_back(parser.parse(goal, "/goal"));
  } else {
    for (std::size_t i = 0; i < goal.size(); ++i) {
      act.goal.clauses.push_back(
          parser.parse(goal[i], "/goal/" + std::to_string(i)));
    }
  }

  if (auto violations = validate_scene(act.scene, act.initial);
      !violations.empty()) {
    std::string msg = "scene validation failed:";
    for (const Violation& v : violations) {
      msg += "\n  " + v.subject + ": " + v.rule;
    }
    throw LoadError(origin + ": " + msg);
  }
  if (auto errors = check_formula(act.goal, &act.scene); !errors.empty()) {
    throw LoadError(origin + ": /goal: " + errors.front());
  }
  try {
    act.grounded = ground_goal(act.goal, act.scene);
  } catch (const GroundingError& e) {
    throw LoadError(origin + ": /goal: " + e.what());
  }
  return act;
}

Activity load_activity(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path + ": cannot open activity file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_activity(ss.str(), path);
}

std::vector<Activity> load_catalog(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw LoadError(dir + ": not a catalog directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".act") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Activity> out;
  for (const auto& f : files) out.push_back(load_activity(f.string()));
  if (out.empty()) throw LoadError(dir + ": no .act files");
  return out;
}

const Activity* find_activity(const std::vector<Activity>& catalog,
                              std::string_view name) {
  for (const Activity& a : catalog) {
    if (a.name == name || a.short_name == name) return &a;
  }
  return nullptr;
}

}  // namespace hearth
