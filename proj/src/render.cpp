#include "hearthlab/render.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>
#include <vector>

#include "hearthlab/errors.hpp"

namespace hearth {

namespace {

// Predicate phrase after "is"; binary kinds are followed by the object.
std::string_view phrase(AtomKind kind) {
  switch (kind) {
    case AtomKind::kDusty: return "dusty";
    case AtomKind::kDirty: return "dirty";
    case AtomKind::kOpen: return "open";
    case AtomKind::kToggledOn: return "toggled on";
    case AtomKind::kInside: return "inside";
    case AtomKind::kOnTop: return "on top";
    case AtomKind::kUnder: return "under";
    case AtomKind::kNextTo: return "next to";
    case AtomKind::kInReach: return "in reach of robot";
    case AtomKind::kInSameRoom: return "in same room as robot";
    case AtomKind::kInFov: return "in field of view of robot";
    case AtomKind::kHolding: return "holding";
  }
  return "?";
}

std::string clause(AtomKind kind, const std::string& subject,
                   const std::string& object) {
  if (kind == AtomKind::kHolding) return "robot is holding " + subject;
  std::string out = subject + " is " + std::string(phrase(kind));
  if (atom_arity(kind) == 2) out += " " + object;
  return out;
}

using VarScope = std::vector<std::pair<std::string, std::string>>;

class GoalRenderer {
 public:
  std::string render(const Formula& f, bool sentence_start) {
    switch (f.kind) {
      case Formula::Kind::kForAll:
      case Formula::Kind::kForAtLeastOne: {
        std::string out = sentence_start ? "For " : "for ";
        out += f.kind == Formula::Kind::kForAll ? "every " : "at least one ";
        out += f.category + ", ";
        scope_.emplace_back(f.variable, f.category);
        out += render(f.children.at(0), false);
        scope_.pop_back();
        return out;
      }
      case Formula::Kind::kAnd: {
        std::string out;
        for (std::size_t i = 0; i < f.children.size(); ++i) {
          if (i) out += ", and ";
          out += render(f.children[i], sentence_start && i == 0);
        }
        return out;
      }
      case Formula::Kind::kNot:
        return std::string(sentence_start ? "The" : "the") +
               " following is NOT true: " + render(f.children.at(0), false);
      case Formula::Kind::kLit: {
        std::string subject = f.args.empty() ? "" : term(f.args[0]);
        std::string object = f.args.size() > 1 ? term(f.args[1]) : "";
        return clause(f.atom, subject, object);
      }
    }
    return {};
  }

 private:
  std::string term(const Term& t) const {
    if (!t.is_variable) return goal_object_name(t.name);
    auto it = std::find_if(scope_.rbegin(), scope_.rend(),
                           [&](const auto& v) { return v.first == t.name; });
    if (it == scope_.rend()) {
      throw RenderError("unbound variable '" + t.name + "' in goal");
    }
    return "the " + it->second;
  }

  VarScope scope_;
};

}  // namespace

std::string goal_object_name(const std::string& id) {
  std::size_t digits = id.size();
  while (digits > 0 && std::isdigit(static_cast<unsigned char>(id[digits - 1]))) {
    --digits;
  }
  if (digits == id.size() || digits < 2 || id[digits - 1] != '_') return id;
  return id.substr(0, digits - 1) + id.substr(digits);
}

std::string render_state(const WorldState& state, const Scene& scene) {
  std::vector<const Atom*> atoms;
  for (const Atom& at : state.atoms) {
    const bool binary = atom_arity(at.kind) == 2;
    if (at.a < 0 || at.a >= scene.size() ||
        (binary && (at.b < 0 || at.b >= scene.size()))) {
      throw RenderError("atom " + atom_to_string(at, scene) +
                        " references an unknown object");
    }
    atoms.push_back(&at);
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom* x, const Atom* y) {
    return std::tie(x->a, x->kind, x->b) < std::tie(y->a, y->kind, y->b);
  });

  std::string out;
  for (const Atom* at : atoms) {
    if (!out.empty()) out += ' ';
    const std::string object = at->b >= 0 ? scene.at(at->b).id : "";
    out += clause(at->kind, scene.at(at->a).id, object);
    out += '.';
  }
  return out;
}

std::string render_goal(const GoalFormula& goal) {
  std::string out;
  for (std::size_t i = 0; i < goal.clauses.size(); ++i) {
    if (i) out += '\n';
    GoalRenderer renderer;
    out += renderer.render(goal.clauses[i], true);
    out += '.';
  }
  return out;
}

std::string render_activity(const WorldState& initial, const GoalFormula& goal,
                            const Scene& scene) {
  return render_state(initial, scene) + "\n" + render_goal(goal);
}

}  // namespace hearth
