#include "hearthlab/goal.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "hearthlab/errors.hpp"

namespace hearth {

Formula Formula::for_all(std::string category, std::string variable,
                         Formula body) {
  Formula f;
  f.kind = Kind::kForAll;
  f.category = std::move(category);
  f.variable = std::move(variable);
  f.children.push_back(std::move(body));
  return f;
}

Formula Formula::for_at_least_one(std::string category, std::string variable,
                                  Formula body) {
  Formula f = for_all(std::move(category), std::move(variable),
                      std::move(body));
  f.kind = Kind::kForAtLeastOne;
  return f;
}

Formula Formula::all_of(std::vector<Formula> children) {
  Formula f;
  f.kind = Kind::kAnd;
  f.children = std::move(children);
  return f;
}

Formula Formula::negate(Formula child) {
  Formula f;
  f.kind = Kind::kNot;
  f.children.push_back(std::move(child));
  return f;
}

Formula Formula::lit(AtomKind atom, std::vector<Term> args) {
  Formula f;
  f.kind = Kind::kLit;
  f.atom = atom;
  f.args = std::move(args);
  return f;
}

namespace {

void check_node(const Formula& f, std::vector<std::string>& bound,
                const Scene* scene, std::vector<std::string>& errors) {
  switch (f.kind) {
    case Formula::Kind::kForAll:
    case Formula::Kind::kForAtLeastOne: {
      if (f.children.size() != 1) {
        errors.push_back("quantifier over '" + f.category +
                         "' must have exactly one body");
        return;
      }
      if (f.variable.empty()) {
        errors.push_back("quantifier over '" + f.category +
                         "' has an empty variable name");
      }
      if (std::find(bound.begin(), bound.end(), f.variable) != bound.end()) {
        errors.push_back("variable '" + f.variable + "' is bound twice");
      }
      if (scene && scene->find(f.variable)) {
        errors.push_back("variable '" + f.variable +
                         "' shadows an object id");
      }
      bound.push_back(f.variable);
      check_node(f.children.front(), bound, scene, errors);
      bound.pop_back();
      return;
    }
    case Formula::Kind::kAnd:
      if (f.children.empty()) errors.push_back("empty conjunction");
      for (const Formula& c : f.children) check_node(c, bound, scene, errors);
      return;
    case Formula::Kind::kNot: {
      if (f.children.size() != 1) {
        errors.push_back("negation must have exactly one child");
        return;
      }
      const Formula& c = f.children.front();
      bool ok = c.kind == Formula::Kind::kLit;
      if (c.kind == Formula::Kind::kAnd) {
        ok = std::all_of(c.children.begin(), c.children.end(),
                         [](const Formula& g) {
                           return g.kind == Formula::Kind::kLit;
                         });
      }
      if (!ok) {
        errors.push_back(
            "negation may only wrap a literal or a conjunction of literals");
      }
      check_node(c, bound, scene, errors);
      return;
    }
    case Formula::Kind::kLit: {
      const int arity = atom_arity(f.atom);
      if (static_cast<int>(f.args.size()) != arity) {
        errors.push_back("literal '" + std::string(atom_kind_name(f.atom)) +
                         "' expects " + std::to_string(arity) +
                         " argument(s)");
      }
      for (const Term& t : f.args) {
        if (t.is_variable) {
          if (std::find(bound.begin(), bound.end(), t.name) == bound.end()) {
            errors.push_back("unbound variable '" + t.name + "'");
          }
        } else if (scene && !scene->find(t.name)) {
          errors.push_back("unknown object '" + t.name + "' in goal");
        }
      }
      return;
    }
  }
}

struct Alternative {
  std::set<Literal> literals;
  std::vector<std::pair<std::string, std::string>> witness;
};

using Binding = std::vector<std::pair<std::string, ObjectIndex>>;

class Expander {
 public:
  Expander(const Scene& scene, std::vector<std::string>& warnings)
      : scene_(scene), warnings_(warnings) {}

  std::vector<Alternative> expand(const Formula& f, Binding& env,
                                  bool negated) {
    switch (f.kind) {
      case Formula::Kind::kLit:
        return {Alternative{{ground_literal(f, env, negated)}, {}}};
      case Formula::Kind::kNot:
        return expand(f.children.front(), env, !negated);
      case Formula::Kind::kAnd: {
        if (negated) {
          // not (a and b) == (not a) or (not b)
          std::vector<Alternative> out;
          for (const Formula& c : f.children) {
            for (Alternative& alt : expand(c, env, true)) {
              out.push_back(std::move(alt));
            }
          }
          return out;
        }
        std::vector<Alternative> acc{Alternative{}};
        for (const Formula& c : f.children) {
          acc = product(acc, expand(c, env, negated));
        }
        return acc;
      }
      case Formula::Kind::kForAll: {
        const auto members = scene_.category_members(f.category);
        if (members.empty()) {
          warnings_.push_back("no '" + f.category +
                              "' objects: 'for every' is vacuously true");
        }
        std::vector<Alternative> acc{Alternative{}};
        for (ObjectIndex m : members) {
          env.emplace_back(f.variable, m);
          acc = product(acc, expand(f.children.front(), env, negated));
          env.pop_back();
        }
        return acc;
      }
      case Formula::Kind::kForAtLeastOne: {
        const auto members = scene_.category_members(f.category);
        if (members.empty()) {
          throw GroundingError("no '" + f.category +
                               "' objects for 'for at least one " +
                               f.category + "'");
        }
        const std::string label = witness_label(f.variable, env);
        std::vector<Alternative> out;
        for (ObjectIndex m : members) {
          env.emplace_back(f.variable, m);
          for (Alternative& alt : expand(f.children.front(), env, negated)) {
            alt.witness.insert(alt.witness.begin(),
                               {label, scene_.at(m).id});
            out.push_back(std::move(alt));
          }
          env.pop_back();
        }
        return out;
      }
    }
    return {};
  }

 private:
  Literal ground_literal(const Formula& f, const Binding& env,
                         bool negated) const {
    std::vector<ObjectIndex> idx;
    for (const Term& t : f.args) {
      if (t.is_variable) {
        auto it = std::find_if(env.rbegin(), env.rend(), [&](const auto& b) {
          return b.first == t.name;
        });
        if (it == env.rend()) {
          throw GroundingError("unbound variable '" + t.name + "'");
        }
        idx.push_back(it->second);
      } else {
        auto o = scene_.find(t.name);
        if (!o) throw GroundingError("unknown object '" + t.name + "'");
        idx.push_back(*o);
      }
    }
    Literal lit;
    lit.atom.kind = f.atom;
    lit.atom.a = idx.at(0);
    lit.atom.b = idx.size() > 1 ? idx[1] : -1;
    lit.negated = negated;
    return lit;
  }

  std::string witness_label(const std::string& var, const Binding& env) const {
    if (env.empty()) return var;
    std::string label = var + "[";
    for (std::size_t i = 0; i < env.size(); ++i) {
      if (i) label += ",";
      label += env[i].first + "=" + scene_.at(env[i].second).id;
    }
    return label + "]";
  }

  static std::vector<Alternative> product(const std::vector<Alternative>& a,
                                          const std::vector<Alternative>& b) {
    std::vector<Alternative> out;
    out.reserve(a.size() * b.size());
    for (const Alternative& x : a) {
      for (const Alternative& y : b) {
        Alternative z = x;
        z.literals.insert(y.literals.begin(), y.literals.end());
        z.witness.insert(z.witness.end(), y.witness.begin(), y.witness.end());
        out.push_back(std::move(z));
      }
    }
    return out;
  }

  const Scene& scene_;
  std::vector<std::string>& warnings_;
};

bool contradictory(const std::set<Literal>& lits) {
  for (const Literal& l : lits) {
    if (!l.negated && lits.count(Literal{l.atom, true})) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> check_formula(const GoalFormula& goal,
                                       const Scene* scene) {
  std::vector<std::string> errors;
  if (goal.clauses.empty()) errors.push_back("goal has no clauses");
  for (const Formula& clause : goal.clauses) {
    std::vector<std::string> bound;
    check_node(clause, bound, scene, errors);
  }
  return errors;
}

GroundedGoal ground_goal(const GoalFormula& goal, const Scene& scene) {
  if (auto errors = check_formula(goal, &scene); !errors.empty()) {
    throw GroundingError("malformed goal: " + errors.front());
  }
  GroundedGoal out;
  Expander expander(scene, out.warnings);
  Binding env;
  std::vector<Alternative> alts =
      expander.expand(Formula::all_of(goal.clauses), env, false);

  std::set<std::set<Literal>> seen;
  bool dropped_any = false;
  for (Alternative& alt : alts) {
    if (contradictory(alt.literals)) {
      dropped_any = true;
      continue;
    }
    if (!seen.insert(alt.literals).second) continue;
    Grounding g;
    g.literals.assign(alt.literals.begin(), alt.literals.end());
    g.witness = std::move(alt.witness);
    out.groundings.push_back(std::move(g));
  }
  if (out.groundings.empty()) {
    throw GroundingError(dropped_any
                             ? "every grounding of the goal is contradictory"
                             : "goal has no groundings");
  }
  return out;
}

int count_satisfied(const WorldState& state, const Grounding& grounding) {
  int n = 0;
  for (const Literal& lit : grounding.literals) n += lit.holds(state) ? 1 : 0;
  return n;
}

Progress progress(const WorldState& state, const GroundedGoal& goal) {
  Progress best;
  bool first = true;
  for (const Grounding& g : goal.groundings) {
    Progress p;
    p.total = static_cast<int>(g.literals.size());
    p.satisfied = count_satisfied(state, g);
    p.success = p.satisfied == p.total;
    // a/b > c/d  <=>  a*d > c*b, with empty groundings counting as 1/1.
    const long lhs_n = p.total == 0 ? 1 : p.satisfied;
    const long lhs_d = p.total == 0 ? 1 : p.total;
    const long rhs_n = best.total == 0 ? 1 : best.satisfied;
    const long rhs_d = best.total == 0 ? 1 : best.total;
    if (first || lhs_n * rhs_d > rhs_n * lhs_d) {
      const bool success = best.success || p.success;
      best = p;
      best.success = success;
      first = false;
    } else {
      best.success = best.success || p.success;
    }
  }
  return best;
}

std::string literal_to_string(const Literal& lit, const Scene& scene) {
  return (lit.negated ? "not " : "") + atom_to_string(lit.atom, scene);
}

}  // namespace hearth
