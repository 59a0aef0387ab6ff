#pragma once

// Sigma^0_3 statements with truth values settled by brute force over stated
// bounds: existential quantifiers range over 0..exists_bound, universal ones
// over 0..max(forall_bound, values in scope).

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "ctruth/checker.hpp"
#include "ctruth/formula.hpp"

namespace ctruth::testing {

struct Sigma03Fixture {
  std::string text;
  Nat exists_bound;
  Nat forall_bound;
};

inline const std::vector<Sigma03Fixture>& true_sigma03() {
  static const std::vector<Sigma03Fixture> f = {
      {"E y. y=1+1", 10, 0},
      {"A x. E y. y=2*x", 40, 12},
      {"A x. E y. (x=2*y \\/ x=2*y+1)", 20, 12},
      {"E y. A x. y*x=0", 5, 12},
      {"E a. A b. E c. b+a=c", 30, 12},
      {"A x. E y. x<y", 20, 12},
      {"E y. y*y=49", 10, 0},
      {"A x. A z. E y. y=x+z", 30, 12},
      {"E a. (a=3 /\\ A b. E c. c=a*b)", 40, 12},
      {"A x. (x=0 \\/ E y. x=y+1)", 20, 12},
      {"E a. A b. (b<a -> E c. c=b+1)", 20, 12},
      {"E y. (y<10 /\\ y*y=y+y+3)", 10, 0},
      {"A x. E y. E z. x=y+z", 20, 12},
      {"E a. A b. E c. c=b*b+a", 200, 12},
      {"A x. E y. (y<x+1 /\\ x=y)", 20, 12},
      {"E a. E b. (a*b=12 /\\ 1<a)", 12, 0},
      {"A x. E y. x*x<y", 200, 12},
      {"E a. A b. (a<b+1 \\/ b<a)", 5, 12},
      {"~1=0 /\\ A x. E y. y=x*x", 200, 12},
      {"E a. A b. E c. (b<c /\\ a=7)", 20, 12},
  };
  return f;
}

inline const std::vector<Sigma03Fixture>& false_sigma03() {
  static const std::vector<Sigma03Fixture> f = {
      {"E y. y+1=0", 200, 0},
      {"A x. E y. y<x", 200, 12},
      {"E a. A b. b<a", 200, 12},
      {"E a. A b. E c. (c<b /\\ a=0)", 200, 12},
      {"A x. E y. y*2=x", 200, 12},
  };
  return f;
}

/// Budgets tried on the false fixtures.
inline std::vector<Budget> sigma03_ladder() {
  std::vector<Budget> out;
  for (Nat bound : {5, 10, 20})
    for (std::size_t steps : {1000, 10000, 100000}) {
      Budget b;
      b.numeral_bound = bound;
      b.vm_steps = steps;
      b.pull_limit = 500;
      out.push_back(b);
    }
  return out;
}

inline Nat brute_term(const Term& t, const std::map<std::string, Nat>& env) {
  switch (t.kind) {
    case Term::Kind::Const:
      return t.value;
    case Term::Kind::Var:
      return env.at(t.name);
    case Term::Kind::Add:
      return brute_term(*t.left, env) + brute_term(*t.right, env);
    case Term::Kind::Mul:
      return brute_term(*t.left, env) * brute_term(*t.right, env);
  }
  return 0;
}

inline bool brute_truth(const Formula& f, std::map<std::string, Nat>& env, const Sigma03Fixture& fx) {
  switch (f.kind) {
    case FormulaKind::Atom: {
      Nat a = brute_term(*f.lhs, env), b = brute_term(*f.rhs, env);
      return f.rel == Relation::Eq ? a == b : a < b;
    }
    case FormulaKind::Not:
      return !brute_truth(*f.left, env, fx);
    case FormulaKind::And:
      return brute_truth(*f.left, env, fx) && brute_truth(*f.right, env, fx);
    case FormulaKind::Or:
      return brute_truth(*f.left, env, fx) || brute_truth(*f.right, env, fx);
    case FormulaKind::Implies:
      return !brute_truth(*f.left, env, fx) || brute_truth(*f.right, env, fx);
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      bool universal = f.kind == FormulaKind::Forall;
      Nat end = fx.exists_bound;
      if (universal) {
        end = fx.forall_bound;
        for (const auto& [name, v] : env) end = std::max(end, v);
      }
      auto saved = env.count(f.name) ? std::optional<Nat>(env[f.name]) : std::nullopt;
      bool result = universal;
      for (Nat v = 0; v <= end; ++v) {
        env[f.name] = v;
        if (brute_truth(*f.left, env, fx) != universal) {
          result = !universal;
          break;
        }
      }
      if (saved) env[f.name] = *saved; else env.erase(f.name);
      return result;
    }
    default:
      throw std::logic_error("unexpected connective in brute_truth");
  }
}

inline bool brute_truth(const Sigma03Fixture& fx) {
  std::map<std::string, Nat> env;
  return brute_truth(*parse_formula(fx.text), env, fx);
}

}  // namespace ctruth::testing
