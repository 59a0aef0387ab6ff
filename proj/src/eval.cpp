#include "ctruth/eval.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace ctruth {

bool Interpretation::holds(const std::string& name, std::span<const Nat> args) const {
  auto it = preds_.find(name);
  if (it == preds_.end()) throw EvaluationError("uninterpreted predicate symbol '" + name + "'");
  return it->second(args);
}

Nat evaluate(const Term& t, const Assignment& env) {
  switch (t.kind) {
    case Term::Kind::Const:
      return t.value;
    case Term::Kind::Var: {
      auto it = env.find(t.name);
      if (it == env.end()) throw EvaluationError("unassigned variable '" + t.name + "'");
      return it->second;
    }
    case Term::Kind::Add: {
      Nat a = evaluate(*t.left, env), b = evaluate(*t.right, env);
      if (a > std::numeric_limits<Nat>::max() - b) throw EvaluationError("arithmetic overflow in " + to_string(t));
      return a + b;
    }
    case Term::Kind::Mul: {
      Nat a = evaluate(*t.left, env), b = evaluate(*t.right, env);
      if (a != 0 && b > std::numeric_limits<Nat>::max() / a)
        throw EvaluationError("arithmetic overflow in " + to_string(t));
      return a * b;
    }
  }
  return 0;
}

bool evaluate(const Formula& f, const Assignment& env, Nat bound, const Interpretation& interp) {
  switch (f.kind) {
    case FormulaKind::Atom: {
      Nat a = evaluate(*f.lhs, env), b = evaluate(*f.rhs, env);
      return f.rel == Relation::Eq ? a == b : a < b;
    }
    case FormulaKind::Pred: {
      std::vector<Nat> args;
      args.reserve(f.args.size());
      for (const auto& a : f.args) args.push_back(evaluate(*a, env));
      return interp.holds(f.name, args);
    }
    case FormulaKind::Not:
      return !evaluate(*f.left, env, bound, interp);
    case FormulaKind::Box:
      return evaluate(*f.left, env, bound, interp);
    case FormulaKind::And:
      return evaluate(*f.left, env, bound, interp) && evaluate(*f.right, env, bound, interp);
    case FormulaKind::Or:
      return evaluate(*f.left, env, bound, interp) || evaluate(*f.right, env, bound, interp);
    case FormulaKind::Implies:
      return !evaluate(*f.left, env, bound, interp) || evaluate(*f.right, env, bound, interp);
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      Assignment inner = env;
      bool universal = f.kind == FormulaKind::Forall;
      for (Nat v = 0;; ++v) {
        inner[f.name] = v;
        bool r = evaluate(*f.left, inner, bound, interp);
        if (universal && !r) return false;
        if (!universal && r) return true;
        if (v == bound) break;
      }
      return universal;
    }
  }
  return false;
}

namespace {

Truth negate(Truth t) {
  if (t == Truth::Unknown) return t;
  return t == Truth::True ? Truth::False : Truth::True;
}

Truth conj(Truth a, Truth b) {
  if (a == Truth::False || b == Truth::False) return Truth::False;
  if (a == Truth::Unknown || b == Truth::Unknown) return Truth::Unknown;
  return Truth::True;
}

Truth disj(Truth a, Truth b) { return negate(conj(negate(a), negate(b))); }

class TruthEvaluator {
 public:
  TruthEvaluator(const EvalLimits& limits, const Interpretation& interp, Nat scale)
      : limits_(limits), interp_(interp), scale_(scale) {}

  Truth eval(const Formula& f, Assignment& env) {
    switch (f.kind) {
      case FormulaKind::Atom:
      case FormulaKind::Pred:
        return evaluate(f, env, 0, interp_) ? Truth::True : Truth::False;
      case FormulaKind::Not:
        return negate(eval(*f.left, env));
      case FormulaKind::Box:
        return eval(*f.left, env);
      case FormulaKind::And: {
        Truth l = eval(*f.left, env);
        return l == Truth::False ? l : conj(l, eval(*f.right, env));
      }
      case FormulaKind::Or: {
        Truth l = eval(*f.left, env);
        return l == Truth::True ? l : disj(l, eval(*f.right, env));
      }
      case FormulaKind::Implies: {
        Truth r = eval(*f.right, env);
        return r == Truth::True ? r : disj(negate(eval(*f.left, env)), r);
      }
      case FormulaKind::Exists:
      case FormulaKind::Forall:
        return quantifier(f, env);
    }
    return Truth::Unknown;
  }

 private:
  // Upper limit t of a guard `y<t` heading the body, when there is one.
  std::optional<Nat> guard_limit(const Formula& q, Assignment& env) {
    const Formula& b = *q.left;
    FormulaKind want = q.kind == FormulaKind::Exists ? FormulaKind::And : FormulaKind::Implies;
    if (b.kind != want) return std::nullopt;
    const Formula& g = *b.left;
    if (g.kind != FormulaKind::Atom || g.rel != Relation::Lt) return std::nullopt;
    if (g.lhs->kind != Term::Kind::Var || g.lhs->name != q.name) return std::nullopt;
    if (free_vars(*g.rhs).count(q.name)) return std::nullopt;
    return evaluate(*g.rhs, env);
  }

  Truth instance(const Formula& q, Assignment& env, Nat v) {
    if (fuel_) {
      if (*fuel_ == 0) return Truth::Unknown;
      --*fuel_;
    }
    auto saved = env.find(q.name) != env.end() ? std::optional<Nat>(env[q.name]) : std::nullopt;
    env[q.name] = v;
    Truth t = eval(*q.left, env);
    if (saved)
      env[q.name] = *saved;
    else
      env.erase(q.name);
    return t;
  }

  Truth quantifier(const Formula& q, Assignment& env) {
    bool universal = q.kind == FormulaKind::Forall;
    Truth acc = universal ? Truth::True : Truth::False;
    auto combine = [&](Truth t) { acc = universal ? conj(acc, t) : disj(acc, t); };
    auto decided = [&] { return acc == (universal ? Truth::False : Truth::True); };

    Nat end = limits_.numeral_bound;
    if (universal && !limits_.exact_domain) {
      end = std::max(end, scale_);
      for (const auto& [name, v] : env) end = std::max(end, v);
    }
    bool exact = limits_.exact_domain;
    if (!exact) {
      if (auto lim = guard_limit(q, env)) {
        if (*lim == 0) return universal ? Truth::True : Truth::False;
        if (*lim - 1 <= limits_.numeral_bound + limits_.search_steps) {
          end = *lim - 1;
          exact = true;
        }
      }
    }
    for (Nat v = 0; v <= end; ++v) {
      combine(instance(q, env, v));
      if (decided()) return acc;
    }
    if (exact || universal) return acc;
    // keep searching past the bound; all work inside the search is charged to it
    auto outer = fuel_;
    std::size_t budget = outer ? *outer : limits_.search_steps;
    fuel_ = budget;
    Truth t = Truth::Unknown;
    for (Nat v = end + 1; *fuel_ > 0 && t != Truth::True; ++v) t = instance(q, env, v);
    std::size_t used = budget - *fuel_;
    fuel_ = outer ? std::optional<std::size_t>(*outer - used) : std::nullopt;
    return t == Truth::True ? t : Truth::Unknown;
  }

  const EvalLimits& limits_;
  const Interpretation& interp_;
  std::optional<std::size_t> fuel_;
  Nat scale_;
};

Nat largest_numeral(const Term& t) {
  if (t.kind == Term::Kind::Const) return t.value;
  if (t.kind == Term::Kind::Var) return 0;
  return std::max(largest_numeral(*t.left), largest_numeral(*t.right));
}

Nat largest_numeral(const Formula& f) {
  Nat m = 0;
  if (f.lhs) m = std::max({m, largest_numeral(*f.lhs), largest_numeral(*f.rhs)});
  for (const auto& a : f.args) m = std::max(m, largest_numeral(*a));
  if (f.left) m = std::max(m, largest_numeral(*f.left));
  if (f.right) m = std::max(m, largest_numeral(*f.right));
  return m;
}

}  // namespace

Truth evaluate_truth(const Formula& f, const Assignment& env, const EvalLimits& limits, const Interpretation& interp) {
  Assignment e = env;
  return TruthEvaluator(limits, interp, largest_numeral(f)).eval(f, e);
}

}  // namespace ctruth
