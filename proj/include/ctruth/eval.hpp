#pragma once

// Classical evaluation of formulas with quantifiers truncated at a numeral
// bound. Predicate symbols are given meaning by an Interpretation.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "ctruth/formula.hpp"

namespace ctruth {

using PredicateFn = std::function<bool(std::span<const Nat>)>;

class Interpretation {
 public:
  Interpretation() = default;

  Interpretation& define(std::string name, PredicateFn fn) {
    preds_[std::move(name)] = std::move(fn);
    return *this;
  }
  bool has(const std::string& name) const { return preds_.count(name) > 0; }
  bool holds(const std::string& name, std::span<const Nat> args) const;

 private:
  std::map<std::string, PredicateFn> preds_;
};

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Assignment = std::map<std::string, Nat>;

Nat evaluate(const Term& t, const Assignment& env);

/// Evaluates `f` classically, letting every quantifier range over
/// 0..numeral_bound. Quantifier-free formulas are evaluated exactly;
/// `box A` is evaluated as `A`.
bool evaluate(const Formula& f, const Assignment& env, Nat numeral_bound, const Interpretation& interp = {});

/// Three-valued evaluation used by the checker. Universal quantifiers are
/// checked up to the largest of numeral_bound, the numerals in `f` and the
/// values in scope, and then taken as true; existential ones keep
/// searching past the bound and are Unknown once the search has spent
/// `search_steps` instance evaluations, nested work included. Guarded quantifiers `E y.(y<t /\ B)`, `A y.(y<t -> B)` are
/// evaluated exactly. With `exact_domain` every quantifier ranges over
/// exactly 0..numeral_bound.
enum class Truth { False, True, Unknown };

struct EvalLimits {
  Nat numeral_bound = 10;
  std::size_t search_steps = 100000;
  bool exact_domain = false;
};

Truth evaluate_truth(const Formula& f, const Assignment& env, const EvalLimits& limits,
                     const Interpretation& interp = {});

inline Truth evaluate_truth(const FormulaPtr& f, const EvalLimits& limits, const Interpretation& interp = {}) {
  return evaluate_truth(*f, {}, limits, interp);
}

inline bool evaluate_closed(const FormulaPtr& f, Nat numeral_bound, const Interpretation& interp = {}) {
  return evaluate(*f, {}, numeral_bound, interp);
}

}  // namespace ctruth
