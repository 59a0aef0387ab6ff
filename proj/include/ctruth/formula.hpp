#pragma once

// Terms and formulas of first-order arithmetic with the constructive-truth
// modality `box`. Nodes are immutable and shared; a FormulaPtr is a value.

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctruth {

using Nat = std::uint64_t;

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind { Const, Var, Add, Mul };

  Kind kind = Kind::Const;
  Nat value = 0;
  std::string name;
  TermPtr left;
  TermPtr right;

  static TermPtr constant(Nat v);
  static TermPtr var(std::string name);
  static TermPtr add(TermPtr l, TermPtr r);
  static TermPtr mul(TermPtr l, TermPtr r);
};

bool operator==(const Term& a, const Term& b);
bool same_term(const TermPtr& a, const TermPtr& b);

enum class Relation { Eq, Lt };

enum class FormulaKind { Atom, Pred, Not, And, Or, Implies, Exists, Forall, Box };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  FormulaKind kind = FormulaKind::Atom;
  // Atom
  Relation rel = Relation::Eq;
  TermPtr lhs;
  TermPtr rhs;
  // Pred: name + args. Exists/Forall: name is the bound variable.
  std::string name;
  std::vector<TermPtr> args;
  // Unary nodes use `left` as their body.
  FormulaPtr left;
  FormulaPtr right;

  static FormulaPtr atom(Relation rel, TermPtr lhs, TermPtr rhs);
  static FormulaPtr eq(TermPtr lhs, TermPtr rhs);
  static FormulaPtr lt(TermPtr lhs, TermPtr rhs);
  static FormulaPtr pred(std::string name, std::vector<TermPtr> args = {});
  static FormulaPtr negation(FormulaPtr body);
  static FormulaPtr conj(FormulaPtr l, FormulaPtr r);
  static FormulaPtr disj(FormulaPtr l, FormulaPtr r);
  static FormulaPtr implies(FormulaPtr antecedent, FormulaPtr consequent);
  static FormulaPtr exists(std::string var, FormulaPtr body);
  static FormulaPtr forall(std::string var, FormulaPtr body);
  static FormulaPtr box(FormulaPtr body);

  /// `0=0`, the vacuous assertion.
  static FormulaPtr verum();
  /// `0=1`.
  static FormulaPtr falsum();

  const FormulaPtr& body() const { return left; }
  bool is_quantifier() const { return kind == FormulaKind::Exists || kind == FormulaKind::Forall; }
  bool is_terminal() const {
    return kind == FormulaKind::Atom || kind == FormulaKind::Pred || kind == FormulaKind::Not;
  }
};

bool operator==(const Formula& a, const Formula& b);
bool same_formula(const FormulaPtr& a, const FormulaPtr& b);

/// Equality up to renaming of bound variables.
bool alpha_equivalent(const FormulaPtr& a, const FormulaPtr& b);

// ---------------------------------------------------------------------------
// Concrete syntax

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnboundVariableError : public std::runtime_error {
 public:
  explicit UnboundVariableError(std::vector<std::string> names);
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

/// Parses a formula. Variables not bound by a quantifier must appear in
/// `free_vars`, otherwise UnboundVariableError lists them.
FormulaPtr parse_formula(const std::string& text, const std::set<std::string>& free_vars = {});
TermPtr parse_term(const std::string& text);

std::string to_string(const Term& t);
std::string to_string(const Formula& f);
inline std::string to_string(const TermPtr& t) { return to_string(*t); }
inline std::string to_string(const FormulaPtr& f) { return to_string(*f); }

// ---------------------------------------------------------------------------
// Structure

std::set<std::string> free_vars(const Term& t);
std::set<std::string> free_vars(const Formula& f);
inline bool is_closed(const Formula& f) { return free_vars(f).empty(); }

class SubstitutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replaces the free occurrences of `var` by the numeral `n`.
/// Throws SubstitutionError when `var` is not free in `f`.
FormulaPtr substitute(const FormulaPtr& f, const std::string& var, Nat n);

/// Capture-avoiding substitution of an arbitrary term. Unlike `substitute`,
/// a variable that does not occur is not an error.
FormulaPtr substitute_term(const FormulaPtr& f, const std::string& var, const TermPtr& t);
TermPtr substitute_term(const TermPtr& t, const std::string& var, const TermPtr& replacement);

/// Child index path from the root; 0 is the body/left child, 1 the right child.
using Position = std::vector<int>;

enum class Polarity { Positive, Negative };

struct Classification {
  bool is_arithmetical = true;
  bool implication_free = true;
  bool exists_free = true;
  unsigned impl_nesting_depth = 0;
  bool sigma03_shape = false;
  std::map<Position, Polarity> occurrence_polarity;
};

Classification classify(const FormulaPtr& f);

/// Arithmetical-hierarchy level of a formula whose implications all have
/// decidable antecedents. `sigma`/`pi` are the least n with the formula in
/// Sigma_n/Pi_n; both are `unknown` when the shape is not classifiable.
struct HierarchyLevel {
  static constexpr unsigned unknown = 1000;
  unsigned sigma = unknown;
  unsigned pi = unknown;
  bool classified() const { return sigma != unknown; }
};

HierarchyLevel hierarchy_level(const FormulaPtr& f);

}  // namespace ctruth
