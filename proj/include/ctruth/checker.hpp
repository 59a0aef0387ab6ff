#pragma once

// Budgeted checking of witness streams, synthesis of witnesses for Sigma^0_3
// statements, and the realizability variant where witnesses are programs.
//
// Acceptance is evidence only: inputs are enumerated up to a numeral bound,
// and antecedent witnesses are drawn from a finite probe set.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctruth/eval.hpp"
#include "ctruth/vm.hpp"
#include "ctruth/witness.hpp"

namespace ctruth {

struct Budget {
  std::size_t pull_limit = 2000;
  Nat numeral_bound = 10;
  std::size_t vm_steps = 100000;
  // Quantifiers in semantic contents range over exactly 0..numeral_bound.
  bool exact_domain = false;

  void validate() const;
};

struct Verdict {
  enum class Kind { Accepted, Rejected, Pending };

  Kind kind = Kind::Accepted;
  // accepted_up_to
  std::size_t pulls = 0;
  Nat numerals = 0;
  // rejected
  IOPair pair;
  FormulaPtr reason;
  std::string violation;  // empty when the content is false
  // pending
  std::vector<IOToken> missing_input;

  bool accepted() const { return kind == Kind::Accepted; }
  bool rejected() const { return kind == Kind::Rejected; }
  bool pending() const { return kind == Kind::Pending; }
};

/// The report line.
std::string to_string(const Verdict& v);

/// Extra antecedent witnesses for probing implications, by antecedent.
using ProbeFn = std::function<std::vector<WitnessStream>(const FormulaPtr&)>;

struct CheckContext {
  ProbeFn probes;
  Interpretation interp;
  // Only probes built from programs (the realizability reading).
  bool code_probes_only = false;
};

/// Rejects on a pair whose content is false within the budget, on a
/// functionality violation, or on a box code that does not decode or whose
/// program fails. Pending when a required answer is missing. Throws
/// ShapeError when a pair does not fit `f`.
Verdict check_witness(const FormulaPtr& f, const WitnessStream& w, const Budget& b, const CheckContext& ctx = {});

/// A witness found by dovetailed search over (value, effort); nullopt when
/// the budget runs out before the statement is confirmed. Throws ShapeError
/// unless `f` is Sigma^0_3-shaped.
std::optional<WitnessStream> synthesize_sigma03(const FormulaPtr& f, const Budget& b, const Interpretation& interp = {});

/// Runs `code` with at most `b.vm_steps` steps per answer and checks the
/// result. Throws VmError for an invalid program.
Verdict check_realizability(const FormulaPtr& f, const Program& code, const Budget& b, const CheckContext& ctx = {});

}  // namespace ctruth
