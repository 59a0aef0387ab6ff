#pragma once

// Canonical witnesses: proof terms for intuitionistic logic and Heyting
// arithmetic compiled to witness-machine programs, the Markov search, and the
// scheduler that realizes transfinite induction.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ctruth/checker.hpp"
#include "ctruth/formula.hpp"
#include "ctruth/vm.hpp"
#include "ctruth/witness.hpp"

namespace ctruth {

class ProofError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProofTerm;
using ProofPtr = std::shared_ptr<const ProofTerm>;

// Text form (s-expressions, formulas and terms as strings):
//   (hyp i)                          de Bruijn index, 0 is the innermost
//   (lambda "A" p)  (apply p q)
//   (pair p q)  (proj 0 p)  (proj 1 p)
//   (inl "B" p)  (inr "A" p)  (case d l r)
//   (witness "E y. B" "t" p)  (unpack e y p)
//   (gen x p)  (inst p "t")
//   (induction x "B" base step)      step : A x. (B -> B[x+1])
//   (axiom name "arg" ...)
//   (markov decider nonempty)
struct ProofTerm {
  enum class Kind {
    Hyp, Lambda, Apply, Pair, Proj, Inl, Inr, Case, Witness, Unpack, Gen, Inst, Induction, Axiom, Markov
  };

  Kind kind = Kind::Hyp;
  std::size_t index = 0;  // Hyp, Proj
  TermPtr term;           // Witness, Inst
  // Formula text (Lambda, Inl, Inr, Witness), bound variable or axiom name.
  std::string name;
  std::vector<std::string> axiom_args;  // also the Induction formula
  std::vector<ProofPtr> parts;
};

ProofPtr parse_proof(const std::string& text);
ProofPtr parse_proof(const SExpr& e);
std::string to_string(const ProofTerm& p);

/// Names of the axioms and schemas `(axiom ...)` accepts.
std::vector<std::string> axiom_names();

/// The formula `p` proves. Throws ProofError when ill-typed or not closed.
FormulaPtr typecheck(const ProofTerm& p);

/// `p` as a witness program for its formula. Throws ProofError.
Program extract(const ProofTerm& p);

/// Typechecks `p` against `f` (up to bound names and `~A` = `A -> 0=1`).
bool proves(const ProofTerm& p, const FormulaPtr& f);

// ---------------------------------------------------------------------------
// Corpus files: header lines `; formula: ...` and `; budget: numerals=N
// steps=M pulls=K`, then the proof term.

struct CorpusEntry {
  std::string name;
  FormulaPtr formula;
  ProofPtr proof;
  Budget budget;
};

CorpusEntry parse_corpus_entry(const std::string& text, std::string name = {});
/// All `*.proof` files in `dir`, sorted by name.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);

/// Antecedent witnesses for check_realizability: the synthesized witness of
/// a Sigma^0_3 antecedent (the output of a fixed search procedure) and the
/// extracted codes of matching corpus entries.
ProbeFn realizer_probes(const Budget& b, const std::vector<CorpusEntry>& corpus = {});

// ---------------------------------------------------------------------------
// Markov's principle

/// The decider for `A x. (B \/ ~B)` with B quantifier-free, computing B by
/// evaluation. Throws ShapeError otherwise.
Program decider_program(const FormulaPtr& decided);

/// `decider` is a witness program for `decided`, `A x. (A(x) \/ ~A(x))`.
/// Queries the decider at 0, 1, 2, ... and emits whitespace for each
/// refusal; at the first left answer n emits the witness for `E x. A(x)`
/// with head n. The antecedent `~A x. ~A(x)` is the caller's obligation and
/// is not consulted.
WitnessStream markov_realizer(const Program& decider, const FormulaPtr& decided, const WitnessStream& nonempty,
                              std::size_t steps_per_query = 100000);

// ---------------------------------------------------------------------------
// Transfinite induction

/// The antecedent of TI(P, <) as the scheduler sees it: for each n, the m
/// it asks P(m) for (its membership queries) and the P(n) witness it gives
/// once those are supplied, in query order.
struct TiStep {
  std::function<std::vector<Nat>(Nat)> queries;
  std::function<WitnessStream(Nat, const std::vector<WitnessStream>&)> conclude;
};

/// Request table with round-robin scans.
class TiScheduler {
 public:
  explicit TiScheduler(TiStep step);

  /// Files a request for P(n). The requests its step makes are filed when
  /// a scan reaches it.
  void request(Nat n);
  /// One pass over the table in filing order. Returns how many P(n) were
  /// answered during the pass.
  std::size_t scan();

  std::optional<WitnessStream> answer(Nat n) const;
  const std::vector<Nat>& answer_order() const { return order_; }
  /// Filed requests still waiting.
  std::vector<Nat> waiting() const;
  std::size_t scans() const { return scans_; }
  /// Scan in which `n` was answered.
  std::optional<std::size_t> answered_in(Nat n) const;

 private:
  struct Entry {
    Nat n;
    std::vector<Nat> needs;
    std::vector<std::size_t> deps;  // table indices of needs, once filed
    std::optional<WitnessStream> answer;
    std::size_t scan = 0;
  };

  TiStep step_;
  std::vector<Entry> table_;
  std::map<Nat, std::size_t> index_;
  std::vector<Nat> order_;
  std::size_t scans_ = 0;
};

/// The witness for `A n. P(n)`: instance requests arrive in order 0, 1, 2,
/// ..., one per pull, with a scan after each; answered instances are
/// emitted round-robin with their numeral prepended to the input.
WitnessStream ti_realizer(TiStep step);

}  // namespace ctruth
