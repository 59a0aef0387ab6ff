#pragma once

// Transformations on witnesses that follow the connectives: projection of
// universal witnesses, application of implication witnesses, decomposition
// and composition, box decoding and the strict normal form. Also the bridge
// between machine values and streams.

#include <functional>
#include <optional>

#include "ctruth/vm.hpp"
#include "ctruth/witness.hpp"

namespace ctruth {

/// The stream after `tok` fills the head slot of `f`: pairs whose leading
/// input (input slots) or first output (output slots) is `tok`, with it
/// removed. Other items become whitespace, so positions are preserved.
/// Witnesses that compute answers on demand are asked directly.
WitnessStream descend(const WitnessStream& w, const FormulaPtr& f, const IOToken& tok);

/// `f` is `A x. B`; the witness for B(n).
WitnessStream project_forall(const WitnessStream& w, const FormulaPtr& f, Nat n);

/// `f` is `A -> B`; the witness for B obtained by feeding `x` to `w`. Never
/// blocks: whitespace is produced while nothing new is determined. For each
/// produced item, `result.source().horizon(i)` is the number of items of `x`
/// that had been fed.
WitnessStream apply_implication(const WitnessStream& w, const FormulaPtr& f, const WitnessStream& x);

struct Parts {
  std::optional<IOToken> head;                  // \/ selector, E numeral, box code
  WitnessStream first;                          // /\ left, \/ and E chosen part
  WitnessStream second;                         // /\ right
  std::function<WitnessStream(Nat)> instances;  // A
};

class Pending : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Splits a witness for a formula headed by /\, \/, E or box. Throws Pending
/// when the head token does not appear within `pull_limit` items.
Parts decompose(const WitnessStream& w, const FormulaPtr& f, std::size_t pull_limit);

/// Inverse of decompose up to whitespace; A merges the instance streams
/// round-robin, admitting one new instance per round.
WitnessStream compose(const Parts& parts, const FormulaPtr& f);

/// Reads the code a `box A` witness outputs and decodes it.
Program box_decode(const WitnessStream& w, const FormulaPtr& f, std::size_t pull_limit);

/// Answers of `w` in canonical input order (stages by largest numeral,
/// lexicographic within a stage), without whitespace, up to the first input
/// not answered within `budget` pulled items. At most `budget` items, and no
/// stage beyond the largest numeral input seen. `f` must be
/// implication-free.
WitnessStream normalize_strict(const WitnessStream& w, const FormulaPtr& f, std::size_t budget);

// ---------------------------------------------------------------------------
// Machine values as witnesses

/// Lists the pairs of a functional witness. Input paths are visited in
/// stages; a path whose computation runs out of steps or waits for input is
/// retried in later rounds with a doubled step quota, up to `step_cap`
/// (0: 1024 times the quota).
WitnessStream serialize_value(const FormulaPtr& f, const Value& v, std::size_t step_quota, std::size_t step_cap = 0);

/// The stream of a program: witness programs are serialized against `f`.
/// Stream programs run `step_quota` steps per item.
WitnessStream run_program(const Program& p, const FormulaPtr& f, std::size_t step_quota, std::size_t step_cap = 0);

/// A witness stream read as a machine value. Looking inside the value pulls
/// the stream and throws Blocked when the needed answer has not appeared.
Value reify(const FormulaPtr& f, const WitnessStream& x);

}  // namespace ctruth
