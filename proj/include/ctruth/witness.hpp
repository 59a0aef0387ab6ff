#pragma once

// Witness streams: demand-driven sequences of input-output pairs and
// whitespace, their text format, semantic content and discipline checks.

#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctruth/formula.hpp"

namespace ctruth {

using BigNat = boost::multiprecision::cpp_int;

struct Item;
using Segment = std::vector<Item>;

/// One token of a pair. Numerals also serve as 0/1 selectors at `/\` and
/// `\/` positions; which reading applies is fixed by the formula's spine.
struct IOToken {
  enum class Kind { Numeral, Prefix };

  Kind kind = Kind::Numeral;
  BigNat value;
  std::shared_ptr<const Segment> segment;

  static IOToken numeral(const BigNat& v);
  static IOToken selector(int choice) { return numeral(choice); }
  static IOToken prefix(Segment items);

  bool is_numeral() const { return kind == Kind::Numeral; }
  bool is_prefix() const { return kind == Kind::Prefix; }
  /// The numeral as a machine word; throws ShapeError when it does not fit.
  Nat small() const;
};

struct IOPair {
  std::vector<IOToken> input;
  std::vector<IOToken> output;

  bool trivial() const { return input.empty() && output.empty(); }
};

struct Item {
  bool whitespace = true;
  IOPair pair;

  static Item space() { return {}; }
  static Item of(IOPair p) { return {false, std::move(p)}; }
};

bool operator==(const IOToken& a, const IOToken& b);
bool operator==(const IOPair& a, const IOPair& b);
bool operator==(const Item& a, const Item& b);

/// `a` equals `b`, or both are prefix tokens and `b`'s segment extends `a`'s.
bool token_extends(const IOToken& b, const IOToken& a);
bool segment_extends(std::span<const Item> longer, std::span<const Item> shorter);

// ---------------------------------------------------------------------------
// Text format: `(:) _ (0:0) (1:2)`; prefix tokens are quoted sub-streams.

class WitnessFormatError : public std::runtime_error {
 public:
  WitnessFormatError(std::size_t position, const std::string& message);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

std::string serialize(const IOToken& t);
std::string serialize(const IOPair& p);
std::string serialize(const Item& it);
std::string serialize(std::span<const Item> items);

Segment parse_items(const std::string& text);
IOPair parse_pair(const std::string& text);

// ---------------------------------------------------------------------------
// Streams

class WitnessStream;

/// Producer behind a stream. `next` is total: when nothing new is
/// determined it returns whitespace.
class Source {
 public:
  virtual ~Source() = default;
  virtual Item next() = 0;

  /// Structured access for witnesses that compute answers on demand rather
  /// than list them. `descend` gives the stream after `tok` fills the head
  /// slot of `f`; `apply` gives the consequent stream of the implication `f`
  /// fed with antecedent `x`. Both return nullptr when unsupported.
  virtual std::shared_ptr<Source> descend(const FormulaPtr&, const IOToken&) { return nullptr; }
  virtual std::shared_ptr<Source> apply(const FormulaPtr&, const WitnessStream&) { return nullptr; }

  /// For streams produced by applying an implication witness: how many
  /// antecedent items had been fed when item `index` was produced.
  virtual std::optional<std::size_t> horizon(std::size_t) const { return std::nullopt; }
};

/// Handle onto a deterministic stream. Handles share the pulled prefix, so
/// copying a handle is copying an instance at its recorded prefix.
class WitnessStream {
 public:
  WitnessStream();
  explicit WitnessStream(std::shared_ptr<Source> source);

  static WitnessStream literal(Segment items);
  static WitnessStream parse(const std::string& text) { return literal(parse_items(text)); }
  static WitnessStream generate(std::function<Item()> next);
  static WitnessStream empty() { return literal({}); }

  /// First k items; pulls the source as needed.
  std::span<const Item> pull(std::size_t k) const;
  const Item& at(std::size_t i) const;
  std::size_t pulled() const;

  Source& source() const { return *state_->source; }
  std::shared_ptr<Source> source_ptr() const { return state_->source; }

  /// Literal streams report their length; generated streams do not.
  std::optional<std::size_t> known_length() const { return state_->known_length; }

 private:
  struct State {
    std::shared_ptr<Source> source;
    std::vector<Item> cache;
    std::optional<std::size_t> known_length;
  };
  std::shared_ptr<State> state_;
};

// ---------------------------------------------------------------------------
// Semantics

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The assertion that `p` is correct for the closed formula `f`: input
/// implies output. Prefix tokens contribute the antecedent together with the
/// contents of the segment's pairs.
FormulaPtr semantic_content(const FormulaPtr& f, const IOPair& p);

/// Walks `p` along `f`'s spine without building content; throws ShapeError.
void check_shape(const FormulaPtr& f, const IOPair& p);

/// Where a walk along a formula's spine stopped.
enum class SlotKind { Input, Output, Terminal };

SlotKind slot_kind(const Formula& f);

/// The formula governing the tokens after `tok` at `f`'s head slot; for an
/// implication this is the consequent. Throws ShapeError on a kind mismatch.
FormulaPtr descend(const FormulaPtr& f, const IOToken& tok);

struct SpineWalk {
  FormulaPtr at;            // formula at the stop
  std::size_t inputs = 0;   // tokens consumed
  std::size_t outputs = 0;
  SlotKind stop = SlotKind::Terminal;
  bool box_answered = false;  // a `box` slot received its code
};

/// Consumes `input`/`output` along the spine until the next needed token is
/// missing. Leftover tokens are left unconsumed (callers decide).
SpineWalk walk_spine(const FormulaPtr& f, std::span<const IOToken> input, std::span<const IOToken> output);

/// True when `later`'s input extends `earlier`'s and their outputs disagree.
bool pairs_conflict(const IOPair& earlier, const IOPair& later);

struct MonotoneVerdict {
  bool ok = true;
  IOPair first;
  IOPair second;
};

MonotoneVerdict check_monotone(const WitnessStream& w, std::size_t budget);

/// Response tree truncated at `depth` input tokens. Numerals range over
/// 0..numeral_limit-1; prefix inputs are those seen in the stream.
struct ResponseNode {
  std::vector<IOToken> input;
  std::optional<std::vector<IOToken>> output;  // nullopt: pending
  std::vector<ResponseNode> children;
};

ResponseNode response_tree(const WitnessStream& w, const FormulaPtr& f, std::size_t depth, Nat numeral_limit,
                           std::size_t pull_limit = 1000);

/// Pairs along every root-to-node path of the tree, one stream per path.
std::vector<Segment> response_paths(const ResponseNode& root);

}  // namespace ctruth
