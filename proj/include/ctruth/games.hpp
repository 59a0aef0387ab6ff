#pragma once

// Desk-scale versions of the adversarial constructions: the tree game for
// implications whose antecedent supplies paths, the gated answerer against
// transfinite induction, the path-guessing encoder, and the interaction model
// of narrow constructive truth with numbered, copyable instances.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ctruth/checker.hpp"
#include "ctruth/vm.hpp"
#include "ctruth/witness.hpp"

namespace ctruth {

using Seq = std::vector<Nat>;

/// `a` and `b` are compatible when one extends the other.
bool compatible(const Seq& a, const Seq& b);

// ---------------------------------------------------------------------------
// Trees

/// A finite prefix-closed set of sequences, optionally with a designated
/// infinite branch `stem` followed by `cycle` repeated forever. The branch's
/// prefixes count as nodes.
struct TreePresentation {
  std::set<Seq> nodes;
  std::optional<Seq> stem;
  Seq cycle;

  bool has_branch() const { return stem.has_value(); }
  /// Entry k of the designated branch.
  Nat branch_at(std::size_t k) const;
  Seq branch_prefix(std::size_t k) const;
  bool on_branch(const Seq& s) const;
  bool contains(const Seq& s) const;
  std::size_t height() const;

  /// Throws std::invalid_argument unless prefix-closed, nonempty, with a
  /// nonempty cycle when a branch is given.
  void validate() const;
};

/// Text form (.tree): one node per line as space-separated entries, `.` for
/// the root; optionally `branch <stem...> | <cycle...>`. `#` starts a comment.
TreePresentation parse_tree(const std::string& text);
std::string to_string(const TreePresentation& t);

/// One representative per isomorphism class of rooted trees with at most
/// `max_nodes` nodes; children of a node are 0, 1, 2, ... in canonical
/// order.
void for_each_tree(std::size_t max_nodes, const std::function<void(const TreePresentation&)>& fn);
std::vector<TreePresentation> all_trees(std::size_t max_nodes);

/// Every node has `branching` children down to `depth`, each child kept with
/// probability 1/2 (at least one child kept at the root).
TreePresentation random_tree(std::size_t depth, std::size_t branching, std::uint64_t seed);

/// `t` with the branch `leaf, 0, 0, ...` grafted at its first deepest leaf.
TreePresentation graft_branch(TreePresentation t);

/// Sequences as numerals. Nodes of the finite part get 0, 1, ... in sorted
/// order; anything else is numbered on first use.
class SeqCodec {
 public:
  explicit SeqCodec(const TreePresentation& t);
  Nat code(const Seq& s);
  const Seq* decode(Nat c) const;
  std::size_t size() const { return seqs_.size(); }

 private:
  std::map<Seq, Nat> codes_;
  std::vector<Seq> seqs_;
};

// ---------------------------------------------------------------------------
// Traces

struct TraceEvent {
  std::size_t round = 0;
  std::string text;  // script-format event, e.g. `FEED 0 (1,0:3)`
};

struct GameTrace {
  std::vector<TraceEvent> events;

  void add(std::size_t round, std::string text) { events.push_back({round, std::move(text)}); }
  /// One `<round> <event>` line per event.
  std::string text() const;
  /// FNV-1a of text().
  std::uint64_t hash() const;
};

// ---------------------------------------------------------------------------
// Paths with incompatible nodes
//
//   antecedent  A n. E s. (Node(s, n) /\ A i. (X(s, i) \/ ~X(s, i)))
//   consequent  E s. E t. (Inc(s, t) /\ (A i. (X(s, i) \/ ~X(s, i)) /\ A i. (X(t, i) \/ ~X(t, i))))
//
// Node(s, n): s codes a node of length n; Inc(s, t): s and t are
// incompatible; X is a seeded coin the adversary may fix later for
// sequences it never revealed.

class CoinTable {
 public:
  explicit CoinTable(std::uint64_t seed) : seed_(seed) {}
  bool value(Nat s, Nat i) const;
  /// Fixes X(s, i) unless it was already read or fixed.
  bool fix(Nat s, Nat i, bool v);

 private:
  std::uint64_t seed_;
  mutable std::map<std::pair<Nat, Nat>, bool> fixed_;
};

struct Theorem1Setup {
  TreePresentation tree;
  std::shared_ptr<SeqCodec> codec;
  std::shared_ptr<CoinTable> coins;
  FormulaPtr antecedent;
  FormulaPtr consequent;
  FormulaPtr implication;
  Interpretation interp;
};

Theorem1Setup theorem1_setup(const TreePresentation& t, std::uint64_t seed);

// Item layouts.
Item node_item(Nat n, Nat s);
Item coin_item(Nat n, Nat s, Nat i, bool x);
Item commit_item(Nat s, Nat t);
Item claim_item(int side, Nat s, Nat t, Nat i, bool x);

/// A consequent producer: sees the antecedent items delivered so far and
/// returns its next item.
class Theorem1Strategy {
 public:
  virtual ~Theorem1Strategy() = default;
  virtual Item respond(std::span<const Item> antecedent) = 0;
};

using Theorem1Factory = std::function<std::unique_ptr<Theorem1Strategy>(const Theorem1Setup&)>;

struct NamedStrategy {
  std::string name;
  Theorem1Factory make;
};

/// Waits until two delivered nodes are incompatible, then copies their coin
/// witnesses into the consequent.
std::unique_ptr<Theorem1Strategy> theorem1_copycat(const Theorem1Setup& s);

/// The copycat as a witness for the implication.
WitnessStream theorem1_defender(const Theorem1Setup& s);

/// copycat, silent, eager, sibling, same_branch, late.
const std::vector<NamedStrategy>& theorem1_library();

/// Every node of a branch-free tree in breadth-first order, instance n
/// carrying the n-th node, each followed by its coins for i < coins.
Segment theorem1_supply(const Theorem1Setup& s, std::size_t coins);

/// check_witness on the implication for the defender, probed with the
/// supply. The numeral bound is raised to the node count, so the supply of a
/// path is seen to run out of nodes.
Verdict check_theorem1_defender(const Theorem1Setup& s, const Budget& b);

/// Antecedent script along the designated branch: instance n carries the
/// branch prefix of length n, and coins are dovetailed. Once the defender
/// names s, t, coins of whichever lies off the branch are withheld and fixed
/// against the defender's claims.
class Theorem1Adversary {
 public:
  explicit Theorem1Adversary(Theorem1Setup& s);
  Item next(std::span<const Item> defender, GameTrace* trace = nullptr);
  const std::set<Nat>& withheld() const { return withheld_; }

 private:
  Theorem1Setup& s_;
  std::size_t round_ = 0;
  std::size_t seen_ = 0;
  std::set<Nat> withheld_;
};

struct Theorem1Result {
  GameTrace trace;
  Segment antecedent;
  Segment consequent;
  Verdict verdict;  // consequent, checked with the final coins
  std::set<Nat> withheld;
};

/// Plays `strategy` for `horizon` rounds: the supply of a branch-free tree,
/// or the adversary when `s.tree` has a branch.
Theorem1Result play_theorem1(Theorem1Setup& s, Theorem1Strategy& strategy, std::size_t horizon, const Budget& b);

// ---------------------------------------------------------------------------
// Transfinite induction over propositional atoms r_0, r_1, ...

struct Literal {
  Nat atom = 0;
  bool positive = true;
  bool operator==(const Literal&) const = default;
};

std::string to_string(const Literal& l);

/// What the answerer asserted: the hypotheses imply the conclusion.
struct Clause {
  std::vector<Literal> hyps;
  Literal concl;
};

/// Premises imply the conclusion.
struct Combination {
  std::vector<Clause> premises;
  Literal conclusion;
};

std::string to_string(const Combination& c);

/// Truth table over the atoms mentioned. Throws std::invalid_argument beyond
/// 24 atoms.
bool tautology(const Combination& c);

/// A finite strict partial order on {0..size-1}: below[a] lists every b < a.
struct FiniteOrder {
  std::size_t size = 0;
  std::vector<std::vector<Nat>> below;

  static FiniteOrder usual(std::size_t size);
  static FiniteOrder empty(std::size_t size);
  bool less(Nat a, Nat b) const;
};

/// The antecedent of TI(R \/ ~R, <): asked for r_m with literals for some
/// atoms supplied, it answers with a literal for r_m or refuses.
class TiAnswerer {
 public:
  virtual ~TiAnswerer() = default;
  /// Atoms whose literals are required before r_m is given.
  virtual std::vector<Nat> needs(Nat m) const = 0;
  virtual std::optional<Literal> answer(Nat m, const std::vector<Literal>& supplied) = 0;
  const std::vector<Clause>& given() const { return given_; }

 protected:
  std::vector<Clause> given_;
};

/// Answers r_m once correct literals for every atom below m are supplied.
std::unique_ptr<TiAnswerer> honest_answerer(FiniteOrder order, std::vector<bool> truth);

/// `chain` descends: chain[0] > chain[1] > ... It needs the correct literal
/// for chain[i+1] before giving chain[i], and for the last element a literal
/// for an atom beyond the order, standing for the rest of an infinite chain.
/// Every other atom is answered outright.
std::unique_ptr<TiAnswerer> prop3_adversary(std::vector<Nat> chain, FiniteOrder order, std::vector<bool> truth);

struct TiOutput {
  Nat atom;
  Literal value;
  std::size_t premises;  // answerer clauses given so far
};

/// A witness for A m. (R(m) \/ ~R(m)) built from the answerer.
struct TiDefender {
  std::string name;
  std::function<std::vector<TiOutput>(TiAnswerer&, std::size_t atoms, std::size_t rounds, GameTrace&)> run;
};

/// scheduler (the request-table realizer), guess_pos, guess_neg, both
/// (tries both literals), deep_guess (guesses deepest first).
const std::vector<TiDefender>& ti_library();

/// The combination behind output `o`.
Combination combination(const TiAnswerer& a, const TiOutput& o);

// ---------------------------------------------------------------------------
// Path guessing: a witness for (A x. E y. 0=0) -> (0=0 \/ 0=0)

FormulaPtr pi11_formula();

/// Reads the antecedent's answers y_0, y_1, ... as a path; once a prefix
/// leaves the tree it answers the consequent. The delay between the failure
/// and the answer encodes bits of to_string(t): a failure at the first
/// antecedent answer preceded by j whitespace items is answered after
/// 1 + bit j items (2 after the last bit).
WitnessStream pi11_encode(const TreePresentation& t);

/// Entry that no desk-scale tree uses.
constexpr Nat kOffTree = Nat(1) << 40;

/// Recovers to_string(t) from the encoder's delays.
std::string pi11_decode(const WitnessStream& encoder, std::size_t max_bits = 1 << 16);

/// Antecedent witness following the designated branch.
WitnessStream branch_follower(const TreePresentation& t);

// ---------------------------------------------------------------------------
// Narrow constructive truth

struct NarrowEvent {
  enum class Kind { Spawn, Copy, Feed, Pull };
  Kind kind = Kind::Pull;
  std::size_t instance = 0;
  std::size_t from = 0;  // Copy
  std::size_t at = 0;    // Copy: pulls of `from`
  Item item;             // Feed
};

/// Line format: `SPAWN i | COPY i FROM j AT k | FEED i <item> | PULL i`;
/// blank lines and `#` comments are skipped. Throws std::invalid_argument.
std::vector<NarrowEvent> parse_script(const std::string& text);
std::string to_string(const NarrowEvent& e);

struct InstanceVerdict {
  enum class Kind { Met, Violated, Undetermined };
  Kind kind = Kind::Met;
  std::string evidence;
};

std::string to_string(const InstanceVerdict& v);

struct NarrowOptions {
  bool allow_copy = true;
  std::size_t step_quota = 1000;
  Budget budget;
  Interpretation interp;
};

struct NarrowInstance {
  std::size_t id = 0;
  std::optional<std::pair<std::size_t, std::size_t>> copied_from;  // (instance, pulls)
  Segment input;   // as consumed, whitespace included
  Segment output;
  std::vector<std::size_t> consumed;  // inputs consumed when each output was produced
};

struct NarrowResult {
  GameTrace trace;
  std::vector<NarrowInstance> instances;
  std::vector<InstanceVerdict> verdicts;
};

/// Runs the script for `horizon` events. For an implication every instance
/// gets its own antecedent feed; an instance is held to the consequent for
/// as long as its input is not refuted. For other formulas the instances
/// take no input. Throws VmError for an invalid strategy and
/// std::invalid_argument for horizon 0, an unknown instance, or a copy when
/// copying is disabled.
NarrowResult narrow_play(const FormulaPtr& f, const Program& strategy, const std::vector<NarrowEvent>& script,
                         std::size_t horizon, const NarrowOptions& opts = {});

/// Verdicts from transcripts alone.
InstanceVerdict judge_instance(const FormulaPtr& f, const NarrowInstance& inst, const NarrowOptions& opts);

/// `(A -> B) -> C` for a branch-free tree: A is the path antecedent above
/// (false, so it has no recursive witness), B is `0=0 \/ 0=0`, C is
/// `E s. Node(s, h)` for the height h. The strategy answers C with a deepest
/// node whatever instance of A -> B it faces.
struct NarrowFixture {
  Theorem1Setup setup;
  FormulaPtr formula;
  FormulaPtr c;
  Program strategy;
};

NarrowFixture distinguishing_fixture(const TreePresentation& t, std::uint64_t seed = 0);

}  // namespace ctruth
