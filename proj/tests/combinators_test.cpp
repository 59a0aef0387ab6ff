#include <gtest/gtest.h>

#include "ctruth/combinators.hpp"
#include "support/witness_oracle.hpp"

using namespace ctruth;
using ctruth::testing::oracle_witness;
using ctruth::testing::TrueFormulaGen;

namespace {

const char* kSample = "(:) (0:0) (1:2) (2:4)";
const char* kDoubling = "(witness (lambda x (pair (* 2 x) 0)))";
const char* kSuccessor = "(witness (lambda x (pair (+ x 1) 0)))";

std::vector<IOPair> pairs_of(const WitnessStream& w, std::size_t k) {
  std::vector<IOPair> out;
  for (const auto& it : w.pull(k))
    if (!it.whitespace) out.push_back(it.pair);
  return out;
}

bool contains(const WitnessStream& w, std::size_t k, const std::string& pair) {
  IOPair want = parse_pair(pair);
  for (const auto& p : pairs_of(w, k))
    if (p == want) return true;
  return false;
}

std::string strict(const WitnessStream& w, const FormulaPtr& f, std::size_t budget = 20000) {
  WitnessStream n = normalize_strict(w, f, budget);
  return serialize(n.pull(*n.known_length()));
}

std::string strict(const Segment& items, const FormulaPtr& f) { return strict(WitnessStream::literal(items), f); }

}  // namespace

TEST(Project, SampleWitness) {
  auto f = parse_formula("A x. E y. y=2*x");
  WitnessStream w = WitnessStream::parse(kSample);
  WitnessStream p = project_forall(w, f, 1);
  EXPECT_EQ(serialize(p.pull(4)), "_ _ (:2) _");
  EXPECT_EQ(serialize(project_forall(w, f, 7).pull(6)), "_ _ _ _ _ _");
  EXPECT_THROW(project_forall(w, parse_formula("E y. y=0"), 0), ShapeError);
}

TEST(Project, MatchesOracleForInstances) {
  TrueFormulaGen gen(11);
  int checked = 0;
  while (checked < 50) {
    auto f = gen.formula(3);
    if (f->kind != FormulaKind::Forall) continue;
    ++checked;
    Segment w = oracle_witness(f, 3, gen.rng());
    for (Nat n = 0; n <= 3; ++n) {
      auto inst = ctruth::descend(f, IOToken::numeral(n));
      Segment expected = oracle_witness(inst, 3, gen.rng());
      EXPECT_EQ(strict(project_forall(WitnessStream::literal(w), f, n), inst), strict(expected, inst)) << to_string(f);
    }
  }
}

TEST(Apply, IdentityTransformer) {
  auto f = parse_formula("(A x. E y. y=x+1) -> A x. E y. y=x+1");
  WitnessStream id = run_program(parse_program("(witness (lambda w w))"), f, 1000);
  WitnessStream x = run_program(parse_program(kSuccessor), f->left, 1000);
  WitnessStream out = apply_implication(id, f, x);
  auto pairs = pairs_of(out, 400);
  for (Nat n = 0; n <= 8; ++n) EXPECT_TRUE(contains(out, 400, "(" + std::to_string(n) + ":" + std::to_string(n + 1) + ")")) << n;
  for (const auto& p : pairs)
    if (p.input.size() == 1) EXPECT_EQ(p.output.at(0).value, p.input[0].value + 1);
  EXPECT_TRUE(check_monotone(out, 400).ok);
}

TEST(Apply, SuccessorPairFixture) {
  auto f = parse_formula("(A x. E y. y=x+1) -> A x. E y. y=x+2");
  WitnessStream w = WitnessStream::parse("(:) _ (\"(2:3) (3:4)\",2:4)");
  WitnessStream x = WitnessStream::parse("(2:3) (3:4) (0:1) (1:2)");
  WitnessStream out = apply_implication(w, f, x);
  auto items = out.pull(3);
  EXPECT_EQ(serialize(items), "(:) _ (2:4)");
  EXPECT_EQ(out.source().horizon(2), 2u);

  WitnessStream other = WitnessStream::parse("(0:1) (1:2) (2:3) (3:4)");
  EXPECT_FALSE(contains(apply_implication(w, f, other), 10, "(2:4)"));
}

TEST(Apply, TotalOnUselessInput) {
  auto f = parse_formula("(A x. E y. y=x+1) -> A x. E y. y=x+1");
  WitnessStream id = run_program(parse_program("(witness (lambda w w))"), f, 1000);
  WitnessStream out = apply_implication(id, f, WitnessStream::empty());
  auto pairs = pairs_of(out, 300);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_TRUE(pairs[0].trivial());

  WitnessStream lit = WitnessStream::parse("(\"(0:1)\",0:1)");
  EXPECT_EQ(serialize(apply_implication(lit, f, WitnessStream::empty()).pull(5)), "_ _ _ _ _");
}

TEST(Apply, FunctionOfAntecedentAnswers) {
  // From a witness for "every x has a successor" build doubled successors.
  auto f = parse_formula("(A x. E y. y=x+1) -> A x. E z. z=2*x+2");
  WitnessStream w = run_program(parse_program("(witness (lambda s (lambda x (pair (* 2 (fst (s x))) 0))))"), f, 1000);
  WitnessStream x = run_program(parse_program(kSuccessor), f->left, 1000);
  WitnessStream out = apply_implication(w, f, x);
  for (Nat n = 0; n <= 5; ++n) EXPECT_TRUE(contains(out, 600, "(" + std::to_string(n) + ":" + std::to_string(2 * n + 2) + ")")) << n;
}

TEST(Apply, Continuity) {
  auto f = parse_formula("(A x. E y. y=x+1) -> A x. E z. z=2*x+2");
  Program prog = parse_program("(witness (lambda s (lambda x (pair (* 2 (fst (s x))) 0))))");
  std::mt19937 rng(5);
  Segment x = oracle_witness(f->left, 6, rng);
  WitnessStream out = apply_implication(run_program(prog, f, 1000), f, WitnessStream::literal(x));
  const std::size_t k = 150;
  std::string full = serialize(out.pull(k));
  std::size_t used = 0;
  for (std::size_t i = 0; i < k; ++i) used = std::max(used, *out.source().horizon(i));
  ASSERT_LE(used, k);
  Segment cut(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(std::min(used, x.size())));
  WitnessStream again = apply_implication(run_program(prog, f, 1000), f, WitnessStream::literal(cut));
  EXPECT_EQ(serialize(again.pull(k)), full);
}

TEST(Decompose, SuccessorPair) {
  auto f = parse_formula("E y. (25=2*y \\/ 25=2*y+1)");
  Parts parts = decompose(WitnessStream::parse("_ (:12,1)"), f, 10);
  ASSERT_TRUE(parts.head);
  EXPECT_EQ(serialize(*parts.head), "12");
  auto g = ctruth::descend(f, *parts.head);
  Parts inner = decompose(parts.first, g, 10);
  EXPECT_EQ(serialize(*inner.head), "1");
  auto leaf = pairs_of(inner.first, 5);
  ASSERT_EQ(leaf.size(), 1u);
  EXPECT_TRUE(leaf[0].trivial());
}

TEST(Decompose, Conjunction) {
  auto f = parse_formula("0=0 /\\ 1=1");
  Parts parts = decompose(WitnessStream::parse("(:) (0:) (1:)"), f, 10);
  EXPECT_EQ(serialize(parts.first.pull(3)), "_ (:) _");
  EXPECT_EQ(serialize(parts.second.pull(3)), "_ _ (:)");
}

TEST(Decompose, PendingAndErrors) {
  auto f = parse_formula("E y. y=3");
  EXPECT_THROW(decompose(WitnessStream::parse("_ _ _"), f, 3), Pending);
  EXPECT_THROW(decompose(WitnessStream::parse("(:)"), parse_formula("0=0"), 3), ShapeError);
}

TEST(Compose, SuccessorPair) {
  auto f = parse_formula("E y. (25=2*y \\/ 25=2*y+1)");
  auto g = ctruth::descend(f, IOToken::numeral(12));
  Parts inner;
  inner.head = IOToken::selector(1);
  inner.first = WitnessStream::parse("(:)");
  Parts outer;
  outer.head = IOToken::numeral(12);
  outer.first = compose(inner, g);
  WitnessStream w = compose(outer, f);
  EXPECT_TRUE(contains(w, 6, "(:12,1)"));
  EXPECT_EQ(strict(w, f), "(:12,1)");
  EXPECT_EQ(serialize(compose(Parts{}, parse_formula("0=0")).pull(1)), "(:)");
}

TEST(Compose, DecomposeRoundTrip) {
  TrueFormulaGen gen(3);
  int checked = 0;
  while (checked < 50) {
    auto f = gen.formula(3);
    if (slot_kind(*f) == SlotKind::Terminal) continue;
    ++checked;
    Segment items = oracle_witness(f, 3, gen.rng());
    WitnessStream w = WitnessStream::literal(items);
    Parts parts = decompose(w, f, items.size() + 1);
    EXPECT_EQ(strict(compose(parts, f), f, 40000), strict(items, f)) << to_string(f);
  }
}

TEST(Compose, PartsRoundTrip) {
  TrueFormulaGen gen(8);
  int checked = 0;
  while (checked < 50) {
    auto f = gen.formula(2);
    if (f->kind == FormulaKind::Forall || slot_kind(*f) == SlotKind::Terminal) continue;
    ++checked;
    Parts parts = decompose(WitnessStream::literal(oracle_witness(f, 2, gen.rng())), f, 1000);
    Parts again = decompose(compose(parts, f), f, 1000);
    EXPECT_EQ(parts.head.has_value(), again.head.has_value());
    if (parts.head) EXPECT_EQ(*parts.head, *again.head);
    if (f->kind == FormulaKind::And || f->kind == FormulaKind::Exists || f->kind == FormulaKind::Or) {
      auto g = f->kind == FormulaKind::And ? f->left : ctruth::descend(f, *parts.head);
      EXPECT_EQ(strict(again.first, g), strict(parts.first, g)) << to_string(f);
    }
    if (f->kind == FormulaKind::And) EXPECT_EQ(strict(again.second, f->right), strict(parts.second, f->right));
  }
}

TEST(Box, DecodeDoublingProgram) {
  auto f = parse_formula("box (A x. E y. y=2*x)");
  Program doubling = parse_program(kDoubling);
  Parts parts;
  parts.head = IOToken::numeral(godel_encode(doubling));
  WitnessStream w = compose(parts, f);
  Program p = box_decode(w, f, 5);
  EXPECT_EQ(to_string(p), kDoubling);
  WitnessStream run = run_program(p, f->left, 1000);
  EXPECT_EQ(serialize(normalize_strict(run, f->left, 20).pull(4)), kSample);
}

TEST(Box, TrivialAndBadCodes) {
  auto f = parse_formula("box 0=0");
  Parts parts;
  parts.head = IOToken::numeral(godel_encode(parse_program("(witness 0)")));
  Program p = box_decode(compose(parts, f), f, 5);
  EXPECT_EQ(serialize(run_program(p, f->left, 100).pull(1)), "(:)");
  EXPECT_THROW(box_decode(WitnessStream::parse("(:77)"), f, 5), VmError);
  EXPECT_THROW(box_decode(WitnessStream::parse("_"), f, 5), Pending);
}

TEST(Box, CodesRoundTrip) {
  for (const char* text : {kDoubling, kSuccessor, "(witness (lambda w w))", "(witness (code (witness 0)))",
                           "(stream (emit () (1)))", "(witness ((rec f n (if (= n 0) 0 (f (- n 1)))) 3))"}) {
    Program p = parse_program(text);
    EXPECT_EQ(to_string(godel_decode(godel_encode(p))), text);
  }
}

TEST(Normalize, Reorders) {
  auto f = parse_formula("A x. E y. y=2*x");
  EXPECT_EQ(strict(WitnessStream::parse("(:) _ (1:2) _ (0:0)"), f), "(:) (0:0) (1:2)");
  EXPECT_EQ(strict(WitnessStream::parse("( :) _ (1:2) _ (0:0)"), f), "(:) (0:0) (1:2)");
  EXPECT_EQ(strict(WitnessStream::parse("(2:4) (0:0)"), f), "(:) (0:0)");
  EXPECT_EQ(strict(WitnessStream::parse(kSample), f), kSample);
  EXPECT_THROW(normalize_strict(WitnessStream::parse("(:)"), parse_formula("0=0 -> 0=0"), 5), ShapeError);
}

TEST(Normalize, SampleProgram) {
  auto f = parse_formula("A x. E y. y=2*x");
  WitnessStream w = run_program(parse_program(kDoubling), f, 1000);
  EXPECT_EQ(serialize(normalize_strict(w, f, 30).pull(4)), kSample);
}

TEST(Normalize, FixedPointAndOrder) {
  TrueFormulaGen gen(21);
  for (int i = 0; i < 50; ++i) {
    auto f = gen.formula(3);
    Segment items = oracle_witness(f, 2, gen.rng());
    std::string once = strict(items, f);
    EXPECT_EQ(strict(WitnessStream::parse(once), f), once) << to_string(f);
    EXPECT_EQ(once.find('_'), std::string::npos);
    EXPECT_TRUE(check_monotone(WitnessStream::parse(once), 1000).ok);
  }
}
