#include <gtest/gtest.h>

#include <random>

#include "ctruth/eval.hpp"
#include "ctruth/witness.hpp"
#include "support/generators.hpp"

using namespace ctruth;

namespace {

const char* kSample = "(:) (0:0) (1:2) (2:4)";

const Interpretation& interp() {
  static Interpretation i = Interpretation().define("P", [](std::span<const Nat> a) { return a[0] % 2 == 0; });
  return i;
}

// Replays a pair directly against the formula: the pair is correct when
// every input choice that was made leads to a true output claim.
bool replay(const FormulaPtr& f, std::span<const IOToken> in, std::span<const IOToken> out, Nat bound) {
  switch (f->kind) {
    case FormulaKind::Forall:
      if (in.empty()) return true;
      return replay(substitute_term(f->left, f->name, Term::constant(in[0].small())), in.subspan(1), out, bound);
    case FormulaKind::And:
      if (in.empty()) return true;
      return replay(in[0].value == 0 ? f->left : f->right, in.subspan(1), out, bound);
    case FormulaKind::Exists:
      if (out.empty()) return evaluate_closed(f, bound, interp());
      return replay(substitute_term(f->left, f->name, Term::constant(out[0].small())), in, out.subspan(1), bound);
    case FormulaKind::Or:
      if (out.empty()) return evaluate_closed(f, bound, interp());
      return replay(out[0].value == 0 ? f->left : f->right, in, out.subspan(1), bound);
    default:
      return evaluate_closed(f, bound, interp());
  }
}

// Random pair that follows f's spine for a random number of steps.
IOPair random_pair(const FormulaPtr& f, std::mt19937& rng) {
  IOPair p;
  FormulaPtr at = f;
  while (!at->is_terminal() && rng() % 5 != 0) {
    IOToken t;
    switch (at->kind) {
      case FormulaKind::Forall:
      case FormulaKind::Exists:
        t = IOToken::numeral(rng() % 4);
        break;
      default:
        t = IOToken::selector(static_cast<int>(rng() % 2));
    }
    bool input = slot_kind(*at) == SlotKind::Input;
    (input ? p.input : p.output).push_back(t);
    at = descend(at, t);
  }
  return p;
}

}  // namespace

TEST(Format, RoundTripSample) {
  auto items = parse_items(kSample);
  ASSERT_EQ(items.size(), 4u);
  EXPECT_EQ(serialize(items), kSample);
  EXPECT_TRUE(items[0].pair.trivial());
}

TEST(Format, MultiOutputPair) {
  auto p = parse_pair("(25: 12, 1)");
  ASSERT_EQ(p.input.size(), 1u);
  ASSERT_EQ(p.output.size(), 2u);
  EXPECT_EQ(p.output[0].value, 12);
  EXPECT_EQ(serialize(p), "(25:12,1)");
}

TEST(Format, WhitespaceAndNestedPrefixes) {
  std::string text = "_ (:) _ _ (\"(2:3) _ (3:4)\":4) (\"(\\\"(:)\\\":)\",0:1)";
  auto items = parse_items(text);
  ASSERT_EQ(items.size(), 6u);
  EXPECT_TRUE(items[0].whitespace);
  EXPECT_TRUE(items[4].pair.input[0].is_prefix());
  EXPECT_EQ(items[4].pair.input[0].segment->size(), 3u);
  auto nested = items[5].pair.input[0].segment;
  ASSERT_EQ(nested->size(), 1u);
  EXPECT_TRUE((*nested)[0].pair.input[0].is_prefix());
  EXPECT_EQ(serialize(items), text);
  EXPECT_EQ(parse_items(serialize(items)), items);
}

TEST(Format, RandomRoundTrip) {
  std::mt19937 rng(5);
  std::function<Segment(int)> gen = [&](int depth) {
    Segment s;
    for (unsigned n = rng() % 5; n > 0; --n) {
      if (rng() % 3 == 0) {
        s.push_back(Item::space());
        continue;
      }
      IOPair p;
      for (unsigned k = rng() % 3; k > 0; --k) {
        if (depth > 0 && rng() % 3 == 0)
          p.input.push_back(IOToken::prefix(gen(depth - 1)));
        else
          p.input.push_back(IOToken::numeral(rng() % 100));
      }
      for (unsigned k = rng() % 3; k > 0; --k) p.output.push_back(IOToken::numeral(rng() % 100));
      s.push_back(Item::of(p));
    }
    return s;
  };
  for (int i = 0; i < 300; ++i) {
    auto s = gen(3);
    EXPECT_EQ(parse_items(serialize(s)), s);
  }
}

TEST(Format, Errors) {
  EXPECT_THROW(parse_items("(0:0"), WitnessFormatError);
  EXPECT_THROW(parse_items("(0;0)"), WitnessFormatError);
  EXPECT_THROW(parse_items("(\"(0:0):)"), WitnessFormatError);
  EXPECT_THROW(parse_items("(0:0)(1:2)"), WitnessFormatError);
  EXPECT_THROW(parse_items("x"), WitnessFormatError);
}

TEST(Content, ImplicationExample) {
  auto f = parse_formula("A x. E y. y=x+1 -> A x. E y. y=x+2");
  auto p = parse_pair("(\"(2:3) (3:4)\",2:4)");
  auto c = semantic_content(f, p);
  EXPECT_TRUE(same_formula(c, parse_formula("A x E y y=x+1 /\\ 3=2+1 /\\ 4=3+1 -> 4=2+2")));
  EXPECT_EQ(to_string(c), "A x. E y. y=x+1 /\\ 3=2+1 /\\ 4=3+1 -> 4=2+2");
}

TEST(Content, TrivialPairIsVacuous) {
  auto f = parse_formula("A x. E y. y=2*x");
  EXPECT_TRUE(same_formula(semantic_content(f, parse_pair("(:)")), Formula::verum()));
}

TEST(Content, DisjunctionPair) {
  auto f = parse_formula("A x. E y. (x=2*y \\/ x=2*y+1)");
  auto c = semantic_content(f, parse_pair("(25: 12, 1)"));
  EXPECT_EQ(to_string(c), "25=2*12+1");
  EXPECT_TRUE(evaluate_closed(c, 0));
}

TEST(Content, MissingOutputAssertsRemainder) {
  auto f = parse_formula("A x. E y. y=2*x");
  EXPECT_EQ(to_string(semantic_content(f, parse_pair("(3:)"))), "E y. y=2*3");
}

TEST(Content, ShapeErrors) {
  auto f = parse_formula("A x. E y. y=2*x");
  EXPECT_THROW(semantic_content(f, parse_pair("(1:2,3)")), ShapeError);
  EXPECT_THROW(semantic_content(f, parse_pair("(\"_\":2)")), ShapeError);
  EXPECT_THROW(semantic_content(parse_formula("0=0 \\/ 0=0"), parse_pair("(:2)")), ShapeError);
  EXPECT_THROW(semantic_content(parse_formula("0=0 -> 0=0"), parse_pair("(0:)")), ShapeError);
}

TEST(Content, AgreesWithReplay) {
  ctruth::testing::FormulaGen gen(41);
  std::mt19937 rng(43);
  int tested = 0;
  while (tested < 100) {
    auto f = gen.formula({}, 4, false, false);
    if (!is_closed(*f)) continue;
    for (int k = 0; k < 5; ++k) {
      auto p = random_pair(f, rng);
      auto c = semantic_content(f, p);
      ASSERT_TRUE(is_closed(*c));
      EXPECT_EQ(evaluate_closed(c, 3, interp()), replay(f, p.input, p.output, 3)) << to_string(f) << " " << serialize(p);
    }
    ++tested;
  }
}

TEST(Monotone, SampleOk) {
  auto w = WitnessStream::parse(kSample);
  for (std::size_t b = 1; b <= 6; ++b) EXPECT_TRUE(check_monotone(w, b).ok);
}

TEST(Monotone, FunctionalityViolation) {
  auto v = check_monotone(WitnessStream::parse("(0:0) (0:1)"), 10);
  ASSERT_FALSE(v.ok);
  EXPECT_EQ(serialize(v.first), "(0:0)");
  EXPECT_EQ(serialize(v.second), "(0:1)");
}

TEST(Monotone, ExtensionViolation) {
  EXPECT_FALSE(check_monotone(WitnessStream::parse("(\"(0:1)\":0) (\"(0:1) _\":1)"), 10).ok);
  EXPECT_TRUE(check_monotone(WitnessStream::parse("(\"(0:1)\":0) (\"(0:2)\":1)"), 10).ok);
  EXPECT_TRUE(check_monotone(WitnessStream::parse("(\"(0:1)\":) (\"(0:1) _\":1)"), 10).ok);
}

TEST(Monotone, FaultInjection) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    // honest: outputs depend on the first pair of the prefix only
    Segment s;
    std::vector<Segment> prefixes;
    for (int i = 0; i < 8; ++i) {
      Segment pre;
      for (unsigned k = 0; k <= rng() % 3; ++k) pre.push_back(Item::of(IOPair{{IOToken::numeral(rng() % 3)}, {}}));
      prefixes.push_back(pre);
      IOPair p{{IOToken::prefix(pre)}, {IOToken::numeral(pre[0].pair.input[0].value * 7)}};
      s.push_back(Item::of(p));
      if (rng() % 2) s.push_back(Item::space());
    }
    ASSERT_TRUE(check_monotone(WitnessStream::literal(s), s.size()).ok);
    // flip: extend one prefix and change the answer
    std::size_t victim = rng() % prefixes.size();
    Segment ext = prefixes[victim];
    ext.push_back(Item::space());
    IOPair flipped{{IOToken::prefix(ext)}, {IOToken::numeral(prefixes[victim][0].pair.input[0].value * 7 + 1)}};
    auto pos = s.begin() + static_cast<std::ptrdiff_t>(rng() % (s.size() + 1));
    s.insert(pos, Item::of(flipped));
    EXPECT_FALSE(check_monotone(WitnessStream::literal(s), s.size()).ok);
  }
}

TEST(ResponseTree, SampleDoubling) {
  auto f = parse_formula("A x. E y. y=2*x");
  auto root = response_tree(WitnessStream::parse(kSample), f, 1, 3);
  ASSERT_TRUE(root.output.has_value());
  ASSERT_EQ(root.children.size(), 3u);
  for (Nat n = 0; n < 3; ++n) {
    const auto& c = root.children[n];
    ASSERT_TRUE(c.output.has_value());
    ASSERT_EQ(c.output->size(), 1u);
    EXPECT_EQ((*c.output)[0].value, 2 * n);
  }
}

TEST(ResponseTree, EmptyStreamPending) {
  auto root = response_tree(WitnessStream::empty(), parse_formula("A x. E y. y=2*x"), 1, 3);
  EXPECT_FALSE(root.output.has_value());
}

TEST(ResponseTree, PathsReplayMonotone) {
  std::mt19937 rng(13);
  auto f = parse_formula("A x. A z. E y. (y=x+z \\/ y<x)");
  for (int i = 0; i < 50; ++i) {
    Segment s{Item::of({})};
    for (Nat x = 0; x < 4; ++x) {
      if (rng() % 4 == 0) continue;
      s.push_back(Item::of(IOPair{{IOToken::numeral(x)}, {}}));
      for (Nat z = 0; z < 4; ++z) {
        if (rng() % 3 == 0) s.push_back(Item::space());
        s.push_back(Item::of(IOPair{{IOToken::numeral(x), IOToken::numeral(z)},
                                    {IOToken::numeral(x + z), IOToken::selector(0)}}));
      }
    }
    std::shuffle(s.begin() + 1, s.end(), rng);
    auto root = response_tree(WitnessStream::literal(s), f, 2, 4);
    for (const auto& path : response_paths(root)) EXPECT_TRUE(check_monotone(WitnessStream::literal(path), 100).ok);
  }
}

TEST(Stream, PullDeterminism) {
  int counter = 0;
  auto w = WitnessStream::generate([&] {
    ++counter;
    return counter % 3 ? Item::space() : Item::of(IOPair{{IOToken::numeral(counter)}, {}});
  });
  auto first = w.pull(5);
  std::vector<Item> a(first.begin(), first.end());
  auto second = w.pull(12);
  std::vector<Item> b(second.begin(), second.end());
  EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  EXPECT_EQ(counter, 12);
  WitnessStream copy = w;
  EXPECT_EQ(copy.at(3), w.at(3));
  EXPECT_EQ(w.pulled(), 12u);
}
