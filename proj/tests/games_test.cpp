#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ctruth/combinators.hpp"
#include "ctruth/games.hpp"
#include "ctruth/realizers.hpp"

using namespace ctruth;

namespace {

TreePresentation two_leaf() { return parse_tree(".\n0\n1\n"); }

TreePresentation path(std::size_t n) {
  TreePresentation t;
  Seq s;
  t.nodes.insert(s);
  for (std::size_t k = 0; k < n; ++k) {
    s.push_back(0);
    t.nodes.insert(s);
  }
  return t;
}

bool is_path(const TreePresentation& t) { return t.nodes.size() == t.height() + 1; }

Budget small_budget() {
  Budget b;
  b.numeral_bound = 3;
  return b;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Trees, CountsUpToIsomorphism) {
  std::vector<std::size_t> by_size(16);
  for_each_tree(15, [&](const TreePresentation& t) {
    t.validate();
    ++by_size[t.nodes.size()];
  });
  std::vector<std::size_t> expect = {0, 1, 1, 2, 4, 9, 20, 48, 115, 286, 719, 1842, 4766, 12486, 32973, 87811};
  EXPECT_EQ(by_size, expect);
}

TEST(Trees, TextRoundTrip) {
  auto t = graft_branch(parse_tree("# a tree\n.\n0\n0 3\n2\n"));
  EXPECT_EQ(*t.stem, (Seq{0, 3}));
  EXPECT_EQ(t.branch_prefix(4), (Seq{0, 3, 0, 0}));
  EXPECT_EQ(to_string(parse_tree(to_string(t))), to_string(t));
  EXPECT_THROW(parse_tree(".\n0 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_tree("0\n"), std::invalid_argument);
  EXPECT_THROW(parse_tree(".\nx\n"), std::invalid_argument);
}

TEST(Theorem1, TwoLeafTree) {
  Theorem1Setup s = theorem1_setup(two_leaf(), 1);
  Nat a = s.codec->code({0}), b = s.codec->code({1});
  auto cat = theorem1_copycat(s);
  Segment supply = theorem1_supply(s, 2);
  Segment out;
  for (std::size_t k = 0; k < supply.size() + 6; ++k) {
    Segment seen(supply.begin(), supply.begin() + static_cast<std::ptrdiff_t>(std::min(k + 1, supply.size())));
    out.push_back(cat->respond(seen));
  }
  std::vector<std::string> emitted;
  for (const auto& it : out)
    if (!it.whitespace) emitted.push_back(serialize(it));
  ASSERT_GE(emitted.size(), 5u);
  EXPECT_EQ(emitted[0], serialize(commit_item(a, b)));
  std::set<std::string> claims(emitted.begin() + 1, emitted.end());
  for (Nat i = 0; i < 2; ++i) {
    EXPECT_TRUE(claims.count(serialize(claim_item(0, a, b, i, s.coins->value(a, i)))));
    EXPECT_TRUE(claims.count(serialize(claim_item(1, a, b, i, s.coins->value(b, i)))));
  }
  EXPECT_TRUE(check_theorem1_defender(s, small_budget()).accepted());
}

TEST(Theorem1, DefenderOnSmallTrees) {
  Budget b = small_budget();
  std::size_t n = 0;
  for_each_tree(9, [&](const TreePresentation& t) {
    Theorem1Setup s = theorem1_setup(t, n++);
    EXPECT_TRUE(check_theorem1_defender(s, b).accepted()) << to_string(t);
    if (is_path(t)) return;
    auto cat = theorem1_copycat(s);
    EXPECT_TRUE(play_theorem1(s, *cat, 200, b).verdict.accepted()) << to_string(t);
  });
}

TEST(Theorem1, DefenderOnSampledTrees) {
  Budget b = small_budget();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    TreePresentation t = random_tree(4, 3, seed);
    Theorem1Setup s = theorem1_setup(t, seed);
    EXPECT_TRUE(check_theorem1_defender(s, b).accepted()) << seed;
    if (is_path(t)) continue;
    auto cat = theorem1_copycat(s);
    EXPECT_TRUE(play_theorem1(s, *cat, 400, b).verdict.accepted()) << seed;
  }
}

TEST(Theorem1, PathsStayPending) {
  Theorem1Setup s = theorem1_setup(path(6), 0);
  auto cat = theorem1_copycat(s);
  EXPECT_TRUE(play_theorem1(s, *cat, 300, small_budget()).verdict.pending());
}

TEST(Theorem1, LibraryLosesOnBranches) {
  std::vector<TreePresentation> trees = {graft_branch(path(10)), graft_branch(two_leaf())};
  for_each_tree(6, [&](const TreePresentation& t) { trees.push_back(graft_branch(t)); });
  EXPECT_GE(theorem1_library().size(), 5u);
  for (const auto& t : trees)
    for (const auto& strat : theorem1_library()) {
      Theorem1Setup s = theorem1_setup(t, 3);
      auto d = strat.make(s);
      auto r = play_theorem1(s, *d, 1500, small_budget());
      EXPECT_FALSE(r.verdict.accepted()) << strat.name << "\n" << to_string(t);
    }
}

TEST(Theorem1, EarliestCommitment) {
  Theorem1Setup s = theorem1_setup(graft_branch(path(10)), 0);
  std::unique_ptr<Theorem1Strategy> eager;
  for (const auto& st : theorem1_library())
    if (st.name == "eager") eager = st.make(s);
  ASSERT_TRUE(eager);
  auto r = play_theorem1(s, *eager, 20, small_budget());
  std::string first_commit, first_withhold;
  for (const auto& e : r.trace.events) {
    if (first_commit.empty() && e.text.rfind("EMIT 0 (0:", 0) == 0) first_commit = std::to_string(e.round);
    if (first_withhold.empty() && e.text.rfind("WITHHOLD", 0) == 0) first_withhold = std::to_string(e.round);
  }
  EXPECT_EQ(first_commit, "1");
  EXPECT_EQ(first_withhold, "2");
  EXPECT_EQ(r.withheld, (std::set<Nat>{s.codec->code({1})}));
  EXPECT_TRUE(r.verdict.rejected());
}

TEST(Theorem1, ReplayDeterminism) {
  for (std::uint64_t seed : {0u, 7u, 99u}) {
    std::set<std::uint64_t> hashes;
    for (int rep = 0; rep < 3; ++rep) {
      Theorem1Setup s = theorem1_setup(graft_branch(random_tree(3, 2, seed)), seed);
      auto d = theorem1_library()[3].make(s);
      hashes.insert(play_theorem1(s, *d, 500, small_budget()).trace.hash());
    }
    EXPECT_EQ(hashes.size(), 1u) << seed;
  }
}

namespace {

std::vector<bool> random_truth(std::size_t n, std::mt19937_64& rng) {
  std::vector<bool> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = rng() & 1;
  return t;
}

}  // namespace

TEST(Ti, TautologyChecker) {
  Combination modus{{{{}, {0, true}}, {{{0, true}}, {1, false}}}, {1, false}};
  EXPECT_TRUE(tautology(modus));
  Combination gap{{{{{2, true}}, {1, true}}}, {1, true}};
  EXPECT_FALSE(tautology(gap));
  EXPECT_EQ(to_string(gap), "((r2 -> r1)) -> r1");
  Combination big;
  for (Nat a = 0; a < 25; ++a) big.premises.push_back({{}, {a, true}});
  big.conclusion = {0, true};
  EXPECT_THROW(tautology(big), std::invalid_argument);
}

TEST(Ti, HonestAnswererGivesTautologies) {
  std::mt19937_64 rng(4);
  for (std::size_t n : {1u, 5u, 20u}) {
    auto truth = random_truth(n, rng);
    auto a = honest_answerer(FiniteOrder::usual(n), truth);
    GameTrace trace;
    auto outs = ti_library()[0].run(*a, n, 10 * n, trace);
    EXPECT_EQ(outs.size(), n);
    for (const auto& o : outs) EXPECT_TRUE(tautology(combination(*a, o)));
  }
}

TEST(Ti, ChainAdversaryReversedUsualOrder) {
  std::mt19937_64 rng(8);
  const std::size_t n = 21;
  std::vector<Nat> chain;
  for (Nat a = n; a-- > 0;) chain.push_back(a);
  auto truth = random_truth(n, rng);
  for (const auto& d : ti_library()) {
    auto a = prop3_adversary(chain, FiniteOrder::usual(n), truth);
    GameTrace trace;
    for (const auto& o : d.run(*a, n, 200, trace)) EXPECT_FALSE(tautology(combination(*a, o))) << d.name;
  }
}

TEST(Ti, ChainOutputsNeverTautological) {
  std::mt19937_64 rng(12);
  std::size_t chain_outputs = 0;
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t n = 2 + rng() % 19;
    std::vector<Nat> chain;
    for (Nat a = n; a-- > 0;)
      if (rng() % 2 || chain.size() < 2) chain.push_back(a);
    auto truth = random_truth(n, rng);
    for (const auto& d : ti_library()) {
      auto a = prop3_adversary(chain, FiniteOrder::usual(n), truth);
      GameTrace trace;
      for (const auto& o : d.run(*a, n, 200, trace)) {
        bool in_chain = std::find(chain.begin(), chain.end(), o.atom) != chain.end();
        if (!in_chain) continue;
        ++chain_outputs;
        EXPECT_FALSE(tautology(combination(*a, o))) << d.name << " trial " << trial;
      }
    }
  }
  EXPECT_GT(chain_outputs, 0u);
}

TEST(Ti, EmptyChainIsHonest) {
  std::mt19937_64 rng(2);
  auto truth = random_truth(12, rng);
  auto a = prop3_adversary({}, FiniteOrder::empty(12), truth);
  GameTrace trace;
  auto outs = ti_library()[0].run(*a, 12, 50, trace);
  EXPECT_EQ(outs.size(), 12u);
  for (const auto& o : outs) EXPECT_TRUE(tautology(combination(*a, o)));
  EXPECT_THROW(prop3_adversary({1, 2}, FiniteOrder::usual(4), truth), std::invalid_argument);
}

TEST(Pi11, WellFoundedTreesGetTheConsequent) {
  FormulaPtr f = pi11_formula();
  Budget b = small_budget();
  for_each_tree(8, [&](const TreePresentation& t) {
    EXPECT_TRUE(check_witness(f, pi11_encode(t), b).accepted()) << to_string(t);
  });
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TreePresentation t = random_tree(4, 3, seed);
    EXPECT_TRUE(check_witness(f, pi11_encode(t), b).accepted()) << seed;
  }
}

TEST(Pi11, BranchFollowerNeverAnswered) {
  TreePresentation t = graft_branch(path(3));
  WitnessStream out = apply_implication(pi11_encode(t), pi11_formula(), branch_follower(t));
  for (const auto& it : out.pull(10000)) ASSERT_TRUE(it.whitespace);
}

TEST(Pi11, DelaysSpellTheTree) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TreePresentation t = random_tree(3, 3, seed);
    EXPECT_EQ(pi11_decode(pi11_encode(t)), to_string(t));
  }
  EXPECT_EQ(pi11_decode(pi11_encode(graft_branch(two_leaf()))), to_string(graft_branch(two_leaf())));
}

namespace {

Program identity_strategy() { return extract(*parse_proof("(lambda \"A x. E y. y=x+1\" (hyp 0))")); }

FormulaPtr identity_formula() { return parse_formula("(A x. E y. y=x+1) -> (A x. E y. y=x+1)"); }

std::vector<std::filesystem::path> scripts() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(CTRUTH_DATA_DIR "/scripts"))
    if (e.path().extension() == ".script") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Narrow, NeverChoosingIsUndetermined) {
  Program idle = parse_program("(stream ((rec loop u (seq (space) (loop u))) 0))");
  for (std::size_t pulls : {1u, 10u, 200u}) {
    std::string script = "SPAWN 0\n";
    for (std::size_t k = 0; k < pulls; ++k) script += "PULL 0\n";
    auto r = narrow_play(parse_formula("0=0 \\/ 0=0"), idle, parse_script(script), 10000);
    ASSERT_EQ(r.verdicts.size(), 1u);
    EXPECT_EQ(r.verdicts[0].kind, InstanceVerdict::Kind::Undetermined);
  }
}

TEST(Narrow, IdentityMeetsEveryScript) {
  auto files = scripts();
  ASSERT_GE(files.size(), 3u);
  for (const auto& p : files) {
    auto r = narrow_play(identity_formula(), identity_strategy(), parse_script(slurp(p)), 10000);
    ASSERT_FALSE(r.verdicts.empty()) << p;
    for (const auto& v : r.verdicts) EXPECT_EQ(v.kind, InstanceVerdict::Kind::Met) << p << ": " << to_string(v);
  }
}

TEST(Narrow, WrongAnswerIsViolated) {
  Program liar = parse_program("(stream ((rec loop n (seq (emit (n) ((+ n 2))) (loop (+ n 1)))) 0))");
  auto r = narrow_play(parse_formula("A x. E y. y=x+1"), liar, parse_script("SPAWN 0\nPULL 0\nPULL 0\n"), 100);
  EXPECT_EQ(r.verdicts[0].kind, InstanceVerdict::Kind::Violated);
}

TEST(Narrow, CopyIsolation) {
  std::string base = "SPAWN 0\nFEED 0 (0:1)\nPULL 0\nPULL 0\nCOPY 1 FROM 0 AT 2\n";
  auto before = narrow_play(identity_formula(), identity_strategy(), parse_script(base), 1000);
  std::string diverge = base + "FEED 1 (1:5)\nPULL 1\nPULL 1\nPULL 1\nFEED 0 (1:2)\nPULL 0\n";
  auto after = narrow_play(identity_formula(), identity_strategy(), parse_script(diverge), 1000);
  ASSERT_EQ(after.instances.size(), 2u);
  EXPECT_EQ(after.instances[1].copied_from, std::make_optional(std::make_pair(std::size_t(0), std::size_t(2))));
  // Copies share the transcript up to the copy point.
  EXPECT_EQ(serialize(before.instances[1].output), serialize(before.instances[0].output));
  EXPECT_EQ(serialize(Segment(after.instances[1].input.begin(), after.instances[1].input.begin() + 1)),
            serialize(Segment(after.instances[0].input.begin(), after.instances[0].input.begin() + 1)));
  // Instance 1 is fed a refuted antecedent; instance 0 is unaffected.
  EXPECT_EQ(after.verdicts[0].kind, InstanceVerdict::Kind::Met);
  EXPECT_EQ(after.verdicts[1].kind, InstanceVerdict::Kind::Met);
  EXPECT_EQ(judge_instance(identity_formula(), after.instances[0], {}).kind, before.verdicts[0].kind);
  NarrowOptions no_copy;
  no_copy.allow_copy = false;
  EXPECT_THROW(narrow_play(identity_formula(), identity_strategy(), parse_script(base), 1000, no_copy),
               std::invalid_argument);
}

TEST(Narrow, ScriptErrors) {
  EXPECT_THROW(narrow_play(identity_formula(), identity_strategy(), parse_script("SPAWN 0\n"), 0), std::invalid_argument);
  EXPECT_THROW(parse_script("JUMP 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_script("COPY 1 FROM 0\n"), std::invalid_argument);
  EXPECT_THROW(narrow_play(identity_formula(), identity_strategy(), parse_script("SPAWN 1\n"), 10), std::invalid_argument);
  auto events = parse_script("SPAWN 0 # start\nFEED 0 (3:4)\nCOPY 1 FROM 0 AT 0\nPULL 1\n");
  ASSERT_EQ(events.size(), 4u);
  EXPECT_EQ(to_string(events[1]), "FEED 0 (3:4)");
  EXPECT_EQ(to_string(events[2]), "COPY 1 FROM 0 AT 0");
}

TEST(Narrow, DistinguishingFixtures) {
  std::size_t n = 0;
  for_each_tree(6, [&](const TreePresentation& t) {
    NarrowFixture fx = distinguishing_fixture(t, n++);
    std::string script = "SPAWN 0\nFEED 0 (0:0)\nPULL 0\nPULL 0\nCOPY 1 FROM 0 AT 1\nPULL 1\n";
    NarrowOptions opts;
    opts.interp = fx.setup.interp;
    opts.budget = small_budget();
    auto r = narrow_play(fx.formula, fx.strategy, parse_script(script), 100, opts);
    for (const auto& inst : r.instances) {
      CheckContext ctx;
      ctx.interp = fx.setup.interp;
      EXPECT_TRUE(check_witness(fx.c, WitnessStream::literal(inst.output), small_budget(), ctx).accepted())
          << to_string(t);
    }
    for (const auto& v : r.verdicts) EXPECT_EQ(v.kind, InstanceVerdict::Kind::Met);
  });
}
