// ctruth: command-line front end.
//
// Exit status: 0 accepted or success, 1 rejected or adversary win,
// 2 usage or input error, 3 pending (no verdict within the budget).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "ctruth/checker.hpp"
#include "ctruth/combinators.hpp"
#include "ctruth/games.hpp"
#include "ctruth/realizers.hpp"

using namespace ctruth;

namespace {

constexpr int kOk = 0, kRejected = 1, kUsage = 2, kPending = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::size_t pulls = 2000;
  Nat numerals = 10;
  std::size_t vm_steps = 100000;
  std::uint64_t seed = 0;
  std::size_t horizon = 10000;
  std::string report;
  std::string trace;

  std::string formula, witness, input, code, proof, tree, script, strategy;
  std::string chain = "all";
  std::size_t atoms = 21;
  std::string order = "usual";
  std::vector<Nat> path;
  bool no_copy = false;

  Budget budget() const {
    Budget b;
    b.pull_limit = pulls;
    b.numeral_bound = numerals;
    b.vm_steps = vm_steps;
    return b;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind(";", 0) != 0 && line.rfind("#", 0) != 0) out += line + "\n";
  return out;
}

// Parses the file's contents; parse failures become usage errors naming it.
template <class F>
auto load(const std::string& path, const char* what, F parse) {
  if (path.empty()) throw UsageError(std::string("missing --") + what);
  std::string text = slurp(path);
  try {
    return parse(text);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

FormulaPtr load_formula(const std::string& p) {
  return load(p, "formula", [](const std::string& t) { return parse_formula(strip_comments(t)); });
}
WitnessStream load_witness(const std::string& p, const char* what = "witness") {
  return load(p, what, [](const std::string& t) { return WitnessStream::parse(strip_comments(t)); });
}
Program load_code(const std::string& p) {
  return load(p, "code", [](const std::string& t) { return parse_program(strip_comments(t)); });
}
ProofPtr load_proof(const std::string& p) {
  return load(p, "proof", [](const std::string& t) { return parse_proof(strip_comments(t)); });
}
TreePresentation load_tree(const std::string& p) { return load(p, "tree", [](const std::string& t) { return parse_tree(t); }); }

class Report {
 public:
  void line(const std::string& s) { lines_.push_back(s); }
  void flush(const Config& c) const {
    std::string text;
    for (const auto& l : lines_) text += l + "\n";
    std::cout << text;
    if (!c.report.empty()) {
      std::ofstream out(c.report, std::ios::binary | std::ios::trunc);
      if (!out) throw UsageError("cannot write " + c.report);
      out << text;
    }
  }

 private:
  std::vector<std::string> lines_;
};

void write_trace(const Config& c, const std::string& text) {
  if (c.trace.empty()) return;
  std::ofstream out(c.trace, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + c.trace);
  out << text;
}

int verdict_status(const Verdict& v) { return v.accepted() ? kOk : v.rejected() ? kRejected : kPending; }

std::string items_text(const WitnessStream& w, std::size_t n) {
  std::string out;
  for (const auto& it : w.pull(n)) out += (out.empty() ? "" : " ") + serialize(it);
  return out;
}

std::string hex(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex << h;
  return ss.str();
}

// ---------------------------------------------------------------------------

int cmd_parse(const Config& c, Report& r) {
  FormulaPtr f = load_formula(c.formula);
  Classification k = classify(f);
  HierarchyLevel h = hierarchy_level(f);
  r.line("FORMULA " + to_string(f));
  r.line(std::string("arithmetical=") + (k.is_arithmetical ? "yes" : "no") +
         " implication_free=" + (k.implication_free ? "yes" : "no") + " exists_free=" + (k.exists_free ? "yes" : "no") +
         " impl_depth=" + std::to_string(k.impl_nesting_depth) + " sigma03=" + (k.sigma03_shape ? "yes" : "no"));
  if (h.classified())
    r.line("LEVEL sigma=" + std::to_string(h.sigma) + " pi=" + std::to_string(h.pi));
  else
    r.line("LEVEL unclassified");
  return kOk;
}

int cmd_check(const Config& c, Report& r) {
  if (c.witness.empty() && c.code.empty()) throw UsageError("check needs --witness or --code");
  FormulaPtr f = load_formula(c.formula);
  WitnessStream w = c.code.empty() ? load_witness(c.witness) : run_program(load_code(c.code), f, 1000, c.vm_steps);
  Verdict v = check_witness(f, w, c.budget());
  r.line(to_string(v));
  return verdict_status(v);
}

int cmd_synthesize(const Config& c, Report& r) {
  FormulaPtr f = load_formula(c.formula);
  if (!classify(f).sigma03_shape) throw UsageError(c.formula + ": not a Sigma^0_3 formula");
  auto w = synthesize_sigma03(f, c.budget());
  if (!w) {
    r.line("SYNTHESIS exhausted");
    return kRejected;
  }
  r.line("WITNESS " + items_text(*w, c.pulls));
  Verdict v = check_witness(f, *w, c.budget());
  r.line(to_string(v));
  return verdict_status(v);
}

int cmd_extract(const Config& c, Report& r) {
  ProofPtr p = load_proof(c.proof);
  FormulaPtr proved;
  try {
    proved = typecheck(*p);
  } catch (const ProofError& e) {
    r.line(std::string("ILL-TYPED ") + e.what());
    return kRejected;
  }
  r.line("PROVES " + to_string(proved));
  if (!c.formula.empty() && !alpha_equivalent(proved, load_formula(c.formula))) {
    r.line("MISMATCH expected " + to_string(load_formula(c.formula)));
    return kRejected;
  }
  r.line("CODE " + to_string(extract(*p)));
  return kOk;
}

WitnessStream implication_witness(const Config& c, const FormulaPtr& f) {
  if (!c.code.empty()) return run_program(load_code(c.code), f, 1000, c.vm_steps);
  if (!c.proof.empty()) return run_program(extract(*load_proof(c.proof)), f, 1000, c.vm_steps);
  return load_witness(c.witness);
}

int cmd_apply(const Config& c, Report& r) {
  FormulaPtr f = load_formula(c.formula);
  if (f->kind != FormulaKind::Implies) throw UsageError(c.formula + ": apply needs an implication");
  WitnessStream out = apply_implication(implication_witness(c, f), f, load_witness(c.input, "input"));
  r.line("OUTPUT " + items_text(out, c.pulls));
  return kOk;
}

int cmd_project(const Config& c, Report& r) {
  FormulaPtr f = load_formula(c.formula);
  WitnessStream w = load_witness(c.witness);
  if (c.path.empty()) throw UsageError("missing --at");
  for (Nat n : c.path) {
    if (f->kind != FormulaKind::Forall && f->kind != FormulaKind::And)
      throw UsageError(c.formula + ": --at descends only through universals and conjunctions");
    IOToken tok = IOToken::numeral(n);
    w = descend(w, f, tok);
    f = ctruth::descend(f, tok);
  }
  r.line("FORMULA " + to_string(f));
  std::string pairs;
  for (const auto& it : w.pull(c.pulls))
    if (!it.whitespace) pairs += " " + serialize(it.pair);
  r.line("PAIRS" + pairs);
  return kOk;
}

int cmd_realizability(const Config& c, Report& r) {
  FormulaPtr f = load_formula(c.formula);
  Program code = c.code.empty() ? extract(*load_proof(c.proof)) : load_code(c.code);
  CheckContext ctx;
  ctx.probes = realizer_probes(c.budget());
  Verdict v = check_realizability(f, code, c.budget(), ctx);
  r.line(to_string(v));
  return verdict_status(v);
}

int game_theorem1(const Config& c, Report& r) {
  TreePresentation t = load_tree(c.tree);
  std::string traces;
  r.line("TREE nodes=" + std::to_string(t.nodes.size()) + " branch=" + (t.has_branch() ? "yes" : "no"));
  if (!t.has_branch()) {
    Theorem1Setup s = theorem1_setup(t, c.seed);
    Verdict v = check_theorem1_defender(s, c.budget());
    r.line("DEFENDER " + to_string(v));
    auto cat = theorem1_copycat(s);
    Theorem1Result res = play_theorem1(s, *cat, c.horizon, c.budget());
    r.line("PLAY copycat consequent " + to_string(res.verdict) + " trace=" + hex(res.trace.hash()));
    write_trace(c, res.trace.text());
    r.line(v.accepted() ? "RESULT defender wins" : "RESULT defender fails");
    return v.accepted() ? kOk : kRejected;
  }
  bool any = false, found = false;
  for (const auto& strat : theorem1_library()) {
    if (!c.strategy.empty() && strat.name != c.strategy) continue;
    found = true;
    Theorem1Setup s = theorem1_setup(t, c.seed);
    auto d = strat.make(s);
    Theorem1Result res = play_theorem1(s, *d, c.horizon, c.budget());
    any = any || res.verdict.accepted();
    r.line("STRATEGY " + strat.name + " withheld=" + std::to_string(res.withheld.size()) + " trace=" +
           hex(res.trace.hash()) + " " + to_string(res.verdict));
    traces += "# " + strat.name + "\n" + res.trace.text();
  }
  if (!found) throw UsageError("unknown --strategy " + c.strategy);
  write_trace(c, traces);
  r.line(any ? "RESULT defender wins" : "RESULT adversary wins");
  return any ? kOk : kRejected;
}

int game_prop3(const Config& c, Report& r) {
  if (c.atoms == 0 || c.atoms > 23) throw UsageError("--atoms must be in 1..23");
  FiniteOrder order;
  if (c.order == "usual")
    order = FiniteOrder::usual(c.atoms);
  else if (c.order == "empty")
    order = FiniteOrder::empty(c.atoms);
  else
    throw UsageError("--order must be usual or empty");
  std::vector<Nat> chain;
  if (c.chain == "all") {
    for (Nat a = c.atoms; a-- > 0;) chain.push_back(a);
  } else {
    std::istringstream ss(c.chain);
    std::string w;
    while (ss >> w) {
      try {
        chain.push_back(std::stoull(w));
      } catch (const std::exception&) {
        throw UsageError("--chain: bad atom '" + w + "'");
      }
    }
  }
  std::mt19937_64 rng(c.seed);
  std::vector<bool> truth(c.atoms);
  for (std::size_t k = 0; k < c.atoms; ++k) truth[k] = rng() & 1;

  std::string traces;
  bool tautological_chain_output = false;
  for (const auto& d : ti_library()) {
    std::unique_ptr<TiAnswerer> a;
    try {
      a = chain.empty() ? honest_answerer(order, truth) : prop3_adversary(chain, order, truth);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--chain: ") + e.what());
    }
    GameTrace trace;
    auto outs = d.run(*a, c.atoms, c.horizon, trace);
    std::size_t taut = 0;
    for (const auto& o : outs) {
      bool t = tautology(combination(*a, o));
      taut += t;
      bool in_chain = std::find(chain.begin(), chain.end(), o.atom) != chain.end();
      tautological_chain_output = tautological_chain_output || (t && in_chain);
      r.line("OUTPUT " + d.name + " " + to_string(o.value) + " tautology=" + (t ? "yes" : "no"));
    }
    r.line("DEFENDER " + d.name + " outputs=" + std::to_string(outs.size()) + " tautological=" + std::to_string(taut) +
           " trace=" + hex(trace.hash()));
    traces += "# " + d.name + "\n" + trace.text();
  }
  write_trace(c, traces);
  bool adversary = !chain.empty() && !tautological_chain_output;
  r.line(adversary ? "RESULT adversary wins" : chain.empty() ? "RESULT honest answerer" : "RESULT defender wins");
  return adversary ? kRejected : kOk;
}

int game_pi11(const Config& c, Report& r) {
  TreePresentation t = load_tree(c.tree);
  WitnessStream enc = pi11_encode(t);
  FormulaPtr f = pi11_formula();
  if (t.has_branch()) {
    WitnessStream out = apply_implication(enc, f, branch_follower(t));
    std::size_t given = 0;
    for (const auto& it : out.pull(c.horizon)) given += !it.whitespace;
    r.line("FOLLOW horizon=" + std::to_string(c.horizon) + " consequent_items=" + std::to_string(given));
    r.line(given ? "RESULT encoder answers" : "RESULT consequent never given");
    return given ? kOk : kRejected;
  }
  Verdict v = check_witness(f, enc, c.budget());
  r.line(to_string(v));
  std::string decoded = pi11_decode(enc);
  r.line(std::string("DECODED ") + (decoded == to_string(t) ? "match" : "mismatch") + " bytes=" +
         std::to_string(decoded.size()));
  return verdict_status(v);
}

int game_narrow(const Config& c, Report& r) {
  FormulaPtr f = load_formula(c.formula);
  Program strategy = c.code.empty() ? extract(*load_proof(c.proof)) : load_code(c.code);
  auto script = load(c.script, "script", [](const std::string& t) { return parse_script(t); });
  NarrowOptions opts;
  opts.allow_copy = !c.no_copy;
  opts.budget = c.budget();
  NarrowResult res;
  try {
    res = narrow_play(f, strategy, script, c.horizon, opts);
  } catch (const std::invalid_argument& e) {
    throw UsageError(c.script + ": " + e.what());
  }
  write_trace(c, res.trace.text());
  bool violated = false;
  for (std::size_t i = 0; i < res.verdicts.size(); ++i) {
    violated = violated || res.verdicts[i].kind == InstanceVerdict::Kind::Violated;
    r.line("INSTANCE " + std::to_string(i) + " " + to_string(res.verdicts[i]));
  }
  r.line("TRACE " + hex(res.trace.hash()));
  return violated ? kRejected : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Witness checking, realizers and games for constructive truth"};
  app.require_subcommand(1);
  Config c;

  auto budget_flags = [&](CLI::App* s) {
    s->add_option("--pulls", c.pulls, "items pulled per stream")->check(CLI::PositiveNumber);
    s->add_option("--numerals", c.numerals, "numeral bound")->check(CLI::PositiveNumber);
    s->add_option("--vm-steps", c.vm_steps, "witness machine steps")->check(CLI::PositiveNumber);
    s->add_option("--seed", c.seed, "seed");
    s->add_option("--report", c.report, "report file");
  };
  auto game_flags = [&](CLI::App* s) {
    budget_flags(s);
    s->add_option("--horizon", c.horizon, "rounds")->check(CLI::PositiveNumber);
    s->add_option("--trace", c.trace, "trace file");
  };

  auto* parse = app.add_subcommand("parse", "parse and classify a formula");
  parse->add_option("--formula", c.formula, ".fml file")->required();
  budget_flags(parse);

  auto* check = app.add_subcommand("check", "check a witness against a formula");
  check->add_option("--formula", c.formula, ".fml file")->required();
  auto* wit = check->add_option("--witness", c.witness, ".wit file");
  check->add_option("--code", c.code, ".wc file")->excludes(wit);
  budget_flags(check);

  auto* synth = app.add_subcommand("synthesize", "synthesize a witness for a Sigma^0_3 formula");
  synth->add_option("--formula", c.formula, ".fml file")->required();
  budget_flags(synth);

  auto* extr = app.add_subcommand("extract", "typecheck a proof and extract its code");
  extr->add_option("--proof", c.proof, ".prf file")->required();
  extr->add_option("--formula", c.formula, "expected .fml");
  budget_flags(extr);

  auto* apply = app.add_subcommand("apply", "apply an implication witness to an antecedent witness");
  apply->add_option("--formula", c.formula, ".fml file")->required();
  apply->add_option("--witness", c.witness, ".wit file");
  apply->add_option("--code", c.code, ".wc file");
  apply->add_option("--proof", c.proof, ".prf file");
  apply->add_option("--input", c.input, "antecedent .wit file")->required();
  budget_flags(apply);

  auto* proj = app.add_subcommand("project", "pairs starting with the given inputs");
  proj->add_option("--formula", c.formula, ".fml file")->required();
  proj->add_option("--witness", c.witness, ".wit file")->required();
  proj->add_option("--at", c.path, "input tokens")->required();
  budget_flags(proj);

  auto* real = app.add_subcommand("realizability", "check a program as a realizer");
  real->add_option("--formula", c.formula, ".fml file")->required();
  auto* code = real->add_option("--code", c.code, ".wc file");
  real->add_option("--proof", c.proof, ".prf file")->excludes(code);
  budget_flags(real);

  auto* game = app.add_subcommand("game", "adversarial games");
  game->require_subcommand(1);
  auto* t1 = game->add_subcommand("theorem1", "incompatible-paths game on a tree");
  t1->add_option("--tree", c.tree, ".tree file")->required();
  t1->add_option("--strategy", c.strategy, "one library strategy");
  game_flags(t1);
  auto* p3 = game->add_subcommand("prop3", "transfinite induction against a chain adversary");
  p3->add_option("--atoms", c.atoms, "order size");
  p3->add_option("--order", c.order, "usual or empty");
  p3->add_option("--chain", c.chain, "descending atoms, 'all', or empty for the honest answerer");
  game_flags(p3);
  auto* pi = game->add_subcommand("pi11", "path-guessing encoder");
  pi->add_option("--tree", c.tree, ".tree file")->required();
  game_flags(pi);
  auto* nw = game->add_subcommand("narrow", "numbered instances under a script");
  nw->add_option("--formula", c.formula, ".fml file")->required();
  auto* ncode = nw->add_option("--code", c.code, ".wc file");
  nw->add_option("--proof", c.proof, ".prf file")->excludes(ncode);
  nw->add_option("--script", c.script, ".script file")->required();
  nw->add_flag("--no-copy", c.no_copy, "reject COPY events");
  game_flags(nw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  Report r;
  int status = kOk;
  try {
    if (*parse) status = cmd_parse(c, r);
    else if (*check) status = cmd_check(c, r);
    else if (*synth) status = cmd_synthesize(c, r);
    else if (*extr) status = cmd_extract(c, r);
    else if (*apply) status = cmd_apply(c, r);
    else if (*proj) status = cmd_project(c, r);
    else if (*real) {
      if (c.code.empty() && c.proof.empty()) throw UsageError("realizability needs --code or --proof");
      status = cmd_realizability(c, r);
    } else if (*t1) status = game_theorem1(c, r);
    else if (*p3) status = game_prop3(c, r);
    else if (*pi) status = game_pi11(c, r);
    else if (*nw) {
      if (c.code.empty() && c.proof.empty()) throw UsageError("narrow needs --code or --proof");
      status = game_narrow(c, r);
    }
    r.flush(c);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return status;
}
