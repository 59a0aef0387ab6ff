#include "ctruth/checker.hpp"

#include <stdexcept>

#include "ctruth/combinators.hpp"

namespace ctruth {

void Budget::validate() const {
  if (pull_limit == 0 || numeral_bound == 0 || vm_steps == 0) throw std::invalid_argument("budget fields must be positive");
}

std::string to_string(const Verdict& v) {
  switch (v.kind) {
    case Verdict::Kind::Accepted:
      return "VERDICT accepted_up_to pulls=" + std::to_string(v.pulls) + " numerals=" + std::to_string(v.numerals);
    case Verdict::Kind::Rejected: {
      std::string line = "VERDICT rejected pair=" + serialize(v.pair) + " reason=" + (v.reason ? to_string(*v.reason) : "?");
      if (!v.violation.empty()) line += " violation=" + v.violation;
      return line;
    }
    case Verdict::Kind::Pending: {
      std::string line = "VERDICT pending input=";
      for (std::size_t i = 0; i < v.missing_input.size(); ++i) line += (i ? "," : "") + serialize(v.missing_input[i]);
      return line;
    }
  }
  return "VERDICT ?";
}

// ---------------------------------------------------------------------------
// Synthesis

namespace {

constexpr std::size_t kBaseEffort = 64;
constexpr unsigned kMaxProbeDepth = 3;

Segment copy_items(const WitnessStream& s, std::size_t n) {
  auto span = s.pull(n);
  return Segment(span.begin(), span.end());
}

class NoWitness : public VmError {
 public:
  NoWitness() : VmError("no witness found within the budget") {}
};

struct Search {
  Budget b;
  Interpretation interp;

  unsigned max_effort() const {
    unsigned e = 0;
    while ((kBaseEffort << (e + 1)) <= b.vm_steps && e < 30) ++e;
    return e;
  }

  EvalLimits limits(unsigned effort) const {
    return {b.numeral_bound, std::min(b.vm_steps, kBaseEffort << effort), b.exact_domain};
  }

  bool confirmed(const FormulaPtr& f, unsigned effort) const { return evaluate_truth(f, limits(effort), interp) == Truth::True; }

  // Diagonal over (value, effort); smaller values first on each diagonal.
  Nat choose_value(const FormulaPtr& f) const {
    unsigned top = max_effort();
    std::size_t last = b.pull_limit + top;
    if (b.exact_domain) last = std::min<std::size_t>(last, b.numeral_bound + top);
    std::vector<bool> refuted;
    for (std::size_t k = 0; k <= last; ++k)
      for (std::size_t n = 0; n <= k; ++n) {
        std::size_t e = k - n;
        if (e > top || (b.exact_domain && n > b.numeral_bound)) continue;
        if (n < refuted.size() && refuted[n]) continue;
        Truth t = evaluate_truth(*f->left, {{f->name, n}}, limits(static_cast<unsigned>(e)), interp);
        if (t == Truth::True) return n;
        // False does not depend on the effort
        if (t == Truth::False) {
          if (refuted.size() <= n) refuted.resize(n + 1);
          refuted[n] = true;
        }
      }
    throw NoWitness();
  }

  int choose_side(const FormulaPtr& f) const {
    for (unsigned e = 0; e <= max_effort(); ++e)
      for (int s = 0; s < 2; ++s)
        if (confirmed(s == 0 ? f->left : f->right, e)) return s;
    throw NoWitness();
  }
};

Value synth_value(const FormulaPtr& f, const std::shared_ptr<const Search>& search) {
  switch (f->kind) {
    case FormulaKind::Forall:
      return Value::function([f, search](const Value& n) {
        const Value& k = force(n);
        if (k.kind != Value::Kind::Num) throw VmError("expected a number");
        return synth_value(ctruth::descend(f, IOToken::numeral(k.num)), search);
      });
    case FormulaKind::And:
      return Value::make_pair(synth_value(f->left, search), synth_value(f->right, search));
    case FormulaKind::Exists:
      return Value::deferred([f, search] {
        Nat n = search->choose_value(f);
        return Value::make_pair(Value::number(n), synth_value(ctruth::descend(f, IOToken::numeral(n)), search));
      });
    case FormulaKind::Or:
      return Value::deferred([f, search] {
        int s = search->choose_side(f);
        return Value::make_pair(Value::number(static_cast<Nat>(s)), synth_value(s == 0 ? f->left : f->right, search));
      });
    case FormulaKind::Implies:
      return Value::function([f, search](const Value&) { return synth_value(f->right, search); });
    case FormulaKind::Box:
      throw ShapeError("cannot synthesize a code for " + to_string(*f));
    default:
      return Value::number(0);
  }
}

}  // namespace

std::optional<WitnessStream> synthesize_sigma03(const FormulaPtr& f, const Budget& b, const Interpretation& interp) {
  b.validate();
  if (!classify(f).sigma03_shape) throw ShapeError("not a Sigma^0_3 statement: " + to_string(*f));
  auto search = std::make_shared<const Search>(Search{b, interp});
  bool ok = false;
  for (unsigned e = 0; e <= search->max_effort() && !ok; ++e) ok = search->confirmed(f, e);
  if (!ok) return std::nullopt;
  return serialize_value(f, synth_value(f, search), 1000);
}

// ---------------------------------------------------------------------------
// Checking

namespace {

class Checker {
 public:
  Checker(FormulaPtr root, const Budget& b, const CheckContext& ctx, unsigned depth)
      : root_(std::move(root)), b_(b), ctx_(ctx), depth_(depth) {}

  Verdict run(const WitnessStream& w) {
    std::size_t lim = limit(w);
    Segment items = copy_items(w, lim);
    for (const auto& it : items)
      if (!it.whitespace) check_shape(root_, it.pair);

    MonotoneVerdict mv = check_monotone(w, lim);
    if (!mv.ok) {
      reject(mv.second, semantic_content(root_, mv.second), "functionality: conflicts with " + serialize(mv.first));
      return *verdict_;
    }
    for (const auto& it : items) {
      if (it.whitespace) continue;
      scan(it.pair);
      if (verdict_) return *verdict_;
    }

    Path p;
    walk(root_, w, p);
    if (verdict_) return *verdict_;
    if (pending_) return *pending_;
    Verdict v;
    v.pulls = w.pulled();
    v.numerals = b_.numeral_bound;
    return v;
  }

 private:
  struct Path {
    std::vector<IOToken> in;
    std::vector<IOToken> out;
  };

  std::size_t limit(const WitnessStream& s) const {
    if (auto n = s.known_length()) return std::min(*n, b_.pull_limit);
    return b_.pull_limit;
  }

  EvalLimits limits() const { return {b_.numeral_bound, b_.vm_steps, b_.exact_domain}; }

  void reject(IOPair pair, FormulaPtr reason, std::string violation = {}) {
    if (verdict_) return;
    Verdict v;
    v.kind = Verdict::Kind::Rejected;
    v.pair = std::move(pair);
    v.reason = std::move(reason);
    v.violation = std::move(violation);
    verdict_ = std::move(v);
  }

  void pend(const std::vector<IOToken>& input) {
    if (pending_) return;
    Verdict v;
    v.kind = Verdict::Kind::Pending;
    v.missing_input = input;
    pending_ = std::move(v);
  }

  // A pair in root coordinates.
  void scan(const IOPair& pair) {
    FormulaPtr c;
    try {
      c = semantic_content(root_, pair);
    } catch (const ShapeError& e) {
      reject(pair, Formula::falsum(), std::string("shape: ") + e.what());
      return;
    }
    if (evaluate_truth(c, limits(), ctx_.interp) == Truth::False) reject(pair, c);
  }

  std::optional<std::pair<IOToken, std::size_t>> find_head(const WitnessStream& s) const {
    std::size_t lim = limit(s);
    for (std::size_t i = 0; i < lim; ++i) {
      Item it = s.at(i);
      if (!it.whitespace && !it.pair.output.empty()) return std::make_pair(it.pair.output[0], i);
    }
    return std::nullopt;
  }

  void walk(const FormulaPtr& g, const WitnessStream& s, Path& p) {
    if (verdict_) return;
    switch (g->kind) {
      case FormulaKind::Forall:
        for (Nat n = 0; n <= b_.numeral_bound && !verdict_; ++n) {
          IOToken tok = IOToken::numeral(n);
          p.in.push_back(tok);
          walk(ctruth::descend(g, tok), descend(s, g, tok), p);
          p.in.pop_back();
        }
        return;
      case FormulaKind::And:
        for (int k = 0; k < 2 && !verdict_; ++k) {
          IOToken tok = IOToken::selector(k);
          p.in.push_back(tok);
          walk(k == 0 ? g->left : g->right, descend(s, g, tok), p);
          p.in.pop_back();
        }
        return;
      case FormulaKind::Exists:
      case FormulaKind::Or: {
        auto head = find_head(s);
        if (!head) return pend(p.in);
        FormulaPtr next;
        try {
          next = ctruth::descend(g, head->first);
        } catch (const ShapeError& e) {
          IOPair bad{p.in, p.out};
          bad.output.push_back(head->first);
          return reject(bad, Formula::falsum(), std::string("shape: ") + e.what());
        }
        p.out.push_back(head->first);
        walk(next, descend(s, g, head->first), p);
        p.out.pop_back();
        return;
      }
      case FormulaKind::Box:
        return walk_box(g, s, p);
      case FormulaKind::Implies:
        return walk_implication(g, s, p);
      default:
        return scan(IOPair{p.in, p.out});
    }
  }

  void walk_box(const FormulaPtr& g, const WitnessStream& s, Path& p) {
    auto head = find_head(s);
    if (!head) return pend(p.in);
    IOPair pair{p.in, p.out};
    pair.output.push_back(head->first);
    scan(pair);
    if (verdict_) return;
    if (!head->first.is_numeral()) return reject(pair, Formula::falsum(), "box: output is not a code");
    Program prog;
    try {
      prog = godel_decode(head->first.value);
    } catch (const VmError& e) {
      return reject(pair, Formula::falsum(), std::string("box: ") + e.what());
    }
    std::size_t quota = std::min<std::size_t>(b_.vm_steps, 1000);
    WitnessStream run = run_program(prog, g->left, quota, b_.vm_steps);
    Verdict inner = Checker(g->left, b_, ctx_, depth_ + 1).run(run);
    if (inner.rejected()) return reject(pair, inner.reason, "box: program output " + serialize(inner.pair) + " fails");
    if (inner.pending()) pend(p.in);
  }

  std::vector<WitnessStream> probes(const FormulaPtr& a) const {
    std::vector<WitnessStream> out;
    if (ctx_.probes)
      for (auto& x : ctx_.probes(a)) out.push_back(x);
    if (!ctx_.code_probes_only && classify(a).sigma03_shape) {
      if (auto x = synthesize_sigma03(a, b_, ctx_.interp)) {
        out.push_back(*x);
        // Truncated and corrupted copies.
        std::size_t k = std::max<std::size_t>(1, std::min<std::size_t>(b_.pull_limit / 4, 64));
        Segment head = copy_items(*x, k);
        out.push_back(WitnessStream::literal(head));
        for (auto& it : head)
          if (!it.whitespace && !it.pair.output.empty() && it.pair.output[0].is_numeral()) {
            it.pair.output[0] = IOToken::numeral(it.pair.output[0].value + 1);
            out.push_back(WitnessStream::literal(head));
            break;
          }
      }
    }
    out.push_back(WitnessStream::empty());
    return out;
  }

  void walk_implication(const FormulaPtr& g, const WitnessStream& s, Path& p) {
    for (const auto& x : probes(g->left)) {
      if (verdict_) return;
      bool honest = depth_ < kMaxProbeDepth && Checker(g->left, b_, ctx_, depth_ + 1).run(x).accepted();
      WitnessStream wx = apply_implication(s, g, x);
      std::size_t lim = limit(wx);
      Segment items = copy_items(wx, lim);
      for (std::size_t i = 0; i < items.size() && !verdict_; ++i) {
        if (items[i].whitespace) continue;
        std::size_t h = wx.source().horizon(i).value_or(x.pulled());
        IOPair pair{p.in, p.out};
        pair.input.push_back(IOToken::prefix(copy_items(x, h)));
        pair.input.insert(pair.input.end(), items[i].pair.input.begin(), items[i].pair.input.end());
        pair.output.insert(pair.output.end(), items[i].pair.output.begin(), items[i].pair.output.end());
        scan(pair);
      }
      if (!honest || verdict_) continue;
      p.in.push_back(IOToken::prefix(copy_items(x, x.pulled())));
      walk(g->right, wx, p);
      p.in.pop_back();
    }
  }

  FormulaPtr root_;
  const Budget& b_;
  const CheckContext& ctx_;
  unsigned depth_;
  std::optional<Verdict> verdict_;
  std::optional<Verdict> pending_;
};

}  // namespace

Verdict check_witness(const FormulaPtr& f, const WitnessStream& w, const Budget& b, const CheckContext& ctx) {
  b.validate();
  return Checker(f, b, ctx, 0).run(w);
}

Verdict check_realizability(const FormulaPtr& f, const Program& code, const Budget& b, const CheckContext& ctx) {
  b.validate();
  CheckContext strict = ctx;
  strict.code_probes_only = true;
  std::size_t quota = std::min<std::size_t>(b.vm_steps, 1000);
  return check_witness(f, run_program(code, f, quota, b.vm_steps), b, strict);
}

}  // namespace ctruth
