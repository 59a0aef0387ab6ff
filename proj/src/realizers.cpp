#include "ctruth/realizers.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ctruth/combinators.hpp"

namespace ctruth {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ProofError(msg); }

// ---------------------------------------------------------------------------
// Parsing

std::string text_arg(const SExpr& e, std::size_t i) {
  if (i >= e.size() || !(e[i].is_string() || e[i].is_atom())) fail("expected a string at " + to_string(e));
  return e[i].text;
}

ProofPtr parse(const SExpr& e) {
  if (!e.is_list() || e.items.empty() || !e[0].is_atom()) fail("expected a proof form, found " + to_string(e));
  auto p = std::make_shared<ProofTerm>();
  const std::string& h = e[0].text;
  auto arity = [&](std::size_t n) {
    if (e.size() != n + 1) fail("'" + h + "' takes " + std::to_string(n) + " operands: " + to_string(e));
  };
  auto index = [&](std::size_t i) {
    const std::string& s = text_arg(e, i);
    if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) fail("expected an index in " + to_string(e));
    return static_cast<std::size_t>(std::stoull(s));
  };
  using K = ProofTerm::Kind;
  try {
    if (h == "hyp") {
      arity(1);
      p->kind = K::Hyp;
      p->index = index(1);
    } else if (h == "lambda") {
      arity(2);
      p->kind = K::Lambda;
      p->name = text_arg(e, 1);
      p->parts = {parse(e[2])};
    } else if (h == "apply") {
      arity(2);
      p->kind = K::Apply;
      p->parts = {parse(e[1]), parse(e[2])};
    } else if (h == "pair") {
      arity(2);
      p->kind = K::Pair;
      p->parts = {parse(e[1]), parse(e[2])};
    } else if (h == "proj") {
      arity(2);
      p->kind = K::Proj;
      p->index = index(1);
      if (p->index > 1) fail("proj takes 0 or 1");
      p->parts = {parse(e[2])};
    } else if (h == "inl" || h == "inr") {
      arity(2);
      p->kind = h == "inl" ? K::Inl : K::Inr;
      p->name = text_arg(e, 1);
      p->parts = {parse(e[2])};
    } else if (h == "case") {
      arity(3);
      p->kind = K::Case;
      p->parts = {parse(e[1]), parse(e[2]), parse(e[3])};
    } else if (h == "witness") {
      arity(3);
      p->kind = K::Witness;
      p->name = text_arg(e, 1);
      p->term = parse_term(text_arg(e, 2));
      p->parts = {parse(e[3])};
    } else if (h == "unpack") {
      arity(3);
      p->kind = K::Unpack;
      p->parts = {parse(e[1]), parse(e[3])};
      p->name = text_arg(e, 2);
    } else if (h == "gen") {
      arity(2);
      p->kind = K::Gen;
      p->name = text_arg(e, 1);
      p->parts = {parse(e[2])};
    } else if (h == "inst") {
      arity(2);
      p->kind = K::Inst;
      p->parts = {parse(e[1])};
      p->term = parse_term(text_arg(e, 2));
    } else if (h == "induction") {
      arity(4);
      p->kind = K::Induction;
      p->name = text_arg(e, 1);
      p->axiom_args = {text_arg(e, 2)};
      p->parts = {parse(e[3]), parse(e[4])};
    } else if (h == "axiom") {
      if (e.size() < 2) fail("axiom needs a name");
      p->kind = K::Axiom;
      p->name = text_arg(e, 1);
      for (std::size_t i = 2; i < e.size(); ++i) p->axiom_args.push_back(text_arg(e, i));
    } else if (h == "markov") {
      arity(2);
      p->kind = K::Markov;
      p->parts = {parse(e[1]), parse(e[2])};
    } else {
      fail("unknown proof constructor '" + h + "'");
    }
  } catch (const ParseError& err) {
    fail(std::string("in ") + to_string(e) + ": " + err.what());
  }
  return p;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Formula texts are kept as written and parsed during checking, when the
// variables in scope are known.
std::string show(const ProofTerm& p) {
  using K = ProofTerm::Kind;
  auto sub = [&](std::size_t i) { return show(*p.parts[i]); };
  switch (p.kind) {
    case K::Hyp:
      return "(hyp " + std::to_string(p.index) + ")";
    case K::Lambda:
      return "(lambda " + quote(p.name) + " " + sub(0) + ")";
    case K::Apply:
      return "(apply " + sub(0) + " " + sub(1) + ")";
    case K::Pair:
      return "(pair " + sub(0) + " " + sub(1) + ")";
    case K::Proj:
      return "(proj " + std::to_string(p.index) + " " + sub(0) + ")";
    case K::Inl:
      return "(inl " + quote(p.name) + " " + sub(0) + ")";
    case K::Inr:
      return "(inr " + quote(p.name) + " " + sub(0) + ")";
    case K::Case:
      return "(case " + sub(0) + " " + sub(1) + " " + sub(2) + ")";
    case K::Witness:
      return "(witness " + quote(p.name) + " " + quote(to_string(*p.term)) + " " + sub(0) + ")";
    case K::Unpack:
      return "(unpack " + sub(0) + " " + p.name + " " + sub(1) + ")";
    case K::Gen:
      return "(gen " + p.name + " " + sub(0) + ")";
    case K::Inst:
      return "(inst " + sub(0) + " " + quote(to_string(*p.term)) + ")";
    case K::Induction:
      return "(induction " + p.name + " " + quote(p.axiom_args[0]) + " " + sub(0) + " " + sub(1) + ")";
    case K::Axiom: {
      std::string s = "(axiom " + p.name;
      for (const auto& a : p.axiom_args) s += " " + quote(a);
      return s + ")";
    }
    case K::Markov:
      return "(markov " + sub(0) + " " + sub(1) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Types

// `~A` and `A -> 0=1` are the same type.
FormulaPtr norm(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Not:
      return Formula::implies(norm(f->left), Formula::falsum());
    case FormulaKind::And:
      return Formula::conj(norm(f->left), norm(f->right));
    case FormulaKind::Or:
      return Formula::disj(norm(f->left), norm(f->right));
    case FormulaKind::Implies:
      return Formula::implies(norm(f->left), norm(f->right));
    case FormulaKind::Exists:
      return Formula::exists(f->name, norm(f->left));
    case FormulaKind::Forall:
      return Formula::forall(f->name, norm(f->left));
    case FormulaKind::Box:
      return Formula::box(norm(f->left));
    default:
      return f;
  }
}

bool same_type(const FormulaPtr& a, const FormulaPtr& b) { return alpha_equivalent(norm(a), norm(b)); }

// Realizers of terminal formulas carry no information.
bool trivial_type(const FormulaPtr& f) {
  FormulaPtr n = norm(f);
  return n->is_terminal() || (n->kind == FormulaKind::Implies && trivial_type(n->right));
}

// Polynomials with natural coefficients, for the `ring` schema.
using Monomial = std::vector<std::string>;
using Poly = std::map<Monomial, BigNat>;

Poly poly(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Const:
      return t.value ? Poly{{{}, BigNat(t.value)}} : Poly{};
    case Term::Kind::Var:
      return Poly{{{t.name}, 1}};
    case Term::Kind::Add: {
      Poly p = poly(*t.left);
      for (const auto& [m, c] : poly(*t.right)) p[m] += c;
      return p;
    }
    case Term::Kind::Mul: {
      Poly a = poly(*t.left), b = poly(*t.right), out;
      for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) {
          Monomial m = ma;
          m.insert(m.end(), mb.begin(), mb.end());
          std::sort(m.begin(), m.end());
          out[m] += ca * cb;
        }
      return out;
    }
  }
  return {};
}

struct Axiom {
  std::string name;
  std::string formula;
  std::string realizer;  // empty: determined by the formula
};

const std::vector<Axiom>& axiom_table() {
  static const std::vector<Axiom> t = {
      {"refl", "A x. x=x", ""},
      {"sym", "A x. A y. (x=y -> y=x)", ""},
      {"trans", "A x. A y. A z. (x=y -> y=z -> x=z)", ""},
      {"succ_cong", "A x. A y. (x=y -> x+1=y+1)", ""},
      {"succ_inj", "A x. A y. (x+1=y+1 -> x=y)", ""},
      {"zero_succ", "A x. (~0=x+1)", ""},
      {"add_zero", "A x. x+0=x", ""},
      {"add_succ", "A x. A y. x+(y+1)=(x+y)+1", ""},
      {"mul_zero", "A x. x*0=0", ""},
      {"mul_succ", "A x. A y. x*(y+1)=x*y+x", ""},
      {"lt_succ", "A x. x<x+1", ""},
      {"lt_zero", "A x. (~x<0)", ""},
      {"eq_dec", "A x. A y. (x=y \\/ ~x=y)", "(lambda a (lambda b (pair (if (= a b) 0 1) 0)))"},
      {"lt_dec", "A x. A y. (x<y \\/ ~x<y)", "(lambda a (lambda b (pair (if (< a b) 0 1) 0)))"},
  };
  return t;
}

struct Hyp {
  FormulaPtr type;
  std::string var;
};

struct Typed {
  FormulaPtr type;
  std::string code;
};

class Extractor {
 public:
  Typed run(const ProofTerm& p) {
    Typed t = go(p);
    if (!is_closed(*t.type)) fail("proof of an open formula: " + to_string(*t.type));
    return t;
  }

 private:
  std::vector<Hyp> hyps_;
  std::map<std::string, std::string> vars_;  // object variable -> machine variable
  std::size_t fresh_ = 0;

  std::string fresh(const std::string& stem) { return stem + std::to_string(fresh_++); }

  std::set<std::string> scope() const {
    std::set<std::string> s;
    for (const auto& [v, _] : vars_) s.insert(v);
    return s;
  }

  FormulaPtr formula(const std::string& text, const std::set<std::string>& extra = {}) {
    std::set<std::string> s = scope();
    s.insert(extra.begin(), extra.end());
    try {
      FormulaPtr f = parse_formula(text, s);
      if (has_box(*f)) fail("box is not available in proof terms: " + text);
      return f;
    } catch (const ParseError& e) {
      fail("in \"" + text + "\": " + e.what());
    } catch (const UnboundVariableError& e) {
      fail("in \"" + text + "\": " + e.what());
    }
  }

  static bool has_box(const Formula& f) {
    if (f.kind == FormulaKind::Box) return true;
    return (f.left && has_box(*f.left)) || (f.right && has_box(*f.right));
  }

  void check_term(const TermPtr& t) {
    for (const auto& v : free_vars(*t))
      if (!vars_.count(v)) fail("variable '" + v + "' is not in scope in " + to_string(*t));
  }

  std::string term_code(const Term& t) {
    switch (t.kind) {
      case Term::Kind::Const:
        return std::to_string(t.value);
      case Term::Kind::Var:
        return vars_.at(t.name);
      case Term::Kind::Add:
        return "(+ " + term_code(*t.left) + " " + term_code(*t.right) + ")";
      case Term::Kind::Mul:
        return "(* " + term_code(*t.left) + " " + term_code(*t.right) + ")";
    }
    return "0";
  }

  // Some realizer of `f`, used where the formula cannot be reached (ex falso).
  std::string dummy(const FormulaPtr& f) {
    switch (f->kind) {
      case FormulaKind::Forall:
      case FormulaKind::Implies:
        return "(lambda " + fresh("d") + " " + dummy(f->kind == FormulaKind::Forall ? f->left : f->right) + ")";
      case FormulaKind::And:
        return "(pair " + dummy(f->left) + " " + dummy(f->right) + ")";
      case FormulaKind::Or:
        return "(pair 0 " + dummy(f->left) + ")";
      case FormulaKind::Exists:
        return "(pair 0 " + dummy(f->left) + ")";
      default:
        return "0";
    }
  }

  Typed with_hyp(const FormulaPtr& type, const std::string& var, const ProofTerm& body) {
    hyps_.push_back({type, var});
    Typed t = go(body);
    hyps_.pop_back();
    return t;
  }

  Typed with_var(const std::string& name, const std::string& var, const std::function<Typed()>& body) {
    auto saved = vars_.find(name) != vars_.end() ? std::optional<std::string>(vars_[name]) : std::nullopt;
    vars_[name] = var;
    Typed t = body();
    if (saved)
      vars_[name] = *saved;
    else
      vars_.erase(name);
    return t;
  }

  bool free_in_hyps(const std::string& v) const {
    return std::any_of(hyps_.begin(), hyps_.end(), [&](const Hyp& h) { return free_vars(*h.type).count(v) > 0; });
  }

  void expect(const FormulaPtr& got, const FormulaPtr& want, const ProofTerm& where) {
    if (!same_type(got, want))
      fail("type mismatch in " + show(where) + ": expected " + to_string(*want) + ", found " + to_string(*got));
  }

  Typed go(const ProofTerm& p) {
    Typed t = node(p);
    if (trivial_type(t.type)) t.code = dummy(norm(t.type));
    return t;
  }

  Typed node(const ProofTerm& p) {
    using K = ProofTerm::Kind;
    switch (p.kind) {
      case K::Hyp: {
        if (p.index >= hyps_.size()) fail("no hypothesis " + std::to_string(p.index));
        const Hyp& h = hyps_[hyps_.size() - 1 - p.index];
        return {h.type, h.var};
      }
      case K::Lambda: {
        FormulaPtr a = formula(p.name);
        std::string h = fresh("h");
        Typed b = with_hyp(a, h, *p.parts[0]);
        return {Formula::implies(a, b.type), "(lambda " + h + " " + b.code + ")"};
      }
      case K::Apply: {
        Typed f = go(*p.parts[0]);
        FormulaPtr ft = norm(f.type);
        if (ft->kind != FormulaKind::Implies) fail("applying a proof of " + to_string(*f.type));
        Typed a = go(*p.parts[1]);
        expect(a.type, ft->left, p);
        return {ft->right, "(" + f.code + " " + a.code + ")"};
      }
      case K::Pair: {
        Typed a = go(*p.parts[0]), b = go(*p.parts[1]);
        return {Formula::conj(a.type, b.type), "(pair " + a.code + " " + b.code + ")"};
      }
      case K::Proj: {
        Typed a = go(*p.parts[0]);
        if (a.type->kind != FormulaKind::And) fail("projecting a proof of " + to_string(*a.type));
        return {p.index == 0 ? a.type->left : a.type->right, (p.index == 0 ? "(fst " : "(snd ") + a.code + ")"};
      }
      case K::Inl:
      case K::Inr: {
        FormulaPtr other = formula(p.name);
        Typed a = go(*p.parts[0]);
        bool left = p.kind == K::Inl;
        return {left ? Formula::disj(a.type, other) : Formula::disj(other, a.type),
                std::string("(pair ") + (left ? "0 " : "1 ") + a.code + ")"};
      }
      case K::Case: {
        Typed d = go(*p.parts[0]);
        if (d.type->kind != FormulaKind::Or) fail("case on a proof of " + to_string(*d.type));
        std::string t = fresh("t"), hl = fresh("h"), hr = fresh("h");
        Typed l = with_hyp(d.type->left, hl, *p.parts[1]);
        Typed r = with_hyp(d.type->right, hr, *p.parts[2]);
        expect(r.type, l.type, p);
        return {l.type, "(let " + t + " " + d.code + " (if (= (fst " + t + ") 0) (let " + hl + " (snd " + t + ") " +
                            l.code + ") (let " + hr + " (snd " + t + ") " + r.code + ")))"};
      }
      case K::Witness: {
        FormulaPtr e = formula(p.name);
        if (e->kind != FormulaKind::Exists) fail("witness needs an existential formula, found " + p.name);
        check_term(p.term);
        Typed a = go(*p.parts[0]);
        expect(a.type, substitute_term(e->left, e->name, p.term), p);
        return {e, "(pair " + term_code(*p.term) + " " + a.code + ")"};
      }
      case K::Unpack: {
        Typed e = go(*p.parts[0]);
        if (e.type->kind != FormulaKind::Exists) fail("unpacking a proof of " + to_string(*e.type));
        const std::string& y = p.name;
        if (vars_.count(y)) fail("unpack variable '" + y + "' is already in scope");
        std::string t = fresh("t"), v = fresh("v"), h = fresh("h");
        FormulaPtr inst = substitute_term(e.type->left, e.type->name, Term::var(y));
        Typed b = with_var(y, v, [&] { return with_hyp(inst, h, *p.parts[1]); });
        if (free_vars(*b.type).count(y)) fail("unpack variable '" + y + "' escapes in " + to_string(*b.type));
        return {b.type, "(let " + t + " " + e.code + " (let " + v + " (fst " + t + ") (let " + h + " (snd " + t +
                            ") " + b.code + ")))"};
      }
      case K::Gen: {
        const std::string& x = p.name;
        if (free_in_hyps(x)) fail("cannot generalize '" + x + "': free in a hypothesis");
        std::string v = fresh("v");
        Typed b = with_var(x, v, [&] { return go(*p.parts[0]); });
        return {Formula::forall(x, b.type), "(lambda " + v + " " + b.code + ")"};
      }
      case K::Inst: {
        Typed a = go(*p.parts[0]);
        if (a.type->kind != FormulaKind::Forall) fail("instantiating a proof of " + to_string(*a.type));
        check_term(p.term);
        return {substitute_term(a.type->left, a.type->name, p.term), "(" + a.code + " " + term_code(*p.term) + ")"};
      }
      case K::Induction: {
        const std::string& x = p.name;
        FormulaPtr b = formula(p.axiom_args[0], {x});
        Typed base = go(*p.parts[0]);
        expect(base.type, substitute_term(b, x, Term::constant(0)), p);
        Typed step = go(*p.parts[1]);
        auto succ = substitute_term(b, x, Term::add(Term::var(x), Term::constant(1)));
        expect(step.type, Formula::forall(x, Formula::implies(b, succ)), p);
        std::string f = fresh("f"), v = fresh("v");
        return {Formula::forall(x, b), "(rec " + f + " " + v + " (if (= " + v + " 0) " + base.code + " ((" +
                                           step.code + " (- " + v + " 1)) (" + f + " (- " + v + " 1)))))"};
      }
      case K::Axiom:
        return axiom(p);
      case K::Markov: {
        Typed d = go(*p.parts[0]);
        FormulaPtr dt = norm(d.type);
        if (dt->kind != FormulaKind::Forall || dt->left->kind != FormulaKind::Or)
          fail("markov needs a decider A x. (B \\/ ~B), found " + to_string(*d.type));
        const std::string& x = dt->name;
        FormulaPtr a = dt->left->left;
        expect(dt->left->right, Formula::negation(a), p);
        Typed n = go(*p.parts[1]);
        expect(n.type, Formula::negation(Formula::forall(x, Formula::negation(a))), p);
        std::string dv = fresh("d"), m = fresh("m"), y = fresh("y");
        // Recover the bound variable's name from the decider as written.
        FormulaPtr result = Formula::exists(d.type->name, d.type->left->left);
        return {result, "(let " + dv + " " + d.code + " (let " + m + " (search " + y + " (= (fst (" + dv + " " + y +
                            ")) 0)) (pair " + m + " (snd (" + dv + " " + m + ")))))"};
      }
    }
    fail("unknown proof term");
  }

  Typed axiom(const ProofTerm& p) {
    const auto& args = p.axiom_args;
    if (p.name == "efq") {
      if (args.size() != 1) fail("efq takes a formula");
      FormulaPtr a = formula(args[0]);
      return {Formula::implies(Formula::falsum(), a), "(lambda " + fresh("d") + " " + dummy(a) + ")"};
    }
    if (p.name == "ring") {
      if (args.size() != 1) fail("ring takes an equation");
      FormulaPtr e = formula(args[0]);
      if (e->kind != FormulaKind::Atom || e->rel != Relation::Eq) fail("ring takes an equation, found " + args[0]);
      auto clean = [](Poly q) {
        std::erase_if(q, [](const auto& kv) { return kv.second == 0; });
        return q;
      };
      if (clean(poly(*e->lhs)) != clean(poly(*e->rhs))) fail("not a polynomial identity: " + args[0]);
      return {e, "0"};
    }
    if (p.name == "eq_subst") {
      // (axiom eq_subst "x" "B"): A l. A r. (l=r -> B[l/x] -> B[r/x])
      if (args.size() != 2) fail("eq_subst takes a variable and a formula");
      const std::string& x = args[0];
      FormulaPtr b = formula(args[1], {x});
      std::set<std::string> avoid = free_vars(*b);
      for (const auto& [v, _] : vars_) avoid.insert(v);
      std::string l = "l", r = "r";
      while (avoid.count(l)) l += "_";
      while (avoid.count(r) || r == l) r += "_";
      FormulaPtr body = Formula::implies(
          Formula::eq(Term::var(l), Term::var(r)),
          Formula::implies(substitute_term(b, x, Term::var(l)), substitute_term(b, x, Term::var(r))));
      std::string w = fresh("w");
      return {Formula::forall(l, Formula::forall(r, body)),
              "(lambda " + fresh("d") + " (lambda " + fresh("d") + " (lambda " + fresh("d") + " (lambda " + w + " " +
                  w + "))))"};
    }
    for (const auto& a : axiom_table())
      if (a.name == p.name) {
        if (!args.empty()) fail("axiom " + p.name + " takes no arguments");
        FormulaPtr f = parse_formula(a.formula);
        return {f, a.realizer.empty() ? dummy(f) : a.realizer};
      }
    fail("unknown axiom '" + p.name + "'");
  }
};

}  // namespace

ProofPtr parse_proof(const SExpr& e) { return parse(e); }

ProofPtr parse_proof(const std::string& text) {
  try {
    return parse(parse_sexpr(text));
  } catch (const SExprError& e) {
    throw ProofError(e.what());
  }
}

std::string to_string(const ProofTerm& p) { return show(p); }

std::vector<std::string> axiom_names() {
  std::vector<std::string> out;
  for (const auto& a : axiom_table()) out.push_back(a.name);
  for (const char* s : {"efq", "eq_subst", "ring"}) out.push_back(s);
  return out;
}

FormulaPtr typecheck(const ProofTerm& p) { return Extractor().run(p).type; }

Program extract(const ProofTerm& p) {
  Typed t = Extractor().run(p);
  return parse_program("(witness " + t.code + ")");
}

bool proves(const ProofTerm& p, const FormulaPtr& f) { return same_type(typecheck(p), f); }

// ---------------------------------------------------------------------------
// Corpus

CorpusEntry parse_corpus_entry(const std::string& text, std::string name) {
  CorpusEntry c;
  c.name = std::move(name);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(";", 0) != 0) continue;
    std::string body = line.substr(1);
    body.erase(0, body.find_first_not_of(' '));
    if (body.rfind("formula:", 0) == 0) {
      c.formula = parse_formula(body.substr(8));
    } else if (body.rfind("budget:", 0) == 0) {
      std::istringstream fields(body.substr(7));
      std::string kv;
      while (fields >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ProofError("bad budget field '" + kv + "'");
        std::string k = kv.substr(0, eq);
        std::size_t v = std::stoull(kv.substr(eq + 1));
        if (k == "numerals")
          c.budget.numeral_bound = v;
        else if (k == "steps")
          c.budget.vm_steps = v;
        else if (k == "pulls")
          c.budget.pull_limit = v;
        else
          throw ProofError("unknown budget field '" + k + "'");
      }
    }
  }
  if (!c.formula) throw ProofError("missing '; formula:' header in " + c.name);
  c.proof = parse_proof(text);
  return c;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".proof") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<CorpusEntry> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    out.push_back(parse_corpus_entry(ss.str(), f.stem().string()));
  }
  return out;
}

ProbeFn realizer_probes(const Budget& b, const std::vector<CorpusEntry>& corpus) {
  return [b, corpus](const FormulaPtr& a) {
    std::vector<WitnessStream> out;
    if (classify(a).sigma03_shape)
      if (auto w = synthesize_sigma03(a, b)) out.push_back(*w);
    for (const auto& c : corpus)
      if (alpha_equivalent(c.formula, a))
        out.push_back(run_program(extract(*c.proof), a, std::min<std::size_t>(b.vm_steps, 1000), b.vm_steps));
    return out;
  };
}

// ---------------------------------------------------------------------------
// Markov

namespace {

class MarkovSource : public Source {
 public:
  MarkovSource(const Program& decider, FormulaPtr decided, std::size_t steps)
      : decided_(std::move(decided)), steps_(steps) {
    std::size_t s = steps_;
    try {
      decider_ = evaluate_program(decider, s);
    } catch (const std::exception&) {
      stuck_ = true;
    }
  }

  Item next() override {
    if (found_) return found_->at(emitted_++);
    if (stuck_) return Item::space();
    try {
      std::size_t s = steps_;
      Value answer = force(call(decider_, Value::number(n_), s));
      if (answer.kind != Value::Kind::Pair) throw VmError("the decider must answer with a selector");
      const Value& sel = force(answer.pair->first);
      if (sel.kind == Value::Kind::Num && sel.num == 0) {
        FormulaPtr e = Formula::exists(decided_->name, decided_->left->left);
        found_ = serialize_value(e, Value::make_pair(Value::number(n_), answer.pair->second), steps_);
        return found_->at(emitted_++);
      }
      ++n_;
    } catch (const std::exception&) {
      stuck_ = true;
    }
    return Item::space();
  }

 private:
  FormulaPtr decided_;
  std::size_t steps_;
  Value decider_;
  Nat n_ = 0;
  bool stuck_ = false;
  std::optional<WitnessStream> found_;
  std::size_t emitted_ = 0;
};

}  // namespace

namespace {

std::string test_code(const Formula& f, const std::string& x) {
  std::function<std::string(const Term&)> term = [&](const Term& t) -> std::string {
    switch (t.kind) {
      case Term::Kind::Const:
        return std::to_string(t.value);
      case Term::Kind::Var:
        if (t.name != x) throw ShapeError("free variable '" + t.name + "' in a decided formula");
        return "v";
      case Term::Kind::Add:
        return "(+ " + term(*t.left) + " " + term(*t.right) + ")";
      case Term::Kind::Mul:
        return "(* " + term(*t.left) + " " + term(*t.right) + ")";
    }
    return "0";
  };
  switch (f.kind) {
    case FormulaKind::Atom:
      return std::string(f.rel == Relation::Eq ? "(= " : "(< ") + term(*f.lhs) + " " + term(*f.rhs) + ")";
    case FormulaKind::Not:
      return "(if " + test_code(*f.left, x) + " 0 1)";
    case FormulaKind::And:
      return "(if " + test_code(*f.left, x) + " " + test_code(*f.right, x) + " 0)";
    case FormulaKind::Or:
      return "(if " + test_code(*f.left, x) + " 1 " + test_code(*f.right, x) + ")";
    case FormulaKind::Implies:
      return "(if " + test_code(*f.left, x) + " " + test_code(*f.right, x) + " 1)";
    default:
      throw ShapeError("not quantifier-free: " + to_string(f));
  }
}

// A witness for quantifier-free `f` whenever it holds.
std::string witness_code(const Formula& f, const std::string& x) {
  switch (f.kind) {
    case FormulaKind::And:
      return "(pair " + witness_code(*f.left, x) + " " + witness_code(*f.right, x) + ")";
    case FormulaKind::Or:
      return "(if " + test_code(*f.left, x) + " (pair 0 " + witness_code(*f.left, x) + ") (pair 1 " +
             witness_code(*f.right, x) + "))";
    case FormulaKind::Implies:
      return "(lambda u " + witness_code(*f.right, x) + ")";
    default:
      test_code(f, x);
      return "0";
  }
}

}  // namespace

Program decider_program(const FormulaPtr& decided) {
  if (decided->kind != FormulaKind::Forall || decided->left->kind != FormulaKind::Or)
    throw ShapeError("expected A x. (B \\/ ~B), found " + to_string(*decided));
  const FormulaPtr& b = decided->left->left;
  if (!same_type(decided->left->right, Formula::negation(b)))
    throw ShapeError("expected A x. (B \\/ ~B), found " + to_string(*decided));
  return parse_program("(witness (lambda v (pair (if " + test_code(*b, decided->name) + " 0 1) " +
                       witness_code(*b, decided->name) + ")))");
}

WitnessStream markov_realizer(const Program& decider, const FormulaPtr& decided, const WitnessStream&,
                              std::size_t steps_per_query) {
  if (decided->kind != FormulaKind::Forall || decided->left->kind != FormulaKind::Or)
    throw ShapeError("expected A x. (B \\/ ~B), found " + to_string(*decided));
  return WitnessStream(std::make_shared<MarkovSource>(decider, decided, steps_per_query));
}

// ---------------------------------------------------------------------------
// Transfinite induction

TiScheduler::TiScheduler(TiStep step) : step_(std::move(step)) {}

void TiScheduler::request(Nat n) {
  if (index_.count(n)) return;
  index_[n] = table_.size();
  table_.push_back({n, step_.queries(n), {}, std::nullopt, 0});
}

std::size_t TiScheduler::scan() {
  ++scans_;
  std::size_t answered = 0;
  std::size_t size = table_.size();
  for (std::size_t i = 0; i < size; ++i) {
    if (table_[i].answer) continue;
    if (table_[i].deps.size() != table_[i].needs.size()) {
      std::vector<std::size_t> deps;
      for (std::size_t k = 0; k < table_[i].needs.size(); ++k) {
        request(table_[i].needs[k]);
        deps.push_back(index_.at(table_[i].needs[k]));
      }
      table_[i].deps = std::move(deps);
    }
    bool ready = true;
    for (std::size_t d : table_[i].deps) ready = ready && table_[d].answer.has_value();
    if (!ready) continue;
    std::vector<WitnessStream> inputs;
    for (std::size_t d : table_[i].deps) inputs.push_back(*table_[d].answer);
    Entry& e = table_[i];
    e.answer = step_.conclude(e.n, inputs);
    e.scan = scans_;
    order_.push_back(e.n);
    ++answered;
  }
  return answered;
}

std::optional<WitnessStream> TiScheduler::answer(Nat n) const {
  auto it = index_.find(n);
  if (it == index_.end()) return std::nullopt;
  return table_[it->second].answer;
}

std::vector<Nat> TiScheduler::waiting() const {
  std::vector<Nat> out;
  for (const auto& e : table_)
    if (!e.answer) out.push_back(e.n);
  return out;
}

std::optional<std::size_t> TiScheduler::answered_in(Nat n) const {
  auto it = index_.find(n);
  if (it == index_.end() || !table_[it->second].answer) return std::nullopt;
  return table_[it->second].scan;
}

namespace {

class TiSource : public Source {
 public:
  explicit TiSource(TiStep step) : sched_(std::move(step)) {}

  Item next() override {
    sched_.request(arrivals_++);
    sched_.scan();
    const auto& order = sched_.answer_order();
    for (; seen_ < order.size(); ++seen_) cursors_.push_back({order[seen_], *sched_.answer(order[seen_]), 0});
    for (std::size_t tries = 0; tries < cursors_.size(); ++tries) {
      std::size_t i = turn_++ % cursors_.size();
      Cursor& c = cursors_[i];
      auto len = c.stream.known_length();
      if (len && c.next >= *len) continue;
      Item it = c.stream.at(c.next++);
      if (it.whitespace) return it;
      it.pair.input.insert(it.pair.input.begin(), IOToken::numeral(c.n));
      return it;
    }
    return Item::space();
  }

 private:
  struct Cursor {
    Nat n;
    WitnessStream stream;
    std::size_t next;
  };

  TiScheduler sched_;
  Nat arrivals_ = 0;
  std::size_t seen_ = 0;
  std::vector<Cursor> cursors_;
  std::size_t turn_ = 0;
};

}  // namespace

WitnessStream ti_realizer(TiStep step) { return WitnessStream(std::make_shared<TiSource>(std::move(step))); }

}  // namespace ctruth
