#include "ctruth/formula.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace ctruth {

// ---------------------------------------------------------------------------
// Construction and equality

TermPtr Term::constant(Nat v) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Const;
  t->value = v;
  return t;
}

TermPtr Term::var(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Var;
  t->name = std::move(name);
  return t;
}

TermPtr Term::add(TermPtr l, TermPtr r) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Add;
  t->left = std::move(l);
  t->right = std::move(r);
  return t;
}

TermPtr Term::mul(TermPtr l, TermPtr r) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Mul;
  t->left = std::move(l);
  t->right = std::move(r);
  return t;
}

bool operator==(const Term& a, const Term& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Term::Kind::Const:
      return a.value == b.value;
    case Term::Kind::Var:
      return a.name == b.name;
    case Term::Kind::Add:
    case Term::Kind::Mul:
      return *a.left == *b.left && *a.right == *b.right;
  }
  return false;
}

bool same_term(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

namespace {

std::shared_ptr<Formula> make(FormulaKind kind) {
  auto f = std::make_shared<Formula>();
  f->kind = kind;
  return f;
}

}  // namespace

FormulaPtr Formula::atom(Relation rel, TermPtr lhs, TermPtr rhs) {
  auto f = make(FormulaKind::Atom);
  f->rel = rel;
  f->lhs = std::move(lhs);
  f->rhs = std::move(rhs);
  return f;
}

FormulaPtr Formula::eq(TermPtr lhs, TermPtr rhs) { return atom(Relation::Eq, std::move(lhs), std::move(rhs)); }
FormulaPtr Formula::lt(TermPtr lhs, TermPtr rhs) { return atom(Relation::Lt, std::move(lhs), std::move(rhs)); }

FormulaPtr Formula::pred(std::string name, std::vector<TermPtr> args) {
  auto f = make(FormulaKind::Pred);
  f->name = std::move(name);
  f->args = std::move(args);
  return f;
}

FormulaPtr Formula::negation(FormulaPtr body) {
  auto f = make(FormulaKind::Not);
  f->left = std::move(body);
  return f;
}

FormulaPtr Formula::conj(FormulaPtr l, FormulaPtr r) {
  auto f = make(FormulaKind::And);
  f->left = std::move(l);
  f->right = std::move(r);
  return f;
}

FormulaPtr Formula::disj(FormulaPtr l, FormulaPtr r) {
  auto f = make(FormulaKind::Or);
  f->left = std::move(l);
  f->right = std::move(r);
  return f;
}

FormulaPtr Formula::implies(FormulaPtr antecedent, FormulaPtr consequent) {
  auto f = make(FormulaKind::Implies);
  f->left = std::move(antecedent);
  f->right = std::move(consequent);
  return f;
}

FormulaPtr Formula::exists(std::string var, FormulaPtr body) {
  auto f = make(FormulaKind::Exists);
  f->name = std::move(var);
  f->left = std::move(body);
  return f;
}

FormulaPtr Formula::forall(std::string var, FormulaPtr body) {
  auto f = make(FormulaKind::Forall);
  f->name = std::move(var);
  f->left = std::move(body);
  return f;
}

FormulaPtr Formula::box(FormulaPtr body) {
  auto f = make(FormulaKind::Box);
  f->left = std::move(body);
  return f;
}

FormulaPtr Formula::verum() { return eq(Term::constant(0), Term::constant(0)); }
FormulaPtr Formula::falsum() { return eq(Term::constant(0), Term::constant(1)); }

bool operator==(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case FormulaKind::Atom:
      return a.rel == b.rel && *a.lhs == *b.lhs && *a.rhs == *b.rhs;
    case FormulaKind::Pred:
      if (a.name != b.name || a.args.size() != b.args.size()) return false;
      for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!(*a.args[i] == *b.args[i])) return false;
      return true;
    case FormulaKind::Not:
    case FormulaKind::Box:
      return *a.left == *b.left;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
      return *a.left == *b.left && *a.right == *b.right;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      return a.name == b.name && *a.left == *b.left;
  }
  return false;
}

bool same_formula(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

namespace {

using Renaming = std::vector<std::pair<std::string, std::string>>;

bool alpha_term(const Term& a, const Term& b, const Renaming& env) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Term::Kind::Const:
      return a.value == b.value;
    case Term::Kind::Var:
      for (auto it = env.rbegin(); it != env.rend(); ++it) {
        if (it->first == a.name || it->second == b.name) return it->first == a.name && it->second == b.name;
      }
      return a.name == b.name;
    default:
      return alpha_term(*a.left, *b.left, env) && alpha_term(*a.right, *b.right, env);
  }
}

bool alpha_formula(const Formula& a, const Formula& b, Renaming& env) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case FormulaKind::Atom:
      return a.rel == b.rel && alpha_term(*a.lhs, *b.lhs, env) && alpha_term(*a.rhs, *b.rhs, env);
    case FormulaKind::Pred:
      if (a.name != b.name || a.args.size() != b.args.size()) return false;
      for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!alpha_term(*a.args[i], *b.args[i], env)) return false;
      return true;
    case FormulaKind::Not:
    case FormulaKind::Box:
      return alpha_formula(*a.left, *b.left, env);
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
      return alpha_formula(*a.left, *b.left, env) && alpha_formula(*a.right, *b.right, env);
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      env.emplace_back(a.name, b.name);
      bool ok = alpha_formula(*a.left, *b.left, env);
      env.pop_back();
      return ok;
    }
  }
  return false;
}

}  // namespace

bool alpha_equivalent(const FormulaPtr& a, const FormulaPtr& b) {
  Renaming env;
  return alpha_formula(*a, *b, env);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

enum TermLevel { kSum = 0, kProduct = 1, kFactor = 2 };

int term_level(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Add:
      return kSum;
    case Term::Kind::Mul:
      return kProduct;
    default:
      return kFactor;
  }
}

void print_term(std::ostream& os, const Term& t, int min_level) {
  bool parens = term_level(t) < min_level;
  if (parens) os << '(';
  switch (t.kind) {
    case Term::Kind::Const:
      os << t.value;
      break;
    case Term::Kind::Var:
      os << t.name;
      break;
    case Term::Kind::Add:
      print_term(os, *t.left, kSum);
      os << '+';
      print_term(os, *t.right, kProduct);
      break;
    case Term::Kind::Mul:
      print_term(os, *t.left, kProduct);
      os << '*';
      print_term(os, *t.right, kFactor);
      break;
  }
  if (parens) os << ')';
}

enum FormulaLevel { kImp = 0, kDisj = 1, kConj = 2, kNeg = 3, kQuant = 4, kAtom = 5 };

int formula_level(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::Implies:
      return kImp;
    case FormulaKind::Or:
      return kDisj;
    case FormulaKind::And:
      return kConj;
    case FormulaKind::Not:
      return kNeg;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
    case FormulaKind::Box:
      return kQuant;
    default:
      return kAtom;
  }
}

void print_formula(std::ostream& os, const Formula& f, int min_level) {
  bool parens = formula_level(f) < min_level;
  if (parens) os << '(';
  switch (f.kind) {
    case FormulaKind::Atom:
      print_term(os, *f.lhs, kSum);
      os << (f.rel == Relation::Eq ? "=" : "<");
      print_term(os, *f.rhs, kSum);
      break;
    case FormulaKind::Pred:
      os << f.name;
      if (!f.args.empty()) {
        os << '(';
        for (std::size_t i = 0; i < f.args.size(); ++i) {
          if (i) os << ", ";
          print_term(os, *f.args[i], kSum);
        }
        os << ')';
      }
      break;
    case FormulaKind::Not:
      os << '~';
      print_formula(os, *f.left, kNeg);
      break;
    case FormulaKind::And:
      print_formula(os, *f.left, kConj);
      os << " /\\ ";
      print_formula(os, *f.right, kNeg);
      break;
    case FormulaKind::Or:
      print_formula(os, *f.left, kDisj);
      os << " \\/ ";
      print_formula(os, *f.right, kConj);
      break;
    case FormulaKind::Implies:
      print_formula(os, *f.left, kDisj);
      os << " -> ";
      print_formula(os, *f.right, kImp);
      break;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      os << (f.kind == FormulaKind::Exists ? "E " : "A ") << f.name << ". ";
      print_formula(os, *f.left, kQuant);
      break;
    case FormulaKind::Box:
      os << "box ";
      print_formula(os, *f.left, kQuant);
      break;
  }
  if (parens) os << ')';
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  print_term(os, t, kSum);
  return os.str();
}

std::string to_string(const Formula& f) {
  std::ostringstream os;
  print_formula(os, f, kImp);
  return os.str();
}

// ---------------------------------------------------------------------------
// Parsing

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::runtime_error("syntax error at " + std::to_string(position) + ": " + message), position_(position) {}

namespace {

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

UnboundVariableError::UnboundVariableError(std::vector<std::string> names)
    : std::runtime_error("unbound variable: " + join_names(names)), names_(std::move(names)) {}

namespace {

enum class Tok {
  Ident,   // lower-case identifier
  Upper,   // upper-case word (quantifier keyword or predicate symbol)
  Number,
  LParen,
  RParen,
  Comma,
  Dot,
  Eq,
  Lt,
  Plus,
  Star,
  Tilde,
  And,
  Or,
  Arrow,
  Iff,
  Box,
  End
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    auto starts = [&](const char* lit) { return s.compare(i, std::char_traits<char>::length(lit), lit) == 0; };
    if (std::islower(static_cast<unsigned char>(c))) {
      while (i < s.size() && (std::islower(static_cast<unsigned char>(s[i])) ||
                              std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '_'))
        ++i;
      std::string word = s.substr(start, i - start);
      if (word == "forall" || word == "exists")
        out.push_back({Tok::Upper, word == "forall" ? "A" : "E", start});
      else
        out.push_back({word == "box" ? Tok::Box : Tok::Ident, word, start});
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::Upper, s.substr(start, i - start), start});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({Tok::Number, s.substr(start, i - start), start});
    } else if (starts("<->")) {
      out.push_back({Tok::Iff, "<->", start});
      i += 3;
    } else if (starts("->")) {
      out.push_back({Tok::Arrow, "->", start});
      i += 2;
    } else if (starts("/\\")) {
      out.push_back({Tok::And, "/\\", start});
      i += 2;
    } else if (starts("\\/")) {
      out.push_back({Tok::Or, "\\/", start});
      i += 2;
    } else {
      Tok k;
      switch (c) {
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case ',': k = Tok::Comma; break;
        case '.': k = Tok::Dot; break;
        case '=': k = Tok::Eq; break;
        case '<': k = Tok::Lt; break;
        case '+': k = Tok::Plus; break;
        case '*': k = Tok::Star; break;
        case '~': k = Tok::Tilde; break;
        default:
          throw ParseError(start, std::string("unexpected character '") + c + "'");
      }
      out.push_back({k, std::string(1, c), start});
      ++i;
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  FormulaPtr formula_eof() {
    auto f = imp();
    expect(Tok::End, "end of input");
    return f;
  }

  TermPtr term_eof() {
    auto t = sum();
    expect(Tok::End, "end of input");
    return t;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok k, const char* what) {
    if (!at(k)) {
      const auto& t = peek();
      throw ParseError(t.pos, std::string("expected ") + what + (t.kind == Tok::End ? ", found end of input"
                                                                                     : ", found '" + t.text + "'"));
    }
    return toks_[pos_++];
  }

  FormulaPtr imp() {
    auto lhs = disj();
    if (accept(Tok::Arrow)) return Formula::implies(lhs, imp());
    if (accept(Tok::Iff)) {
      auto rhs = imp();
      return Formula::conj(Formula::implies(lhs, rhs), Formula::implies(rhs, lhs));
    }
    return lhs;
  }

  FormulaPtr disj() {
    auto f = conj();
    while (accept(Tok::Or)) f = Formula::disj(f, conj());
    return f;
  }

  FormulaPtr conj() {
    auto f = neg();
    while (accept(Tok::And)) f = Formula::conj(f, neg());
    return f;
  }

  FormulaPtr neg() {
    if (accept(Tok::Tilde)) return Formula::negation(neg());
    return quant();
  }

  FormulaPtr quant() {
    if (at(Tok::Upper) && (peek().text == "A" || peek().text == "E")) {
      bool universal = peek().text == "A";
      ++pos_;
      std::string var = expect(Tok::Ident, "bound variable").text;
      TermPtr bound;
      if (accept(Tok::Lt)) bound = sum();
      accept(Tok::Dot);
      auto body = quant();
      if (bound) {
        auto guard = Formula::lt(Term::var(var), bound);
        return universal ? Formula::forall(var, Formula::implies(guard, body))
                         : Formula::exists(var, Formula::conj(guard, body));
      }
      return universal ? Formula::forall(var, body) : Formula::exists(var, body);
    }
    if (accept(Tok::Box)) return Formula::box(quant());
    return atom_or_paren();
  }

  FormulaPtr atom_or_paren() {
    if (at(Tok::Upper)) return predicate();
    if (at(Tok::LParen)) {
      std::size_t saved = pos_;
      try {
        return atom();
      } catch (const ParseError&) {
        pos_ = saved;
      }
      expect(Tok::LParen, "'('");
      auto f = imp();
      expect(Tok::RParen, "')'");
      return f;
    }
    return atom();
  }

  FormulaPtr predicate() {
    const auto& tok = expect(Tok::Upper, "predicate symbol");
    std::vector<TermPtr> args;
    if (accept(Tok::LParen)) {
      args.push_back(sum());
      while (accept(Tok::Comma)) args.push_back(sum());
      expect(Tok::RParen, "')'");
    }
    return Formula::pred(tok.text, std::move(args));
  }

  FormulaPtr atom() {
    auto lhs = sum();
    if (accept(Tok::Eq)) return Formula::eq(lhs, sum());
    if (accept(Tok::Lt)) return Formula::lt(lhs, sum());
    const auto& t = peek();
    throw ParseError(t.pos, "expected '=' or '<' in atomic formula");
  }

  TermPtr sum() {
    auto t = product();
    while (accept(Tok::Plus)) t = Term::add(t, product());
    return t;
  }

  TermPtr product() {
    auto t = factor();
    while (accept(Tok::Star)) t = Term::mul(t, factor());
    return t;
  }

  TermPtr factor() {
    if (at(Tok::Number)) {
      const auto& tok = toks_[pos_++];
      try {
        return Term::constant(std::stoull(tok.text));
      } catch (const std::out_of_range&) {
        throw ParseError(tok.pos, "numeral out of range");
      }
    }
    if (at(Tok::Ident)) return Term::var(toks_[pos_++].text);
    if (accept(Tok::LParen)) {
      auto t = sum();
      expect(Tok::RParen, "')'");
      return t;
    }
    const auto& t = peek();
    throw ParseError(t.pos, t.kind == Tok::End ? "expected term, found end of input"
                                               : "expected term, found '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

FormulaPtr parse_formula(const std::string& text, const std::set<std::string>& declared) {
  auto f = Parser(text).formula_eof();
  std::vector<std::string> unbound;
  for (const auto& v : free_vars(*f))
    if (!declared.count(v)) unbound.push_back(v);
  if (!unbound.empty()) throw UnboundVariableError(std::move(unbound));
  return f;
}

TermPtr parse_term(const std::string& text) { return Parser(text).term_eof(); }

// ---------------------------------------------------------------------------
// Free variables and substitution

namespace {

void collect(const Term& t, std::set<std::string>& out) {
  switch (t.kind) {
    case Term::Kind::Const:
      break;
    case Term::Kind::Var:
      out.insert(t.name);
      break;
    default:
      collect(*t.left, out);
      collect(*t.right, out);
  }
}

void collect(const Formula& f, std::set<std::string>& out) {
  switch (f.kind) {
    case FormulaKind::Atom:
      collect(*f.lhs, out);
      collect(*f.rhs, out);
      break;
    case FormulaKind::Pred:
      for (const auto& a : f.args) collect(*a, out);
      break;
    case FormulaKind::Not:
    case FormulaKind::Box:
      collect(*f.left, out);
      break;
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
      collect(*f.left, out);
      collect(*f.right, out);
      break;
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      std::set<std::string> inner;
      collect(*f.left, inner);
      inner.erase(f.name);
      out.insert(inner.begin(), inner.end());
      break;
    }
  }
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  for (unsigned i = 1;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (!avoid.count(candidate)) return candidate;
  }
}

bool occurs(const Term& t, const std::string& var) {
  switch (t.kind) {
    case Term::Kind::Const:
      return false;
    case Term::Kind::Var:
      return t.name == var;
    default:
      return occurs(*t.left, var) || occurs(*t.right, var);
  }
}

bool occurs_free(const Formula& f, const std::string& var) {
  switch (f.kind) {
    case FormulaKind::Atom:
      return occurs(*f.lhs, var) || occurs(*f.rhs, var);
    case FormulaKind::Pred:
      return std::any_of(f.args.begin(), f.args.end(), [&](const TermPtr& a) { return occurs(*a, var); });
    case FormulaKind::Not:
    case FormulaKind::Box:
      return occurs_free(*f.left, var);
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
      return occurs_free(*f.left, var) || occurs_free(*f.right, var);
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      return f.name != var && occurs_free(*f.left, var);
  }
  return false;
}

FormulaPtr subst(const FormulaPtr& f, const std::string& var, const TermPtr& t, const std::set<std::string>& t_vars) {
  if (!occurs_free(*f, var)) return f;
  switch (f->kind) {
    case FormulaKind::Atom:
      return Formula::atom(f->rel, substitute_term(f->lhs, var, t), substitute_term(f->rhs, var, t));
    case FormulaKind::Pred: {
      std::vector<TermPtr> args;
      args.reserve(f->args.size());
      for (const auto& a : f->args) args.push_back(substitute_term(a, var, t));
      return Formula::pred(f->name, std::move(args));
    }
    case FormulaKind::Not:
      return Formula::negation(subst(f->left, var, t, t_vars));
    case FormulaKind::Box:
      return Formula::box(subst(f->left, var, t, t_vars));
    case FormulaKind::And:
      return Formula::conj(subst(f->left, var, t, t_vars), subst(f->right, var, t, t_vars));
    case FormulaKind::Or:
      return Formula::disj(subst(f->left, var, t, t_vars), subst(f->right, var, t, t_vars));
    case FormulaKind::Implies:
      return Formula::implies(subst(f->left, var, t, t_vars), subst(f->right, var, t, t_vars));
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      std::string bound = f->name;
      FormulaPtr body = f->left;
      if (t_vars.count(bound)) {
        std::set<std::string> avoid = free_vars(*body);
        avoid.insert(t_vars.begin(), t_vars.end());
        avoid.insert(var);
        std::string renamed = fresh_name(bound, avoid);
        body = subst(body, bound, Term::var(renamed), {renamed});
        bound = renamed;
      }
      body = subst(body, var, t, t_vars);
      return f->kind == FormulaKind::Exists ? Formula::exists(bound, body) : Formula::forall(bound, body);
    }
  }
  return f;
}

}  // namespace

std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  collect(t, out);
  return out;
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  collect(f, out);
  return out;
}

TermPtr substitute_term(const TermPtr& t, const std::string& var, const TermPtr& replacement) {
  switch (t->kind) {
    case Term::Kind::Const:
      return t;
    case Term::Kind::Var:
      return t->name == var ? replacement : t;
    case Term::Kind::Add:
      return Term::add(substitute_term(t->left, var, replacement), substitute_term(t->right, var, replacement));
    case Term::Kind::Mul:
      return Term::mul(substitute_term(t->left, var, replacement), substitute_term(t->right, var, replacement));
  }
  return t;
}

FormulaPtr substitute_term(const FormulaPtr& f, const std::string& var, const TermPtr& t) {
  return subst(f, var, t, free_vars(*t));
}

FormulaPtr substitute(const FormulaPtr& f, const std::string& var, Nat n) {
  if (!occurs_free(*f, var)) throw SubstitutionError("variable '" + var + "' is not free in " + to_string(*f));
  return subst(f, var, Term::constant(n), {});
}

// ---------------------------------------------------------------------------
// Classification

namespace {

void walk_polarity(const Formula& f, Position& pos, Polarity pol, std::map<Position, Polarity>& out) {
  out[pos] = pol;
  auto flip = [](Polarity p) { return p == Polarity::Positive ? Polarity::Negative : Polarity::Positive; };
  auto child = [&](int idx, const Formula& c, Polarity p) {
    pos.push_back(idx);
    walk_polarity(c, pos, p, out);
    pos.pop_back();
  };
  switch (f.kind) {
    case FormulaKind::Atom:
    case FormulaKind::Pred:
      break;
    case FormulaKind::Not:
      child(0, *f.left, flip(pol));
      break;
    case FormulaKind::Implies:
      child(0, *f.left, flip(pol));
      child(1, *f.right, pol);
      break;
    case FormulaKind::And:
    case FormulaKind::Or:
      child(0, *f.left, pol);
      child(1, *f.right, pol);
      break;
    default:
      child(0, *f.left, pol);
  }
}

unsigned implication_depth(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::Atom:
    case FormulaKind::Pred:
      return 0;
    case FormulaKind::Implies:
      return std::max(implication_depth(*f.left) + 1, implication_depth(*f.right));
    case FormulaKind::And:
    case FormulaKind::Or:
      return std::max(implication_depth(*f.left), implication_depth(*f.right));
    default:
      return implication_depth(*f.left);
  }
}

bool contains(const Formula& f, FormulaKind kind) {
  if (f.kind == kind) return true;
  if (f.left && contains(*f.left, kind)) return true;
  if (f.right && contains(*f.right, kind)) return true;
  return false;
}

bool term_mentions(const Term& t, const std::string& var) { return free_vars(t).count(var) > 0; }

// Recognizes `E x. (x<t /\ C)` and `A x. (x<t -> C)` with x not in t.
const Formula* bounded_body(const Formula& q) {
  const Formula& b = *q.left;
  FormulaKind want = q.kind == FormulaKind::Exists ? FormulaKind::And : FormulaKind::Implies;
  if (b.kind != want) return nullptr;
  const Formula& guard = *b.left;
  if (guard.kind != FormulaKind::Atom || guard.rel != Relation::Lt) return nullptr;
  if (guard.lhs->kind != Term::Kind::Var || guard.lhs->name != q.name) return nullptr;
  if (term_mentions(*guard.rhs, q.name)) return nullptr;
  return b.right.get();
}

HierarchyLevel level_of(const Formula& f) {
  HierarchyLevel unknown;
  switch (f.kind) {
    case FormulaKind::Atom:
    case FormulaKind::Pred:
      return {0, 0};
    case FormulaKind::Not: {
      auto l = level_of(*f.left);
      if (!l.classified()) return unknown;
      return {l.pi, l.sigma};
    }
    case FormulaKind::And:
    case FormulaKind::Or: {
      auto a = level_of(*f.left);
      auto b = level_of(*f.right);
      if (!a.classified() || !b.classified()) return unknown;
      return {std::max(a.sigma, b.sigma), std::max(a.pi, b.pi)};
    }
    case FormulaKind::Implies: {
      auto a = level_of(*f.left);
      if (!a.classified() || a.sigma != 0 || a.pi != 0) return unknown;
      return level_of(*f.right);
    }
    case FormulaKind::Box:
      return unknown;
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      if (const Formula* inner = bounded_body(f)) {
        auto l = level_of(*inner);
        if (l.classified() && l.sigma == 0 && l.pi == 0) return {0, 0};
      }
      auto l = level_of(*f.left);
      if (!l.classified()) return unknown;
      if (f.kind == FormulaKind::Exists) {
        unsigned s = std::max(1u, std::min(l.sigma, l.pi + 1));
        return {s, s + 1};
      }
      unsigned p = std::max(1u, std::min(l.pi, l.sigma + 1));
      return {p + 1, p};
    }
  }
  return unknown;
}

}  // namespace

HierarchyLevel hierarchy_level(const FormulaPtr& f) { return level_of(*f); }

Classification classify(const FormulaPtr& f) {
  Classification c;
  c.is_arithmetical = !contains(*f, FormulaKind::Box);
  c.implication_free = !contains(*f, FormulaKind::Implies);
  c.exists_free = !contains(*f, FormulaKind::Exists);
  c.impl_nesting_depth = implication_depth(*f);
  auto level = level_of(*f);
  c.sigma03_shape = level.classified() && level.sigma <= 3;
  Position pos;
  walk_polarity(*f, pos, Polarity::Positive, c.occurrence_polarity);
  return c;
}

}  // namespace ctruth
