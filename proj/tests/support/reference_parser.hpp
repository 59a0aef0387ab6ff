#pragma once

// Independent reference parser for the formula grammar. It resolves the
// `(` ambiguity by bracket matching instead of backtracking and produces
// s-expressions directly, so it shares no code with the real parser.

#include <cctype>
#include <stdexcept>
#include <string>

#include "ctruth/formula.hpp"

namespace ctruth::testing {

class ReferenceParser {
 public:
  explicit ReferenceParser(std::string s) : s_(std::move(s)) {}

  std::string parse() {
    auto r = imp();
    ws();
    if (i_ != s_.size()) throw std::runtime_error("trailing input");
    return r;
  }

 private:
  void ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool lit(const std::string& l) {
    ws();
    if (s_.compare(i_, l.size(), l) == 0) {
      i_ += l.size();
      return true;
    }
    return false;
  }
  bool upper_word(const std::string& w) {
    ws();
    if (s_.compare(i_, w.size(), w) != 0) return false;
    std::size_t j = i_ + w.size();
    if (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) return false;
    i_ = j;
    return true;
  }

  std::string imp() {
    auto l = disj();
    if (lit("<->")) {
      auto r = imp();
      return "(and (imp " + l + " " + r + ") (imp " + r + " " + l + "))";
    }
    if (lit("->")) return "(imp " + l + " " + imp() + ")";
    return l;
  }
  std::string disj() {
    auto l = conj();
    while (lit("\\/")) l = "(or " + l + " " + conj() + ")";
    return l;
  }
  std::string conj() {
    auto l = neg();
    while (lit("/\\")) l = "(and " + l + " " + neg() + ")";
    return l;
  }
  std::string neg() {
    if (lit("~")) return "(not " + neg() + ")";
    return quant();
  }
  std::string quant() {
    ws();
    for (const char* q : {"A", "E", "forall", "exists"}) {
      if (upper_word(q)) {
        std::string v = ident();
        std::string bound;
        ws();
        if (i_ < s_.size() && s_[i_] == '<' && s_.compare(i_, 3, "<->") != 0) {
          ++i_;
          bound = sum();
        }
        lit(".");
        auto body = quant();
        bool universal = q[0] == 'A' || q[0] == 'f';
        std::string kw = universal ? "forall" : "exists";
        if (!bound.empty()) {
          std::string guard = "(lt " + v + " " + bound + ")";
          body = universal ? "(imp " + guard + " " + body + ")" : "(and " + guard + " " + body + ")";
        }
        return "(" + kw + " " + v + " " + body + ")";
      }
    }
    if (s_.compare(i_, 3, "box") == 0 && !(i_ + 3 < s_.size() && std::isalnum(static_cast<unsigned char>(s_[i_ + 3])))) {
      i_ += 3;
      return "(box " + quant() + ")";
    }
    return primary();
  }
  std::string primary() {
    ws();
    if (i_ < s_.size() && std::isupper(static_cast<unsigned char>(s_[i_]))) {
      std::size_t st = i_;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
      std::string r = "(pred " + s_.substr(st, i_ - st);
      if (lit("(")) {
        r += " " + sum();
        while (lit(",")) r += " " + sum();
        if (!lit(")")) throw std::runtime_error("expected )");
      }
      return r + ")";
    }
    if (i_ < s_.size() && s_[i_] == '(') {
      std::size_t close = match(i_);
      std::size_t k = close + 1;
      while (k < s_.size() && std::isspace(static_cast<unsigned char>(s_[k]))) ++k;
      bool term_start = k < s_.size() && (s_[k] == '=' || s_[k] == '+' || s_[k] == '*' ||
                                          (s_[k] == '<' && s_.compare(k, 3, "<->") != 0));
      if (!term_start) {
        ++i_;
        auto f = imp();
        if (!lit(")")) throw std::runtime_error("expected )");
        return f;
      }
    }
    auto l = sum();
    if (lit("=")) return "(eq " + l + " " + sum() + ")";
    ws();
    if (i_ < s_.size() && s_[i_] == '<') {
      ++i_;
      return "(lt " + l + " " + sum() + ")";
    }
    throw std::runtime_error("expected relation");
  }
  std::size_t match(std::size_t open) const {
    int d = 0;
    for (std::size_t k = open; k < s_.size(); ++k) {
      if (s_[k] == '(') ++d;
      if (s_[k] == ')' && --d == 0) return k;
    }
    throw std::runtime_error("unbalanced");
  }
  std::string sum() {
    auto l = prod();
    while (lit("+")) l = "(+ " + l + " " + prod() + ")";
    return l;
  }
  std::string prod() {
    auto l = factor();
    while (lit("*")) l = "(* " + l + " " + factor() + ")";
    return l;
  }
  std::string factor() {
    ws();
    if (lit("(")) {
      auto t = sum();
      if (!lit(")")) throw std::runtime_error("expected )");
      return t;
    }
    if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
      std::size_t st = i_;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      return s_.substr(st, i_ - st);
    }
    return ident();
  }
  std::string ident() {
    ws();
    std::size_t st = i_;
    while (i_ < s_.size() && (std::islower(static_cast<unsigned char>(s_[i_])) ||
                              (i_ > st && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))))
      ++i_;
    if (st == i_) throw std::runtime_error("expected identifier");
    return s_.substr(st, i_ - st);
  }

  std::string s_;
  std::size_t i_ = 0;
};

inline std::string sexpr(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Const:
      return std::to_string(t.value);
    case Term::Kind::Var:
      return t.name;
    case Term::Kind::Add:
      return "(+ " + sexpr(*t.left) + " " + sexpr(*t.right) + ")";
    case Term::Kind::Mul:
      return "(* " + sexpr(*t.left) + " " + sexpr(*t.right) + ")";
  }
  return "?";
}

inline std::string sexpr(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::Atom:
      return std::string(f.rel == Relation::Eq ? "(eq " : "(lt ") + sexpr(*f.lhs) + " " + sexpr(*f.rhs) + ")";
    case FormulaKind::Pred: {
      std::string r = "(pred " + f.name;
      for (const auto& a : f.args) r += " " + sexpr(*a);
      return r + ")";
    }
    case FormulaKind::Not:
      return "(not " + sexpr(*f.left) + ")";
    case FormulaKind::Box:
      return "(box " + sexpr(*f.left) + ")";
    case FormulaKind::And:
      return "(and " + sexpr(*f.left) + " " + sexpr(*f.right) + ")";
    case FormulaKind::Or:
      return "(or " + sexpr(*f.left) + " " + sexpr(*f.right) + ")";
    case FormulaKind::Implies:
      return "(imp " + sexpr(*f.left) + " " + sexpr(*f.right) + ")";
    case FormulaKind::Exists:
      return "(exists " + f.name + " " + sexpr(*f.left) + ")";
    case FormulaKind::Forall:
      return "(forall " + f.name + " " + sexpr(*f.left) + ")";
  }
  return "?";
}

}  // namespace ctruth::testing
