#pragma once

// True implication-free formulas together with literal witnesses built by
// brute-force search, for checking the witness transformations.

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ctruth/eval.hpp"
#include "ctruth/witness.hpp"

namespace ctruth::testing {

constexpr Nat kSearchLimit = 300;

/// Outputs for a closed formula built from E, \/ and atoms; least choices.
inline std::optional<std::vector<IOToken>> find_output(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Exists:
      for (Nat y = 0; y <= kSearchLimit; ++y)
        if (auto rest = find_output(substitute_term(f->left, f->name, Term::constant(y)))) {
          rest->insert(rest->begin(), IOToken::numeral(y));
          return rest;
        }
      return std::nullopt;
    case FormulaKind::Or:
      for (int s = 0; s < 2; ++s)
        if (auto rest = find_output(s == 0 ? f->left : f->right)) {
          rest->insert(rest->begin(), IOToken::selector(s));
          return rest;
        }
      return std::nullopt;
    default:
      if (evaluate_closed(f, 0)) return std::vector<IOToken>{};
      return std::nullopt;
  }
}

/// Every pair of the least-choice witness with numeral inputs up to `max_n`.
inline void oracle_pairs(const FormulaPtr& f, std::vector<IOToken>& path, Nat max_n, std::vector<IOPair>& out) {
  switch (f->kind) {
    case FormulaKind::Forall:
      out.push_back({path, {}});
      for (Nat n = 0; n <= max_n; ++n) {
        path.push_back(IOToken::numeral(n));
        oracle_pairs(substitute_term(f->left, f->name, Term::constant(n)), path, max_n, out);
        path.pop_back();
      }
      return;
    case FormulaKind::And:
      out.push_back({path, {}});
      for (int s = 0; s < 2; ++s) {
        path.push_back(IOToken::selector(s));
        oracle_pairs(s == 0 ? f->left : f->right, path, max_n, out);
        path.pop_back();
      }
      return;
    default:
      if (auto o = find_output(f)) out.push_back({path, *o});
  }
}

/// The oracle witness in shuffled order with whitespace mixed in.
inline Segment oracle_witness(const FormulaPtr& f, Nat max_n, std::mt19937& rng, double space = 0.3) {
  std::vector<IOPair> pairs;
  std::vector<IOToken> path;
  oracle_pairs(f, path, max_n, pairs);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  std::bernoulli_distribution gap(space);
  Segment items;
  for (auto& p : pairs) {
    while (gap(rng)) items.push_back(Item::space());
    items.push_back(Item::of(std::move(p)));
  }
  return items;
}

/// Random true formulas: A and /\ over parts answerable by find_output.
class TrueFormulaGen {
 public:
  explicit TrueFormulaGen(unsigned seed) : rng_(seed) {}

  std::mt19937& rng() { return rng_; }

  FormulaPtr formula(int depth) { return universal({}, depth); }

  FormulaPtr existential_formula(int depth) { return existential({}, depth); }

 private:
  unsigned pick(unsigned n) { return std::uniform_int_distribution<unsigned>(0, n - 1)(rng_); }

  TermPtr term(const std::vector<std::string>& vars) {
    TermPtr t = vars.empty() || pick(3) == 0 ? Term::constant(pick(4)) : Term::var(vars[pick(static_cast<unsigned>(vars.size()))]);
    switch (pick(3)) {
      case 0:
        return t;
      case 1:
        return Term::add(t, Term::constant(pick(3)));
      default:
        return Term::mul(Term::constant(1 + pick(2)), t);
    }
  }

  std::string fresh(const std::vector<std::string>& vars) {
    return "v" + std::to_string(vars.size());
  }

  FormulaPtr universal(std::vector<std::string> vars, int depth) {
    switch (depth <= 0 ? 2 : pick(4)) {
      case 0: {
        std::string v = fresh(vars);
        vars.push_back(v);
        return Formula::forall(v, universal(vars, depth - 1));
      }
      case 1:
        return Formula::conj(universal(vars, depth - 1), universal(vars, depth - 1));
      default:
        return existential(vars, depth);
    }
  }

  FormulaPtr existential(std::vector<std::string> vars, int depth) {
    unsigned k = depth <= 0 ? pick(2) : pick(6);
    std::string y = fresh(vars);
    switch (k) {
      case 0: {
        TermPtr t = term(vars);
        return Formula::eq(t, t);
      }
      case 1:
        return Formula::exists(y, Formula::eq(Term::var(y), term(vars)));
      case 2: {
        if (vars.empty()) return existential(vars, depth - 1);
        TermPtr v = Term::var(vars[pick(static_cast<unsigned>(vars.size()))]);
        TermPtr twice = Term::mul(Term::constant(2), Term::var(y));
        return Formula::exists(y, Formula::disj(Formula::eq(v, twice), Formula::eq(v, Term::add(twice, Term::constant(1)))));
      }
      case 3:
        return Formula::disj(Formula::lt(term(vars), Term::constant(0)), existential(vars, depth - 1));
      case 4:
        return Formula::disj(existential(vars, depth - 1), Formula::lt(term(vars), Term::constant(0)));
      default: {
        auto nv = vars;
        nv.push_back(y);
        return Formula::exists(y, Formula::disj(Formula::lt(Term::var(y), term(vars)), existential(nv, depth - 1)));
      }
    }
  }

  std::mt19937 rng_;
};

}  // namespace ctruth::testing
