#pragma once

// S-expressions: the surface syntax of witness-machine programs and proof
// terms. `;` starts a comment running to the end of the line.

#include <stdexcept>
#include <string>
#include <vector>

namespace ctruth {

struct SExpr {
  enum class Kind { Atom, String, List };

  Kind kind = Kind::List;
  std::string text;  // Atom or String
  std::vector<SExpr> items;
  std::size_t position = 0;

  static SExpr atom(std::string t) { return {Kind::Atom, std::move(t), {}, 0}; }
  static SExpr string(std::string t) { return {Kind::String, std::move(t), {}, 0}; }
  static SExpr list(std::vector<SExpr> xs) { return {Kind::List, {}, std::move(xs), 0}; }

  bool is_atom() const { return kind == Kind::Atom; }
  bool is_atom(const std::string& t) const { return kind == Kind::Atom && text == t; }
  bool is_list() const { return kind == Kind::List; }
  bool is_string() const { return kind == Kind::String; }
  /// `(head ...)` with an atom head equal to `h`.
  bool is_form(const std::string& h) const { return is_list() && !items.empty() && items[0].is_atom(h); }
  std::size_t size() const { return items.size(); }
  const SExpr& operator[](std::size_t i) const { return items.at(i); }
};

bool operator==(const SExpr& a, const SExpr& b);

class SExprError : public std::runtime_error {
 public:
  SExprError(std::size_t position, const std::string& message);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

SExpr parse_sexpr(const std::string& text);
std::vector<SExpr> parse_sexprs(const std::string& text);

/// Canonical text: single spaces, no comments.
std::string to_string(const SExpr& e);

}  // namespace ctruth
