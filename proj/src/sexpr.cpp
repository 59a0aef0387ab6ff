#include "ctruth/sexpr.hpp"

#include <cctype>

namespace ctruth {

bool operator==(const SExpr& a, const SExpr& b) {
  return a.kind == b.kind && a.text == b.text && a.items == b.items;
}

SExprError::SExprError(std::size_t position, const std::string& message)
    : std::runtime_error("s-expression error at " + std::to_string(position) + ": " + message), position_(position) {}

namespace {

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}

  std::vector<SExpr> all() {
    std::vector<SExpr> out;
    skip();
    while (i_ < s_.size()) {
      out.push_back(read());
      skip();
    }
    return out;
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      } else if (s_[i_] == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  SExpr read() {
    std::size_t start = i_;
    char c = s_[i_];
    if (c == ')') throw SExprError(i_, "unexpected ')'");
    if (c == '(') {
      ++i_;
      SExpr e = SExpr::list({});
      e.position = start;
      while (true) {
        skip();
        if (i_ >= s_.size()) throw SExprError(start, "unclosed '('");
        if (s_[i_] == ')') {
          ++i_;
          return e;
        }
        e.items.push_back(read());
      }
    }
    if (c == '"') {
      ++i_;
      std::string body;
      while (true) {
        if (i_ >= s_.size()) throw SExprError(start, "unterminated string");
        char d = s_[i_++];
        if (d == '"') break;
        if (d == '\\') {
          if (i_ >= s_.size()) throw SExprError(i_, "dangling escape");
          d = s_[i_++];
        }
        body += d;
      }
      SExpr e = SExpr::string(std::move(body));
      e.position = start;
      return e;
    }
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '(' &&
           s_[i_] != ')' && s_[i_] != '"' && s_[i_] != ';')
      ++i_;
    SExpr e = SExpr::atom(s_.substr(start, i_ - start));
    e.position = start;
    return e;
  }

  const std::string& s_;
  std::size_t i_ = 0;
};

}  // namespace

std::vector<SExpr> parse_sexprs(const std::string& text) { return Reader(text).all(); }

SExpr parse_sexpr(const std::string& text) {
  auto all = parse_sexprs(text);
  if (all.size() != 1) throw SExprError(0, "expected exactly one expression, found " + std::to_string(all.size()));
  return all[0];
}

std::string to_string(const SExpr& e) {
  switch (e.kind) {
    case SExpr::Kind::Atom:
      return e.text;
    case SExpr::Kind::String: {
      std::string out = "\"";
      for (char c : e.text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      return out + "\"";
    }
    case SExpr::Kind::List: {
      std::string out = "(";
      for (std::size_t i = 0; i < e.items.size(); ++i) {
        if (i) out += ' ';
        out += to_string(e.items[i]);
      }
      return out + ")";
    }
  }
  return {};
}

}  // namespace ctruth
