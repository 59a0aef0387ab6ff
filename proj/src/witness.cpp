#include "ctruth/witness.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <unordered_map>

namespace ctruth {

// ---------------------------------------------------------------------------
// Tokens and pairs

IOToken IOToken::numeral(const BigNat& v) {
  IOToken t;
  t.kind = Kind::Numeral;
  t.value = v;
  return t;
}

IOToken IOToken::prefix(Segment items) {
  IOToken t;
  t.kind = Kind::Prefix;
  t.segment = std::make_shared<const Segment>(std::move(items));
  return t;
}

Nat IOToken::small() const {
  if (kind != Kind::Numeral) throw ShapeError("expected a numeral, found a prefix token");
  if (value > BigNat(std::numeric_limits<Nat>::max())) throw ShapeError("numeral " + value.str() + " out of range");
  return static_cast<Nat>(value);
}

bool operator==(const IOToken& a, const IOToken& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == IOToken::Kind::Numeral) return a.value == b.value;
  return *a.segment == *b.segment;
}

bool operator==(const IOPair& a, const IOPair& b) { return a.input == b.input && a.output == b.output; }

bool operator==(const Item& a, const Item& b) {
  if (a.whitespace != b.whitespace) return false;
  return a.whitespace || a.pair == b.pair;
}

bool segment_extends(std::span<const Item> longer, std::span<const Item> shorter) {
  if (shorter.size() > longer.size()) return false;
  return std::equal(shorter.begin(), shorter.end(), longer.begin());
}

bool token_extends(const IOToken& b, const IOToken& a) {
  if (a.kind != b.kind) return false;
  if (a.is_numeral()) return a.value == b.value;
  return segment_extends(*b.segment, *a.segment);
}

// ---------------------------------------------------------------------------
// Text format

WitnessFormatError::WitnessFormatError(std::size_t position, const std::string& message)
    : std::runtime_error("witness format error at " + std::to_string(position) + ": " + message),
      position_(position) {}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string serialize(const IOToken& t) {
  if (t.is_numeral()) return t.value.str();
  return "\"" + escape(serialize(std::span<const Item>(*t.segment))) + "\"";
}

std::string serialize(const IOPair& p) {
  std::string out = "(";
  for (std::size_t i = 0; i < p.input.size(); ++i) {
    if (i) out += ',';
    out += serialize(p.input[i]);
  }
  out += ':';
  for (std::size_t i = 0; i < p.output.size(); ++i) {
    if (i) out += ',';
    out += serialize(p.output[i]);
  }
  out += ')';
  return out;
}

std::string serialize(const Item& it) { return it.whitespace ? "_" : serialize(it.pair); }

std::string serialize(std::span<const Item> items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ' ';
    out += serialize(items[i]);
  }
  return out;
}

namespace {

class ItemParser {
 public:
  explicit ItemParser(const std::string& text, std::size_t base = 0) : s_(text), base_(base) {}

  Segment items() {
    Segment out;
    skip_space();
    while (i_ < s_.size()) {
      out.push_back(item());
      std::size_t before = i_;
      skip_space();
      if (i_ < s_.size() && i_ == before) fail("items must be separated by whitespace");
    }
    return out;
  }

  IOPair single_pair() {
    skip_space();
    auto p = pair();
    skip_space();
    if (i_ != s_.size()) fail("trailing characters after pair");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw WitnessFormatError(base_ + i_, msg); }

  void skip_space() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  Item item() {
    if (s_[i_] == '_') {
      ++i_;
      return Item::space();
    }
    if (s_[i_] == '(') return Item::of(pair());
    fail(std::string("unexpected character '") + s_[i_] + "'");
  }

  IOPair pair() {
    if (i_ >= s_.size() || s_[i_] != '(') fail("expected '('");
    ++i_;
    IOPair p;
    p.input = tokens(':');
    ++i_;
    p.output = tokens(')');
    ++i_;
    return p;
  }

  std::vector<IOToken> tokens(char terminator) {
    std::vector<IOToken> out;
    skip_space();
    if (i_ < s_.size() && s_[i_] == terminator) return out;
    while (true) {
      skip_space();
      out.push_back(token());
      skip_space();
      if (i_ >= s_.size()) fail(std::string("expected '") + terminator + "'");
      if (s_[i_] == terminator) return out;
      if (s_[i_] != ',') fail(std::string("expected ',' or '") + terminator + "'");
      ++i_;
    }
  }

  IOToken token() {
    if (i_ >= s_.size()) fail("expected token");
    if (std::isdigit(static_cast<unsigned char>(s_[i_]))) {
      std::size_t start = i_;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      return IOToken::numeral(BigNat(s_.substr(start, i_ - start)));
    }
    if (s_[i_] == '"') {
      ++i_;
      std::size_t start = i_;
      std::string body;
      while (true) {
        if (i_ >= s_.size()) fail("unterminated prefix token");
        char c = s_[i_];
        if (c == '"') break;
        if (c == '\\') {
          ++i_;
          if (i_ >= s_.size()) fail("dangling escape");
          c = s_[i_];
          if (c != '"' && c != '\\') fail("invalid escape");
        }
        body += c;
        ++i_;
      }
      ++i_;
      return IOToken::prefix(ItemParser(body, base_ + start).items());
    }
    fail(std::string("unexpected character '") + s_[i_] + "' in pair");
  }

  const std::string& s_;
  std::size_t base_;
  std::size_t i_ = 0;
};

}  // namespace

Segment parse_items(const std::string& text) { return ItemParser(text).items(); }
IOPair parse_pair(const std::string& text) { return ItemParser(text).single_pair(); }

// ---------------------------------------------------------------------------
// Streams

namespace {

class LiteralSource : public Source {
 public:
  explicit LiteralSource(Segment items) : items_(std::move(items)) {}
  Item next() override { return pos_ < items_.size() ? items_[pos_++] : Item::space(); }

 private:
  Segment items_;
  std::size_t pos_ = 0;
};

class FunctionSource : public Source {
 public:
  explicit FunctionSource(std::function<Item()> fn) : fn_(std::move(fn)) {}
  Item next() override { return fn_(); }

 private:
  std::function<Item()> fn_;
};

}  // namespace

WitnessStream::WitnessStream() : WitnessStream(std::make_shared<LiteralSource>(Segment{})) {
  state_->known_length = 0;
}

WitnessStream::WitnessStream(std::shared_ptr<Source> source) : state_(std::make_shared<State>()) {
  state_->source = std::move(source);
}

WitnessStream WitnessStream::literal(Segment items) {
  std::size_t n = items.size();
  WitnessStream w(std::make_shared<LiteralSource>(std::move(items)));
  w.state_->known_length = n;
  return w;
}

WitnessStream WitnessStream::generate(std::function<Item()> next) {
  return WitnessStream(std::make_shared<FunctionSource>(std::move(next)));
}

std::span<const Item> WitnessStream::pull(std::size_t k) const {
  auto& cache = state_->cache;
  while (cache.size() < k) cache.push_back(state_->source->next());
  return std::span<const Item>(cache.data(), k);
}

const Item& WitnessStream::at(std::size_t i) const { return pull(i + 1)[i]; }

std::size_t WitnessStream::pulled() const { return state_->cache.size(); }

// ---------------------------------------------------------------------------
// Spine

SlotKind slot_kind(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::Forall:
    case FormulaKind::And:
    case FormulaKind::Implies:
      return SlotKind::Input;
    case FormulaKind::Exists:
    case FormulaKind::Or:
    case FormulaKind::Box:
      return SlotKind::Output;
    default:
      return SlotKind::Terminal;
  }
}

namespace {

struct InstanceKey {
  const Formula* quant;
  Nat n;
  bool operator==(const InstanceKey&) const = default;
};

struct InstanceHash {
  std::size_t operator()(const InstanceKey& k) const {
    return std::hash<const void*>()(k.quant) * 31 + std::hash<Nat>()(k.n);
  }
};

// Checking re-walks the same prefixes many times. Entries keep their
// quantifier alive so the address stays unique.
constexpr std::size_t kInstanceCacheMax = 1 << 18;

FormulaPtr instantiate(const FormulaPtr& quant, Nat n) {
  thread_local std::unordered_map<InstanceKey, std::pair<FormulaPtr, FormulaPtr>, InstanceHash> cache;
  InstanceKey key{quant.get(), n};
  if (auto it = cache.find(key); it != cache.end()) return it->second.second;
  FormulaPtr r = substitute_term(quant->left, quant->name, Term::constant(n));
  if (cache.size() >= kInstanceCacheMax) cache.clear();
  cache.emplace(key, std::make_pair(quant, r));
  return r;
}

FormulaPtr choose(const FormulaPtr& f, const IOToken& tok) {
  if (!tok.is_numeral()) throw ShapeError("expected a selector at " + to_string(*f));
  if (tok.value == 0) return f->left;
  if (tok.value == 1) return f->right;
  throw ShapeError("selector must be 0 or 1, found " + tok.value.str() + " at " + to_string(*f));
}

}  // namespace

FormulaPtr descend(const FormulaPtr& f, const IOToken& tok) {
  switch (f->kind) {
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      if (!tok.is_numeral()) throw ShapeError("expected a numeral at " + to_string(*f));
      return instantiate(f, tok.small());
    case FormulaKind::And:
    case FormulaKind::Or:
      return choose(f, tok);
    case FormulaKind::Implies:
      if (!tok.is_prefix()) throw ShapeError("expected an antecedent prefix at " + to_string(*f));
      return f->right;
    case FormulaKind::Box:
      if (!tok.is_numeral()) throw ShapeError("expected a code numeral at " + to_string(*f));
      return f;
    default:
      throw ShapeError("no token expected at " + to_string(*f));
  }
}

SpineWalk walk_spine(const FormulaPtr& f, std::span<const IOToken> input, std::span<const IOToken> output) {
  SpineWalk w;
  w.at = f;
  while (true) {
    SlotKind k = slot_kind(*w.at);
    if (k == SlotKind::Terminal) {
      w.stop = SlotKind::Terminal;
      return w;
    }
    if (k == SlotKind::Input) {
      if (w.inputs == input.size()) {
        w.stop = SlotKind::Input;
        return w;
      }
      w.at = descend(w.at, input[w.inputs++]);
      continue;
    }
    if (w.outputs == output.size()) {
      w.stop = SlotKind::Output;
      return w;
    }
    if (w.at->kind == FormulaKind::Box) {
      descend(w.at, output[w.outputs++]);
      w.box_answered = true;
      w.stop = SlotKind::Terminal;
      return w;
    }
    w.at = descend(w.at, output[w.outputs++]);
  }
}

namespace {

FormulaPtr content(const FormulaPtr& f, std::span<const IOToken> in, std::span<const IOToken> out);

FormulaPtr antecedent_content(const FormulaPtr& antecedent, const Segment& seg) {
  FormulaPtr acc = antecedent;
  for (const auto& it : seg) {
    if (it.whitespace) continue;
    auto c = content(antecedent, it.pair.input, it.pair.output);
    if (*c == *Formula::verum()) continue;
    acc = Formula::conj(acc, c);
  }
  return acc;
}

FormulaPtr content(const FormulaPtr& f, std::span<const IOToken> in, std::span<const IOToken> out) {
  switch (slot_kind(*f)) {
    case SlotKind::Terminal:
      if (!in.empty() || !out.empty()) throw ShapeError("too many tokens for " + to_string(*f));
      return f;
    case SlotKind::Input:
      if (in.empty()) {
        if (!out.empty()) throw ShapeError("output given before input at " + to_string(*f));
        return Formula::verum();
      }
      if (f->kind == FormulaKind::Implies) {
        if (!in[0].is_prefix()) throw ShapeError("expected an antecedent prefix at " + to_string(*f));
        auto ant = antecedent_content(f->left, *in[0].segment);
        return Formula::implies(ant, content(f->right, in.subspan(1), out));
      }
      return content(descend(f, in[0]), in.subspan(1), out);
    case SlotKind::Output:
      if (out.empty()) {
        if (!in.empty()) throw ShapeError("input given past missing output at " + to_string(*f));
        return f;
      }
      if (f->kind == FormulaKind::Box) {
        descend(f, out[0]);
        if (!in.empty() || out.size() > 1) throw ShapeError("too many tokens for " + to_string(*f));
        return f;
      }
      return content(descend(f, out[0]), in, out.subspan(1));
  }
  return f;
}

}  // namespace

FormulaPtr semantic_content(const FormulaPtr& f, const IOPair& p) { return content(f, p.input, p.output); }

void check_shape(const FormulaPtr& f, const IOPair& p) { (void)semantic_content(f, p); }

// ---------------------------------------------------------------------------
// Discipline

bool pairs_conflict(const IOPair& earlier, const IOPair& later) {
  if (earlier.input.size() > later.input.size()) return false;
  for (std::size_t k = 0; k < earlier.input.size(); ++k)
    if (!token_extends(later.input[k], earlier.input[k])) return false;
  std::size_t common = std::min(earlier.output.size(), later.output.size());
  for (std::size_t k = 0; k < common; ++k)
    if (!(earlier.output[k] == later.output[k])) return true;
  return false;
}

MonotoneVerdict check_monotone(const WitnessStream& w, std::size_t budget) {
  std::vector<const IOPair*> seen;
  auto items = w.pull(budget);
  for (const auto& it : items) {
    if (it.whitespace) continue;
    const IOPair& p = it.pair;
    for (const IOPair* q : seen) {
      if (pairs_conflict(*q, p) || pairs_conflict(p, *q)) return {false, *q, p};
    }
    seen.push_back(&p);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Response trees

namespace {

struct TreeBuilder {
  FormulaPtr formula;
  std::vector<const IOPair*> pairs;
  std::size_t depth;
  Nat numeral_limit;

  bool input_prefix(const IOPair& p, const std::vector<IOToken>& in) const {
    if (p.input.size() < in.size()) return false;
    for (std::size_t k = 0; k < in.size(); ++k)
      if (!(p.input[k] == in[k])) return false;
    return true;
  }

  // Output attributable to input `in`: the output tokens that precede the
  // next input slot.
  std::optional<std::vector<IOToken>> output_for(const std::vector<IOToken>& in) const {
    std::optional<std::vector<IOToken>> best;
    for (const IOPair* p : pairs) {
      if (!input_prefix(*p, in)) continue;
      SpineWalk sw;
      try {
        sw = walk_spine(formula, in, p->output);
      } catch (const ShapeError&) {
        continue;
      }
      if (sw.inputs < in.size()) continue;
      std::vector<IOToken> o(p->output.begin(), p->output.begin() + static_cast<std::ptrdiff_t>(sw.outputs));
      if (!best || o.size() > best->size()) best = std::move(o);
    }
    return best;
  }

  void expand(ResponseNode& node) const {
    node.output = output_for(node.input);
    if (!node.output || node.input.size() >= depth) return;
    SpineWalk sw = walk_spine(formula, node.input, *node.output);
    if (sw.stop != SlotKind::Input) return;
    std::vector<IOToken> choices;
    switch (sw.at->kind) {
      case FormulaKind::Forall:
        for (Nat n = 0; n < numeral_limit; ++n) choices.push_back(IOToken::numeral(n));
        break;
      case FormulaKind::And:
        choices = {IOToken::selector(0), IOToken::selector(1)};
        break;
      case FormulaKind::Implies:
        for (const IOPair* p : pairs) {
          if (p->input.size() <= node.input.size() || !input_prefix(*p, node.input)) continue;
          const IOToken& t = p->input[node.input.size()];
          if (std::find(choices.begin(), choices.end(), t) == choices.end()) choices.push_back(t);
        }
        break;
      default:
        return;
    }
    for (auto& c : choices) {
      ResponseNode child;
      child.input = node.input;
      child.input.push_back(std::move(c));
      expand(child);
      node.children.push_back(std::move(child));
    }
  }
};

void collect_paths(const ResponseNode& node, Segment& path, std::vector<Segment>& out) {
  bool pushed = false;
  if (node.output) {
    path.push_back(Item::of(IOPair{node.input, *node.output}));
    pushed = true;
    out.push_back(path);
  }
  for (const auto& c : node.children) collect_paths(c, path, out);
  if (pushed) path.pop_back();
}

}  // namespace

ResponseNode response_tree(const WitnessStream& w, const FormulaPtr& f, std::size_t depth, Nat numeral_limit,
                           std::size_t pull_limit) {
  TreeBuilder b{f, {}, depth, numeral_limit};
  for (const auto& it : w.pull(pull_limit))
    if (!it.whitespace) b.pairs.push_back(&it.pair);
  ResponseNode root;
  b.expand(root);
  return root;
}

std::vector<Segment> response_paths(const ResponseNode& root) {
  std::vector<Segment> out;
  Segment path;
  collect_paths(root, path, out);
  return out;
}

}  // namespace ctruth
