#include "ctruth/games.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ctruth/combinators.hpp"
#include "ctruth/realizers.hpp"

namespace ctruth {

bool compatible(const Seq& a, const Seq& b) {
  std::size_t n = std::min(a.size(), b.size());
  return std::equal(a.begin(), a.begin() + n, b.begin());
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Nat small_of(const IOToken& t) { return t.is_numeral() ? t.small() : Nat(-1); }

}  // namespace

// ---------------------------------------------------------------------------
// Trees

Nat TreePresentation::branch_at(std::size_t k) const {
  if (!stem) throw std::logic_error("no designated branch");
  if (k < stem->size()) return (*stem)[k];
  return cycle[(k - stem->size()) % cycle.size()];
}

Seq TreePresentation::branch_prefix(std::size_t k) const {
  Seq s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = branch_at(i);
  return s;
}

bool TreePresentation::on_branch(const Seq& s) const {
  if (!stem) return false;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] != branch_at(i)) return false;
  return true;
}

bool TreePresentation::contains(const Seq& s) const { return nodes.count(s) || on_branch(s); }

std::size_t TreePresentation::height() const {
  std::size_t h = 0;
  for (const auto& n : nodes) h = std::max(h, n.size());
  return h;
}

void TreePresentation::validate() const {
  if (!nodes.count(Seq{})) throw std::invalid_argument("tree has no root");
  for (const auto& n : nodes) {
    if (!n.empty() && !nodes.count(Seq(n.begin(), n.end() - 1)))
      throw std::invalid_argument("tree is not prefix-closed at " + std::to_string(n.size()) + "-entry node");
    for (Nat e : n)
      if (e >= kOffTree) throw std::invalid_argument("tree entry too large");
  }
  if (stem) {
    if (cycle.empty()) throw std::invalid_argument("designated branch needs a nonempty cycle");
    for (std::size_t k = 0; k <= stem->size(); ++k)
      if (!nodes.count(Seq(stem->begin(), stem->begin() + static_cast<std::ptrdiff_t>(k))))
        throw std::invalid_argument("branch stem leaves the tree");
  }
}

TreePresentation parse_tree(const std::string& text) {
  TreePresentation t;
  std::istringstream in(text);
  std::string line;
  auto numbers = [](const std::string& s) {
    Seq out;
    std::istringstream ss(s);
    std::string w;
    while (ss >> w) {
      std::size_t used = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(w, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != w.size() || w[0] == '-') throw std::invalid_argument("bad tree entry '" + w + "'");
      out.push_back(v);
    }
    return out;
  };
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;
    if (first == ".") {
      t.nodes.insert(Seq{});
    } else if (first == "branch") {
      std::string rest = line.substr(line.find("branch") + 6);
      auto bar = rest.find('|');
      if (bar == std::string::npos) throw std::invalid_argument("branch line needs '|'");
      t.stem = numbers(rest.substr(0, bar));
      t.cycle = numbers(rest.substr(bar + 1));
    } else {
      t.nodes.insert(numbers(line));
    }
  }
  t.validate();
  return t;
}

std::string to_string(const TreePresentation& t) {
  std::string out;
  for (const auto& n : t.nodes) {
    if (n.empty()) {
      out += ".\n";
      continue;
    }
    for (std::size_t i = 0; i < n.size(); ++i) out += (i ? " " : "") + std::to_string(n[i]);
    out += "\n";
  }
  if (t.stem) {
    out += "branch";
    for (Nat e : *t.stem) out += " " + std::to_string(e);
    out += " |";
    for (Nat e : t.cycle) out += " " + std::to_string(e);
    out += "\n";
  }
  return out;
}

namespace {

struct Shape {
  std::size_t size;
  std::vector<std::size_t> children;  // non-increasing ids
};

void add_nodes(const std::vector<Shape>& shapes, std::size_t id, Seq& prefix, std::set<Seq>& out) {
  out.insert(prefix);
  const auto& ch = shapes[id].children;
  for (std::size_t c = 0; c < ch.size(); ++c) {
    prefix.push_back(c);
    add_nodes(shapes, ch[c], prefix, out);
    prefix.pop_back();
  }
}

void forests(const std::vector<Shape>& shapes, std::size_t remaining, std::size_t max_id,
             std::vector<std::size_t>& cur, const std::function<void(const std::vector<std::size_t>&)>& emit) {
  if (remaining == 0) return emit(cur);
  for (std::size_t id = std::min(max_id + 1, shapes.size()); id-- > 0;) {
    if (shapes[id].size > remaining) continue;
    cur.push_back(id);
    forests(shapes, remaining - shapes[id].size, id, cur, emit);
    cur.pop_back();
  }
}

}  // namespace

void for_each_tree(std::size_t max_nodes, const std::function<void(const TreePresentation&)>& fn) {
  std::vector<Shape> shapes;
  for (std::size_t n = 1; n <= max_nodes; ++n) {
    std::vector<Shape> fresh;
    std::vector<std::size_t> cur;
    forests(shapes, n - 1, shapes.size(), cur, [&](const std::vector<std::size_t>& ch) { fresh.push_back({n, ch}); });
    for (auto& s : fresh) {
      shapes.push_back(std::move(s));
      TreePresentation t;
      Seq prefix;
      add_nodes(shapes, shapes.size() - 1, prefix, t.nodes);
      fn(t);
    }
  }
}

std::vector<TreePresentation> all_trees(std::size_t max_nodes) {
  std::vector<TreePresentation> out;
  for_each_tree(max_nodes, [&](const TreePresentation& t) { out.push_back(t); });
  return out;
}

TreePresentation random_tree(std::size_t depth, std::size_t branching, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TreePresentation t;
  std::vector<Seq> frontier{{}};
  t.nodes.insert(Seq{});
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<Seq> next;
    for (const auto& s : frontier) {
      bool any = false;
      for (std::size_t c = 0; c < branching; ++c) {
        bool keep = rng() % 2 == 0 || (d == 0 && !any && c + 1 == branching);
        if (!keep) continue;
        any = true;
        Seq child = s;
        child.push_back(c);
        t.nodes.insert(child);
        next.push_back(std::move(child));
      }
    }
    frontier = std::move(next);
  }
  return t;
}

TreePresentation graft_branch(TreePresentation t) {
  const Seq* deepest = nullptr;
  for (const auto& n : t.nodes)
    if (!deepest || n.size() > deepest->size()) deepest = &n;
  t.stem = *deepest;
  t.cycle = {0};
  return t;
}

SeqCodec::SeqCodec(const TreePresentation& t) {
  for (const auto& n : t.nodes) code(n);
}

Nat SeqCodec::code(const Seq& s) {
  auto [it, fresh] = codes_.emplace(s, seqs_.size());
  if (fresh) seqs_.push_back(s);
  return it->second;
}

const Seq* SeqCodec::decode(Nat c) const { return c < seqs_.size() ? &seqs_[c] : nullptr; }

// ---------------------------------------------------------------------------
// Traces

std::string GameTrace::text() const {
  std::string out;
  for (const auto& e : events) out += std::to_string(e.round) + " " + e.text + "\n";
  return out;
}

std::uint64_t GameTrace::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Paths with incompatible nodes

bool CoinTable::value(Nat s, Nat i) const {
  auto key = std::make_pair(s, i);
  if (auto it = fixed_.find(key); it != fixed_.end()) return it->second;
  bool v = splitmix(seed_ ^ splitmix(s) ^ (splitmix(i) << 1)) & 1;
  fixed_.emplace(key, v);
  return v;
}

bool CoinTable::fix(Nat s, Nat i, bool v) {
  auto [it, fresh] = fixed_.emplace(std::make_pair(s, i), v);
  return fresh || it->second == v;
}

Theorem1Setup theorem1_setup(const TreePresentation& t, std::uint64_t seed) {
  t.validate();
  Theorem1Setup s;
  s.tree = t;
  s.codec = std::make_shared<SeqCodec>(t);
  s.coins = std::make_shared<CoinTable>(seed);
  static const FormulaPtr antecedent = parse_formula("A n. E s. (Node(s, n) /\\ A i. (X(s, i) \\/ ~X(s, i)))");
  static const FormulaPtr consequent =
      parse_formula("E s. E t. (Inc(s, t) /\\ (A i. (X(s, i) \\/ ~X(s, i)) /\\ A i. (X(t, i) \\/ ~X(t, i))))");
  s.antecedent = antecedent;
  s.consequent = consequent;
  s.implication = Formula::implies(s.antecedent, s.consequent);
  auto tree = std::make_shared<const TreePresentation>(t);
  auto codec = s.codec;
  auto coins = s.coins;
  s.interp
      .define("Node",
              [tree, codec](std::span<const Nat> a) {
                const Seq* q = codec->decode(a[0]);
                return q && q->size() == a[1] && tree->contains(*q);
              })
      .define("Inc",
              [codec](std::span<const Nat> a) {
                const Seq* p = codec->decode(a[0]);
                const Seq* q = codec->decode(a[1]);
                return p && q && !compatible(*p, *q);
              })
      .define("X", [coins](std::span<const Nat> a) { return coins->value(a[0], a[1]); });
  return s;
}

namespace {

IOToken num(Nat n) { return IOToken::numeral(BigNat(n)); }

}  // namespace

Item node_item(Nat n, Nat s) { return Item::of({{num(n), IOToken::selector(0)}, {num(s)}}); }

Item coin_item(Nat n, Nat s, Nat i, bool x) {
  return Item::of({{num(n), IOToken::selector(1), num(i)}, {num(s), IOToken::selector(x ? 0 : 1)}});
}

Item commit_item(Nat s, Nat t) { return Item::of({{IOToken::selector(0)}, {num(s), num(t)}}); }

Item claim_item(int side, Nat s, Nat t, Nat i, bool x) {
  return Item::of({{IOToken::selector(1), IOToken::selector(side), num(i)}, {num(s), num(t), IOToken::selector(x ? 0 : 1)}});
}

namespace {

// What the antecedent has delivered so far.
struct Observer {
  std::size_t seen = 0;
  std::vector<Nat> nodes;
  std::set<Nat> known;
  std::map<Nat, std::map<Nat, bool>> coins;

  void update(std::span<const Item> items) {
    for (; seen < items.size(); ++seen) {
      const Item& it = items[seen];
      if (it.whitespace) continue;
      const auto& in = it.pair.input;
      const auto& out = it.pair.output;
      if (in.size() == 2 && out.size() == 1 && small_of(in[1]) == 0) {
        Nat s = small_of(out[0]);
        if (known.insert(s).second) nodes.push_back(s);
      } else if (in.size() == 3 && out.size() == 2 && small_of(in[1]) == 1) {
        coins[small_of(out[0])][small_of(in[2])] = small_of(out[1]) == 0;
      }
    }
  }

  std::optional<bool> coin(Nat s, Nat i) const {
    auto a = coins.find(s);
    if (a == coins.end()) return std::nullopt;
    auto b = a->second.find(i);
    if (b == a->second.end()) return std::nullopt;
    return b->second;
  }
};

// Commits to s, t once `decide` says so, then claims coins one item at a time.
class Committer : public Theorem1Strategy {
 public:
  explicit Committer(const Theorem1Setup& s) : codec_(s.codec) {}

  Item respond(std::span<const Item> antecedent) override {
    obs_.update(antecedent);
    std::size_t round = round_++;
    if (!commit_) {
      commit_ = decide(round);
      if (commit_) queue_.push_back(commit_item(commit_->first, commit_->second));
    }
    if (commit_ && queue_.empty())
      for (int k = 0; k < 2 && queue_.empty(); ++k, turn_ ^= 1) {
        Nat node = turn_ ? commit_->second : commit_->first;
        if (auto x = claim(turn_, node, next_[turn_])) {
          queue_.push_back(claim_item(turn_, commit_->first, commit_->second, next_[turn_], *x));
          ++next_[turn_];
        }
      }
    if (queue_.empty()) return Item::space();
    Item out = queue_.front();
    queue_.pop_front();
    return out;
  }

 protected:
  virtual std::optional<std::pair<Nat, Nat>> decide(std::size_t round) = 0;
  virtual std::optional<bool> claim(int side, Nat node, Nat i) = 0;

  const Seq& seq(Nat c) const { return *codec_->decode(c); }

  Nat deepest() const {
    Nat best = obs_.nodes.front();
    for (Nat n : obs_.nodes)
      if (seq(n).size() > seq(best).size()) best = n;
    return best;
  }

  Nat sibling(Nat c) {
    Seq s = seq(c);
    if (s.empty()) return codec_->code({1});
    ++s.back();
    return codec_->code(s);
  }

  std::shared_ptr<SeqCodec> codec_;
  Observer obs_;

 private:
  std::size_t round_ = 0;
  std::optional<std::pair<Nat, Nat>> commit_;
  std::deque<Item> queue_;
  int turn_ = 0;
  Nat next_[2] = {0, 0};
};

class Copycat : public Committer {
 public:
  using Committer::Committer;

 protected:
  std::optional<std::pair<Nat, Nat>> decide(std::size_t) override {
    for (; checked_ < obs_.nodes.size(); ++checked_)
      for (std::size_t k = 0; k < checked_; ++k)
        if (!compatible(seq(obs_.nodes[k]), seq(obs_.nodes[checked_])))
          return std::make_pair(obs_.nodes[k], obs_.nodes[checked_]);
    return std::nullopt;
  }
  std::optional<bool> claim(int, Nat node, Nat i) override { return obs_.coin(node, i); }

 private:
  std::size_t checked_ = 0;
};

class Silent : public Theorem1Strategy {
 public:
  Item respond(std::span<const Item>) override { return Item::space(); }
};

class Eager : public Committer {
 public:
  using Committer::Committer;

 protected:
  std::optional<std::pair<Nat, Nat>> decide(std::size_t round) override {
    if (round < 1) return std::nullopt;
    return std::make_pair(codec_->code({0}), codec_->code({1}));
  }
  std::optional<bool> claim(int, Nat, Nat i) override {
    if (i >= 64) return std::nullopt;
    return true;
  }
};

// The deepest delivered node and a made-up sibling whose coins copy (or
// negate) the node's.
class Sibling : public Committer {
 public:
  Sibling(const Theorem1Setup& s, std::size_t wait, bool negate) : Committer(s), wait_(wait), negate_(negate) {}

 protected:
  std::optional<std::pair<Nat, Nat>> decide(std::size_t round) override {
    if (round < wait_ || obs_.nodes.size() < 2) return std::nullopt;
    Nat d = deepest();
    return std::make_pair(d, sibling(d));
  }
  std::optional<bool> claim(int side, Nat node, Nat i) override {
    (void)node;
    auto x = obs_.coin(deepest_, i);
    if (!x) return std::nullopt;
    return side == 1 && negate_ ? !*x : *x;
  }

 public:
  Item respond(std::span<const Item> antecedent) override {
    Item it = Committer::respond(antecedent);
    if (!it.whitespace && it.pair.input.size() == 1) deepest_ = small_of(it.pair.output[0]);
    return it;
  }

 private:
  std::size_t wait_;
  bool negate_;
  Nat deepest_ = 0;
};

class SameBranch : public Committer {
 public:
  using Committer::Committer;

 protected:
  std::optional<std::pair<Nat, Nat>> decide(std::size_t) override {
    if (obs_.nodes.size() < 2) return std::nullopt;
    return std::make_pair(obs_.nodes[0], obs_.nodes[1]);
  }
  std::optional<bool> claim(int, Nat node, Nat i) override { return obs_.coin(node, i); }
};

class DefenderApply : public Source {
 public:
  DefenderApply(std::unique_ptr<Theorem1Strategy> s, WitnessStream x) : strategy_(std::move(s)), x_(std::move(x)) {}

  Item next() override {
    seen_.push_back(x_.at(seen_.size()));
    horizons_.push_back(seen_.size());
    return strategy_->respond(seen_);
  }
  std::optional<std::size_t> horizon(std::size_t i) const override {
    if (i >= horizons_.size()) return std::nullopt;
    return horizons_[i];
  }

 private:
  std::unique_ptr<Theorem1Strategy> strategy_;
  WitnessStream x_;
  Segment seen_;
  std::vector<std::size_t> horizons_;
};

class DefenderSource : public Source {
 public:
  explicit DefenderSource(Theorem1Setup s) : s_(std::move(s)) {}
  Item next() override { return Item::space(); }
  std::shared_ptr<Source> apply(const FormulaPtr&, const WitnessStream& x) override {
    return std::make_shared<DefenderApply>(theorem1_copycat(s_), x);
  }

 private:
  Theorem1Setup s_;
};

}  // namespace

std::unique_ptr<Theorem1Strategy> theorem1_copycat(const Theorem1Setup& s) { return std::make_unique<Copycat>(s); }

WitnessStream theorem1_defender(const Theorem1Setup& s) { return WitnessStream(std::make_shared<DefenderSource>(s)); }

const std::vector<NamedStrategy>& theorem1_library() {
  static const std::vector<NamedStrategy> lib = {
      {"copycat", [](const Theorem1Setup& s) { return theorem1_copycat(s); }},
      {"silent", [](const Theorem1Setup&) { return std::unique_ptr<Theorem1Strategy>(std::make_unique<Silent>()); }},
      {"eager", [](const Theorem1Setup& s) { return std::unique_ptr<Theorem1Strategy>(std::make_unique<Eager>(s)); }},
      {"sibling",
       [](const Theorem1Setup& s) { return std::unique_ptr<Theorem1Strategy>(std::make_unique<Sibling>(s, 0, false)); }},
      {"same_branch",
       [](const Theorem1Setup& s) { return std::unique_ptr<Theorem1Strategy>(std::make_unique<SameBranch>(s)); }},
      {"late",
       [](const Theorem1Setup& s) { return std::unique_ptr<Theorem1Strategy>(std::make_unique<Sibling>(s, 1000, true)); }},
  };
  return lib;
}

Segment theorem1_supply(const Theorem1Setup& s, std::size_t coins) {
  if (s.tree.has_branch()) throw std::invalid_argument("supply needs a tree without a designated branch");
  std::vector<Seq> order(s.tree.nodes.begin(), s.tree.nodes.end());
  std::stable_sort(order.begin(), order.end(), [](const Seq& a, const Seq& b) { return a.size() < b.size(); });
  Segment out;
  for (std::size_t n = 0; n < order.size(); ++n) {
    Nat c = s.codec->code(order[n]);
    out.push_back(node_item(n, c));
    for (Nat i = 0; i < coins; ++i) out.push_back(coin_item(n, c, i, s.coins->value(c, i)));
  }
  return out;
}

Verdict check_theorem1_defender(const Theorem1Setup& s, const Budget& b) {
  Budget bb = b;
  bb.numeral_bound = std::max<Nat>(b.numeral_bound, s.tree.nodes.size());
  Segment supply = theorem1_supply(s, bb.numeral_bound + 1);
  bb.pull_limit = std::max(b.pull_limit, 2 * supply.size() + 2);
  CheckContext ctx;
  ctx.interp = s.interp;
  ctx.probes = [supply](const FormulaPtr&) { return std::vector<WitnessStream>{WitnessStream::literal(supply)}; };
  return check_witness(s.implication, theorem1_defender(s), bb, ctx);
}

Theorem1Adversary::Theorem1Adversary(Theorem1Setup& s) : s_(s) {
  if (!s.tree.has_branch()) throw std::invalid_argument("adversary needs a designated branch");
}

Item Theorem1Adversary::next(std::span<const Item> defender, GameTrace* trace) {
  for (; seen_ < defender.size(); ++seen_) {
    const Item& it = defender[seen_];
    if (it.whitespace || it.pair.output.size() < 2) continue;
    const auto& out = it.pair.output;
    Nat named[2] = {small_of(out[0]), small_of(out[1])};
    for (Nat c : named) {
      const Seq* q = s_.codec->decode(c);
      if ((!q || !s_.tree.on_branch(*q)) && withheld_.insert(c).second && trace)
        trace->add(round_, "WITHHOLD " + std::to_string(c));
    }
    const auto& in = it.pair.input;
    if (in.size() == 3 && out.size() == 3 && small_of(in[0]) == 1) {
      Nat node = named[small_of(in[1]) == 1 ? 1 : 0];
      if (withheld_.count(node)) s_.coins->fix(node, small_of(in[2]), small_of(out[2]) != 0);
    }
  }
  // Cantor unpairing of the round: instance n, slot j.
  Nat z = round_++;
  Nat w = 0;
  while ((w + 1) * (w + 2) / 2 <= z) ++w;
  Nat j = z - w * (w + 1) / 2;
  Nat n = w - j;
  Nat c = s_.codec->code(s_.tree.branch_prefix(n));
  if (j == 0) return node_item(n, c);
  return coin_item(n, c, j - 1, s_.coins->value(c, j - 1));
}

Theorem1Result play_theorem1(Theorem1Setup& s, Theorem1Strategy& strategy, std::size_t horizon, const Budget& b) {
  Theorem1Result r;
  std::optional<Theorem1Adversary> adv;
  Segment supply;
  if (s.tree.has_branch())
    adv.emplace(s);
  else
    supply = theorem1_supply(s, b.numeral_bound + 1);
  for (std::size_t round = 0; round < horizon; ++round) {
    Item a = adv ? adv->next(r.consequent, &r.trace) : round < supply.size() ? supply[round] : Item::space();
    r.antecedent.push_back(a);
    r.trace.add(round, "FEED 0 " + serialize(a));
    Item d = strategy.respond(r.antecedent);
    r.consequent.push_back(d);
    r.trace.add(round, "EMIT 0 " + serialize(d));
  }
  if (adv) {
    adv->next(r.consequent, &r.trace);  // sees the last emission
    r.withheld = adv->withheld();
  }
  Budget bb = b;
  bb.pull_limit = std::max(b.pull_limit, r.consequent.size());
  CheckContext ctx;
  ctx.interp = s.interp;
  r.verdict = check_witness(s.consequent, WitnessStream::literal(r.consequent), bb, ctx);
  r.trace.add(horizon, to_string(r.verdict));
  return r;
}

// ---------------------------------------------------------------------------
// Transfinite induction

std::string to_string(const Literal& l) { return (l.positive ? "r" : "~r") + std::to_string(l.atom); }

std::string to_string(const Combination& c) {
  std::string out = "(";
  for (std::size_t k = 0; k < c.premises.size(); ++k) {
    const Clause& cl = c.premises[k];
    out += k ? " /\\ " : "";
    if (cl.hyps.empty()) {
      out += to_string(cl.concl);
      continue;
    }
    out += "(";
    for (std::size_t h = 0; h < cl.hyps.size(); ++h) out += (h ? " /\\ " : "") + to_string(cl.hyps[h]);
    out += " -> " + to_string(cl.concl) + ")";
  }
  return out + ") -> " + to_string(c.conclusion);
}

bool tautology(const Combination& c) {
  std::vector<Nat> atoms;
  auto note = [&](const Literal& l) {
    if (std::find(atoms.begin(), atoms.end(), l.atom) == atoms.end()) atoms.push_back(l.atom);
  };
  for (const auto& cl : c.premises) {
    for (const auto& h : cl.hyps) note(h);
    note(cl.concl);
  }
  note(c.conclusion);
  if (atoms.size() > 24) throw std::invalid_argument("too many atoms for a truth table");
  std::map<Nat, std::size_t> bit;
  for (std::size_t k = 0; k < atoms.size(); ++k) bit[atoms[k]] = k;
  auto holds = [&](const Literal& l, std::uint32_t v) { return bool((v >> bit[l.atom]) & 1) == l.positive; };
  for (std::uint32_t v = 0; v < (std::uint32_t(1) << atoms.size()); ++v) {
    bool premises = std::all_of(c.premises.begin(), c.premises.end(), [&](const Clause& cl) {
      return holds(cl.concl, v) || std::any_of(cl.hyps.begin(), cl.hyps.end(), [&](const Literal& h) { return !holds(h, v); });
    });
    if (premises && !holds(c.conclusion, v)) return false;
  }
  return true;
}

FiniteOrder FiniteOrder::usual(std::size_t size) {
  FiniteOrder o{size, std::vector<std::vector<Nat>>(size)};
  for (Nat a = 0; a < size; ++a)
    for (Nat b = 0; b < a; ++b) o.below[a].push_back(b);
  return o;
}

FiniteOrder FiniteOrder::empty(std::size_t size) { return {size, std::vector<std::vector<Nat>>(size)}; }

bool FiniteOrder::less(Nat a, Nat b) const {
  return b < size && std::find(below[b].begin(), below[b].end(), a) != below[b].end();
}

namespace {

class Answerer : public TiAnswerer {
 public:
  Answerer(FiniteOrder order, std::vector<bool> truth) : order_(std::move(order)), truth_(std::move(truth)) {
    if (truth_.size() < order_.size) throw std::invalid_argument("truth table shorter than the order");
  }

  std::optional<Literal> answer(Nat m, const std::vector<Literal>& supplied) override {
    if (m >= order_.size) return std::nullopt;
    Clause cl;
    for (Nat k : needs(m)) {
      auto it = std::find_if(supplied.begin(), supplied.end(), [k](const Literal& l) { return l.atom == k; });
      if (it == supplied.end() || it->positive != truth(k)) return std::nullopt;
      cl.hyps.push_back(*it);
    }
    cl.concl = {m, truth(m)};
    given_.push_back(cl);
    return cl.concl;
  }

 protected:
  // Atoms past the order stand for an infinite descent.
  bool truth(Nat a) const { return a < truth_.size() ? truth_[a] : (splitmix(a) & 1); }

  FiniteOrder order_;
  std::vector<bool> truth_;
};

class Honest : public Answerer {
 public:
  using Answerer::Answerer;
  std::vector<Nat> needs(Nat m) const override { return m < order_.size ? order_.below[m] : std::vector<Nat>{}; }
};

class Gated : public Answerer {
 public:
  Gated(std::vector<Nat> chain, FiniteOrder order, std::vector<bool> truth)
      : Answerer(std::move(order), std::move(truth)), chain_(std::move(chain)) {
    for (std::size_t i = 0; i < chain_.size(); ++i) {
      if (chain_[i] >= order_.size) throw std::invalid_argument("chain leaves the order");
      if (i + 1 < chain_.size() && !order_.less(chain_[i + 1], chain_[i]))
        throw std::invalid_argument("chain does not descend");
    }
  }

  std::vector<Nat> needs(Nat m) const override {
    if (m >= order_.size) return {m + 1};
    auto it = std::find(chain_.begin(), chain_.end(), m);
    if (it == chain_.end()) return {};
    if (it + 1 == chain_.end()) return {order_.size};
    return {*(it + 1)};
  }

 private:
  std::vector<Nat> chain_;
};

std::string literals(const std::vector<Literal>& ls) {
  std::string out;
  for (const auto& l : ls) out += " " + to_string(l);
  return out;
}

// Asks for r_m, logging the exchange.
std::optional<Literal> ask(TiAnswerer& a, Nat m, const std::vector<Literal>& lits, std::size_t round, GameTrace& trace,
                           std::vector<TiOutput>& outputs) {
  trace.add(round, "ASK " + std::to_string(m) + literals(lits));
  auto l = a.answer(m, lits);
  if (!l) {
    trace.add(round, "REFUSE " + std::to_string(m));
    return l;
  }
  trace.add(round, "ANSWER " + to_string(*l));
  outputs.push_back({m, *l, a.given().size()});
  trace.add(round, "EMIT " + to_string(*l));
  return l;
}

std::vector<TiOutput> run_scheduler(TiAnswerer& a, std::size_t atoms, std::size_t rounds, GameTrace& trace) {
  std::vector<TiOutput> outputs;
  std::size_t round = 0;
  TiStep step{[&a](Nat n) { return a.needs(n); },
              [&](Nat n, const std::vector<WitnessStream>& ws) {
                std::vector<Nat> need = a.needs(n);
                std::vector<Literal> lits;
                for (std::size_t k = 0; k < need.size() && k < ws.size(); ++k) {
                  const Item& it = ws[k].at(0);
                  lits.push_back({need[k], !it.whitespace && small_of(it.pair.output.at(0)) == 0});
                }
                auto l = ask(a, n, lits, round, trace, outputs);
                if (!l) return WitnessStream::empty();
                return WitnessStream::parse(l->positive ? "(:0)" : "(:1)");
              }};
  TiScheduler sched(step);
  for (Nat m = 0; m < atoms && round < rounds; ++m, ++round) {
    sched.request(m);
    sched.scan();
  }
  while (round < rounds && !sched.waiting().empty()) {
    sched.scan();
    ++round;
  }
  return outputs;
}

enum class Guess { Positive, Negative, Both };

std::vector<TiOutput> run_guesser(TiAnswerer& a, std::size_t atoms, std::size_t rounds, GameTrace& trace, Guess g,
                                  bool descending) {
  std::vector<TiOutput> outputs;
  std::map<Nat, Literal> known;
  std::size_t round = 0;
  for (std::size_t k = 0; k < atoms && round < rounds; ++k) {
    Nat m = descending ? atoms - 1 - k : k;
    for (int attempt = 0; attempt < (g == Guess::Both ? 2 : 1) && round < rounds; ++attempt, ++round) {
      bool guess = g == Guess::Negative ? false : attempt == 0;
      std::vector<Literal> lits;
      for (Nat need : a.needs(m)) {
        auto it = known.find(need);
        lits.push_back(it != known.end() ? it->second : Literal{need, guess});
      }
      if (auto l = ask(a, m, lits, round, trace, outputs)) {
        known[m] = *l;
        break;
      }
    }
  }
  return outputs;
}

}  // namespace

std::unique_ptr<TiAnswerer> honest_answerer(FiniteOrder order, std::vector<bool> truth) {
  return std::make_unique<Honest>(std::move(order), std::move(truth));
}

std::unique_ptr<TiAnswerer> prop3_adversary(std::vector<Nat> chain, FiniteOrder order, std::vector<bool> truth) {
  return std::make_unique<Gated>(std::move(chain), std::move(order), std::move(truth));
}

const std::vector<TiDefender>& ti_library() {
  static const std::vector<TiDefender> lib = {
      {"scheduler", run_scheduler},
      {"guess_pos", [](TiAnswerer& a, std::size_t n, std::size_t r, GameTrace& t) { return run_guesser(a, n, r, t, Guess::Positive, false); }},
      {"guess_neg", [](TiAnswerer& a, std::size_t n, std::size_t r, GameTrace& t) { return run_guesser(a, n, r, t, Guess::Negative, false); }},
      {"both", [](TiAnswerer& a, std::size_t n, std::size_t r, GameTrace& t) { return run_guesser(a, n, r, t, Guess::Both, false); }},
      {"deep_guess", [](TiAnswerer& a, std::size_t n, std::size_t r, GameTrace& t) { return run_guesser(a, n, r, t, Guess::Positive, true); }},
  };
  return lib;
}

Combination combination(const TiAnswerer& a, const TiOutput& o) {
  Combination c;
  c.premises.assign(a.given().begin(), a.given().begin() + static_cast<std::ptrdiff_t>(o.premises));
  c.conclusion = o.value;
  return c;
}

// ---------------------------------------------------------------------------
// Path guessing

FormulaPtr pi11_formula() { return parse_formula("(A x. E y. 0=0) -> (0=0 \\/ 0=0)"); }

namespace {

class EncoderApply : public Source {
 public:
  EncoderApply(std::shared_ptr<const TreePresentation> t, std::shared_ptr<const std::vector<bool>> bits, WitnessStream x)
      : t_(std::move(t)), bits_(std::move(bits)), x_(std::move(x)) {}

  Item next() override {
    std::size_t o = read_++;
    if (!failed_) {
      const Item& it = x_.at(o);
      if (!it.whitespace && it.pair.input.size() == 1 && it.pair.output.size() == 1 && it.pair.input[0].is_numeral() &&
          it.pair.output[0].is_numeral() && it.pair.input[0].value < BigNat(1u << 30))
        answers_.emplace(small_of(it.pair.input[0]), it.pair.output[0].value);
      for (auto a = answers_.find(path_.size()); a != answers_.end() && !failed_; a = answers_.find(path_.size())) {
        if (a->second >= BigNat(kOffTree)) {
          failed_ = o;
          break;
        }
        path_.push_back(static_cast<Nat>(a->second));
        if (!t_->contains(path_)) failed_ = o;
      }
      if (failed_) {
        std::size_t j = *failed_;
        due_ = o + (j < bits_->size() ? 1 + (*bits_)[j] : j == bits_->size() ? 3 : 1);
      }
    }
    if (failed_ && o == due_) return Item::of({{}, {IOToken::selector(0)}});
    return Item::space();
  }

  std::optional<std::size_t> horizon(std::size_t i) const override {
    if (i >= read_) return std::nullopt;
    return i + 1;
  }

 private:
  std::shared_ptr<const TreePresentation> t_;
  std::shared_ptr<const std::vector<bool>> bits_;
  WitnessStream x_;
  std::size_t read_ = 0;
  std::map<Nat, BigNat> answers_;
  Seq path_;
  std::optional<std::size_t> failed_;
  std::size_t due_ = 0;
};

class EncoderSource : public Source {
 public:
  explicit EncoderSource(const TreePresentation& t) : t_(std::make_shared<const TreePresentation>(t)) {
    auto bits = std::make_shared<std::vector<bool>>();
    for (unsigned char c : to_string(t))
      for (int k = 7; k >= 0; --k) bits->push_back((c >> k) & 1);
    bits_ = bits;
  }
  Item next() override { return Item::space(); }
  std::shared_ptr<Source> apply(const FormulaPtr&, const WitnessStream& x) override {
    return std::make_shared<EncoderApply>(t_, bits_, x);
  }

 private:
  std::shared_ptr<const TreePresentation> t_;
  std::shared_ptr<const std::vector<bool>> bits_;
};

}  // namespace

WitnessStream pi11_encode(const TreePresentation& t) {
  t.validate();
  return WitnessStream(std::make_shared<EncoderSource>(t));
}

std::string pi11_decode(const WitnessStream& encoder, std::size_t max_bits) {
  FormulaPtr f = pi11_formula();
  std::vector<bool> bits;
  for (std::size_t j = 0; j <= max_bits; ++j) {
    Segment probe(j, Item::space());
    probe.push_back(Item::of({{num(0)}, {num(kOffTree)}}));
    WitnessStream out = apply_implication(encoder, f, WitnessStream::literal(probe));
    std::size_t delay = 0;
    for (std::size_t q = j; q < j + 4 && !delay; ++q)
      if (!out.at(q).whitespace) delay = q - j;
    if (delay == 0) throw std::runtime_error("encoder gave no answer after a failed guess");
    if (delay == 3) break;
    bits.push_back(delay == 2);
  }
  std::string text;
  for (std::size_t k = 0; k + 8 <= bits.size(); k += 8) {
    unsigned char c = 0;
    for (std::size_t b = 0; b < 8; ++b) c = static_cast<unsigned char>((c << 1) | bits[k + b]);
    text += static_cast<char>(c);
  }
  return text;
}

WitnessStream branch_follower(const TreePresentation& t) {
  if (!t.has_branch()) throw std::invalid_argument("no designated branch to follow");
  auto k = std::make_shared<Nat>(0);
  return WitnessStream::generate([t, k] {
    Nat x = (*k)++;
    return Item::of({{num(x)}, {num(t.branch_at(x))}});
  });
}

// ---------------------------------------------------------------------------
// Narrow constructive truth

std::vector<NarrowEvent> parse_script(const std::string& text) {
  std::vector<NarrowEvent> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto index = [&](const std::string& w) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(w, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != w.size() || w.empty() || w[0] == '-')
      throw std::invalid_argument("script line " + std::to_string(lineno) + ": bad number '" + w + "'");
    return static_cast<std::size_t>(v);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ss(line);
    std::string cmd, a;
    if (!(ss >> cmd)) continue;
    NarrowEvent e;
    if (!(ss >> a)) throw std::invalid_argument("script line " + std::to_string(lineno) + ": missing instance");
    e.instance = index(a);
    if (cmd == "SPAWN") {
      e.kind = NarrowEvent::Kind::Spawn;
    } else if (cmd == "PULL") {
      e.kind = NarrowEvent::Kind::Pull;
    } else if (cmd == "COPY") {
      std::string from, j, at, k;
      if (!(ss >> from >> j >> at >> k) || from != "FROM" || at != "AT")
        throw std::invalid_argument("script line " + std::to_string(lineno) + ": expected COPY i FROM j AT k");
      e.kind = NarrowEvent::Kind::Copy;
      e.from = index(j);
      e.at = index(k);
    } else if (cmd == "FEED") {
      std::string rest;
      std::getline(ss, rest);
      Segment items = parse_items(rest);
      if (items.size() != 1) throw std::invalid_argument("script line " + std::to_string(lineno) + ": FEED takes one item");
      e.kind = NarrowEvent::Kind::Feed;
      e.item = items[0];
    } else {
      throw std::invalid_argument("script line " + std::to_string(lineno) + ": unknown event '" + cmd + "'");
    }
    std::string extra;
    if (e.kind != NarrowEvent::Kind::Feed && (ss >> extra))
      throw std::invalid_argument("script line " + std::to_string(lineno) + ": trailing '" + extra + "'");
    out.push_back(std::move(e));
  }
  return out;
}

std::string to_string(const NarrowEvent& e) {
  std::string i = std::to_string(e.instance);
  switch (e.kind) {
    case NarrowEvent::Kind::Spawn:
      return "SPAWN " + i;
    case NarrowEvent::Kind::Copy:
      return "COPY " + i + " FROM " + std::to_string(e.from) + " AT " + std::to_string(e.at);
    case NarrowEvent::Kind::Feed:
      return "FEED " + i + " " + serialize(e.item);
    case NarrowEvent::Kind::Pull:
      return "PULL " + i;
  }
  return {};
}

std::string to_string(const InstanceVerdict& v) {
  switch (v.kind) {
    case InstanceVerdict::Kind::Met:
      return "met";
    case InstanceVerdict::Kind::Violated:
      return "violated " + v.evidence;
    case InstanceVerdict::Kind::Undetermined:
      return "undetermined";
  }
  return {};
}

namespace {

// The antecedent an instance reads: replayed items first, then whatever has
// been fed, whitespace when nothing is waiting.
class LiveFeed : public Source {
 public:
  LiveFeed(Segment replay, Segment* consumed) : replay_(std::move(replay)), consumed_(consumed) {}

  Item next() override {
    Item it;
    if (pos_ < replay_.size()) {
      it = replay_[pos_++];
    } else if (!queue_.empty()) {
      it = queue_.front();
      queue_.pop_front();
    }
    consumed_->push_back(it);
    return it;
  }
  void feed(Item it) { queue_.push_back(std::move(it)); }

 private:
  Segment replay_;
  std::size_t pos_ = 0;
  std::deque<Item> queue_;
  Segment* consumed_;
};

struct Running {
  NarrowInstance inst;
  std::shared_ptr<LiveFeed> feed;
  WitnessStream out;
};

Verdict check(const FormulaPtr& f, const Segment& items, const NarrowOptions& opts) {
  Budget b = opts.budget;
  b.pull_limit = std::max(b.pull_limit, items.size());
  CheckContext ctx;
  ctx.interp = opts.interp;
  return check_witness(f, WitnessStream::literal(items), b, ctx);
}

InstanceVerdict from_verdict(const Verdict& v) {
  if (v.rejected()) return {InstanceVerdict::Kind::Violated, to_string(v)};
  if (v.pending()) return {InstanceVerdict::Kind::Undetermined, {}};
  return {};
}

}  // namespace

InstanceVerdict judge_instance(const FormulaPtr& f, const NarrowInstance& inst, const NarrowOptions& opts) {
  if (f->kind != FormulaKind::Implies) return from_verdict(check(f, inst.output, opts));
  Verdict a = check(f->left, inst.input, opts);
  if (a.rejected()) {
    // Shortest refuted prefix of the input.
    std::size_t lo = 1, hi = inst.input.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (check(f->left, Segment(inst.input.begin(), inst.input.begin() + static_cast<std::ptrdiff_t>(mid)), opts).rejected())
        hi = mid;
      else
        lo = mid + 1;
    }
    Segment held;
    for (std::size_t i = 0; i < inst.output.size(); ++i)
      if (inst.consumed[i] < lo) held.push_back(inst.output[i]);
    Verdict v = check(f->right, held, opts);
    if (v.rejected()) return from_verdict(v);
    return {};
  }
  Verdict v = check(f->right, inst.output, opts);
  if (v.pending() && a.pending()) return {};
  return from_verdict(v);
}

NarrowResult narrow_play(const FormulaPtr& f, const Program& strategy, const std::vector<NarrowEvent>& script,
                         std::size_t horizon, const NarrowOptions& opts) {
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  bool imp = f->kind == FormulaKind::Implies;
  std::vector<std::unique_ptr<Running>> runs;
  NarrowResult res;

  auto start = [&](Segment replay) {
    auto r = std::make_unique<Running>();
    r->inst.id = runs.size();
    WitnessStream base = run_program(strategy, f, opts.step_quota);
    if (imp) {
      r->feed = std::make_shared<LiveFeed>(std::move(replay), &r->inst.input);
      r->out = apply_implication(base, f, WitnessStream(r->feed));
    } else {
      r->out = base;
    }
    runs.push_back(std::move(r));
    return runs.back().get();
  };
  auto pull = [&](Running& r) {
    Item it = r.out.at(r.inst.output.size());
    r.inst.output.push_back(it);
    r.inst.consumed.push_back(r.inst.input.size());
    return it;
  };
  auto instance = [&](std::size_t i) -> Running& {
    if (i >= runs.size()) throw std::invalid_argument("no instance " + std::to_string(i));
    return *runs[i];
  };
  auto fresh_id = [&](std::size_t i) {
    if (i != runs.size()) throw std::invalid_argument("instances are numbered in order; expected " + std::to_string(runs.size()));
  };

  std::size_t round = 0;
  for (const auto& e : script) {
    if (round >= horizon) break;
    std::string line = to_string(e);
    switch (e.kind) {
      case NarrowEvent::Kind::Spawn:
        fresh_id(e.instance);
        start({});
        break;
      case NarrowEvent::Kind::Copy: {
        if (!opts.allow_copy) throw std::invalid_argument("copying is disabled");
        fresh_id(e.instance);
        Running& src = instance(e.from);
        if (e.at > src.inst.output.size()) throw std::invalid_argument("copy point beyond instance " + std::to_string(e.from));
        std::size_t used = e.at ? src.inst.consumed[e.at - 1] : 0;
        Segment replay(src.inst.input.begin(), src.inst.input.begin() + static_cast<std::ptrdiff_t>(used));
        Segment expect(src.inst.output.begin(), src.inst.output.begin() + static_cast<std::ptrdiff_t>(e.at));
        Running* r = start(std::move(replay));
        r->inst.copied_from = std::make_pair(e.from, e.at);
        for (std::size_t k = 0; k < e.at; ++k)
          if (!(pull(*r) == expect[k])) throw std::logic_error("replay diverged from the copied transcript");
        break;
      }
      case NarrowEvent::Kind::Feed:
        if (!imp) throw std::invalid_argument("FEED needs an implication");
        instance(e.instance).feed->feed(e.item);
        break;
      case NarrowEvent::Kind::Pull:
        line += " " + serialize(pull(instance(e.instance)));
        break;
    }
    res.trace.add(round++, line);
  }
  for (const auto& r : runs) {
    res.verdicts.push_back(judge_instance(f, r->inst, opts));
    res.trace.add(round, "VERDICT " + std::to_string(r->inst.id) + " " + to_string(res.verdicts.back()));
    res.instances.push_back(r->inst);
  }
  return res;
}

NarrowFixture distinguishing_fixture(const TreePresentation& t, std::uint64_t seed) {
  if (t.has_branch()) throw std::invalid_argument("fixture needs a tree without a designated branch");
  NarrowFixture fx{theorem1_setup(t, seed), nullptr, nullptr, {}};
  std::size_t h = t.height();
  fx.c = parse_formula("E s. Node(s, " + std::to_string(h) + ")");
  fx.formula = Formula::implies(Formula::implies(fx.setup.antecedent, parse_formula("0=0 \\/ 0=0")), fx.c);
  Nat deepest = 0;
  for (const auto& n : t.nodes)
    if (n.size() == h) {
      deepest = fx.setup.codec->code(n);
      break;
    }
  fx.strategy = parse_program("(witness (lambda a (pair " + std::to_string(deepest) + " 0)))");
  return fx;
}

}  // namespace ctruth
