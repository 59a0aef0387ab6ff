#include "ctruth/combinators.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "ctruth/eval.hpp"

namespace ctruth {

namespace {

constexpr std::size_t kReifyScanLimit = 100000;
constexpr std::size_t kQuotaGrowth = 1024;

IOPair strip_head(const IOPair& p, bool input) {
  IOPair q = p;
  auto& list = input ? q.input : q.output;
  list.erase(list.begin());
  return q;
}

class FilterSource : public Source {
 public:
  FilterSource(WitnessStream base, bool input, IOToken tok) : base_(std::move(base)), input_(input), tok_(std::move(tok)) {}

  Item next() override {
    Item it = base_.at(pos_);
    ++pos_;
    if (it.whitespace) return it;
    const IOPair& p = it.pair;
    if (input_) {
      if (!p.input.empty() && p.input[0] == tok_) return Item::of(strip_head(p, true));
    } else if (!p.output.empty() && p.output[0] == tok_) {
      return Item::of(strip_head(p, false));
    }
    return Item::space();
  }

  std::optional<std::size_t> horizon(std::size_t index) const override { return base_.source().horizon(index); }

 private:
  WitnessStream base_;
  bool input_;
  IOToken tok_;
  std::size_t pos_ = 0;
};

// Scans a literal witness for A -> B for pairs whose antecedent prefix is a
// prefix of x.
class LiteralApplySource : public Source {
 public:
  LiteralApplySource(WitnessStream w, WitnessStream x) : w_(std::move(w)), x_(std::move(x)) {}

  Item next() override {
    Item it = w_.at(pos_);
    ++pos_;
    Item out = Item::space();
    if (!it.whitespace && it.pair.trivial() && seen_.insert("").second) {
      out = it;
    } else if (!it.whitespace && !it.pair.input.empty() && it.pair.input[0].is_prefix()) {
      const Segment& seg = *it.pair.input[0].segment;
      bool match = true;
      for (std::size_t k = 0; k < seg.size() && match; ++k) match = x_.at(k) == seg[k];
      if (match) {
        IOPair stripped = strip_head(it.pair, true);
        if (seen_.insert(serialize(stripped)).second) {
          out = Item::of(std::move(stripped));
          fed_ = std::max(fed_, seg.size());
        }
      }
    }
    horizons_.push_back(fed_);
    return out;
  }

  std::optional<std::size_t> horizon(std::size_t index) const override {
    if (index >= horizons_.size()) return std::nullopt;
    return horizons_[index];
  }

 private:
  WitnessStream w_;
  WitnessStream x_;
  std::size_t pos_ = 0;
  std::size_t fed_ = 0;
  std::set<std::string> seen_;
  std::vector<std::size_t> horizons_;
};

// ---------------------------------------------------------------------------
// Functional witnesses

struct FeedState {
  WitnessStream x;
  std::size_t limit = 0;
};

// The antecedent as the applied witness sees it: only `limit` items so far.
class GuardedSource : public Source {
 public:
  explicit GuardedSource(std::shared_ptr<FeedState> feed) : feed_(std::move(feed)) {}

  Item next() override {
    if (pos_ >= feed_->limit) throw Blocked();
    Item it = feed_->x.at(pos_);
    ++pos_;
    return it;
  }
  std::shared_ptr<Source> descend(const FormulaPtr& f, const IOToken& tok) override {
    return feed_->x.source().descend(f, tok);
  }
  std::shared_ptr<Source> apply(const FormulaPtr& f, const WitnessStream& x) override {
    return feed_->x.source().apply(f, x);
  }

 private:
  std::shared_ptr<FeedState> feed_;
  std::size_t pos_ = 0;
};

const Value& forced_pair(const Value& v) {
  const Value& f = force(v);
  if (f.kind != Value::Kind::Pair) throw ShapeError("witness value is not a pair");
  return f;
}

Nat forced_num(const Value& v) {
  const Value& f = force(v);
  if (f.kind != Value::Kind::Num) throw ShapeError("witness value is not a number");
  return f.num;
}

using RootFn = std::function<Value(std::size_t& steps)>;

Value reify_with(const FormulaPtr& f, const WitnessStream& x, std::size_t quota);

// One step of a functional witness along `f`'s spine.
Value step_value(const FormulaPtr& f, const Value& v, const IOToken& tok, std::size_t& steps) {
  switch (f->kind) {
    case FormulaKind::Forall:
      return call(v, Value::number(tok.small()), steps);
    case FormulaKind::And:
      return tok.value == 0 ? forced_pair(v).pair->first : forced_pair(v).pair->second;
    case FormulaKind::Exists:
    case FormulaKind::Or: {
      const Value& p = forced_pair(v);
      if (BigNat(forced_num(p.pair->first)) != tok.value) throw ShapeError("witness chose differently");
      return p.pair->second;
    }
    default:
      throw ShapeError("cannot step a witness value at " + to_string(*f));
  }
}

class ValueSource : public Source {
 public:
  ValueSource(FormulaPtr f, RootFn root, std::size_t quota, std::size_t cap, std::shared_ptr<FeedState> feed)
      : f_(std::move(f)),
        root_(std::move(root)),
        quota_(std::max<std::size_t>(quota, 1)),
        cap_(std::max(cap, quota_)),
        feed_(std::move(feed)) {}

  Item next() override {
    if (feed_) ++feed_->limit;
    Item out = produce();
    horizons_.push_back(feed_ ? feed_->limit : 0);
    return out;
  }

  std::optional<std::size_t> horizon(std::size_t index) const override {
    if (!feed_ || index >= horizons_.size()) return std::nullopt;
    return horizons_[index];
  }

  std::shared_ptr<Source> descend(const FormulaPtr& f, const IOToken& tok) override {
    RootFn root = [root = root_, f, tok](std::size_t& steps) { return step_value(f, root(steps), tok, steps); };
    return std::make_shared<ValueSource>(ctruth::descend(f, tok), root, quota_, cap_, feed_);
  }

  std::shared_ptr<Source> apply(const FormulaPtr& f, const WitnessStream& x) override {
    if (f->kind != FormulaKind::Implies) return nullptr;
    auto feed = std::make_shared<FeedState>(FeedState{x, 0});
    WitnessStream guarded(std::make_shared<GuardedSource>(feed));
    FormulaPtr antecedent = f->left;
    std::size_t quota = quota_;
    RootFn root = [root = root_, antecedent, guarded, quota](std::size_t& steps) {
      Value fn = root(steps);
      return call(fn, reify_with(antecedent, guarded, quota), steps);
    };
    return std::make_shared<ValueSource>(f->right, root, quota_, cap_, feed);
  }

 private:
  struct Job {
    std::vector<IOToken> path;
    std::size_t quota;
  };

  struct Outcome {
    std::vector<IOToken> outputs;
    FormulaPtr at;
    bool at_input = false;
  };

  Outcome walk(const std::vector<IOToken>& path, std::size_t& steps) const {
    Value v = root_(steps);
    Outcome o;
    o.at = f_;
    std::size_t k = 0;
    while (true) {
      switch (slot_kind(*o.at)) {
        case SlotKind::Terminal:
          return o;
        case SlotKind::Input: {
          if (k == path.size() || o.at->kind == FormulaKind::Implies) {
            o.at_input = true;
            return o;
          }
          const IOToken& tok = path[k++];
          v = step_value(o.at, v, tok, steps);
          o.at = ctruth::descend(o.at, tok);
          break;
        }
        case SlotKind::Output: {
          if (o.at->kind == FormulaKind::Box) {
            const Value& c = force(v);
            if (c.kind != Value::Kind::Code) throw ShapeError("box witness value is not a code");
            o.outputs.push_back(IOToken::numeral(godel_encode(*c.code)));
            return o;
          }
          const Value& p = forced_pair(v);
          Nat n = forced_num(p.pair->first);
          if (o.at->kind == FormulaKind::Or && n > 1) throw ShapeError("selector out of range");
          IOToken tok = IOToken::numeral(n);
          o.outputs.push_back(tok);
          Value rest = p.pair->second;
          v = std::move(rest);
          o.at = ctruth::descend(o.at, tok);
          break;
        }
      }
    }
  }

  void advance_stage() {
    ++stage_;
    now_ = std::move(later_);
    later_.clear();
    for (const auto& node : forall_nodes_) {
      auto child = node;
      child.push_back(IOToken::numeral(stage_));
      now_.push_back({std::move(child), quota_});
    }
  }

  Item produce() {
    if (!started_) {
      started_ = true;
      now_.push_back({{}, quota_});
    }
    if (now_.empty()) advance_stage();
    if (now_.empty()) return Item::space();
    Job job = std::move(now_.front());
    now_.pop_front();
    Outcome o;
    try {
      std::size_t steps = job.quota;
      o = walk(job.path, steps);
    } catch (const OutOfSteps&) {
      job.quota = std::min(job.quota * 2, cap_);
      later_.push_back(std::move(job));
      return Item::space();
    } catch (const Blocked&) {
      later_.push_back(std::move(job));
      return Item::space();
    } catch (const ShapeError&) {
      return Item::space();
    } catch (const VmError&) {
      return Item::space();
    }
    if (o.at_input) {
      if (o.at->kind == FormulaKind::Forall) {
        forall_nodes_.push_back(job.path);
        for (Nat n = 0; n <= stage_; ++n) {
          auto child = job.path;
          child.push_back(IOToken::numeral(n));
          now_.push_back({std::move(child), quota_});
        }
      } else if (o.at->kind == FormulaKind::And) {
        for (int s = 0; s < 2; ++s) {
          auto child = job.path;
          child.push_back(IOToken::selector(s));
          now_.push_back({std::move(child), quota_});
        }
      }
    }
    bool silent = !job.path.empty() && o.outputs.empty() && o.at_input && o.at->kind != FormulaKind::Implies;
    if (silent) return Item::space();
    return Item::of(IOPair{std::move(job.path), std::move(o.outputs)});
  }

  FormulaPtr f_;
  RootFn root_;
  std::size_t quota_;
  std::size_t cap_;
  std::shared_ptr<FeedState> feed_;
  bool started_ = false;
  Nat stage_ = 0;
  std::deque<Job> now_;
  std::deque<Job> later_;
  std::vector<std::vector<IOToken>> forall_nodes_;
  std::vector<std::size_t> horizons_;
};

IOToken scan_head(const WitnessStream& x) {
  for (std::size_t i = 0; i < kReifyScanLimit; ++i) {
    Item it = x.at(i);
    if (!it.whitespace && !it.pair.output.empty()) return it.pair.output[0];
  }
  throw Blocked();
}

Value reify_with(const FormulaPtr& f, const WitnessStream& x, std::size_t quota) {
  switch (f->kind) {
    case FormulaKind::Forall:
      return Value::function([f, x, quota](const Value& n) {
        IOToken tok = IOToken::numeral(forced_num(n));
        return reify_with(ctruth::descend(f, tok), descend(x, f, tok), quota);
      });
    case FormulaKind::And:
      return Value::make_pair(reify_with(f->left, descend(x, f, IOToken::selector(0)), quota),
                              reify_with(f->right, descend(x, f, IOToken::selector(1)), quota));
    case FormulaKind::Implies:
      return Value::function([f, x, quota](const Value& v) {
        return reify_with(f->right, apply_implication(x, f, serialize_value(f->left, v, quota)), quota);
      });
    case FormulaKind::Exists:
    case FormulaKind::Or:
      return Value::deferred([f, x, quota] {
        IOToken tok = scan_head(x);
        if (!tok.is_numeral() || (f->kind == FormulaKind::Or && tok.value > 1)) throw Blocked();
        return Value::make_pair(Value::number(tok.small()),
                                reify_with(ctruth::descend(f, tok), descend(x, f, tok), quota));
      });
    case FormulaKind::Box:
      return Value::deferred([x] {
        IOToken tok = scan_head(x);
        if (!tok.is_numeral()) throw Blocked();
        try {
          return Value::program(std::make_shared<Program>(godel_decode(tok.value)));
        } catch (const VmError&) {
          throw Blocked();
        }
      });
    default:
      return Value::number(0);
  }
}

// ---------------------------------------------------------------------------
// Composition

Item prefixed(const Item& it, bool input, const IOToken& tok) {
  if (it.whitespace) return it;
  IOPair p = it.pair;
  auto& list = input ? p.input : p.output;
  list.insert(list.begin(), tok);
  return Item::of(std::move(p));
}

class ChoiceSource : public Source {
 public:
  ChoiceSource(IOToken tok, WitnessStream inner) : tok_(std::move(tok)), inner_(std::move(inner)) {}
  Item next() override {
    if (!started_) {
      started_ = true;
      return Item::of(IOPair{{}, {tok_}});
    }
    Item it = inner_.at(pos_);
    ++pos_;
    if (!it.whitespace && it.pair.trivial()) return Item::space();
    return prefixed(it, false, tok_);
  }

 private:
  IOToken tok_;
  WitnessStream inner_;
  std::size_t pos_ = 0;
  bool started_ = false;
};

class MergeSource : public Source {
 public:
  // instances(n) for n admitted one per round; `limit` caps the family (2 for /\).
  MergeSource(std::function<WitnessStream(Nat)> instances, std::optional<Nat> limit)
      : instances_(std::move(instances)), limit_(limit) {}

  Item next() override {
    if (!started_) {
      started_ = true;
      return Item::of(IOPair{});
    }
    if (cursor_ == streams_.size()) {
      cursor_ = 0;
      if (!limit_ || streams_.size() < *limit_) {
        streams_.push_back(instances_(streams_.size()));
        positions_.push_back(0);
      }
    }
    std::size_t n = cursor_++;
    Item it = streams_[n].at(positions_[n]);
    ++positions_[n];
    return prefixed(it, true, IOToken::numeral(n));
  }

 private:
  std::function<WitnessStream(Nat)> instances_;
  std::optional<Nat> limit_;
  std::vector<WitnessStream> streams_;
  std::vector<std::size_t> positions_;
  std::size_t cursor_ = 0;
  bool started_ = false;
};

bool mentions_implication(const Formula& f) {
  if (f.kind == FormulaKind::Implies) return true;
  return (f.left && mentions_implication(*f.left)) || (f.right && mentions_implication(*f.right));
}

}  // namespace

// ---------------------------------------------------------------------------

WitnessStream descend(const WitnessStream& w, const FormulaPtr& f, const IOToken& tok) {
  if (auto s = w.source().descend(f, tok)) return WitnessStream(s);
  return WitnessStream(std::make_shared<FilterSource>(w, slot_kind(*f) == SlotKind::Input, tok));
}

WitnessStream project_forall(const WitnessStream& w, const FormulaPtr& f, Nat n) {
  if (f->kind != FormulaKind::Forall) throw ShapeError("project_forall needs a universal formula");
  return descend(w, f, IOToken::numeral(n));
}

WitnessStream apply_implication(const WitnessStream& w, const FormulaPtr& f, const WitnessStream& x) {
  if (f->kind != FormulaKind::Implies) throw ShapeError("apply_implication needs an implication");
  if (auto s = w.source().apply(f, x)) return WitnessStream(s);
  return WitnessStream(std::make_shared<LiteralApplySource>(w, x));
}

Parts decompose(const WitnessStream& w, const FormulaPtr& f, std::size_t pull_limit) {
  Parts parts;
  switch (f->kind) {
    case FormulaKind::And:
      parts.first = descend(w, f, IOToken::selector(0));
      parts.second = descend(w, f, IOToken::selector(1));
      return parts;
    case FormulaKind::Forall:
      parts.instances = [w, f](Nat n) { return project_forall(w, f, n); };
      return parts;
    case FormulaKind::Exists:
    case FormulaKind::Or:
    case FormulaKind::Box: {
      for (std::size_t i = 0; i < pull_limit && !parts.head; ++i) {
        Item it = w.at(i);
        if (!it.whitespace && !it.pair.output.empty()) parts.head = it.pair.output[0];
      }
      if (!parts.head) throw Pending("no answer for " + to_string(*f) + " within " + std::to_string(pull_limit) + " items");
      (void)ctruth::descend(f, *parts.head);  // shape check
      if (f->kind != FormulaKind::Box) parts.first = descend(w, f, *parts.head);
      return parts;
    }
    default:
      throw ShapeError("nothing to decompose at " + to_string(*f));
  }
}

WitnessStream compose(const Parts& parts, const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::And: {
      auto first = parts.first, second = parts.second;
      return WitnessStream(std::make_shared<MergeSource>([first, second](Nat n) { return n == 0 ? first : second; }, 2));
    }
    case FormulaKind::Forall:
      if (!parts.instances) throw ShapeError("compose needs the instance family for " + to_string(*f));
      return WitnessStream(std::make_shared<MergeSource>(parts.instances, std::nullopt));
    case FormulaKind::Exists:
    case FormulaKind::Or:
      if (!parts.head) throw ShapeError("compose needs the head token for " + to_string(*f));
      (void)ctruth::descend(f, *parts.head);
      return WitnessStream(std::make_shared<ChoiceSource>(*parts.head, parts.first));
    case FormulaKind::Box:
      if (!parts.head) throw ShapeError("compose needs the code for " + to_string(*f));
      return WitnessStream::literal({Item::of(IOPair{{}, {*parts.head}})});
    case FormulaKind::Implies:
      throw ShapeError("implication witnesses are not composed from parts");
    default:
      return WitnessStream::literal({Item::of(IOPair{})});
  }
}

Program box_decode(const WitnessStream& w, const FormulaPtr& f, std::size_t pull_limit) {
  if (f->kind != FormulaKind::Box) throw ShapeError("box_decode needs a box formula");
  Parts parts = decompose(w, f, pull_limit);
  if (!parts.head->is_numeral()) throw ShapeError("box witness must output a numeral");
  return godel_decode(parts.head->value);
}

WitnessStream normalize_strict(const WitnessStream& w, const FormulaPtr& f, std::size_t budget) {
  if (mentions_implication(*f)) throw ShapeError("normalize_strict needs an implication-free formula");
  std::vector<IOPair> pairs;
  Nat last_stage = 0;
  for (const auto& it : w.pull(budget))
    if (!it.whitespace) {
      check_shape(f, it.pair);
      pairs.push_back(it.pair);
      for (const auto& tok : it.pair.input)
        if (tok.value > last_stage) last_stage = tok.value <= budget ? tok.small() : budget;
    }

  // Output owed at `path`, if the stream gives it.
  auto answer = [&](const std::vector<IOToken>& path) -> std::optional<std::vector<IOToken>> {
    for (const auto& p : pairs) {
      if (p.input.size() < path.size() || !std::equal(path.begin(), path.end(), p.input.begin())) continue;
      SpineWalk sw = walk_spine(f, path, p.output);
      if (sw.inputs < path.size() || sw.stop == SlotKind::Output) continue;
      return std::vector<IOToken>(p.output.begin(), p.output.begin() + static_cast<std::ptrdiff_t>(sw.outputs));
    }
    if (walk_spine(f, path, {}).stop != SlotKind::Output) return std::vector<IOToken>{};
    return std::nullopt;
  };

  Segment out;
  bool stalled = false;
  std::function<void(std::vector<IOToken>&, Nat, Nat)> visit = [&](std::vector<IOToken>& path, Nat top, Nat stage) {
    if (stalled || out.size() >= budget) return;
    auto ans = answer(path);
    if (!ans) {
      stalled = true;
      return;
    }
    if (top == stage) out.push_back(Item::of(IOPair{path, *ans}));
    SpineWalk sw = walk_spine(f, path, *ans);
    if (sw.stop != SlotKind::Input) return;
    if (sw.at->kind == FormulaKind::Forall) {
      for (Nat n = 0; n <= stage && !stalled; ++n) {
        path.push_back(IOToken::numeral(n));
        visit(path, std::max(top, n), stage);
        path.pop_back();
      }
    } else {
      for (int s = 0; s < 2 && !stalled; ++s) {
        path.push_back(IOToken::selector(s));
        visit(path, top, stage);
        path.pop_back();
      }
    }
  };
  // Stages past the largest numeral the stream mentions hold nothing it answered.
  for (Nat stage = 0; !stalled && stage <= last_stage && out.size() < budget; ++stage) {
    std::vector<IOToken> path;
    visit(path, 0, stage);
  }
  return WitnessStream::literal(std::move(out));
}

std::size_t default_cap(std::size_t quota, std::size_t cap) { return cap ? cap : quota * kQuotaGrowth; }

WitnessStream serialize_value(const FormulaPtr& f, const Value& v, std::size_t step_quota, std::size_t step_cap) {
  return WitnessStream(std::make_shared<ValueSource>(f, [v](std::size_t&) { return v; }, step_quota,
                                                     default_cap(step_quota, step_cap), nullptr));
}

WitnessStream run_program(const Program& p, const FormulaPtr& f, std::size_t step_quota, std::size_t step_cap) {
  if (p.mode == Program::Mode::Stream) return run_stream_program(p, step_quota);
  auto prog = std::make_shared<Program>(p);
  return WitnessStream(std::make_shared<ValueSource>(
      f, [prog](std::size_t& steps) { return evaluate_program(*prog, steps); }, step_quota,
      default_cap(step_quota, step_cap), nullptr));
}

Value reify(const FormulaPtr& f, const WitnessStream& x) { return reify_with(f, x, 10000); }

}  // namespace ctruth
