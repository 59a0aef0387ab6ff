#include "ctruth/vm.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace ctruth {

// ---------------------------------------------------------------------------
// Compilation

namespace {

using Op = Expr::Op;

const std::map<std::string, std::pair<Op, int>>& primitives() {
  // arity -1: variadic (at least one)
  static const std::map<std::string, std::pair<Op, int>> table = {
      {"+", {Op::Add, 2}},     {"-", {Op::Sub, 2}},  {"*", {Op::Mul, 2}},        {"/", {Op::Div, 2}},
      {"%", {Op::Mod, 2}},     {"=", {Op::Eq, 2}},   {"<", {Op::Lt, 2}},         {"<=", {Op::Le, 2}},
      {"pair", {Op::Pair, 2}}, {"fst", {Op::Fst, 1}}, {"snd", {Op::Snd, 1}},     {"pair?", {Op::IsPair, 1}},
      {"seq", {Op::Seq, -1}},  {"emit-item", {Op::EmitItem, 1}},
  };
  return table;
}

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = [] {
    std::set<std::string> s = {"if", "let", "lambda", "rec", "search", "code", "emit", "space", "query",
                               "witness", "stream"};
    for (const auto& [name, _] : primitives()) s.insert(name);
    return s;
  }();
  return k;
}

bool is_numeral(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

[[noreturn]] void bad(const SExpr& e, const std::string& msg) {
  throw VmError("program error at " + std::to_string(e.position) + ": " + msg + " in " + to_string(e));
}

std::string binder(const SExpr& e) {
  if (!e.is_atom() || is_numeral(e.text) || keywords().count(e.text)) bad(e, "expected a variable name");
  return e.text;
}

ExprPtr compile(const SExpr& e);

std::vector<ExprPtr> compile_all(const std::vector<SExpr>& xs, std::size_t from) {
  std::vector<ExprPtr> out;
  for (std::size_t i = from; i < xs.size(); ++i) out.push_back(compile(xs[i]));
  return out;
}

ExprPtr compile(const SExpr& e) {
  auto x = std::make_shared<Expr>();
  if (e.is_string()) bad(e, "strings are not values");
  if (e.is_atom()) {
    if (is_numeral(e.text)) {
      try {
        std::size_t used = 0;
        x->num = std::stoull(e.text, &used);
      } catch (const std::out_of_range&) {
        bad(e, "numeral out of range");
      }
      x->op = Op::Num;
    } else {
      x->op = Op::Var;
      x->name = binder(e);
    }
    return x;
  }
  if (e.items.empty()) bad(e, "empty form");
  const SExpr& head = e[0];
  auto arity = [&](std::size_t n) {
    if (e.size() != n + 1) bad(e, "expected " + std::to_string(n) + " operands");
  };
  if (head.is_atom()) {
    const std::string& h = head.text;
    if (auto it = primitives().find(h); it != primitives().end()) {
      x->op = it->second.first;
      if (it->second.second >= 0)
        arity(static_cast<std::size_t>(it->second.second));
      else if (e.size() < 2)
        bad(e, "expected operands");
      x->args = compile_all(e.items, 1);
      return x;
    }
    if (h == "if") {
      arity(3);
      x->op = Op::If;
      x->args = compile_all(e.items, 1);
      return x;
    }
    if (h == "let") {
      arity(3);
      x->op = Op::Let;
      x->name = binder(e[1]);
      x->args = {compile(e[2]), compile(e[3])};
      return x;
    }
    if (h == "lambda" || h == "search") {
      arity(2);
      x->op = h == "lambda" ? Op::Lambda : Op::Search;
      x->name = binder(e[1]);
      x->args = {compile(e[2])};
      return x;
    }
    if (h == "rec") {
      arity(3);
      x->op = Op::Rec;
      x->name = binder(e[1]);
      x->param = binder(e[2]);
      x->args = {compile(e[3])};
      return x;
    }
    if (h == "code") {
      arity(1);
      x->op = Op::Code;
      x->code = std::make_shared<Program>(compile_program(e[1]));
      return x;
    }
    if (h == "emit") {
      arity(2);
      if (!e[1].is_list() || !e[2].is_list()) bad(e, "emit takes an input list and an output list");
      x->op = Op::Emit;
      x->args = compile_all(e[1].items, 0);
      x->emit_inputs = x->args.size();
      for (auto& a : compile_all(e[2].items, 0)) x->args.push_back(std::move(a));
      return x;
    }
    if (h == "space") {
      arity(0);
      x->op = Op::Space;
      return x;
    }
    if (h == "query") {
      arity(1);
      x->op = Op::Query;
      x->name = binder(e[1]);
      return x;
    }
    if (keywords().count(h)) bad(e, "misplaced '" + h + "'");
  }
  if (e.size() < 2) bad(e, "application needs an argument");
  x->op = Op::App;
  x->args = compile_all(e.items, 0);
  return x;
}

}  // namespace

Program compile_program(const SExpr& e) {
  Program p;
  if (e.is_form("witness"))
    p.mode = Program::Mode::Witness;
  else if (e.is_form("stream"))
    p.mode = Program::Mode::Stream;
  else
    bad(e, "a program is (witness E) or (stream E)");
  if (e.size() != 2) bad(e, "a program has exactly one body");
  p.body = compile(e[1]);
  p.source = e;
  return p;
}

Program parse_program(const std::string& text) {
  try {
    return compile_program(parse_sexpr(text));
  } catch (const SExprError& err) {
    throw VmError(err.what());
  }
}

std::string to_string(const Program& p) { return to_string(p.source); }

BigNat godel_encode(const Program& p) {
  BigNat n = 0;
  for (unsigned char c : to_string(p)) n = n * 256 + c;
  return n;
}

Program godel_decode(const BigNat& code) {
  std::string bytes;
  BigNat n = code;
  while (n > 0) {
    bytes.insert(bytes.begin(), static_cast<char>(static_cast<unsigned>(n % 256)));
    n /= 256;
  }
  Program p = parse_program(bytes);
  if (to_string(p) != bytes) throw VmError("code is not in canonical form");
  return p;
}

// ---------------------------------------------------------------------------
// Values

Value Value::number(Nat n) {
  Value v;
  v.num = n;
  return v;
}

Value Value::make_pair(Value a, Value b) {
  Value v;
  v.kind = Kind::Pair;
  v.pair = std::make_shared<PairCell>(PairCell{std::move(a), std::move(b)});
  return v;
}

Value Value::function(NativeFn fn) {
  Value v;
  v.kind = Kind::Native;
  v.native = std::make_shared<NativeFn>(std::move(fn));
  return v;
}

Value Value::program(ProgramPtr p) {
  Value v;
  v.kind = Kind::Code;
  v.code = std::move(p);
  return v;
}

Value Value::deferred(std::function<Value()> thunk) {
  Value v;
  v.kind = Kind::Lazy;
  v.lazy = std::make_shared<LazyCell>(LazyCell{std::move(thunk), std::nullopt});
  return v;
}

Env bind(Env env, std::string name, Value v) {
  return std::make_shared<const EnvNode>(EnvNode{std::move(name), std::move(v), std::move(env)});
}

const Value& force(const Value& v) {
  if (v.kind != Value::Kind::Lazy) return v;
  LazyCell& cell = *v.lazy;
  if (!cell.value) {
    Value r = cell.thunk();
    cell.value = force(r);
  }
  return *cell.value;
}

namespace {

Nat as_num(const Value& v) {
  const Value& f = force(v);
  if (f.kind != Value::Kind::Num) throw VmError("expected a number");
  return f.num;
}

const PairCell& as_pair(const Value& v) {
  const Value& f = force(v);
  if (f.kind != Value::Kind::Pair) throw VmError("expected a pair");
  return *f.pair;
}

Value token_list(const std::vector<IOToken>& ts, std::size_t from = 0) {
  if (from == ts.size()) return Value::number(0);
  if (!ts[from].is_numeral()) throw VmError("prefix tokens cannot be read by stream programs");
  return Value::make_pair(Value::number(ts[from].small()), token_list(ts, from + 1));
}

std::vector<IOToken> list_tokens(const Value& v) {
  std::vector<IOToken> out;
  const Value* cur = &force(v);
  while (cur->kind == Value::Kind::Pair) {
    out.push_back(IOToken::numeral(as_num(cur->pair->first)));
    cur = &force(cur->pair->second);
  }
  if (cur->kind != Value::Kind::Num || cur->num != 0) throw VmError("malformed token list");
  return out;
}

}  // namespace

Value encode_item(const Item& it) {
  if (it.whitespace) return Value::number(0);
  return Value::make_pair(token_list(it.pair.input), token_list(it.pair.output));
}

Item decode_item(const Value& v) {
  const Value& f = force(v);
  if (f.kind == Value::Kind::Num && f.num == 0) return Item::space();
  const PairCell& p = as_pair(f);
  return Item::of(IOPair{list_tokens(p.first), list_tokens(p.second)});
}

// ---------------------------------------------------------------------------
// Machine

Machine::Machine(ExprPtr e, Env env) : expr_(e.get()), root_(std::move(e)), env_(std::move(env)) {}

Machine Machine::application(const Value& f, const Value& arg) {
  Machine m(nullptr);
  m.value_ = f;  // keeps the closure body alive
  m.apply(f, arg);
  return m;
}

void Machine::ret(Value v) {
  value_ = std::move(v);
  mode_ = Mode::Return;
}

void Machine::apply(const Value& f, const Value& arg) {
  const Value& fn = force(f);
  if (fn.kind == Value::Kind::Closure) {
    const Closure& c = *fn.closure;
    Env env = c.env;
    if (!c.self.empty()) env = bind(env, c.self, fn);
    env_ = bind(env, c.param, arg);
    root_ = c.body;
    expr_ = c.body.get();
    mode_ = Mode::Eval;
    return;
  }
  if (fn.kind == Value::Kind::Native) {
    ret((*fn.native)(arg));
    return;
  }
  throw VmError("applied a non-function");
}

namespace {

Nat checked_add(Nat a, Nat b) {
  if (a > std::numeric_limits<Nat>::max() - b) throw VmError("arithmetic overflow");
  return a + b;
}

Nat checked_mul(Nat a, Nat b) {
  if (a != 0 && b > std::numeric_limits<Nat>::max() / a) throw VmError("arithmetic overflow");
  return a * b;
}

}  // namespace

void Machine::finish_args(const Expr& e, std::vector<Value>& vals, const Env& env) {
  (void)env;
  switch (e.op) {
    case Op::Add:
      return ret(Value::number(checked_add(as_num(vals[0]), as_num(vals[1]))));
    case Op::Sub: {
      Nat a = as_num(vals[0]), b = as_num(vals[1]);
      return ret(Value::number(a > b ? a - b : 0));
    }
    case Op::Mul:
      return ret(Value::number(checked_mul(as_num(vals[0]), as_num(vals[1]))));
    case Op::Div: {
      Nat b = as_num(vals[1]);
      return ret(Value::number(b == 0 ? 0 : as_num(vals[0]) / b));
    }
    case Op::Mod: {
      Nat b = as_num(vals[1]);
      return ret(Value::number(b == 0 ? 0 : as_num(vals[0]) % b));
    }
    case Op::Eq:
      return ret(Value::number(as_num(vals[0]) == as_num(vals[1])));
    case Op::Lt:
      return ret(Value::number(as_num(vals[0]) < as_num(vals[1])));
    case Op::Le:
      return ret(Value::number(as_num(vals[0]) <= as_num(vals[1])));
    case Op::Pair:
      return ret(Value::make_pair(std::move(vals[0]), std::move(vals[1])));
    case Op::Fst:
      return ret(as_pair(vals[0]).first);
    case Op::Snd:
      return ret(as_pair(vals[0]).second);
    case Op::IsPair:
      return ret(Value::number(force(vals[0]).kind == Value::Kind::Pair));
    case Op::Seq:
      return ret(std::move(vals.back()));
    case Op::App: {
      if (vals.size() > 2) {
        Frame f{Frame::K::ApplyRest};
        f.vals.assign(vals.begin() + 2, vals.end());
        stack_.push_back(std::move(f));
      }
      return apply(vals[0], vals[1]);
    }
    case Op::Emit: {
      IOPair p;
      for (std::size_t i = 0; i < vals.size(); ++i)
        (i < e.emit_inputs ? p.input : p.output).push_back(IOToken::numeral(as_num(vals[i])));
      emitted_ = Item::of(std::move(p));
      pending_emit_ = true;
      return ret(Value::number(0));
    }
    case Op::EmitItem:
      emitted_ = decode_item(vals[0]);
      pending_emit_ = true;
      return ret(Value::number(0));
    default:
      throw VmError("internal: unexpected strict form");
  }
}

Machine::Status Machine::run(std::size_t& steps, const InputFn& input) {
  while (true) {
    if (mode_ == Mode::Halt) return Status::Done;
    if (steps == 0) throw OutOfSteps();
    --steps;
    ++taken_;
    if (mode_ == Mode::Eval) {
      const Expr& e = *expr_;
      switch (e.op) {
        case Op::Num:
          ret(Value::number(e.num));
          break;
        case Op::Var: {
          const EnvNode* n = env_.get();
          while (n && n->name != e.name) n = n->next.get();
          if (!n) throw VmError("unbound variable '" + e.name + "'");
          ret(n->value);
          break;
        }
        case Op::Lambda:
        case Op::Rec: {
          Value v;
          v.kind = Value::Kind::Closure;
          bool rec = e.op == Op::Rec;
          v.closure = std::make_shared<Closure>(
              Closure{rec ? e.name : std::string(), rec ? e.param : e.name, e.args[0], env_});
          ret(std::move(v));
          break;
        }
        case Op::Code:
          ret(Value::program(e.code));
          break;
        case Op::Space:
          emitted_ = Item::space();
          ret(Value::number(0));
          return Status::Emitted;
        case Op::Query: {
          std::optional<Item> it = input ? input(e.name) : std::nullopt;
          if (!it) return Status::NeedInput;
          ret(encode_item(*it));
          break;
        }
        case Op::If:
        case Op::Let:
          stack_.push_back(Frame{e.op == Op::If ? Frame::K::If : Frame::K::Let, &e, env_});
          expr_ = e.args[0].get();
          break;
        case Op::Search: {
          stack_.push_back(Frame{Frame::K::Search, &e, env_});
          env_ = bind(env_, e.name, Value::number(0));
          expr_ = e.args[0].get();
          break;
        }
        default: {
          if (e.args.empty()) {
            std::vector<Value> none;
            finish_args(e, none, env_);
            break;
          }
          stack_.push_back(Frame{Frame::K::Args, &e, env_});
          expr_ = e.args[0].get();
        }
      }
    } else {
      if (stack_.empty()) {
        result_ = std::move(value_);
        mode_ = Mode::Halt;
        continue;
      }
      Frame& f = stack_.back();
      switch (f.k) {
        case Frame::K::Args: {
          f.vals.push_back(std::move(value_));
          if (++f.idx < f.e->args.size()) {
            expr_ = f.e->args[f.idx].get();
            env_ = f.env;
            mode_ = Mode::Eval;
            break;
          }
          Frame done = std::move(f);
          stack_.pop_back();
          finish_args(*done.e, done.vals, done.env);
          break;
        }
        case Frame::K::If: {
          bool truthy = as_num(value_) != 0;
          expr_ = f.e->args[truthy ? 1 : 2].get();
          env_ = f.env;
          stack_.pop_back();
          mode_ = Mode::Eval;
          break;
        }
        case Frame::K::Let: {
          env_ = bind(f.env, f.e->name, std::move(value_));
          expr_ = f.e->args[1].get();
          stack_.pop_back();
          mode_ = Mode::Eval;
          break;
        }
        case Frame::K::ApplyRest: {
          Value arg = std::move(f.vals[f.idx++]);
          if (f.idx == f.vals.size()) stack_.pop_back();
          Value fn = std::move(value_);
          apply(fn, arg);
          break;
        }
        case Frame::K::Search: {
          if (as_num(value_) != 0) {
            Nat found = f.counter;
            stack_.pop_back();
            ret(Value::number(found));
            break;
          }
          ++f.counter;
          env_ = bind(f.env, f.e->name, Value::number(f.counter));
          expr_ = f.e->args[0].get();
          mode_ = Mode::Eval;
          break;
        }
      }
    }
    if (pending_emit_) {
      pending_emit_ = false;
      return Status::Emitted;
    }
  }
}

Value evaluate_program(const Program& p, std::size_t& steps) {
  if (p.mode != Program::Mode::Witness) throw VmError("expected a (witness ...) program");
  Machine m(p.body);
  if (m.run(steps) != Machine::Status::Done) throw VmError("witness programs cannot emit or query");
  return m.result();
}

Value call(const Value& f, const Value& arg, std::size_t& steps) {
  Machine m = Machine::application(f, arg);
  if (m.run(steps) != Machine::Status::Done) throw VmError("witness programs cannot emit or query");
  return m.result();
}

// ---------------------------------------------------------------------------
// Stream-mode programs

namespace {

class StreamProgramSource : public Source {
 public:
  StreamProgramSource(const Program& p, std::size_t quota, std::map<std::string, WitnessStream> inputs)
      : machine_(p.body), quota_(quota), inputs_(std::move(inputs)) {}

  Item next() override {
    if (done_) return Item::space();
    std::size_t steps = quota_;
    try {
      auto status = machine_.run(steps, [this](const std::string& name) -> std::optional<Item> {
        auto it = inputs_.find(name);
        if (it == inputs_.end()) return std::nullopt;
        return it->second.at(read_[name]++);
      });
      if (status == Machine::Status::Emitted) return machine_.emitted();
      if (status == Machine::Status::Done) done_ = true;
    } catch (const OutOfSteps&) {
    } catch (const VmError&) {
      done_ = true;
    }
    return Item::space();
  }

 private:
  Machine machine_;
  std::size_t quota_;
  std::map<std::string, WitnessStream> inputs_;
  std::map<std::string, std::size_t> read_;
  bool done_ = false;
};

}  // namespace

WitnessStream run_stream_program(const Program& p, std::size_t steps_per_item,
                                 std::map<std::string, WitnessStream> inputs) {
  if (p.mode != Program::Mode::Stream) throw VmError("expected a (stream ...) program");
  return WitnessStream(std::make_shared<StreamProgramSource>(p, steps_per_item, std::move(inputs)));
}

}  // namespace ctruth
