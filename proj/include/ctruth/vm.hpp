#pragma once

// The witness machine: a small functional language with an explicit-stack
// (CEK) interpreter, so every run is step-budgeted and can be suspended.
//
// Programs are `(witness E)`, whose value is a witness for a formula in the
// functional reading (pairs for /\, \/ and E, functions for A and ->, codes
// for box), or `(stream E)`, which talks to streams through `emit`,
// `emit-item`, `space` and `query`.
//
// The standard code of a program is its canonical text read as a base-256
// big-endian numeral.

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctruth/sexpr.hpp"
#include "ctruth/witness.hpp"

namespace ctruth {

class VmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Step budget ran out before a result.
class OutOfSteps : public std::runtime_error {
 public:
  OutOfSteps() : std::runtime_error("step budget exhausted") {}
};

/// A computation needs antecedent input that has not been fed yet.
class Blocked : public std::runtime_error {
 public:
  Blocked() : std::runtime_error("waiting for antecedent input") {}
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Program;
using ProgramPtr = std::shared_ptr<const Program>;

struct Expr {
  enum class Op {
    Num, Var, Add, Sub, Mul, Div, Mod, Eq, Lt, Le, If, Let, Pair, Fst, Snd, IsPair,
    Lambda, Rec, App, Search, Seq, Code, Emit, EmitItem, Space, Query
  };

  Op op = Op::Num;
  Nat num = 0;
  std::string name;   // Var, Let/Lambda/Search binder, Rec function name, Query stream
  std::string param;  // Rec parameter
  std::vector<ExprPtr> args;
  std::size_t emit_inputs = 0;  // Emit: the first `emit_inputs` args are input tokens
  ProgramPtr code;              // Code
};

struct Program {
  enum class Mode { Witness, Stream };

  Mode mode = Mode::Witness;
  ExprPtr body;
  SExpr source;
};

Program compile_program(const SExpr& e);
Program parse_program(const std::string& text);
std::string to_string(const Program& p);

BigNat godel_encode(const Program& p);
/// Throws VmError unless the numeral spells a program in canonical text.
Program godel_decode(const BigNat& code);

// ---------------------------------------------------------------------------
// Values

struct Value;
struct EnvNode;
using Env = std::shared_ptr<const EnvNode>;

struct PairCell;
struct Closure;
struct LazyCell;
using NativeFn = std::function<Value(const Value&)>;

struct Value {
  enum class Kind { Num, Pair, Closure, Native, Code, Lazy };

  Kind kind = Kind::Num;
  Nat num = 0;
  std::shared_ptr<const PairCell> pair;
  std::shared_ptr<const Closure> closure;
  std::shared_ptr<const NativeFn> native;
  ProgramPtr code;
  std::shared_ptr<LazyCell> lazy;

  static Value number(Nat n);
  static Value make_pair(Value a, Value b);
  static Value function(NativeFn fn);
  static Value program(ProgramPtr p);
  /// Computed on first use; the thunk may throw Blocked.
  static Value deferred(std::function<Value()> thunk);
};

struct PairCell {
  Value first;
  Value second;
};

struct Closure {
  std::string self;  // non-empty for `rec`
  std::string param;
  ExprPtr body;
  Env env;
};

struct LazyCell {
  std::function<Value()> thunk;
  std::optional<Value> value;
};

struct EnvNode {
  std::string name;
  Value value;
  Env next;
};

Env bind(Env env, std::string name, Value v);

/// Resolves deferred values.
const Value& force(const Value& v);

/// Stream-mode item encoding: whitespace is 0, a pair is (inputs . outputs)
/// with token lists built from pairs and ending in 0.
Value encode_item(const Item& it);
Item decode_item(const Value& v);

// ---------------------------------------------------------------------------
// Machine

class Machine {
 public:
  enum class Status { Done, Emitted, NeedInput };

  /// Reads the next item of a named input stream; nullopt suspends the run.
  using InputFn = std::function<std::optional<Item>(const std::string&)>;

  Machine(ExprPtr e, Env env = nullptr);
  static Machine application(const Value& f, const Value& arg);

  /// Runs until a result, an emission or a missing input. Decrements
  /// `steps`; throws OutOfSteps (the state stays resumable).
  Status run(std::size_t& steps, const InputFn& input = nullptr);

  const Value& result() const { return result_; }
  const Item& emitted() const { return emitted_; }
  std::size_t steps_taken() const { return taken_; }

 private:
  struct Frame {
    enum class K { Args, If, Let, ApplyRest, Search };
    K k;
    const Expr* e = nullptr;
    Env env{};
    std::vector<Value> vals{};
    std::size_t idx = 0;
    Nat counter = 0;
  };

  void ret(Value v);
  void apply(const Value& f, const Value& arg);
  void finish_args(const Expr& e, std::vector<Value>& vals, const Env& env);

  enum class Mode { Eval, Return, Halt };
  Mode mode_ = Mode::Eval;
  const Expr* expr_ = nullptr;
  ExprPtr root_;
  Env env_;
  Value value_;
  std::vector<Frame> stack_;
  Value result_;
  Item emitted_;
  bool pending_emit_ = false;
  std::size_t taken_ = 0;
};

/// Evaluates a witness-mode program to its value.
Value evaluate_program(const Program& p, std::size_t& steps);
Value call(const Value& f, const Value& arg, std::size_t& steps);

/// A stream-mode program as a stream. Each pull runs at most
/// `steps_per_item` steps; named inputs are read from `inputs`.
WitnessStream run_stream_program(const Program& p, std::size_t steps_per_item,
                                 std::map<std::string, WitnessStream> inputs = {});

}  // namespace ctruth
