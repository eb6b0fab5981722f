// Small-step interpreter for both semantics: plain dynamic dispatch and
// dispatch through the specializing compiler. The two run in lock step;
// compilation work inside a dispatch step consumes no fuel.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "jules/infer.hpp"
#include "jules/ir.hpp"

namespace jules {

// Immutable runtime value: an integer or a struct with a concrete type tag
// and the field values it was constructed from. Copies are cheap.
class Value {
 public:
  Value() : rep_(std::int64_t{0}) {}

  static Value int_val(std::int64_t v) { return Value(v); }
  static Value struct_val(Type t, std::vector<Value> fields);

  bool is_int() const { return std::holds_alternative<std::int64_t>(rep_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(rep_); }
  bool is_struct() const { return !is_int(); }
  const Type& struct_type() const;
  const std::vector<Value>& fields() const;

  bool operator==(const Value& other) const;

 private:
  struct StructData {
    Type type;
    std::vector<Value> fields;
  };
  explicit Value(std::int64_t v) : rep_(v) {}
  explicit Value(std::shared_ptr<const StructData> s) : rep_(std::move(s)) {}
  std::variant<std::int64_t, std::shared_ptr<const StructData>> rep_;
};

Type typeof_value(const Value& v);
Signature typeof_values(const std::vector<Value>& vs);
std::string value_to_string(const Value& v);

using Environment = std::vector<Value>;

enum class Semantics { Dispatch, Jit };

struct Frame {
  Environment env;  // append-only register file
  Body body;
  std::size_t pc = 0;
  // Instrumentation: who runs here and at which concrete argument types.
  std::string activation_name;  // empty for the synthetic base frame
  Signature activation_args;
  std::shared_ptr<const RegisterTyping> typing;  // when soundness-checked
  bool grounded = false;  // when callee stability is checked
};

struct Configuration {
  const TypeTable* types = nullptr;
  MethodTable table;
  std::vector<Frame> stack;
  std::uint64_t steps = 0;
};

enum class Rule { Prim, Reg, New, Field, False1, False2, Disp, Direct, Ret };
const char* rule_name(Rule r);

struct StepOutcome {
  enum class Kind { Stepped, Finished, Erred, Wrong };
  Kind kind = Kind::Stepped;
  Rule rule = Rule::Prim;  // valid when Stepped
  // Trace/instrumentation payload for Stepped:
  int assigned = -1;  // register that received value (assign-like rules)
  Value value;
  std::string callee;  // frame-pushing rules
  Signature callee_sig;
  std::string detail;  // Erred / Wrong reason
};

// Applies one rule to the configuration (in place). Total: stuck states
// come back as Erred (dispatched call whose callee name is in the table
// but dispatch is undefined) or Wrong (any other stuck state). Finished
// means the single remaining frame ran out of instructions; it does not
// modify the configuration.
StepOutcome step(Configuration& cfg, Semantics semantics);

struct EntryPoint {
  std::string name = "main";
  std::vector<Value> args;
};

struct RunOptions {
  Semantics semantics = Semantics::Dispatch;
  std::uint64_t fuel = 100000;
  bool check_soundness = false;
  bool check_callee_stability = false;
  std::ostream* trace = nullptr;
};

struct RunOutcome {
  enum class Kind { Finished, Erred, Wrong, FuelExhausted };
  Kind kind = Kind::FuelExhausted;
  Environment final_env;  // valid when Finished
  std::uint64_t steps = 0;
  MethodTable final_table;
  std::string detail;  // Erred site / Wrong reason
  std::vector<std::string> soundness_violations;
  std::vector<std::string> callee_stability_violations;
};

const char* outcome_name(RunOutcome::Kind k);

// Runs entry until a final configuration or the fuel bound. The entry call
// itself is a dispatch step (one unit of fuel): the machine starts from a
// synthetic base frame [1, args...] holding one guarded dispatched call,
// so the finished environment is [1, args..., return value].
RunOutcome run(const TypeTable& tt, const MethodTable& mt,
               const EntryPoint& entry, const RunOptions& opts);

}  // namespace jules
