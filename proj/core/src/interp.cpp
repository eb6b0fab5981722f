#include "jules/interp.hpp"

#include <cassert>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "jules/jit.hpp"
#include "jules/textio.hpp"
#include "jules/typesys.hpp"

namespace jules {

Value Value::struct_val(Type t, std::vector<Value> fields) {
  return Value(std::make_shared<const StructData>(
      StructData{std::move(t), std::move(fields)}));
}

const Type& Value::struct_type() const {
  return std::get<std::shared_ptr<const StructData>>(rep_)->type;
}

const std::vector<Value>& Value::fields() const {
  return std::get<std::shared_ptr<const StructData>>(rep_)->fields;
}

bool Value::operator==(const Value& other) const {
  if (is_int() != other.is_int()) return false;
  if (is_int()) return as_int() == other.as_int();
  return struct_type() == other.struct_type() && fields() == other.fields();
}

Type typeof_value(const Value& v) {
  return v.is_int() ? Type::Int() : v.struct_type();
}

Signature typeof_values(const std::vector<Value>& vs) {
  Signature out;
  out.reserve(vs.size());
  for (const Value& v : vs) out.push_back(typeof_value(v));
  return out;
}

std::string value_to_string(const Value& v) {
  if (v.is_int()) return std::to_string(v.as_int());
  std::string out = v.struct_type().name + "(";
  const std::vector<Value>& fs = v.fields();
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) out += ", ";
    out += value_to_string(fs[i]);
  }
  out += ")";
  return out;
}

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Prim: return "prim";
    case Rule::Reg: return "reg";
    case Rule::New: return "new";
    case Rule::Field: return "field";
    case Rule::False1: return "false1";
    case Rule::False2: return "false2";
    case Rule::Disp: return "disp";
    case Rule::Direct: return "direct";
    case Rule::Ret: return "ret";
  }
  return "?";
}

const char* outcome_name(RunOutcome::Kind k) {
  switch (k) {
    case RunOutcome::Kind::Finished: return "finished";
    case RunOutcome::Kind::Erred: return "erred";
    case RunOutcome::Kind::Wrong: return "wrong";
    case RunOutcome::Kind::FuelExhausted: return "fuel-exhausted";
  }
  return "?";
}

namespace {

bool guard_true(const Value& v) {
  // Literal integer-zero test; struct values are truthy.
  return !(v.is_int() && v.as_int() == 0);
}

StepOutcome wrong(std::string reason) {
  StepOutcome o;
  o.kind = StepOutcome::Kind::Wrong;
  o.detail = std::move(reason);
  return o;
}

}  // namespace

StepOutcome step(Configuration& cfg, Semantics semantics) {
  assert(!cfg.stack.empty());
  Frame& top = cfg.stack.back();
  assert(top.body != nullptr);

  if (top.pc >= top.body->size()) {
    // Frame exhausted: final configuration or a return step.
    if (cfg.stack.size() == 1) {
      StepOutcome o;
      o.kind = StepOutcome::Kind::Finished;
      return o;
    }
    if (top.env.empty()) {
      return wrong("return from a frame with an empty environment");
    }
    Value ret = top.env.back();
    Frame& caller = cfg.stack[cfg.stack.size() - 2];
    caller.env.push_back(ret);
    caller.pc += 1;  // the call instruction is consumed by the return
    cfg.stack.pop_back();
    cfg.steps += 1;
    StepOutcome o;
    o.kind = StepOutcome::Kind::Stepped;
    o.rule = Rule::Ret;
    o.assigned = static_cast<int>(cfg.stack.back().env.size()) - 1;
    o.value = std::move(ret);
    return o;
  }

  const Instruction& in = (*top.body)[top.pc];
  auto reg_ok = [&](Reg r) { return r < top.env.size(); };

  auto assign_step = [&](Rule rule, Value v) {
    top.env.push_back(v);
    top.pc += 1;
    cfg.steps += 1;
    StepOutcome o;
    o.kind = StepOutcome::Kind::Stepped;
    o.rule = rule;
    o.assigned = static_cast<int>(top.env.size()) - 1;
    o.value = std::move(v);
    return o;
  };

  if (const auto* c = std::get_if<AssignConst>(&in)) {
    return assign_step(Rule::Prim, Value::int_val(c->value));
  }
  if (const auto* a = std::get_if<AssignReg>(&in)) {
    if (!reg_ok(a->source)) return wrong("register out of range");
    return assign_step(Rule::Reg, top.env[a->source]);
  }
  if (const auto* n = std::get_if<New>(&in)) {
    std::vector<Value> fields;
    fields.reserve(n->args.size());
    for (Reg r : n->args) {
      if (!reg_ok(r)) return wrong("register out of range");
      fields.push_back(top.env[r]);
    }
    return assign_step(Rule::New,
                       Value::struct_val(n->struct_type, std::move(fields)));
  }
  if (const auto* g = std::get_if<GetField>(&in)) {
    if (!reg_ok(g->receiver)) return wrong("register out of range");
    const Value& recv = top.env[g->receiver];
    if (recv.is_int()) return wrong("field access on an integer value");
    if (g->index >= recv.fields().size()) {
      return wrong("field index out of range");
    }
    return assign_step(Rule::Field, recv.fields()[g->index]);
  }

  // Both call forms share the guard and frame-push mechanics.
  const auto* disp = std::get_if<DispatchCall>(&in);
  const auto* direct = std::get_if<DirectCall>(&in);
  const Reg guard = disp ? disp->guard : direct->guard;
  const Reg alt = disp ? disp->alt : direct->alt;
  const std::vector<Reg>& arg_regs = disp ? disp->args : direct->args;
  if (!reg_ok(guard) || !reg_ok(alt)) return wrong("register out of range");
  for (Reg r : arg_regs) {
    if (!reg_ok(r)) return wrong("register out of range");
  }

  if (!guard_true(top.env[guard])) {
    return assign_step(disp ? Rule::False1 : Rule::False2, top.env[alt]);
  }

  std::vector<Value> args;
  args.reserve(arg_regs.size());
  for (Reg r : arg_regs) args.push_back(top.env[r]);

  const Method* target = nullptr;
  Signature activation_sig;
  Rule rule;
  if (disp != nullptr) {
    rule = Rule::Disp;
    if (!cfg.table.has_name(disp->callee)) {
      return wrong("dispatched callee '" + disp->callee +
                   "' names no method in the table");
    }
    activation_sig = typeof_values(args);
    DispatchOutcome d = dispatch(*cfg.types, cfg.table, disp->callee,
                                 activation_sig);
    if (!d.defined()) {
      StepOutcome o;
      o.kind = StepOutcome::Kind::Erred;
      o.detail = "dispatch undefined for " +
                 to_string(MethodKey{disp->callee, activation_sig}) +
                 (d.fail == DispatchOutcome::Fail::Ambiguous
                      ? " (ambiguous)"
                      : " (no applicable method)");
      return o;
    }
    if (semantics == Semantics::Jit) {
      // The compiler runs inside the dispatch step and costs no fuel.
      cfg.table = jit_compile(*cfg.types, cfg.table, disp->callee,
                              activation_sig);
      d = dispatch(*cfg.types, cfg.table, disp->callee, activation_sig);
      assert(d.defined());
    }
    target = d.method;
  } else {
    rule = Rule::Direct;
    target = cfg.table.lookup_exact(direct->callee, direct->sig);
    if (target == nullptr) {
      return wrong("direct call target " +
                   to_string(MethodKey{direct->callee, direct->sig}) +
                   " is absent");
    }
    activation_sig = direct->sig;
  }
  if (target->is_stub()) {
    return wrong("call reached stub " +
                 to_string(MethodKey{target->name, target->param_types}));
  }

  Frame callee;
  callee.env = std::move(args);
  callee.body = target->body;
  callee.pc = 0;
  callee.activation_name = disp ? disp->callee : direct->callee;
  callee.activation_args = activation_sig;
  cfg.stack.push_back(std::move(callee));
  cfg.steps += 1;

  StepOutcome o;
  o.kind = StepOutcome::Kind::Stepped;
  o.rule = rule;
  o.callee = disp ? disp->callee : direct->callee;
  o.callee_sig = std::move(activation_sig);
  return o;
}

namespace {

// Per-run instrumentation state: memoized typings and classifications of
// activations over the originals of the starting table (compilation
// preserves originals, so one table serves the whole run).
struct Instrumentation {
  const TypeTable& tt;
  MethodTable orig;
  InferenceCache cache;
  std::unordered_map<MethodKey, std::shared_ptr<const RegisterTyping>,
                     MethodKeyHash>
      typings;

  explicit Instrumentation(const TypeTable& t, const MethodTable& mt)
      : tt(t), orig(originals(mt)) {}

  std::shared_ptr<const RegisterTyping> typing_for(const MethodKey& key) {
    auto it = typings.find(key);
    if (it != typings.end()) return it->second;
    Inferred inf = infer_method(tt, orig, key.name, key.sig, &cache);
    std::shared_ptr<const RegisterTyping> out;
    if (inf.ok) out = std::make_shared<const RegisterTyping>(inf.typing);
    typings.emplace(key, out);
    return out;
  }
};

}  // namespace

RunOutcome run(const TypeTable& tt, const MethodTable& mt,
               const EntryPoint& entry, const RunOptions& opts) {
  Configuration cfg;
  cfg.types = &tt;
  cfg.table = mt;

  // Synthetic base frame: env [1, args...]; one dispatched call on the
  // always-true guard %0. Its return lands at the end of this env.
  Frame base;
  base.env.push_back(Value::int_val(1));
  for (const Value& v : entry.args) base.env.push_back(v);
  std::vector<Reg> arg_regs;
  for (std::size_t i = 0; i < entry.args.size(); ++i) {
    arg_regs.push_back(static_cast<Reg>(i + 1));
  }
  base.body = make_body({DispatchCall{
      static_cast<Reg>(entry.args.size() + 1), 0, entry.name,
      std::move(arg_regs), 0}});
  cfg.stack.push_back(std::move(base));

  const bool instrumented = opts.check_soundness || opts.check_callee_stability;
  std::optional<Instrumentation> inst;
  if (instrumented) inst.emplace(tt, mt);

  RunOutcome out;
  while (true) {
    if (cfg.stack.size() == 1 &&
        cfg.stack.back().pc >= cfg.stack.back().body->size()) {
      out.kind = RunOutcome::Kind::Finished;
      out.final_env = cfg.stack.back().env;
      break;
    }
    if (cfg.steps >= opts.fuel) {
      out.kind = RunOutcome::Kind::FuelExhausted;
      break;
    }

    StepOutcome so = step(cfg, opts.semantics);
    if (so.kind == StepOutcome::Kind::Erred) {
      out.kind = RunOutcome::Kind::Erred;
      out.detail = so.detail;
      break;
    }
    if (so.kind == StepOutcome::Kind::Wrong) {
      out.kind = RunOutcome::Kind::Wrong;
      out.detail = so.detail;
      break;
    }
    assert(so.kind == StepOutcome::Kind::Stepped);

    if (opts.trace != nullptr) {
      std::string payload;
      if (so.rule == Rule::Disp || so.rule == Rule::Direct) {
        const Frame& caller = cfg.stack[cfg.stack.size() - 2];
        payload = "%" +
                  std::to_string(instr_target((*caller.body)[caller.pc])) +
                  "=" + (so.rule == Rule::Disp ? "call " : "invoke ") +
                  so.callee + "[" + to_string(so.callee_sig) + "]";
      } else {
        payload = "%" + std::to_string(so.assigned) + "=" +
                  value_to_string(so.value);
      }
      *opts.trace << trace_line(cfg.steps, rule_name(so.rule),
                                cfg.stack.size() - 1, payload)
                  << "\n";
    }

    if (instrumented) {
      Frame& top = cfg.stack.back();
      if (so.rule == Rule::Disp || so.rule == Rule::Direct) {
        MethodKey key{top.activation_name, top.activation_args};
        top.typing = inst->typing_for(key);
        top.grounded = top.typing != nullptr && top.typing->all_concrete();
        if (opts.check_soundness && top.typing != nullptr) {
          for (std::size_t i = 0; i < top.env.size() &&
                                  i < top.typing->types.size();
               ++i) {
            Type got = typeof_value(top.env[i]);
            if (!subtype(tt, got, top.typing->types[i])) {
              out.soundness_violations.push_back(
                  "step " + std::to_string(cfg.steps) + " " +
                  to_string(key) + " param %" + std::to_string(i) +
                  ": runtime " + got.name + " not below inferred " +
                  top.typing->types[i].name);
            }
          }
        }
        if (opts.check_callee_stability && cfg.stack.size() >= 2) {
          const Frame& caller = cfg.stack[cfg.stack.size() - 2];
          if (caller.grounded && top.typing != nullptr &&
              !top.typing->types.empty() &&
              !top.typing->return_type().concrete()) {
            out.callee_stability_violations.push_back(
                "step " + std::to_string(cfg.steps) + ": grounded " +
                to_string(MethodKey{caller.activation_name,
                                    caller.activation_args}) +
                " reached unstable callee " + to_string(key));
          }
        }
      } else if (opts.check_soundness && so.assigned >= 0 &&
                 top.typing != nullptr) {
        // Environments are append-only, so checking each value at its
        // definition covers every live register at every later step.
        std::size_t i = static_cast<std::size_t>(so.assigned);
        if (i < top.typing->types.size()) {
          Type got = typeof_value(so.value);
          if (!subtype(tt, got, top.typing->types[i])) {
            out.soundness_violations.push_back(
                "step " + std::to_string(cfg.steps) + " " +
                to_string(MethodKey{top.activation_name,
                                    top.activation_args}) +
                " %" + std::to_string(i) + ": runtime " + got.name +
                " not below inferred " + top.typing->types[i].name);
          }
        }
      }
    }
  }

  out.steps = cfg.steps;
  out.final_table = std::move(cfg.table);
  return out;
}

}  // namespace jules
