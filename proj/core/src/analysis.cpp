#include "jules/analysis.hpp"

#include <stdexcept>

#include "jules/typesys.hpp"

namespace jules {

StabilityReport classify(const TypeTable& tt, const MethodTable& mt,
                         const std::string& name, const Signature& arg_types,
                         InferenceCache* cache) {
  StabilityReport r;
  r.method = name;
  r.sig = arg_types;
  MethodTable orig = originals(mt);
  Inferred inf = infer_method(tt, orig, name, arg_types, cache);
  if (!inf.ok) {
    r.ok = false;
    r.error = inf.error;
    return r;
  }
  r.ok = true;
  r.typing = std::move(inf.typing);
  if (r.typing.types.empty()) {
    r.ok = false;
    r.error = "empty typing";
    return r;
  }
  r.return_type = r.typing.return_type();
  r.stable = r.return_type.concrete();
  r.grounded = r.typing.all_concrete();
  return r;
}

bool fully_devirtualized(const Method& m) {
  if (m.is_stub()) {
    throw std::invalid_argument("fully_devirtualized on stub " +
                                to_string(MethodKey{m.name, m.param_types}));
  }
  for (const Instruction& in : *m.body) {
    if (std::holds_alternative<DispatchCall>(in)) return false;
  }
  return true;
}

bool max_devirt_instr(const RegisterTyping& typing, const MethodTable& mt,
                      const Instruction& in) {
  if (const auto* call = std::get_if<DispatchCall>(&in)) {
    for (Reg r : call->args) {
      if (r >= typing.types.size()) return false;
      if (!typing.types[r].concrete()) return true;  // not devirtualizable
    }
    return false;  // concretely typed dispatched call remains
  }
  if (const auto* inv = std::get_if<DirectCall>(&in)) {
    if (inv->args.size() != inv->sig.size()) return false;
    for (std::size_t i = 0; i < inv->args.size(); ++i) {
      Reg r = inv->args[i];
      if (r >= typing.types.size()) return false;
      if (!(typing.types[r] == inv->sig[i])) return false;
    }
    return mt.lookup_exact(inv->callee, inv->sig) != nullptr;
  }
  return true;  // not a call
}

CheckResult max_devirt_table(const TypeTable& tt, const MethodTable& mt) {
  CheckResult res;
  MethodTable orig = originals(mt);
  InferenceCache cache;
  for (const Method& m : mt.methods()) {
    if (m.is_original()) continue;
    auto fail = [&](int instr, std::string reason) {
      res.ok = false;
      res.witness = {m.name, m.param_types, instr, std::move(reason)};
      return res;
    };
    if (m.is_stub()) return fail(-1, "stub instance");
    const Method* origin = mt.lookup_exact(m.name, m.origin_signature);
    if (origin == nullptr || origin->is_stub()) {
      return fail(-1, "origin method missing");
    }
    Inferred inf =
        infer_body(tt, orig, m.param_types, *origin->body, &cache);
    if (!inf.ok) return fail(-1, "origin body fails to infer: " + inf.error);
    if (origin->body->size() != m.body->size()) {
      return fail(-1, "instance and origin bodies differ in length");
    }
    for (std::size_t i = 0; i < m.body->size(); ++i) {
      if (!max_devirt_instr(inf.typing, mt, (*m.body)[i])) {
        return fail(static_cast<int>(i), "instruction not maximally "
                                         "devirtualized");
      }
    }
  }
  return res;
}

CheckResult table_optimizes(const TypeTable& tt, const MethodTable& orig,
                            const MethodTable& opt) {
  CheckResult res;
  if (!(originals(opt) == orig)) {
    res.ok = false;
    res.witness = {"", {}, -1,
                   "original methods of the optimized table differ"};
    return res;
  }
  InferenceCache cache;
  for (const Method& m : opt.methods()) {
    if (m.is_original()) continue;
    auto fail = [&](int instr, std::string reason) {
      res.ok = false;
      res.witness = {m.name, m.param_types, instr, std::move(reason)};
      return res;
    };
    if (m.is_stub()) return fail(-1, "stub instance");
    const Method* origin = opt.lookup_exact(m.name, m.origin_signature);
    if (origin == nullptr || origin->is_stub() || !origin->is_original()) {
      return fail(-1, "origin method missing");
    }
    Inferred inf = infer_body(tt, orig, m.param_types, *origin->body, &cache);
    if (!inf.ok) return fail(-1, "origin body fails to infer: " + inf.error);
    const RegisterTyping& typing = inf.typing;
    if (origin->body->size() != m.body->size()) {
      return fail(-1, "instance and origin bodies differ in length");
    }
    for (std::size_t i = 0; i < m.body->size(); ++i) {
      const Instruction& before = (*origin->body)[i];
      const Instruction& after = (*m.body)[i];
      if (before == after) continue;  // unchanged
      // Only one other shape relates: a dispatched call rewritten to a
      // direct call at the concrete inferred argument types.
      const auto* call = std::get_if<DispatchCall>(&before);
      const auto* inv = std::get_if<DirectCall>(&after);
      if (call == nullptr || inv == nullptr) {
        return fail(static_cast<int>(i), "instructions unrelated");
      }
      if (inv->target != call->target || inv->guard != call->guard ||
          inv->callee != call->callee || inv->args != call->args ||
          inv->alt != call->alt) {
        return fail(static_cast<int>(i), "rewritten call changes operands");
      }
      Signature arg_types;
      arg_types.reserve(call->args.size());
      bool concrete = true;
      for (Reg r : call->args) {
        if (r >= typing.types.size() || !typing.types[r].concrete()) {
          concrete = false;
          break;
        }
        arg_types.push_back(typing.types[r]);
      }
      if (!concrete) {
        return fail(static_cast<int>(i),
                    "direct call at non-concrete inferred types");
      }
      if (!(arg_types == inv->sig)) {
        return fail(static_cast<int>(i),
                    "direct call signature differs from inferred types");
      }
      DispatchOutcome d = dispatch(tt, orig, inv->callee, arg_types);
      if (!d.defined()) {
        return fail(static_cast<int>(i),
                    "dispatch undefined at the rewritten call");
      }
      const Method* entry = opt.lookup_exact(inv->callee, inv->sig);
      if (entry == nullptr) {
        return fail(static_cast<int>(i), "direct call target absent");
      }
      if (!(d.method->param_types == entry->origin_signature)) {
        return fail(static_cast<int>(i),
                    "direct call target origin differs from the dispatch "
                    "target");
      }
    }
  }
  return res;
}

CensusReport census(const TypeTable& tt, const MethodTable& mt) {
  CensusReport rep;
  InferenceCache cache;
  std::size_t stable = 0;
  std::size_t grounded = 0;
  std::size_t classified = 0;
  for (const Method& m : mt.methods()) {
    if (m.is_original() || m.is_stub()) continue;
    rep.instance_count += 1;
    StabilityReport r = classify(tt, mt, m.name, m.param_types, &cache);
    if (!r.ok) {
      rep.failed_count += 1;
    } else {
      classified += 1;
      if (r.stable) stable += 1;
      if (r.grounded) grounded += 1;
    }
    rep.per_instance.push_back(std::move(r));
  }
  if (classified == 0) {
    rep.zero_denominator = true;
    rep.stable_fraction = 1.0;
    rep.grounded_fraction = 1.0;
  } else {
    rep.stable_fraction =
        static_cast<double>(stable) / static_cast<double>(classified);
    rep.grounded_fraction =
        static_cast<double>(grounded) / static_cast<double>(classified);
  }
  return rep;
}

}  // namespace jules
