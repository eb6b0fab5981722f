#include "jules/infer.hpp"

#include <algorithm>
#include <unordered_set>

#include "jules/typesys.hpp"

namespace jules {

bool RegisterTyping::all_concrete() const {
  for (const Type& t : types) {
    if (!t.concrete()) return false;
  }
  return true;
}

namespace {

using KeySet = std::unordered_set<MethodKey, MethodKeyHash>;

// One inference walk. The in-progress stack cuts recursion by answering
// Any for the callee's return type; dependency sets keep the shared cache
// context-independent (see InferenceCache).
class Walker {
 public:
  Walker(const TypeTable& tt, const MethodTable& orig, InferenceCache& cache)
      : tt_(tt), orig_(orig), cache_(cache) {}

  // Result of typing one key or body, with the keys it consulted and
  // whether any of them was in progress (tainted results are not cached).
  struct Out {
    Inferred res;
    KeySet deps;
    bool tainted = false;
    bool in_progress_hit = false;  // key was on the walk stack
  };

  Out infer_key(const MethodKey& key) {
    if (in_progress_.count(key)) {
      Out o;
      o.res.ok = true;  // signals "use Any return"; see call_return
      o.tainted = true;
      o.deps.insert(key);
      o.in_progress_hit = true;
      return o;
    }
    auto it = cache_.entries.find(key);
    if (it != cache_.entries.end()) {
      bool usable = true;
      for (const MethodKey& d : it->second.deps) {
        if (in_progress_.count(d)) {
          usable = false;
          break;
        }
      }
      if (usable) {
        Out o;
        o.res = it->second.result;
        o.deps.insert(key);
        o.deps.insert(it->second.deps.begin(), it->second.deps.end());
        return o;
      }
    }
    // Resolve the body: dispatch for concrete types, else the declared
    // original with exactly this signature.
    const Method* target = nullptr;
    if (all_concrete(key.sig)) {
      DispatchOutcome d = dispatch(tt_, orig_, key.name, key.sig);
      target = d.method;
    } else {
      const Method* m = orig_.lookup_exact(key.name, key.sig);
      if (m != nullptr && m->is_original()) target = m;
    }
    Out o;
    o.deps.insert(key);
    if (target == nullptr || target->is_stub()) {
      o.res.ok = false;
      o.res.error = "no inferable method for " + to_string(key);
      // Definite for this table; cacheable like any other result.
    } else {
      in_progress_.insert(key);
      Out body = infer_instrs(key.sig, *target->body);
      in_progress_.erase(key);
      o.res = std::move(body.res);
      o.deps.insert(body.deps.begin(), body.deps.end());
      o.tainted = body.tainted;
    }
    if (!o.tainted) {
      InferenceCache::Entry e;
      e.result = o.res;
      e.deps.assign(o.deps.begin(), o.deps.end());
      cache_.entries[key] = std::move(e);
    }
    return o;
  }

  Out infer_instrs(const Signature& params,
                   const std::vector<Instruction>& body) {
    Out o;
    RegisterTyping typing;
    typing.param_count = params.size();
    typing.types = params;
    typing.types.reserve(params.size() + body.size());

    auto fail = [&](std::size_t idx, std::string msg) {
      o.res.ok = false;
      o.res.error = "instruction " + std::to_string(idx) + ": " +
                    std::move(msg);
    };

    for (std::size_t idx = 0; idx < body.size(); ++idx) {
      const Instruction& in = body[idx];
      // Registers are validated elsewhere; stay total on bad input.
      auto reg_ok = [&](Reg r) { return r < typing.types.size(); };
      Type t;
      if (const auto* c = std::get_if<AssignConst>(&in)) {
        (void)c;
        t = Type::Int();
      } else if (const auto* a = std::get_if<AssignReg>(&in)) {
        if (!reg_ok(a->source)) {
          fail(idx, "register out of range");
          return o;
        }
        t = typing.types[a->source];
      } else if (const auto* n = std::get_if<New>(&in)) {
        const TypeDecl* d = tt_.find(n->struct_type.name);
        if (d == nullptr || !n->struct_type.concrete()) {
          fail(idx, "constructed type '" + n->struct_type.name +
                        "' is not a declared struct type");
          return o;
        }
        if (n->args.size() != d->field_types.size()) {
          fail(idx, "constructor arity mismatch for '" + d->name + "'");
          return o;
        }
        for (std::size_t k = 0; k < n->args.size(); ++k) {
          if (!reg_ok(n->args[k])) {
            fail(idx, "register out of range");
            return o;
          }
          if (!subtype(tt_, typing.types[n->args[k]], d->field_types[k])) {
            fail(idx, "field " + std::to_string(k) + " of '" + d->name +
                          "' expects " + d->field_types[k].name + ", got " +
                          typing.types[n->args[k]].name);
            return o;
          }
        }
        t = n->struct_type;
      } else if (const auto* g = std::get_if<GetField>(&in)) {
        if (!reg_ok(g->receiver)) {
          fail(idx, "register out of range");
          return o;
        }
        const Type& recv = typing.types[g->receiver];
        if (!recv.concrete()) {
          fail(idx, "field access on non-concrete type '" + recv.name + "'");
          return o;
        }
        const TypeDecl* d = tt_.find(recv.name);
        if (d == nullptr) {
          fail(idx, "field access on non-struct type '" + recv.name + "'");
          return o;
        }
        if (g->index >= d->field_types.size()) {
          fail(idx, "field index " + std::to_string(g->index) +
                        " out of range for '" + recv.name + "'");
          return o;
        }
        t = d->field_types[g->index];
      } else if (const auto* dc = std::get_if<DispatchCall>(&in)) {
        if (!reg_ok(dc->guard) || !reg_ok(dc->alt)) {
          fail(idx, "register out of range");
          return o;
        }
        Signature arg_types;
        arg_types.reserve(dc->args.size());
        bool regs_ok = true;
        for (Reg r : dc->args) {
          if (!reg_ok(r)) {
            regs_ok = false;
            break;
          }
          arg_types.push_back(typing.types[r]);
        }
        if (!regs_ok) {
          fail(idx, "register out of range");
          return o;
        }
        Type r = Type::Any();
        if (all_concrete(arg_types) &&
            dispatch(tt_, orig_, dc->callee, arg_types).defined()) {
          if (!call_return(MethodKey{dc->callee, std::move(arg_types)}, o,
                           r)) {
            fail(idx, o.res.error);
            return o;
          }
        }
        t = join(tt_, r, typing.types[dc->alt]);
      } else {
        const auto& iv = std::get<DirectCall>(in);
        if (!reg_ok(iv.guard) || !reg_ok(iv.alt)) {
          fail(idx, "register out of range");
          return o;
        }
        for (Reg r : iv.args) {
          if (!reg_ok(r)) {
            fail(idx, "register out of range");
            return o;
          }
        }
        Type r = Type::Any();
        if (!call_return(MethodKey{iv.callee, iv.sig}, o, r)) {
          fail(idx, o.res.error);
          return o;
        }
        t = join(tt_, r, typing.types[iv.alt]);
      }
      typing.types.push_back(std::move(t));
    }
    o.res.ok = true;
    o.res.typing = std::move(typing);
    return o;
  }

 private:
  // Fills ret with the return type for key; false propagates a Failure
  // (o.res.error set). In-progress keys answer Any.
  bool call_return(MethodKey key, Out& o, Type& ret) {
    Out sub = infer_key(key);
    o.deps.insert(sub.deps.begin(), sub.deps.end());
    o.tainted = o.tainted || sub.tainted;
    if (sub.in_progress_hit) {
      ret = Type::Any();
      return true;
    }
    if (!sub.res.ok) {
      o.res.error = "callee " + to_string(key) + ": " + sub.res.error;
      return false;
    }
    if (sub.res.typing.types.empty()) {
      ret = Type::Any();  // empty body & no params; nothing to return
      return true;
    }
    ret = sub.res.typing.return_type();
    return true;
  }

  const TypeTable& tt_;
  const MethodTable& orig_;
  InferenceCache& cache_;
  KeySet in_progress_;
};

}  // namespace

Inferred infer_body(const TypeTable& tt, const MethodTable& orig_table,
                    const Signature& arg_types,
                    const std::vector<Instruction>& body,
                    InferenceCache* cache) {
  InferenceCache local;
  Walker w(tt, orig_table, cache ? *cache : local);
  return w.infer_instrs(arg_types, body).res;
}

Inferred infer_method(const TypeTable& tt, const MethodTable& orig_table,
                      const std::string& name, const Signature& arg_types,
                      InferenceCache* cache) {
  InferenceCache local;
  Walker w(tt, orig_table, cache ? *cache : local);
  return w.infer_key(MethodKey{name, arg_types}).res;
}

}  // namespace jules
