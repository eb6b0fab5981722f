#include "jules/jit.hpp"

#include <cassert>
#include <stdexcept>
#include <unordered_set>

#include "jules/typesys.hpp"

namespace jules {

namespace {

// Drives one compilation request. The table is threaded instruction by
// instruction through an explicit stack of in-flight method translations;
// each nested request keys a fresh stub first, so revisiting a signature
// (recursion) resolves to a direct call at the stub instead of looping.
class Compiler {
 public:
  Compiler(const TypeTable& tt, MethodTable table)
      : tt_(tt), table_(std::move(table)), orig_(originals(table_)) {}

  MethodTable take_table() && { return std::move(table_); }

  // Ensures an entry (original, instance, or in-flight stub) exists for
  // (name, sig); compiles an instance when none does.
  void ensure_entry(const std::string& name, const Signature& sig) {
    if (table_.lookup_exact(name, sig) != nullptr) return;
    push_job(name, sig);
    while (!jobs_.empty()) {
      Job& job = jobs_.back();
      if (job.idx < job.src->size()) {
        const Instruction& in = (*job.src)[job.idx];
        const DispatchCall* call = std::get_if<DispatchCall>(&in);
        Signature arg_types;
        if (call != nullptr && concrete_args(job.typing, *call, arg_types)) {
          if (table_.lookup_exact(call->callee, arg_types) == nullptr) {
            DispatchOutcome d = dispatch(tt_, table_, call->callee, arg_types);
            if (!d.defined()) {
              // No translation exists for a concretely-typed call whose
              // dispatch is undefined; leave it dispatched (it errs
              // identically under both semantics at runtime).
              job.out.push_back(in);
              job.idx += 1;
              continue;
            }
            // Nested compilation; retranslate this instruction after the
            // callee's entry exists.
            push_job(call->callee, arg_types);
            continue;
          }
          job.out.push_back(DirectCall{call->target, call->guard,
                                       call->callee, std::move(arg_types),
                                       call->args, call->alt});
          job.idx += 1;
        } else {
          job.out.push_back(in);
          job.idx += 1;
        }
      } else {
        bool replaced = table_.replace_body(job.name, job.sig,
                                            make_body(std::move(job.out)));
        assert(replaced);
        (void)replaced;
        stubs_.erase(MethodKey{job.name, job.sig});
        jobs_.pop_back();
      }
    }
    assert(stubs_.empty());
  }

 private:
  struct Job {
    std::string name;
    Signature sig;
    Body src;  // shared with the original; outlives table growth
    RegisterTyping typing;
    std::vector<Instruction> out;
    std::size_t idx = 0;
  };

  bool concrete_args(const RegisterTyping& typing, const DispatchCall& call,
                     Signature& out) const {
    out.clear();
    out.reserve(call.args.size());
    for (Reg r : call.args) {
      if (r >= typing.types.size() || !typing.types[r].concrete()) {
        return false;
      }
      out.push_back(typing.types[r]);
    }
    return true;
  }

  void push_job(const std::string& name, const Signature& sig) {
    DispatchOutcome d = dispatch(tt_, table_, name, sig);
    if (!d.defined()) {
      throw std::invalid_argument("jit_compile: dispatch undefined for " +
                                  to_string(MethodKey{name, sig}));
    }
    // Copy what the target provides before the table grows: adding the
    // stub reallocates the method storage the pointer aims into.
    assert(d.method->is_original() && !(d.method->param_types == sig));
    const Body src_body = d.method->body;
    Signature origin = d.method->param_types;

    Inferred inf = infer_body(tt_, orig_, sig, *src_body, &infer_cache_);
    if (!inf.ok) {
      // Unreachable for well-formed tables (declared-signature inference
      // succeeded and refinement preserves success).
      throw std::logic_error("jit_compile: inference failed for " +
                             to_string(MethodKey{name, sig}) + ": " +
                             inf.error);
    }

    MethodKey key{name, sig};
    bool fresh = stubs_.insert(key).second &&
                 table_.lookup_exact(name, sig) == nullptr;
    assert(fresh && "compilation must only enter fresh keys");
    (void)fresh;

    Method stub;
    stub.name = name;
    stub.param_types = sig;
    stub.body = nullptr;
    stub.origin_signature = std::move(origin);
    table_.add(std::move(stub));

    Job job;
    job.name = name;
    job.sig = sig;
    job.src = src_body;
    job.typing = std::move(inf.typing);
    jobs_.push_back(std::move(job));
  }

  const TypeTable& tt_;
  MethodTable table_;
  MethodTable orig_;
  InferenceCache infer_cache_;
  std::unordered_set<MethodKey, MethodKeyHash> stubs_;
  std::vector<Job> jobs_;
};

}  // namespace

MethodTable jit_compile(const TypeTable& tt, const MethodTable& mt,
                        const std::string& name, const Signature& arg_types) {
  if (!all_concrete(arg_types)) {
    throw std::invalid_argument(
        "jit_compile requires concrete argument types for " + name);
  }
  if (mt.lookup_exact(name, arg_types) != nullptr) {
    return mt;  // already keyed: original, instance, or stub
  }
  Compiler c(tt, mt);
  c.ensure_entry(name, arg_types);
  return std::move(c).take_table();
}

std::pair<Instruction, MethodTable> translate_instr(
    const TypeTable& tt, const RegisterTyping& typing, const Instruction& in,
    const MethodTable& mt) {
  const DispatchCall* call = std::get_if<DispatchCall>(&in);
  if (call == nullptr) return {in, mt};
  Signature arg_types;
  arg_types.reserve(call->args.size());
  for (Reg r : call->args) {
    if (r >= typing.types.size() || !typing.types[r].concrete()) {
      return {in, mt};
    }
    arg_types.push_back(typing.types[r]);
  }
  if (mt.lookup_exact(call->callee, arg_types) == nullptr) {
    if (!dispatch(tt, mt, call->callee, arg_types).defined()) {
      return {in, mt};  // no rule rewrites an undefined-dispatch call
    }
    Compiler c(tt, mt);
    c.ensure_entry(call->callee, arg_types);
    MethodTable extended = std::move(c).take_table();
    Instruction rewritten = DirectCall{call->target,  call->guard,
                                       call->callee,  arg_types,
                                       call->args,    call->alt};
    return {std::move(rewritten), std::move(extended)};
  }
  Instruction rewritten = DirectCall{call->target, call->guard, call->callee,
                                     std::move(arg_types), call->args,
                                     call->alt};
  return {std::move(rewritten), mt};
}

}  // namespace jules
