// Forward dataflow typing of straight-line bodies, the concrete
// instantiation used by the compiler and the stability analyses.
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "jules/ir.hpp"

namespace jules {

// Parameter types first, then one entry per instruction; the last entry is
// the return type.
struct RegisterTyping {
  Signature types;
  std::size_t param_count = 0;

  const Type& return_type() const { return types.back(); }
  bool all_concrete() const;

  friend bool operator==(const RegisterTyping&,
                         const RegisterTyping&) = default;
};

struct Inferred {
  bool ok = false;
  RegisterTyping typing;  // valid when ok
  std::string error;      // valid when !ok

  explicit operator bool() const { return ok; }
};

// Memo for (name, argument types) results. Only context-independent
// results are stored: a computation that consulted an in-progress key
// (recursion) is not cached, and a cached entry is reused only when none
// of its recorded dependencies is currently in progress. This keeps every
// public result equal to the fresh-walk result regardless of warm-up
// order. Not thread-safe; use one cache per worker.
class InferenceCache {
 public:
  struct Entry {
    Inferred result;
    std::vector<MethodKey> deps;  // transitive keys the result depends on
  };
  std::unordered_map<MethodKey, Entry, MethodKeyHash> entries;
};

// Types a body under the given parameter types. orig_table must contain
// original methods only (pass originals(mt)); dispatched calls are resolved
// against it. Recursive cycles answer Any for the in-progress callee's
// return type. Failure reports the offending instruction.
Inferred infer_body(const TypeTable& tt, const MethodTable& orig_table,
                    const Signature& arg_types,
                    const std::vector<Instruction>& body,
                    InferenceCache* cache = nullptr);

// Resolves the body for (name, arg_types) — dispatch when the types are
// all concrete, the exact declared original otherwise — and infers it at
// arg_types. Failure when no target exists or the body fails to infer.
Inferred infer_method(const TypeTable& tt, const MethodTable& orig_table,
                      const std::string& name, const Signature& arg_types,
                      InferenceCache* cache = nullptr);

}  // namespace jules
