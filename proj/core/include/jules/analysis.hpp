// Stability and groundedness classification, devirtualization checks, the
// table optimization relation, and the instance census. All checks here
// re-derive their answers from inference over the original methods, so
// they stand as independent oracles of the compiler.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "jules/infer.hpp"
#include "jules/ir.hpp"

namespace jules {

struct StabilityReport {
  std::string method;
  Signature sig;
  bool ok = false;     // classification succeeded
  std::string error;   // when !ok
  bool stable = false;   // inferred return type concrete
  bool grounded = false; // every register type concrete
  Type return_type;
  RegisterTyping typing;
};

// Classifies (name, arg_types) through the originals of mt: instances are
// judged by inferring their origin's body at the instance signature.
// Abstract argument types are allowed (classification at a declared
// signature); grounded then usually fails on the abstract parameters.
StabilityReport classify(const TypeTable& tt, const MethodTable& mt,
                         const std::string& name, const Signature& arg_types,
                         InferenceCache* cache = nullptr);

// True when the body contains no dispatched call. Pre: not a stub
// (throws std::invalid_argument).
bool fully_devirtualized(const Method& m);

// One instruction is maximally devirtualized when it is not a call, a
// dispatched call with at least one non-concrete argument register type,
// or a direct call whose signature equals the argument register types
// exactly and whose target entry exists. A dispatched call whose argument
// registers are all concretely typed is NOT maximally devirtualized.
bool max_devirt_instr(const RegisterTyping& typing, const MethodTable& mt,
                      const Instruction& in);

struct AnalysisWitness {
  std::string method;
  Signature sig;
  int instr = -1;
  std::string reason;
};

struct CheckResult {
  bool ok = true;
  AnalysisWitness witness;
  explicit operator bool() const { return ok; }
};

// Every compiled instance of the table, re-inferred from its origin's body
// at the instance signature, must be maximally devirtualized instruction
// by instruction. Stub instances fail the check.
CheckResult max_devirt_table(const TypeTable& tt, const MethodTable& mt);

// The optimization relation between a table of originals and an optimized
// table: opt's originals equal orig, and every instance body relates to
// its origin's body pointwise — unchanged instructions, or a dispatched
// call rewritten to a direct call whose signature equals the concrete
// inferred argument types, where the dispatch target's signature equals
// the origin signature of the entry the direct call names.
CheckResult table_optimizes(const TypeTable& tt, const MethodTable& orig,
                            const MethodTable& opt);

struct CensusReport {
  std::size_t instance_count = 0;  // compiled instances (sig != origin)
  std::size_t failed_count = 0;    // classification failures among them
  bool zero_denominator = false;   // no classifiable instance
  double stable_fraction = 1.0;
  double grounded_fraction = 1.0;
  std::vector<StabilityReport> per_instance;
};

// Classifies every compiled instance. Fractions are over instances that
// classified successfully; zero such instances pins both fractions to 1.0
// and sets zero_denominator.
CensusReport census(const TypeTable& tt, const MethodTable& mt);

}  // namespace jules
