// Seeded program generation, differential testing of the two semantics,
// ahead-of-time table harvesting, and failure shrinking.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "jules/interp.hpp"
#include "jules/ir.hpp"

namespace jules {

struct GenConfig {
  std::uint64_t seed = 0;
  unsigned max_types = 5;             // declared struct types
  unsigned max_methods_per_name = 3;  // originals per method name
  unsigned max_body_len = 8;
  unsigned max_arity = 3;
  unsigned max_call_depth_bias = 2;  // higher = more taken call guards
};

struct GenProgram {
  TypeTable types;
  MethodTable methods;
};

// Deterministic in the config. The output always declares main(), passes
// validate() with no diagnostics, never contains an ambiguous overload
// pair, and contains no dispatched call site whose inferred argument types
// are all concrete with undefined dispatch, at any concrete refinement of
// any declared signature (such sites are repaired to alt-register copies).
GenProgram gen_program(const GenConfig& cfg);

struct OutcomeSummary {
  RunOutcome::Kind kind = RunOutcome::Kind::FuelExhausted;
  std::uint64_t steps = 0;
  std::string detail;
};

struct DiffVerdict {
  bool match = false;
  OutcomeSummary dispatch_outcome;
  OutcomeSummary jit_outcome;
  // Tagged "kind: detail" strings; empty on a match. Kinds: outcome,
  // steps, env, stubs, originals, max-devirt, table-optimizes,
  // grounded-devirt, soundness, callee-stability.
  std::vector<std::string> property_failures;
  std::uint64_t seed = 0;      // filled by the seed driver
  std::string program_text;    // printable repro, filled on mismatch
};

// Runs the program under both semantics with the same fuel and compares
// outcome class, step counts, and final environments; then checks the
// jit-side final table: stub-freedom, originals preserved, maximal
// devirtualization, the optimization relation, grounded instances fully
// devirtualized, plus instrumented soundness and grounded-caller callee
// stability from both runs.
DiffVerdict diff_test(const TypeTable& tt, const MethodTable& mt,
                      const EntryPoint& entry, std::uint64_t fuel);

// Harvests the final table of a jit run, then compares a plain dispatch
// run of the original table against a plain dispatch run of the harvested
// table (outcome class, step counts, final environments).
DiffVerdict aot_test(const TypeTable& tt, const MethodTable& mt,
                     const EntryPoint& entry, std::uint64_t fuel);

// Combined per-seed result so drivers generate once per seed.
struct SeedReport {
  GenProgram program;
  DiffVerdict diff;
  DiffVerdict aot;  // meaningful when with_aot
};
SeedReport seed_report(const GenConfig& cfg, std::uint64_t fuel,
                       bool with_aot);

// Runs seed_report for seeds [first, last] split across worker threads
// (each worker owns its seeds); results are delivered in seed order.
void run_seed_range(const GenConfig& base, std::uint64_t first,
                    std::uint64_t last, std::uint64_t fuel, bool with_aot,
                    unsigned workers,
                    const std::function<void(const SeedReport&)>& sink);

using FailPredicate =
    std::function<bool(const TypeTable&, const MethodTable&)>;

// Greedy minimization: repeatedly drops methods, instructions (renumbering
// the registers that follow), and type declarations while the candidate
// still validates cleanly and the predicate still reports the failure.
GenProgram shrink(const TypeTable& tt, const MethodTable& mt,
                  const FailPredicate& still_failing);

}  // namespace jules
