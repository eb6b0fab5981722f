// The specializing compiler: on dispatch it keys a stub for the requested
// concrete signature, infers the original body at those types, and
// rewrites concretely-typed dispatched calls into direct calls, compiling
// callees recursively. The input table is never modified.
#pragma once

#include <string>
#include <utility>

#include "jules/infer.hpp"
#include "jules/ir.hpp"

namespace jules {

// Returns a table extended with a compiled instance for (name, arg_types),
// or the table unchanged when the key already exists (the original itself
// when its signature is concrete, a previously compiled instance, or a
// stub mid-compilation). arg_types must be concrete and dispatch must be
// defined for them; throws std::invalid_argument otherwise. Compilation
// terminates: every recursive entry adds a fresh key (asserted), and no
// stub survives in the returned table.
MethodTable jit_compile(const TypeTable& tt, const MethodTable& mt,
                        const std::string& name, const Signature& arg_types);

// One instruction of the translation: a dispatched call whose argument
// registers all have concrete types in typing is rewritten to a direct
// call after ensuring the table has an entry for that concrete signature
// (compiling one recursively if needed); every other instruction, and any
// concretely-typed dispatched call whose dispatch is undefined, passes
// through unchanged together with the table.
std::pair<Instruction, MethodTable> translate_instr(const TypeTable& tt,
                                                    const RegisterTyping& typing,
                                                    const Instruction& in,
                                                    const MethodTable& mt);

}  // namespace jules
