// Subtyping, join, and dynamic dispatch over the three-level lattice:
// concrete types below their declared abstract supertype below Any.
#pragma once

#include <string>

#include "jules/ir.hpp"

namespace jules {

// Reflexive; everything subtypes Any; a concrete type subtypes its declared
// supertype. Total: undeclared names relate only to themselves and Any
// (validate() reports undeclared types where they enter the system).
bool subtype(const TypeTable& tt, const Type& a, const Type& b);

// Pointwise subtyping; false on length mismatch.
bool subtype_sig(const TypeTable& tt, const Signature& a, const Signature& b);

bool all_concrete(const Signature& sig);

// Least upper bound: equal types join to themselves, two distinct concrete
// types join to their shared declared supertype when they have one,
// everything else joins to Any.
Type join(const TypeTable& tt, const Type& a, const Type& b);

struct DispatchOutcome {
  enum class Fail { None, NoApplicable, Ambiguous };
  const Method* method = nullptr;  // valid while the table is unmodified
  Fail fail = Fail::None;
  bool defined() const { return method != nullptr; }
};

// Most specific applicable method for concrete argument types: applicable
// means args pointwise subtype the entry signature; the winner pointwise
// subtypes every other applicable signature. Undefined (with the reason)
// when no method applies or no unique winner exists. Throws
// std::invalid_argument if any argument type is not concrete.
DispatchOutcome dispatch(const TypeTable& tt, const MethodTable& mt,
                         const std::string& name, const Signature& args);

}  // namespace jules
