// Independent oracles for cross-checking the library. These re-derive the
// dispatch contract and the join lattice by brute force, on purpose sharing
// no code with the functions under test beyond the plain data types and the
// subtype predicate they are defined over.
#pragma once

#include <optional>
#include <vector>

#include "jules/ir.hpp"
#include "jules/typesys.hpp"

namespace oracles {

using namespace jules;

struct DispatchExpectation {
  const Method* method = nullptr;  // null when undefined
  bool ambiguous = false;          // meaningful when undefined
  bool no_applicable = false;
};

// Literal reading of the dispatch contract: applicable methods are those
// whose signature the argument tuple pointwise subtypes; the result is the
// unique applicable method whose signature pointwise subtypes every other
// applicable signature.
inline DispatchExpectation brute_force_dispatch(const TypeTable& tt,
                                                const MethodTable& mt,
                                                const std::string& name,
                                                const Signature& args) {
  std::vector<const Method*> applicable;
  for (const Method& m : mt.methods()) {
    if (m.name != name) continue;
    if (m.param_types.size() != args.size()) continue;
    bool ok = true;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (!subtype(tt, args[i], m.param_types[i])) { ok = false; break; }
    }
    if (ok) applicable.push_back(&m);
  }
  DispatchExpectation out;
  if (applicable.empty()) {
    out.no_applicable = true;
    return out;
  }
  std::vector<const Method*> most_specific;
  for (const Method* c : applicable) {
    bool below_all = true;
    for (const Method* o : applicable) {
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (!subtype(tt, c->param_types[i], o->param_types[i])) {
          below_all = false;
          break;
        }
      }
      if (!below_all) break;
    }
    if (below_all) most_specific.push_back(c);
  }
  if (most_specific.size() == 1) {
    out.method = most_specific.front();
  } else {
    out.ambiguous = true;
  }
  return out;
}

// All type values expressible over a table: Int, Any, declared concretes,
// and every abstract that appears as a supertype.
inline std::vector<Type> type_universe(const TypeTable& tt) {
  std::vector<Type> u = {Type::Int(), Type::Any()};
  for (const Type& t : tt.concrete_types()) {
    if (!t.is_int()) u.push_back(t);
  }
  for (const Type& t : tt.abstract_types()) {
    if (!t.is_any()) u.push_back(t);
  }
  return u;
}

// Least upper bound by enumeration: the unique common supertype that
// subtypes every other common supertype. Returns nullopt when no unique
// least element exists (must not happen in this three-level lattice).
inline std::optional<Type> brute_force_lub(const TypeTable& tt, const Type& a,
                                           const Type& b) {
  std::vector<Type> uppers;
  for (const Type& t : type_universe(tt)) {
    if (subtype(tt, a, t) && subtype(tt, b, t)) uppers.push_back(t);
  }
  std::optional<Type> least;
  for (const Type& u : uppers) {
    bool below_all = true;
    for (const Type& v : uppers) {
      if (!subtype(tt, u, v)) { below_all = false; break; }
    }
    if (below_all) {
      if (least.has_value()) return std::nullopt;
      least = u;
    }
  }
  return least;
}

}  // namespace oracles
