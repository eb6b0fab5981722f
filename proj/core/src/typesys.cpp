#include "jules/typesys.hpp"

#include <stdexcept>

namespace jules {

bool subtype(const TypeTable& tt, const Type& a, const Type& b) {
  if (a == b) return true;
  if (b.is_any()) return true;
  if (a.concrete() && b.abstract()) {
    const TypeDecl* d = tt.find(a.name);
    return d != nullptr && d->supertype == b;
  }
  return false;
}

bool subtype_sig(const TypeTable& tt, const Signature& a, const Signature& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!subtype(tt, a[i], b[i])) return false;
  }
  return true;
}

bool all_concrete(const Signature& sig) {
  for (const Type& t : sig) {
    if (!t.concrete()) return false;
  }
  return true;
}

Type join(const TypeTable& tt, const Type& a, const Type& b) {
  if (a == b) return a;
  if (subtype(tt, a, b)) return b;
  if (subtype(tt, b, a)) return a;
  if (a.concrete() && b.concrete()) {
    const TypeDecl* da = tt.find(a.name);
    const TypeDecl* db = tt.find(b.name);
    if (da != nullptr && db != nullptr && da->supertype == db->supertype) {
      return da->supertype;
    }
  }
  return Type::Any();
}

DispatchOutcome dispatch(const TypeTable& tt, const MethodTable& mt,
                         const std::string& name, const Signature& args) {
  for (const Type& t : args) {
    if (!t.concrete()) {
      throw std::invalid_argument(
          "dispatch requires concrete argument types; got '" + t.name + "'");
    }
  }
  DispatchOutcome out;
  const std::vector<const Method*>* named = mt.methods_named(name);
  if (named == nullptr) {
    out.fail = DispatchOutcome::Fail::NoApplicable;
    return out;
  }
  std::vector<const Method*> applicable;
  for (const Method* m : *named) {
    if (subtype_sig(tt, args, m->param_types)) applicable.push_back(m);
  }
  if (applicable.empty()) {
    out.fail = DispatchOutcome::Fail::NoApplicable;
    return out;
  }
  const Method* winner = nullptr;
  for (const Method* c : applicable) {
    bool below_all = true;
    for (const Method* o : applicable) {
      if (!subtype_sig(tt, c->param_types, o->param_types)) {
        below_all = false;
        break;
      }
    }
    if (below_all) {
      winner = c;
      break;  // at most one: signatures are distinct and <= is antisymmetric
    }
  }
  if (winner == nullptr) {
    out.fail = DispatchOutcome::Fail::Ambiguous;
    return out;
  }
  out.method = winner;
  return out;
}

}  // namespace jules
