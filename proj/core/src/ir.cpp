#include "jules/ir.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "jules/infer.hpp"
#include "jules/typesys.hpp"

namespace jules {

const Type& Type::Int() {
  static const Type t{TypeKind::Concrete, "Int"};
  return t;
}

const Type& Type::Any() {
  static const Type t{TypeKind::Abstract, "Any"};
  return t;
}

std::string to_string(const Type& t) { return t.name; }

std::string to_string(const Signature& sig) {
  std::string out;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i) out += ",";
    out += sig[i].name;
  }
  return out;
}

std::size_t hash_combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::string to_string(const MethodKey& k) {
  return k.name + "(" + to_string(k.sig) + ")";
}

void TypeTable::add(TypeDecl d) {
  index_.emplace(d.name, entries_.size());  // keeps first occurrence
  entries_.push_back(std::move(d));
}

const TypeDecl* TypeTable::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

bool TypeTable::declared_concrete(const std::string& name) const {
  return name == "Int" || find(name) != nullptr;
}

bool TypeTable::declared_abstract(const std::string& name) const {
  if (name == "Any") return true;
  for (const TypeDecl& d : entries_) {
    if (d.supertype.name == name) return true;
  }
  return false;
}

bool TypeTable::declared(const Type& t) const {
  return t.concrete() ? declared_concrete(t.name) : declared_abstract(t.name);
}

std::vector<Type> TypeTable::concrete_types() const {
  std::vector<Type> out = {Type::Int()};
  std::unordered_set<std::string> seen;
  for (const TypeDecl& d : entries_) {
    if (seen.insert(d.name).second) out.push_back(Type::concrete_named(d.name));
  }
  return out;
}

std::vector<Type> TypeTable::abstract_types() const {
  std::vector<Type> out = {Type::Any()};
  std::unordered_set<std::string> seen;
  for (const TypeDecl& d : entries_) {
    if (d.supertype.is_any()) continue;
    if (seen.insert(d.supertype.name).second) out.push_back(d.supertype);
  }
  return out;
}

Reg instr_target(const Instruction& in) {
  return std::visit([](const auto& i) { return i.target; }, in);
}

std::vector<Reg> instr_reads(const Instruction& in) {
  struct Reads {
    std::vector<Reg> operator()(const AssignConst&) { return {}; }
    std::vector<Reg> operator()(const AssignReg& i) { return {i.source}; }
    std::vector<Reg> operator()(const New& i) { return i.args; }
    std::vector<Reg> operator()(const GetField& i) { return {i.receiver}; }
    std::vector<Reg> operator()(const DispatchCall& i) {
      std::vector<Reg> r = {i.guard};
      r.insert(r.end(), i.args.begin(), i.args.end());
      r.push_back(i.alt);
      return r;
    }
    std::vector<Reg> operator()(const DirectCall& i) {
      std::vector<Reg> r = {i.guard};
      r.insert(r.end(), i.args.begin(), i.args.end());
      r.push_back(i.alt);
      return r;
    }
  };
  return std::visit(Reads{}, in);
}

bool is_call(const Instruction& in) {
  return std::holds_alternative<DispatchCall>(in) ||
         std::holds_alternative<DirectCall>(in);
}

Body make_body(std::vector<Instruction> instrs) {
  return std::make_shared<const std::vector<Instruction>>(std::move(instrs));
}

bool operator==(const Method& a, const Method& b) {
  if (a.name != b.name || a.param_types != b.param_types ||
      a.origin_signature != b.origin_signature) {
    return false;
  }
  if (a.body == b.body) return true;
  if (!a.body || !b.body) return false;
  return *a.body == *b.body;
}

void MethodTable::add(Method m) {
  index_.emplace(MethodKey{m.name, m.param_types}, methods_.size());
  methods_.push_back(std::move(m));
  rebuild_name_cache();
}

MethodTable::MethodTable(const MethodTable& other)
    : methods_(other.methods_), index_(other.index_) {
  rebuild_name_cache();
}

MethodTable& MethodTable::operator=(const MethodTable& other) {
  if (this != &other) {
    methods_ = other.methods_;
    index_ = other.index_;
    rebuild_name_cache();
  }
  return *this;
}

bool MethodTable::replace_body(const std::string& name, const Signature& sig,
                               Body body) {
  auto it = index_.find(MethodKey{name, sig});
  if (it == index_.end()) return false;
  methods_[it->second].body = std::move(body);
  return true;
}

const Method* MethodTable::lookup_exact(const std::string& name,
                                        const Signature& sig) const {
  auto it = index_.find(MethodKey{name, sig});
  return it == index_.end() ? nullptr : &methods_[it->second];
}

bool MethodTable::has_name(const std::string& name) const {
  return by_name_.count(name) != 0;
}

const std::vector<const Method*>* MethodTable::methods_named(
    const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : &it->second;
}

void MethodTable::rebuild_name_cache() {
  by_name_.clear();
  for (const Method& m : methods_) by_name_[m.name].push_back(&m);
}

bool operator==(const MethodTable& a, const MethodTable& b) {
  if (a.methods_.size() != b.methods_.size()) return false;
  auto sorted_view = [](const MethodTable& t) {
    std::vector<const Method*> v;
    v.reserve(t.methods_.size());
    for (const Method& m : t.methods_) v.push_back(&m);
    std::sort(v.begin(), v.end(), [](const Method* x, const Method* y) {
      if (x->name != y->name) return x->name < y->name;
      return x->param_types < y->param_types;
    });
    return v;
  };
  auto va = sorted_view(a);
  auto vb = sorted_view(b);
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (!(*va[i] == *vb[i])) return false;
  }
  return true;
}

MethodTable originals(const MethodTable& mt) {
  MethodTable out;
  for (const Method& m : mt.methods()) {
    if (m.is_original()) out.add(m);
  }
  return out;
}

std::string to_string(const Diagnostic& d) {
  std::ostringstream os;
  if (!d.method.empty()) {
    os << d.method;
    if (d.instr >= 0) os << " instruction " << d.instr;
    os << ": ";
  }
  os << d.message;
  return os.str();
}

namespace {

void check_type_declared(const TypeTable& tt, const Type& t,
                         const std::string& where, const std::string& method,
                         int instr, std::vector<Diagnostic>& out) {
  if (t.is_int() || t.is_any()) return;
  if (tt.declared(t)) return;
  out.push_back({Diagnostic::Code::UndeclaredType,
                 "undeclared type '" + t.name + "' in " + where, method,
                 instr});
}

}  // namespace

std::vector<Diagnostic> validate(const TypeTable& tt, const MethodTable& mt) {
  std::vector<Diagnostic> out;

  // Type table sanity: unique names, no redefinition of the predefined
  // types, field and supertype names resolvable.
  {
    std::unordered_set<std::string> seen;
    for (const TypeDecl& d : tt.entries()) {
      if (!seen.insert(d.name).second) {
        out.push_back({Diagnostic::Code::DuplicateTypeName,
                       "duplicate type declaration '" + d.name + "'", "", -1});
      }
      if (d.name == "Int" || d.name == "Any") {
        out.push_back({Diagnostic::Code::ReservedTypeName,
                       "cannot declare predefined type '" + d.name + "'", "",
                       -1});
      }
      if (tt.declared_concrete(d.supertype.name)) {
        out.push_back({Diagnostic::Code::ReservedTypeName,
                       "supertype '" + d.supertype.name +
                           "' of '" + d.name + "' is a concrete type",
                       "", -1});
      }
      for (const Type& f : d.field_types) {
        if (f.is_int() || f.is_any()) continue;
        if (!tt.declared(f)) {
          out.push_back({Diagnostic::Code::UndeclaredFieldType,
                         "field type '" + f.name + "' of '" + d.name +
                             "' is not declared",
                         "", -1});
        }
      }
    }
  }

  // Entry method.
  const Method* entry = mt.lookup_exact("main", {});
  if (entry == nullptr || !entry->is_original()) {
    out.push_back({Diagnostic::Code::MissingMain,
                   "missing entry method 'main()'", "", -1});
  }

  // Duplicate (name, signature) keys.
  {
    std::unordered_set<MethodKey, MethodKeyHash> seen;
    for (const Method& m : mt.methods()) {
      MethodKey k{m.name, m.param_types};
      if (!seen.insert(k).second) {
        out.push_back({Diagnostic::Code::DuplicateMethod,
                       "duplicate method " + to_string(k), m.name, -1});
      }
    }
  }

  MethodTable orig = originals(mt);
  InferenceCache cache;

  for (const Method& m : mt.methods()) {
    const std::string label = to_string(MethodKey{m.name, m.param_types});

    for (const Type& t : m.param_types) {
      check_type_declared(tt, t, "signature of " + label, m.name, -1, out);
    }
    for (const Type& t : m.origin_signature) {
      check_type_declared(tt, t, "origin of " + label, m.name, -1, out);
    }

    if (m.is_stub()) {
      out.push_back({Diagnostic::Code::StubBody,
                     "method " + label + " has a stub body", m.name, -1});
      continue;
    }
    if (m.body->empty()) {
      out.push_back({Diagnostic::Code::EmptyBody,
                     "method " + label + " has an empty body", m.name, -1});
    }

    // Register numbering and backward references.
    const Reg params = static_cast<Reg>(m.param_types.size());
    for (std::size_t i = 0; i < m.body->size(); ++i) {
      const Instruction& in = (*m.body)[i];
      const Reg want = params + static_cast<Reg>(i);
      if (instr_target(in) != want) {
        out.push_back({Diagnostic::Code::BadRegisterNumbering,
                       "register %" + std::to_string(instr_target(in)) +
                           " breaks consecutive numbering (expected %" +
                           std::to_string(want) + ")",
                       m.name, static_cast<int>(i)});
      }
      for (Reg r : instr_reads(in)) {
        if (r >= want) {
          out.push_back({Diagnostic::Code::ForwardReference,
                         "register %" + std::to_string(r) +
                             " refers forward (defining %" +
                             std::to_string(want) + ")",
                         m.name, static_cast<int>(i)});
        }
      }
      // Instruction-level type mentions.
      if (const auto* n = std::get_if<New>(&in)) {
        if (!n->struct_type.concrete() || n->struct_type.is_int() ||
            !tt.declared_concrete(n->struct_type.name)) {
          out.push_back({Diagnostic::Code::UndeclaredType,
                         "constructed type '" + n->struct_type.name +
                             "' is not a declared struct type",
                         m.name, static_cast<int>(i)});
        }
      } else if (const auto* d = std::get_if<DispatchCall>(&in)) {
        if (!mt.has_name(d->callee)) {
          out.push_back({Diagnostic::Code::UnknownCallee,
                         "dispatched callee '" + d->callee +
                             "' names no method in the table",
                         m.name, static_cast<int>(i)});
        }
      } else if (const auto* dc = std::get_if<DirectCall>(&in)) {
        for (const Type& t : dc->sig) {
          check_type_declared(tt, t, "direct call in " + label, m.name,
                              static_cast<int>(i), out);
        }
      }
    }

    if (m.is_original()) {
      for (std::size_t i = 0; i < m.body->size(); ++i) {
        if (std::holds_alternative<DirectCall>((*m.body)[i])) {
          out.push_back({Diagnostic::Code::DirectCallInOriginal,
                         "original method " + label +
                             " contains a direct call",
                         m.name, static_cast<int>(i)});
        }
      }
      if (!m.body->empty()) {
        Inferred inf = infer_body(tt, orig, m.param_types, *m.body, &cache);
        if (!inf.ok) {
          out.push_back({Diagnostic::Code::InferenceFailure,
                         "type inference fails for " + label + ": " +
                             inf.error,
                         m.name, -1});
        }
      }
    } else {
      // Instances: concrete signature below a present origin that is the
      // most specific original for the instance signature.
      if (!all_concrete(m.param_types)) {
        out.push_back({Diagnostic::Code::InstanceSignatureNotConcrete,
                       "instance " + label + " has a non-concrete signature",
                       m.name, -1});
      }
      const Method* origin =
          mt.lookup_exact(m.name, m.origin_signature);
      if (origin == nullptr || !origin->is_original()) {
        out.push_back({Diagnostic::Code::InstanceOriginMissing,
                       "instance " + label + " has no original with its "
                       "origin signature",
                       m.name, -1});
      }
      if (m.param_types.size() != m.origin_signature.size() ||
          !subtype_sig(tt, m.param_types, m.origin_signature)) {
        out.push_back({Diagnostic::Code::InstanceNotBelowOrigin,
                       "instance " + label +
                           " signature is not below its origin (" +
                           to_string(m.origin_signature) + ")",
                       m.name, -1});
      } else {
        // The origin must be most specific: any original signature the
        // instance signature fits must sit above the origin signature.
        for (const Method& other : mt.methods()) {
          if (other.name != m.name || !other.is_original()) continue;
          if (other.param_types.size() != m.param_types.size()) continue;
          if (!subtype_sig(tt, m.param_types, other.param_types)) continue;
          if (!subtype_sig(tt, m.origin_signature, other.param_types)) {
            out.push_back({Diagnostic::Code::InstanceNotMostSpecific,
                           "instance " + label +
                               " is not keyed to the most specific "
                               "original (also fits " +
                               to_string(MethodKey{other.name,
                                                   other.param_types}) +
                               ")",
                           m.name, -1});
          }
        }
      }
    }
  }

  return out;
}

}  // namespace jules
