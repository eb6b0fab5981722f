// Core program representation: types, instructions, methods, method tables,
// and well-formedness validation.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace jules {

enum class TypeKind : std::uint8_t { Concrete, Abstract };

// A type is a tagged name. Int and Any are predefined; declared struct
// types are concrete; every other capitalized name is abstract and sits
// directly under Any.
struct Type {
  TypeKind kind = TypeKind::Abstract;
  std::string name;

  bool concrete() const { return kind == TypeKind::Concrete; }
  bool abstract() const { return kind == TypeKind::Abstract; }
  bool is_int() const { return kind == TypeKind::Concrete && name == "Int"; }
  bool is_any() const { return kind == TypeKind::Abstract && name == "Any"; }

  static const Type& Int();
  static const Type& Any();
  static Type concrete_named(std::string n) {
    return Type{TypeKind::Concrete, std::move(n)};
  }
  static Type abstract_named(std::string n) {
    return Type{TypeKind::Abstract, std::move(n)};
  }

  friend bool operator==(const Type& a, const Type& b) = default;
  friend bool operator<(const Type& a, const Type& b) {
    if (a.name != b.name) return a.name < b.name;
    return a.kind < b.kind;
  }
};

using Signature = std::vector<Type>;

std::string to_string(const Type& t);
std::string to_string(const Signature& sig);  // comma-joined names

std::size_t hash_combine(std::size_t seed, std::size_t v);

struct TypeHash {
  std::size_t operator()(const Type& t) const {
    return hash_combine(std::hash<std::string>{}(t.name),
                        static_cast<std::size_t>(t.kind));
  }
};

struct SignatureHash {
  std::size_t operator()(const Signature& sig) const {
    std::size_t h = sig.size();
    for (const Type& t : sig) h = hash_combine(h, TypeHash{}(t));
    return h;
  }
};

// One struct declaration: name, field types, declared abstract supertype.
struct TypeDecl {
  std::string name;
  std::vector<Type> field_types;
  Type supertype;

  friend bool operator==(const TypeDecl&, const TypeDecl&) = default;
};

// Declared struct types in declaration order. Duplicate names are
// representable (the parser stays structural); validate() flags them.
class TypeTable {
 public:
  TypeTable() = default;

  void add(TypeDecl d);
  const TypeDecl* find(const std::string& name) const;
  bool declared_concrete(const std::string& name) const;
  // An abstract name is declared by appearing as some entry's supertype.
  bool declared_abstract(const std::string& name) const;
  bool declared(const Type& t) const;

  const std::vector<TypeDecl>& entries() const { return entries_; }
  std::vector<Type> concrete_types() const;  // Int plus declared structs
  std::vector<Type> abstract_types() const;  // Any plus supertypes in use

  friend bool operator==(const TypeTable& a, const TypeTable& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<TypeDecl> entries_;
  std::unordered_map<std::string, std::size_t> index_;  // first occurrence
};

using Reg = std::uint32_t;

// Instructions of a straight-line body. The target register is explicit
// and must number consecutively after the parameters.
struct AssignConst {
  Reg target;
  std::int64_t value;
  friend bool operator==(const AssignConst&, const AssignConst&) = default;
};

struct AssignReg {
  Reg target;
  Reg source;
  friend bool operator==(const AssignReg&, const AssignReg&) = default;
};

struct New {
  Reg target;
  Type struct_type;  // concrete
  std::vector<Reg> args;
  friend bool operator==(const New&, const New&) = default;
};

struct GetField {
  Reg target;
  Reg receiver;
  std::uint32_t index;  // zero-based
  friend bool operator==(const GetField&, const GetField&) = default;
};

// Conditional dispatched call: if guard is a nonzero value, call callee on
// the argument registers via dynamic dispatch; otherwise copy alt.
struct DispatchCall {
  Reg target;
  Reg guard;
  std::string callee;
  std::vector<Reg> args;
  Reg alt;
  friend bool operator==(const DispatchCall&, const DispatchCall&) = default;
};

// Conditional direct call: invoke the exact table entry callee[sig].
struct DirectCall {
  Reg target;
  Reg guard;
  std::string callee;
  Signature sig;
  std::vector<Reg> args;
  Reg alt;
  friend bool operator==(const DirectCall&, const DirectCall&) = default;
};

using Instruction = std::variant<AssignConst, AssignReg, New, GetField,
                                 DispatchCall, DirectCall>;

Reg instr_target(const Instruction& in);
std::vector<Reg> instr_reads(const Instruction& in);
bool is_call(const Instruction& in);

// Bodies are immutable and shared; a null body marks a stub awaiting
// compilation. Never mutate a body reachable from a table.
using Body = std::shared_ptr<const std::vector<Instruction>>;
Body make_body(std::vector<Instruction> instrs);

struct Method {
  std::string name;
  Signature param_types;
  Body body;  // null = stub
  Signature origin_signature;

  bool is_stub() const { return body == nullptr; }
  bool is_original() const { return param_types == origin_signature; }
  bool is_instance() const { return !is_original(); }

  // Structural equality (bodies compared by contents).
  friend bool operator==(const Method& a, const Method& b);
};

struct MethodKey {
  std::string name;
  Signature sig;
  friend bool operator==(const MethodKey&, const MethodKey&) = default;
};

struct MethodKeyHash {
  std::size_t operator()(const MethodKey& k) const {
    return hash_combine(std::hash<std::string>{}(k.name),
                        SignatureHash{}(k.sig));
  }
};

std::string to_string(const MethodKey& k);  // name(sig)

// Method collection keyed by (name, signature). Extension copies: callers
// that hold the previous value observe it unchanged. Duplicate keys are
// representable for validate() to flag; lookups see the first occurrence.
class MethodTable {
 public:
  MethodTable() = default;
  // The name cache points into methods_; copies rebuild it. Moves transfer
  // the storage, so the cache stays valid.
  MethodTable(const MethodTable& other);
  MethodTable& operator=(const MethodTable& other);
  MethodTable(MethodTable&&) noexcept = default;
  MethodTable& operator=(MethodTable&&) = default;

  void add(Method m);
  // Overwrites the body of an existing entry (origin untouched); returns
  // false when the key is absent.
  bool replace_body(const std::string& name, const Signature& sig, Body body);

  const Method* lookup_exact(const std::string& name,
                             const Signature& sig) const;
  bool has_name(const std::string& name) const;
  const std::vector<const Method*>* methods_named(
      const std::string& name) const;

  const std::vector<Method>& methods() const { return methods_; }
  std::size_t size() const { return methods_.size(); }

  // Order-insensitive structural equality.
  friend bool operator==(const MethodTable& a, const MethodTable& b);

 private:
  std::vector<Method> methods_;
  std::unordered_map<MethodKey, std::size_t, MethodKeyHash> index_;
  std::unordered_map<std::string, std::vector<const Method*>> by_name_;
  void rebuild_name_cache();
};

// The original methods of a table: entries whose signature equals their
// origin signature. Idempotent.
MethodTable originals(const MethodTable& mt);

struct Diagnostic {
  enum class Code {
    MissingMain,
    DuplicateTypeName,
    ReservedTypeName,
    UndeclaredFieldType,
    UndeclaredType,
    BadRegisterNumbering,
    ForwardReference,
    EmptyBody,
    StubBody,
    DirectCallInOriginal,
    DuplicateMethod,
    UnknownCallee,
    InferenceFailure,
    InstanceSignatureNotConcrete,
    InstanceNotBelowOrigin,
    InstanceOriginMissing,
    InstanceNotMostSpecific,
  };
  Code code;
  std::string message;
  std::string method;  // empty when not method-scoped
  int instr = -1;      // body index when instruction-scoped
};

std::string to_string(const Diagnostic& d);

// Well-formedness: entry method present, all types declared, registers
// consecutive with backward references only, originals non-empty and
// direct-call-free and inferable at their declared signatures, unique
// (name, signature) keys, instances concrete and keyed to the most
// specific original. Also rejects stubs and undeclared dispatch callees.
// Pure; one diagnostic per violation.
std::vector<Diagnostic> validate(const TypeTable& tt, const MethodTable& mt);

}  // namespace jules
