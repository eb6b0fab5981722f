// The specializing compiler: frozen instances, idempotence, recursion
// through stubs, preconditions, and the single-instruction translation.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <stdexcept>

#include "doctest.h"
#include "fixtures.hpp"
#include "jules/analysis.hpp"
#include "jules/jit.hpp"
#include "jules/typesys.hpp"

using namespace jules;

namespace {

bool stub_free(const MethodTable& mt) {
  for (const Method& m : mt.methods()) {
    if (m.is_stub()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("compiling the pair example produces the frozen instance") {
  TypeTable tt = fixtures::pt_types();
  MethodTable mt = fixtures::pt_methods();
  MethodTable compiled = jit_compile(tt, mt, "f", {fixtures::pt()});

  CHECK(mt.size() == 4);  // input untouched
  CHECK(compiled.size() == 5);
  CHECK(stub_free(compiled));
  CHECK(originals(compiled) == mt);

  const Method* inst = compiled.lookup_exact("f", {fixtures::pt()});
  REQUIRE(inst != nullptr);
  CHECK(inst->is_instance());
  CHECK(inst->origin_signature == Signature{fixtures::apt()});
  std::vector<Instruction> want = {
      AssignConst{1, 1}, DirectCall{2, 1, "x", {fixtures::pt()}, {0}, 1}};
  CHECK(*inst->body == want);
  // The callee already had a concrete original; no x instance appears.
  CHECK(compiled.methods_named("x")->size() == 1);
}

TEST_CASE("compilation is idempotent and existing keys are no-ops") {
  TypeTable tt = fixtures::pt_types();
  MethodTable mt = fixtures::pt_methods();
  MethodTable once = jit_compile(tt, mt, "f", {fixtures::pt()});
  MethodTable twice = jit_compile(tt, once, "f", {fixtures::pt()});
  CHECK(once == twice);

  // A concrete original is already its own entry.
  MethodTable same = jit_compile(tt, mt, "main", {});
  CHECK(same == mt);
  MethodTable same_x = jit_compile(tt, mt, "x", {fixtures::pt()});
  CHECK(same_x == mt);
}

TEST_CASE("compilation preconditions throw") {
  TypeTable tt = fixtures::ptqt_types();
  MethodTable mt = fixtures::ptqt_methods_erring();
  CHECK_THROWS_AS(jit_compile(tt, mt, "f", {fixtures::apt()}),
                  std::invalid_argument);
  // Dispatch undefined at the requested signature.
  CHECK_THROWS_AS(jit_compile(tt, mt, "x", {fixtures::qt()}),
                  std::invalid_argument);
  CHECK_THROWS_AS(jit_compile(tt, mt, "absent", {Type::Int()}),
                  std::invalid_argument);
  MethodTable amb = fixtures::ambiguous_methods();
  CHECK_THROWS_AS(jit_compile(TypeTable{}, amb, "g",
                              {Type::Int(), Type::Int()}),
                  std::invalid_argument);
}

TEST_CASE("mutual recursion compiles both instances through a stub") {
  MethodTable mt = fixtures::mutual_methods();
  MethodTable compiled = jit_compile(TypeTable{}, mt, "m", {Type::Int()});
  CHECK(stub_free(compiled));
  CHECK(originals(compiled) == mt);
  CHECK(compiled.size() == 5);

  const Method* mi = compiled.lookup_exact("m", {Type::Int()});
  const Method* ni = compiled.lookup_exact("n", {Type::Int()});
  REQUIRE(mi != nullptr);
  REQUIRE(ni != nullptr);
  std::vector<Instruction> m_want = {
      AssignConst{1, 0}, DirectCall{2, 1, "n", {Type::Int()}, {0}, 1}};
  std::vector<Instruction> n_want = {
      AssignConst{1, 0}, DirectCall{2, 1, "m", {Type::Int()}, {0}, 1}};
  CHECK(*mi->body == m_want);
  CHECK(*ni->body == n_want);
  CHECK(mi->origin_signature == Signature{Type::Any()});
  CHECK(ni->origin_signature == Signature{Type::Any()});
}

TEST_CASE("self recursion compiles to a self-referential instance") {
  MethodTable mt;
  mt.add(fixtures::make_original(
      "srec", {Type::Any()},
      {AssignConst{1, 1}, DispatchCall{2, 1, "srec", {0}, 1}}));
  mt.add(fixtures::make_original(
      "main", {}, {AssignConst{0, 1}, DispatchCall{1, 0, "srec", {0}, 0}}));
  MethodTable compiled = jit_compile(TypeTable{}, mt, "srec", {Type::Int()});
  CHECK(stub_free(compiled));
  const Method* inst = compiled.lookup_exact("srec", {Type::Int()});
  REQUIRE(inst != nullptr);
  std::vector<Instruction> want = {
      AssignConst{1, 1}, DirectCall{2, 1, "srec", {Type::Int()}, {0}, 1}};
  CHECK(*inst->body == want);
}

TEST_CASE("a concretely-typed call with undefined dispatch stays dispatched") {
  // h exists only at Pt, so h at [Qt] has no translation; the instruction
  // passes through and the instance fails maximal devirtualization.
  TypeTable tt = fixtures::ptqt_types();
  MethodTable mt;
  mt.add(fixtures::make_original("h", {fixtures::pt()}, {GetField{1, 0, 0}}));
  mt.add(fixtures::make_original(
      "g", {Type::Any()},
      {AssignConst{1, 1}, DispatchCall{2, 1, "h", {0}, 1}}));
  mt.add(fixtures::make_original(
      "main", {},
      {AssignConst{0, 7}, New{1, fixtures::qt(), {0}}, AssignConst{2, 1},
       DispatchCall{3, 2, "g", {1}, 2}}));
  CHECK(validate(tt, mt).empty());

  MethodTable compiled = jit_compile(tt, mt, "g", {fixtures::qt()});
  CHECK(stub_free(compiled));
  const Method* inst = compiled.lookup_exact("g", {fixtures::qt()});
  REQUIRE(inst != nullptr);
  std::vector<Instruction> want = {AssignConst{1, 1},
                                   DispatchCall{2, 1, "h", {0}, 1}};
  CHECK(*inst->body == want);
  CHECK_FALSE(fully_devirtualized(*inst));
  CHECK_FALSE(max_devirt_table(tt, compiled).ok);
  // The optimization relation still holds: the instruction is unchanged.
  CHECK(table_optimizes(tt, mt, compiled).ok);
}

TEST_CASE("nested compilation reaches transitive callees") {
  // outer must compile inner at [Pt] during its own compilation.
  TypeTable tt = fixtures::pt_types();
  MethodTable mt;
  mt.add(fixtures::make_original("x", {fixtures::pt()}, {GetField{1, 0, 0}}));
  mt.add(fixtures::make_original(
      "inner", {fixtures::apt()},
      {AssignConst{1, 1}, DispatchCall{2, 1, "x", {0}, 1}}));
  mt.add(fixtures::make_original(
      "outer", {fixtures::apt()},
      {AssignConst{1, 1}, DispatchCall{2, 1, "inner", {0}, 1}}));
  mt.add(fixtures::make_original(
      "main", {},
      {AssignConst{0, 1}, AssignConst{1, 2}, New{2, fixtures::pt(), {0, 1}},
       AssignConst{3, 1}, DispatchCall{4, 3, "outer", {2}, 3}}));
  CHECK(validate(tt, mt).empty());

  MethodTable compiled = jit_compile(tt, mt, "outer", {fixtures::pt()});
  CHECK(stub_free(compiled));
  CHECK(compiled.size() == 6);
  const Method* outer = compiled.lookup_exact("outer", {fixtures::pt()});
  const Method* inner = compiled.lookup_exact("inner", {fixtures::pt()});
  REQUIRE(outer != nullptr);
  REQUIRE(inner != nullptr);
  std::vector<Instruction> outer_want = {
      AssignConst{1, 1},
      DirectCall{2, 1, "inner", {fixtures::pt()}, {0}, 1}};
  std::vector<Instruction> inner_want = {
      AssignConst{1, 1}, DirectCall{2, 1, "x", {fixtures::pt()}, {0}, 1}};
  CHECK(*outer->body == outer_want);
  CHECK(*inner->body == inner_want);
  CHECK(max_devirt_table(tt, compiled).ok);
}

TEST_CASE("translate_instr leaves non-calls and abstract calls unchanged") {
  TypeTable tt = fixtures::pt_types();
  MethodTable mt = fixtures::pt_methods();

  RegisterTyping typing;
  typing.param_count = 1;
  typing.types = {fixtures::apt(), Type::Int()};

  Instruction non_call = AssignConst{1, 1};
  auto [same, table_same] = translate_instr(tt, typing, non_call, mt);
  CHECK(same == non_call);
  CHECK(table_same == mt);

  // The argument register is abstractly typed.
  Instruction abs_call = DispatchCall{2, 1, "x", {0}, 1};
  auto [unchanged, table2] = translate_instr(tt, typing, abs_call, mt);
  CHECK(unchanged == abs_call);
  CHECK(table2 == mt);
}

TEST_CASE("translate_instr rewrites concrete calls") {
  TypeTable tt = fixtures::pt_types();
  MethodTable mt = fixtures::pt_methods();

  RegisterTyping typing;
  typing.param_count = 1;
  typing.types = {fixtures::pt(), Type::Int()};

  // Target entry already present: rewrite, table unchanged.
  Instruction call_x = DispatchCall{2, 1, "x", {0}, 1};
  auto [direct_x, table_x] = translate_instr(tt, typing, call_x, mt);
  CHECK(direct_x ==
        Instruction{DirectCall{2, 1, "x", {fixtures::pt()}, {0}, 1}});
  CHECK(table_x == mt);

  // Target entry missing: rewrite and extend with the compiled callee.
  Instruction call_f = DispatchCall{2, 1, "f", {0}, 1};
  auto [direct_f, table_f] = translate_instr(tt, typing, call_f, mt);
  CHECK(direct_f ==
        Instruction{DirectCall{2, 1, "f", {fixtures::pt()}, {0}, 1}});
  CHECK(table_f.size() == 5);
  CHECK(table_f.lookup_exact("f", {fixtures::pt()}) != nullptr);
}

TEST_CASE("translate_instr keeps undefined-dispatch calls") {
  TypeTable tt = fixtures::ptqt_types();
  MethodTable mt = fixtures::ptqt_methods_erring();

  RegisterTyping typing;
  typing.param_count = 1;
  typing.types = {fixtures::qt(), Type::Int()};

  Instruction call_x = DispatchCall{2, 1, "x", {0}, 1};
  auto [unchanged, table] = translate_instr(tt, typing, call_x, mt);
  CHECK(unchanged == call_x);
  CHECK(table == mt);
}
