// Shared test fixtures. Expected values in comments were derived by hand
// before the implementation existed and are frozen here; tests must not
// recompute them with the code under test.
#pragma once

#include <string>
#include <vector>

#include "jules/ir.hpp"

namespace fixtures {

using namespace jules;

// Canonical example: a pair type with accessors and a method that is
// unstable at its declared signature but stable once specialized.
//
//   type Pt(Int, Int) <: APt
//   method x(Pt)  { %1 = field %0 0 }
//   method y(Pt)  { %1 = field %0 1 }
//   method f(APt) { %1 = const 1
//                   %2 = if %1 call x(%0) else %1 }
//   method main() { %0 = const 1
//                   %1 = const 2
//                   %2 = new Pt(%0, %1)
//                   %3 = const 1
//                   %4 = if %3 call f(%2) else %3 }
inline const char* pt_text() {
  return R"(type Pt(Int, Int) <: APt

method x(Pt) {
  %1 = field %0 0
}

method y(Pt) {
  %1 = field %0 1
}

method f(APt) {
  %1 = const 1
  %2 = if %1 call x(%0) else %1
}

method main() {
  %0 = const 1
  %1 = const 2
  %2 = new Pt(%0, %1)
  %3 = const 1
  %4 = if %3 call f(%2) else %3
}
)";
}

inline Type apt() { return Type::abstract_named("APt"); }
inline Type pt() { return Type::concrete_named("Pt"); }

inline TypeTable pt_types() {
  TypeTable t;
  t.add(TypeDecl{"Pt", {Type::Int(), Type::Int()}, apt()});
  return t;
}

inline Method make_original(std::string name, Signature sig,
                            std::vector<Instruction> body) {
  Method m;
  m.name = std::move(name);
  m.param_types = sig;
  m.origin_signature = std::move(sig);
  m.body = make_body(std::move(body));
  return m;
}

inline MethodTable pt_methods() {
  MethodTable t;
  t.add(make_original("x", {pt()}, {GetField{1, 0, 0}}));
  t.add(make_original("y", {pt()}, {GetField{1, 0, 1}}));
  t.add(make_original("f", {apt()},
                      {AssignConst{1, 1},
                       DispatchCall{2, 1, "x", {0}, 1}}));
  t.add(make_original("main", {},
                      {AssignConst{0, 1},
                       AssignConst{1, 2},
                       New{2, pt(), {0, 1}},
                       AssignConst{3, 1},
                       DispatchCall{4, 3, "f", {2}, 3}}));
  return t;
}

// Frozen hand-derived facts about the Pt example:
//   run main, dispatch semantics: Finished, final env [1, 1], 12 steps
//     (entry disp; main const,const,new,const,disp; f const,disp;
//      x field; ret x->f; ret f->main; ret main->entry frame, which
//      delivers the final value into the entry environment)
//   infer f at [Pt]  -> [Pt, Int, Int]
//   infer f at [APt] -> [APt, Int, Any]
//   jit f at [Pt]    -> instance body [const 1, invoke x[Pt](%0) else %1],
//                       origin (APt)
//   census after jit run: 1 instance, stable 1.0, grounded 1.0
inline constexpr std::uint64_t kPtMainSteps = 12;

// Pt example extended with a second concrete child of APt that has no
// x accessor: calling f with a Qt errs at runtime, and classification of
// f at [Qt] types the call Any (dispatch on x undefined at [Qt]).
inline TypeTable ptqt_types() {
  TypeTable t = pt_types();
  t.add(TypeDecl{"Qt", {Type::Int()}, apt()});
  return t;
}

inline Type qt() { return Type::concrete_named("Qt"); }

// Same method table, but main builds a Qt: the f call errs inside f when
// x is dispatched on [Qt] (no applicable method).
inline MethodTable ptqt_methods_erring() {
  MethodTable t;
  t.add(make_original("x", {pt()}, {GetField{1, 0, 0}}));
  t.add(make_original("f", {apt()},
                      {AssignConst{1, 1},
                       DispatchCall{2, 1, "x", {0}, 1}}));
  t.add(make_original("main", {},
                      {AssignConst{0, 7},
                       New{1, qt(), {0}},
                       AssignConst{2, 1},
                       DispatchCall{3, 2, "f", {1}, 2}}));
  return t;
}

// Stability flavors, encoded as in the classic one-branch examples.
//   type A() <: S      type B() <: S
//   method mkb()  { %0 = new B() }
//   method one()  { %0 = const 1 }
//   method f0(Int) { %1 = new A()
//                    %2 = if %0 call mkb() else %1 }   return S: unstable
//   method f1(Int) { %1 = const 0
//                    %2 = if %0 call one() else %1 }   return Int: stable
inline Type s_abs() { return Type::abstract_named("S"); }
inline Type a_con() { return Type::concrete_named("A"); }
inline Type b_con() { return Type::concrete_named("B"); }

inline TypeTable flavors_types() {
  TypeTable t;
  t.add(TypeDecl{"A", {}, s_abs()});
  t.add(TypeDecl{"B", {}, s_abs()});
  return t;
}

inline MethodTable flavors_methods() {
  MethodTable t;
  t.add(make_original("mkb", {}, {New{0, b_con(), {}}}));
  t.add(make_original("one", {}, {AssignConst{0, 1}}));
  t.add(make_original("f0", {Type::Int()},
                      {New{1, a_con(), {}},
                       DispatchCall{2, 0, "mkb", {}, 1}}));
  t.add(make_original("f1", {Type::Int()},
                      {AssignConst{1, 0},
                       DispatchCall{2, 0, "one", {}, 1}}));
  t.add(make_original("main", {},
                      {AssignConst{0, 1},
                       DispatchCall{1, 0, "f0", {0}, 0},
                       DispatchCall{2, 0, "f1", {0}, 0}}));
  return t;
}

// Ambiguous pair: g(Int, Any) and g(Any, Int) are both applicable to
// (Int, Int) and incomparable, so dispatch is undefined (ambiguity).
inline MethodTable ambiguous_methods() {
  MethodTable t;
  t.add(make_original("g", {Type::Int(), Type::Any()}, {AssignConst{2, 1}}));
  t.add(make_original("g", {Type::Any(), Type::Int()}, {AssignConst{2, 2}}));
  t.add(make_original("main", {},
                      {AssignConst{0, 1},
                       AssignConst{1, 2},
                       DispatchCall{2, 0, "g", {0, 1}, 1}}));
  return t;
}

// Mutual recursion through abstract signatures; guards are const 0 so runs
// terminate, but compilation of m at [Int] must still produce instances for
// both m and n, each direct-calling the other (the stub breaks the cycle).
inline MethodTable mutual_methods() {
  MethodTable t;
  t.add(make_original("m", {Type::Any()},
                      {AssignConst{1, 0},
                       DispatchCall{2, 1, "n", {0}, 1}}));
  t.add(make_original("n", {Type::Any()},
                      {AssignConst{1, 0},
                       DispatchCall{2, 1, "m", {0}, 1}}));
  t.add(make_original("main", {},
                      {AssignConst{0, 5},
                       AssignConst{1, 1},
                       DispatchCall{2, 1, "m", {0}, 1}}));
  return t;
}

// Self-recursion with a nonzero guard: never terminates, exhausts any fuel.
inline MethodTable looping_methods() {
  MethodTable t;
  t.add(make_original("spin", {Type::Int()},
                      {AssignConst{1, 1},
                       DispatchCall{2, 1, "spin", {0}, 1}}));
  t.add(make_original("main", {},
                      {AssignConst{0, 1},
                       DispatchCall{1, 0, "spin", {0}, 0}}));
  return t;
}

}  // namespace fixtures
