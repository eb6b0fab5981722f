// Text format round-trips, parser totality and error reporting, trace
// lines, and the frozen JSON shapes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "jules/analysis.hpp"
#include "jules/fuzz.hpp"
#include "jules/infer.hpp"
#include "jules/jit.hpp"
#include "jules/textio.hpp"

using namespace jules;

TEST_CASE("parsing the pair example reproduces the fixtures") {
  ParseResult pr = parse_program(fixtures::pt_text());
  REQUIRE(pr.ok);
  CHECK(pr.errors.empty());
  CHECK(pr.types == fixtures::pt_types());
  CHECK(pr.methods == fixtures::pt_methods());
}

TEST_CASE("printing is canonical and frozen") {
  std::string text =
      print_program(fixtures::pt_types(), fixtures::pt_methods());
  CHECK(text ==
        "type Pt(Int, Int) <: APt\n"
        "\n"
        "method f(APt) {\n"
        "  %1 = const 1\n"
        "  %2 = if %1 call x(%0) else %1\n"
        "}\n"
        "\n"
        "method main() {\n"
        "  %0 = const 1\n"
        "  %1 = const 2\n"
        "  %2 = new Pt(%0, %1)\n"
        "  %3 = const 1\n"
        "  %4 = if %3 call f(%2) else %3\n"
        "}\n"
        "\n"
        "method x(Pt) {\n"
        "  %1 = field %0 0\n"
        "}\n"
        "\n"
        "method y(Pt) {\n"
        "  %1 = field %0 1\n"
        "}\n");
}

TEST_CASE("print then parse is the identity on source tables") {
  for (auto [tt, mt] :
       {std::pair{fixtures::pt_types(), fixtures::pt_methods()},
        std::pair{fixtures::ptqt_types(), fixtures::ptqt_methods_erring()},
        std::pair{fixtures::flavors_types(), fixtures::flavors_methods()},
        std::pair{TypeTable{}, fixtures::ambiguous_methods()},
        std::pair{TypeTable{}, fixtures::mutual_methods()},
        std::pair{TypeTable{}, fixtures::looping_methods()}}) {
    std::string text = print_program(tt, mt);
    ParseResult pr = parse_program(text, ParseMode::Source);
    REQUIRE(pr.ok);
    CHECK(pr.types == tt);
    CHECK(pr.methods == mt);
    // Printing the reparse is a fixpoint.
    CHECK(print_program(pr.types, pr.methods) == text);
  }
}

TEST_CASE("compiled tables round-trip with origin annotations") {
  TypeTable tt = fixtures::pt_types();
  MethodTable compiled =
      jit_compile(tt, fixtures::pt_methods(), "f", {fixtures::pt()});
  std::string text = print_program(tt, compiled);
  CHECK(text.find("method f(Pt) { # origin: f(APt)") != std::string::npos);
  CHECK(text.find("%2 = if %1 invoke x[Pt](%0) else %1") !=
        std::string::npos);

  ParseResult pr = parse_program(text, ParseMode::Compiled);
  REQUIRE(pr.ok);
  CHECK(pr.types == tt);
  CHECK(pr.methods == compiled);
  CHECK(print_program(pr.types, pr.methods) == text);

  // Mutual instances round-trip too.
  MethodTable mcomp =
      jit_compile(TypeTable{}, fixtures::mutual_methods(), "m", {Type::Int()});
  std::string mtext = print_program(TypeTable{}, mcomp);
  ParseResult mpr = parse_program(mtext, ParseMode::Compiled);
  REQUIRE(mpr.ok);
  CHECK(mpr.methods == mcomp);
}

TEST_CASE("source mode rejects compiled-only syntax") {
  TypeTable tt = fixtures::pt_types();
  MethodTable compiled =
      jit_compile(tt, fixtures::pt_methods(), "f", {fixtures::pt()});
  std::string text = print_program(tt, compiled);
  ParseResult pr = parse_program(text, ParseMode::Source);
  CHECK_FALSE(pr.ok);
  bool saw_origin = false;
  for (const ParseErrorInfo& e : pr.errors) {
    if (e.message.find("origin annotation") != std::string::npos) {
      saw_origin = true;
    }
  }
  CHECK(saw_origin);

  // A direct call with no origin annotation in front of it.
  ParseResult ipr = parse_program(
      "method main() {\n"
      "  %0 = const 1\n"
      "  %1 = if %0 invoke x[Pt](%0) else %0\n"
      "}\n",
      ParseMode::Source);
  CHECK_FALSE(ipr.ok);
  bool saw_invoke = false;
  for (const ParseErrorInfo& e : ipr.errors) {
    if (e.message.find("invoke") != std::string::npos) saw_invoke = true;
  }
  CHECK(saw_invoke);
}

TEST_CASE("an empty input parses to an empty program") {
  ParseResult pr = parse_program("");
  CHECK(pr.ok);
  CHECK(pr.types.entries().empty());
  CHECK(pr.methods.size() == 0);
}

TEST_CASE("comments and blank lines are ignored") {
  ParseResult pr = parse_program(
      "# leading comment\n"
      "\n"
      "method main() { # trailing comment\n"
      "  # a full-line comment\n"
      "  %0 = const 1\n"
      "}\n");
  REQUIRE(pr.ok);
  REQUIRE(pr.methods.size() == 1);
  CHECK(pr.methods.lookup_exact("main", {}) != nullptr);
}

TEST_CASE("parse errors carry positions and recovery finds more errors") {
  ParseResult pr = parse_program(
      "type pt(Int) <: A\n"
      "method main() {\n"
      "  %0 = const 1\n"
      "}\n"
      "method f(Zz, {\n"
      "  %1 = konst 2\n"
      "}\n");
  CHECK_FALSE(pr.ok);
  CHECK(pr.errors.size() >= 2);
  for (const ParseErrorInfo& e : pr.errors) {
    CHECK(e.line >= 1);
    CHECK(e.col >= 1);
  }
  CHECK(to_string(pr.errors[0]).find("capitalized") != std::string::npos);
  // The well-formed method in the middle still parsed.
  CHECK(pr.methods.lookup_exact("main", {}) != nullptr);
}

TEST_CASE("specific parse rejections") {
  // Concrete supertype.
  ParseResult pr = parse_program(
      "type A(Int) <: Any\n"
      "type B(Int) <: A\n"
      "method main() {\n"
      "  %0 = const 1\n"
      "}\n");
  CHECK_FALSE(pr.ok);
  CHECK(to_string(pr.errors[0]).find("must be abstract") !=
        std::string::npos);

  // Undeclared struct type in new.
  pr = parse_program(
      "method main() {\n"
      "  %0 = new Zz()\n"
      "}\n");
  CHECK_FALSE(pr.ok);
  CHECK(to_string(pr.errors[0]).find("not a declared struct type") !=
        std::string::npos);

  // Unterminated body.
  pr = parse_program(
      "method main() {\n"
      "  %0 = const 1\n");
  CHECK_FALSE(pr.ok);
  CHECK(to_string(pr.errors[0]).find("unterminated") != std::string::npos);

  // Lowercase type name in a signature.
  pr = parse_program(
      "method main(int) {\n"
      "  %1 = const 1\n"
      "}\n");
  CHECK_FALSE(pr.ok);

  // Missing register prefix.
  pr = parse_program(
      "method main() {\n"
      "  0 = const 1\n"
      "}\n");
  CHECK_FALSE(pr.ok);
}

TEST_CASE("the parser is total on arbitrary bytes") {
  std::mt19937_64 rng(20240817);
  for (int iter = 0; iter < 2000; ++iter) {
    std::string junk;
    std::size_t len = rng() % 160;
    for (std::size_t i = 0; i < len; ++i) {
      junk.push_back(static_cast<char>(rng() % 256));
    }
    ParseResult pr = parse_program(junk, iter % 2 == 0 ? ParseMode::Source
                                                       : ParseMode::Compiled);
    // No crash, and failures come with positioned errors.
    if (!pr.ok) CHECK(!pr.errors.empty());
  }
}

TEST_CASE("trace lines have the frozen shape") {
  CHECK(trace_line(3, "prim", 1, "%0=1") == "step 3 prim depth=1 %0=1");
  CHECK(trace_line(6, "disp", 2, "%4=call f[Pt]") ==
        "step 6 disp depth=2 %4=call f[Pt]");
  CHECK(trace_line(8, "direct", 3, "%2=invoke x[Pt]") ==
        "step 8 direct depth=3 %2=invoke x[Pt]");
}

TEST_CASE("stability reports serialize to the frozen JSON") {
  TypeTable tt = fixtures::pt_types();
  MethodTable mt = fixtures::pt_methods();
  StabilityReport r = classify(tt, mt, "f", {fixtures::pt()});
  CHECK(to_json(r) ==
        R"({"method":"f","sig":["Pt"],"ok":true,"stable":true,)"
        R"("grounded":true,"return_type":"Int","param_count":1,)"
        R"("register_types":["Pt","Int","Int"]})");

  StabilityReport broad = classify(tt, mt, "f", {fixtures::apt()});
  CHECK(to_json(broad) ==
        R"({"method":"f","sig":["APt"],"ok":true,"stable":false,)"
        R"("grounded":false,"return_type":"Any","param_count":1,)"
        R"("register_types":["APt","Int","Any"]})");

  TypeTable qtt = fixtures::ptqt_types();
  StabilityReport bad =
      classify(qtt, fixtures::ptqt_methods_erring(), "x", {fixtures::qt()});
  CHECK(to_json(bad) ==
        R"({"method":"x","sig":["Qt"],"ok":false,)"
        R"json("error":"no inferable method for x(Qt)"})json");
}

TEST_CASE("census reports serialize to the frozen JSON") {
  TypeTable tt = fixtures::pt_types();
  MethodTable compiled =
      jit_compile(tt, fixtures::pt_methods(), "f", {fixtures::pt()});
  CHECK(to_json(census(tt, compiled)) ==
        R"({"instance_count":1,"failed_count":0,"zero_denominator":false,)"
        R"("stable_fraction":1.0,"grounded_fraction":1.0,"instances":)"
        R"([{"method":"f","sig":["Pt"],"ok":true,"stable":true,)"
        R"("grounded":true,"return_type":"Int","param_count":1,)"
        R"("register_types":["Pt","Int","Int"]}]})");
}

TEST_CASE("diff verdicts serialize to the frozen JSON") {
  DiffVerdict match;
  match.match = true;
  match.dispatch_outcome.steps = 12;
  CHECK(to_json(match) == R"({"verdict":"match","steps":12})");

  DiffVerdict mis;
  mis.match = false;
  mis.seed = 7;
  mis.dispatch_outcome = {RunOutcome::Kind::Finished, 12, ""};
  mis.jit_outcome = {RunOutcome::Kind::Erred, 3, "boom"};
  mis.property_failures = {"outcome: dispatch finished vs jit erred"};
  CHECK(to_json(mis) ==
        R"({"verdict":"mismatch","seed":7,)"
        R"("dispatch":{"outcome":"finished","steps":12},)"
        R"("jit":{"outcome":"erred","steps":3,"detail":"boom"},)"
        R"("step_counts":[12,3],)"
        R"("property_failures":["outcome: dispatch finished vs jit erred"]})");
}

TEST_CASE("typings serialize to the frozen JSON") {
  TypeTable tt = fixtures::pt_types();
  MethodTable orig = originals(fixtures::pt_methods());
  Inferred inf = infer_method(tt, orig, "f", {fixtures::pt()});
  CHECK(typing_to_json("f", {fixtures::pt()}, inf) ==
        R"({"method":"f","sig":["Pt"],"ok":true,"param_count":1,)"
        R"("register_types":["Pt","Int","Int"],"return_type":"Int"})");

  Inferred bad = infer_method(tt, orig, "f", {Type::Any()});
  CHECK(typing_to_json("f", {Type::Any()}, bad) ==
        R"({"method":"f","sig":["Any"],"ok":false,)"
        R"json("error":"no inferable method for f(Any)"})json");
}
