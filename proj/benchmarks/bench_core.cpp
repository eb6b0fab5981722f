#include <benchmark/benchmark.h>

#include <cstdlib>

#include "jules/fuzz.hpp"
#include "jules/infer.hpp"
#include "jules/interp.hpp"
#include "jules/jit.hpp"
#include "jules/textio.hpp"

namespace {

using namespace jules;

const char kPtProgram[] = R"(type Pt(Int, Int) <: APt

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

struct Loaded {
  TypeTable types;
  MethodTable methods;
};

const Loaded& pt_program() {
  static const Loaded l = [] {
    ParseResult pr = parse_program(kPtProgram);
    if (!pr.ok) std::abort();
    return Loaded{pr.types, pr.methods};
  }();
  return l;
}

void BM_Parse(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_program(kPtProgram));
  }
}
BENCHMARK(BM_Parse);

void BM_Print(benchmark::State& state) {
  const Loaded& l = pt_program();
  for (auto _ : state) {
    benchmark::DoNotOptimize(print_program(l.types, l.methods));
  }
}
BENCHMARK(BM_Print);

void BM_Validate(benchmark::State& state) {
  const Loaded& l = pt_program();
  for (auto _ : state) {
    benchmark::DoNotOptimize(validate(l.types, l.methods));
  }
}
BENCHMARK(BM_Validate);

void BM_InferConcrete(benchmark::State& state) {
  const Loaded& l = pt_program();
  Signature sig{Type::concrete_named("Pt")};
  for (auto _ : state) {
    benchmark::DoNotOptimize(infer_method(l.types, l.methods, "f", sig));
  }
}
BENCHMARK(BM_InferConcrete);

void BM_RunDispatch(benchmark::State& state) {
  const Loaded& l = pt_program();
  RunOptions opts;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(l.types, l.methods, EntryPoint{}, opts));
  }
}
BENCHMARK(BM_RunDispatch);

void BM_RunJit(benchmark::State& state) {
  const Loaded& l = pt_program();
  RunOptions opts;
  opts.semantics = Semantics::Jit;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(l.types, l.methods, EntryPoint{}, opts));
  }
}
BENCHMARK(BM_RunJit);

void BM_JitCompile(benchmark::State& state) {
  const Loaded& l = pt_program();
  Signature sig{Type::concrete_named("Pt")};
  for (auto _ : state) {
    benchmark::DoNotOptimize(jit_compile(l.types, l.methods, "f", sig));
  }
}
BENCHMARK(BM_JitCompile);

void BM_Generate(benchmark::State& state) {
  GenConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gen_program(cfg));
  }
}
BENCHMARK(BM_Generate)->Arg(1)->Arg(7)->Arg(42);

void BM_DiffSeed(benchmark::State& state) {
  GenConfig cfg;
  cfg.seed = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(seed_report(cfg, 2000, false));
  }
}
BENCHMARK(BM_DiffSeed)->Arg(1)->Arg(7);

}  // namespace

BENCHMARK_MAIN();
