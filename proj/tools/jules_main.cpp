// Command line front end: validation, execution, inference, analysis,
// compilation, instance statistics, and differential testing.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "jules/analysis.hpp"
#include "jules/fuzz.hpp"
#include "jules/infer.hpp"
#include "jules/interp.hpp"
#include "jules/ir.hpp"
#include "jules/jit.hpp"
#include "jules/textio.hpp"
#include "jules/typesys.hpp"

namespace {

using namespace jules;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kErred = 2;
constexpr int kWrong = 3;
constexpr int kFuel = 4;
constexpr int kMismatch = 5;
constexpr int kUsage = 64;
constexpr int kNoInput = 66;

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

// Parses the file; returns kOk, kNoInput, or kInvalid (after printing).
int load(const std::string& path, bool compiled, ParseResult& pr) {
  std::string text;
  if (!read_file(path, text)) {
    std::cerr << "cannot read " << path << "\n";
    return kNoInput;
  }
  pr = parse_program(text,
                     compiled ? ParseMode::Compiled : ParseMode::Source);
  if (!pr.ok) {
    for (const ParseErrorInfo& e : pr.errors) {
      std::cerr << path << ":" << to_string(e) << "\n";
    }
    return kInvalid;
  }
  return kOk;
}

// Parse followed by validate; diagnostics go to stderr.
int load_valid(const std::string& path, bool compiled, ParseResult& pr) {
  int rc = load(path, compiled, pr);
  if (rc != kOk) return rc;
  std::vector<Diagnostic> diags = validate(pr.types, pr.methods);
  if (!diags.empty()) {
    for (const Diagnostic& d : diags) {
      std::cerr << path << ": " << to_string(d) << "\n";
    }
    return kInvalid;
  }
  return kOk;
}

bool resolve_type_name(const TypeTable& tt, std::string name, Type& out) {
  while (!name.empty() && name.front() == ' ') name.erase(name.begin());
  while (!name.empty() && name.back() == ' ') name.pop_back();
  if (name.empty() || !std::isupper(static_cast<unsigned char>(name[0]))) {
    std::cerr << "bad type name '" << name << "'\n";
    return false;
  }
  if (name == "Int") {
    out = Type::Int();
  } else if (tt.declared_concrete(name)) {
    out = Type::concrete_named(name);
  } else {
    out = Type::abstract_named(name);
  }
  return true;
}

bool resolve_sig(const TypeTable& tt, const std::string& text,
                 Signature& out) {
  std::string trimmed = text;
  std::size_t a = trimmed.find_first_not_of(' ');
  if (a == std::string::npos) return true;  // empty signature
  std::size_t start = 0;
  while (start <= trimmed.size()) {
    std::size_t comma = trimmed.find(',', start);
    std::string piece =
        trimmed.substr(start, comma == std::string::npos ? std::string::npos
                                                         : comma - start);
    Type t;
    if (!resolve_type_name(tt, piece, t)) return false;
    out.push_back(std::move(t));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return true;
}

// `name` or `name(T1,T2)`.
bool parse_entry_spec(const TypeTable& tt, const std::string& spec,
                      std::string& name, Signature& sig) {
  std::size_t open = spec.find('(');
  if (open == std::string::npos) {
    name = spec;
    return true;
  }
  if (spec.back() != ')') {
    std::cerr << "bad entry spec '" << spec << "'\n";
    return false;
  }
  name = spec.substr(0, open);
  return resolve_sig(tt, spec.substr(open + 1, spec.size() - open - 2), sig);
}

// Synthesizes a value of (a concrete subtype of) the requested type:
// integers become 1, structs are built from synthesized fields, abstract
// types pick their first declared concrete subtype.
Value synth_value(const TypeTable& tt, const Type& t, unsigned depth) {
  if (depth > 8) return Value::int_val(0);
  if (t.is_int()) return Value::int_val(1);
  if (t.concrete()) {
    const TypeDecl* d = tt.find(t.name);
    if (!d) return Value::int_val(0);
    std::vector<Value> fields;
    for (const Type& ft : d->field_types) {
      fields.push_back(synth_value(tt, ft, depth + 1));
    }
    return Value::struct_val(t, std::move(fields));
  }
  if (!t.is_any()) {
    for (const TypeDecl& d : tt.entries()) {
      if (d.supertype == t) {
        return synth_value(tt, Type::concrete_named(d.name), depth + 1);
      }
    }
  }
  return Value::int_val(1);
}

struct FileArgs {
  std::string path;
  bool compiled = false;
};

struct RunArgs {
  FileArgs file;
  std::string entry = "main";
  std::string semantics = "dispatch";
  std::uint64_t fuel = 100000;
  bool trace = false;
  bool check_soundness = false;
};

struct SigArgs {
  FileArgs file;
  std::string method;
  std::string sig;
  std::string out;
  bool all = false;
};

struct DiffArgs {
  std::uint64_t seed = 0;
  std::string seeds;  // "A..B" or "A:B"
  std::string out;    // directory for mismatch repro files
  std::uint64_t fuel = 10000;
  bool aot = false;
  bool do_shrink = false;
  unsigned jobs = 0;
  GenConfig cfg;
};

int cmd_check(const FileArgs& a) {
  ParseResult pr;
  return load_valid(a.path, a.compiled, pr);
}

int cmd_run(const RunArgs& a) {
  ParseResult pr;
  // No validation here: ill-formed programs run and get stuck as Wrong.
  int rc = load(a.file.path, a.file.compiled, pr);
  if (rc != kOk) return rc;

  std::string name;
  Signature sig;
  if (!parse_entry_spec(pr.types, a.entry, name, sig)) return kUsage;
  EntryPoint ep;
  ep.name = name;
  for (const Type& t : sig) ep.args.push_back(synth_value(pr.types, t, 0));

  RunOptions opts;
  opts.semantics =
      a.semantics == "jit" ? Semantics::Jit : Semantics::Dispatch;
  opts.fuel = a.fuel;
  opts.check_soundness = a.check_soundness;
  if (a.trace) opts.trace = &std::cout;
  RunOutcome out = run(pr.types, pr.methods, ep, opts);

  // Diagnostics never change the exit code; that stays a function of the
  // outcome class.
  for (const std::string& s : out.soundness_violations) {
    std::cerr << "soundness: " << s << "\n";
  }
  std::cout << "outcome: " << outcome_name(out.kind) << "\n";
  std::cout << "steps: " << out.steps << "\n";
  if (out.kind == RunOutcome::Kind::Finished) {
    std::cout << "result: " << value_to_string(out.final_env.back()) << "\n";
  }
  if (!out.detail.empty()) std::cout << "detail: " << out.detail << "\n";
  switch (out.kind) {
    case RunOutcome::Kind::Finished: return kOk;
    case RunOutcome::Kind::Erred: return kErred;
    case RunOutcome::Kind::Wrong: return kWrong;
    case RunOutcome::Kind::FuelExhausted: return kFuel;
  }
  return kWrong;
}

int cmd_infer(const SigArgs& a) {
  ParseResult pr;
  int rc = load_valid(a.file.path, a.file.compiled, pr);
  if (rc != kOk) return rc;
  Signature sig;
  if (!resolve_sig(pr.types, a.sig, sig)) return kUsage;
  MethodTable orig = originals(pr.methods);
  Inferred inf = infer_method(pr.types, orig, a.method, sig);
  std::cout << typing_to_json(a.method, sig, inf) << "\n";
  return kOk;
}

int cmd_analyze(const SigArgs& a) {
  ParseResult pr;
  int rc = load_valid(a.file.path, a.file.compiled, pr);
  if (rc != kOk) return rc;
  InferenceCache cache;
  if (!a.method.empty() && !a.all) {
    Signature sig;
    if (!resolve_sig(pr.types, a.sig, sig)) return kUsage;
    std::cout << to_json(classify(pr.types, pr.methods, a.method, sig,
                                  &cache))
              << "\n";
    return kOk;
  }
  for (const Method& m : pr.methods.methods()) {
    std::cout << to_json(classify(pr.types, pr.methods, m.name,
                                  m.param_types, &cache))
              << "\n";
  }
  return kOk;
}

int cmd_compile(const SigArgs& a) {
  ParseResult pr;
  int rc = load_valid(a.file.path, a.file.compiled, pr);
  if (rc != kOk) return rc;
  Signature sig;
  if (!resolve_sig(pr.types, a.sig, sig)) return kUsage;
  try {
    MethodTable compiled = jit_compile(pr.types, pr.methods, a.method, sig);
    std::string text = print_program(pr.types, compiled);
    if (a.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(a.out, std::ios::binary);
      if (!f) {
        std::cerr << "cannot write " << a.out << "\n";
        return kInvalid;
      }
      f << text;
    }
    return kOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "cannot compile " << a.method << "(" << to_string(sig)
              << "): " << e.what() << "\n";
    return kInvalid;
  }
}

int cmd_stats(const RunArgs& a) {
  ParseResult pr;
  int rc = load_valid(a.file.path, a.file.compiled, pr);
  if (rc != kOk) return rc;
  std::string name;
  Signature sig;
  if (!parse_entry_spec(pr.types, a.entry, name, sig)) return kUsage;
  EntryPoint ep;
  ep.name = name;
  for (const Type& t : sig) ep.args.push_back(synth_value(pr.types, t, 0));
  RunOptions opts;
  opts.semantics = Semantics::Jit;
  opts.fuel = a.fuel;
  RunOutcome out = run(pr.types, pr.methods, ep, opts);
  std::cerr << "run outcome: " << outcome_name(out.kind) << " after "
            << out.steps << " steps\n";
  std::cout << to_json(census(pr.types, out.final_table)) << "\n";
  return kOk;
}

int cmd_difftest(const DiffArgs& a) {
  std::uint64_t first = a.seed, last = a.seed;
  bool range = !a.seeds.empty();
  if (range) {
    std::size_t sep = a.seeds.find("..");
    std::size_t skip = 2;
    if (sep == std::string::npos) {
      sep = a.seeds.find(':');
      skip = 1;
    }
    if (sep == std::string::npos) {
      std::cerr << "--seeds expects A..B\n";
      return kUsage;
    }
    try {
      first = std::stoull(a.seeds.substr(0, sep));
      last = std::stoull(a.seeds.substr(sep + skip));
    } catch (const std::exception&) {
      std::cerr << "--seeds expects A..B\n";
      return kUsage;
    }
    if (last < first) {
      std::cerr << "--seeds expects A <= B\n";
      return kUsage;
    }
  }
  unsigned jobs = a.jobs;
  if (jobs == 0) {
    jobs = std::max(1u, std::thread::hardware_concurrency());
  }
  std::uint64_t mismatches = 0, checked = 0;
  run_seed_range(
      a.cfg, first, last, a.fuel, a.aot, jobs, [&](const SeedReport& r) {
        ++checked;
        bool bad = !r.diff.match || (a.aot && !r.aot.match);
        if (bad) ++mismatches;
        if (bad || !range) {
          std::cout << to_json(r.diff) << "\n";
          if (a.aot) std::cout << to_json(r.aot) << "\n";
        }
        if (bad) {
          std::string text =
              print_program(r.program.types, r.program.methods);
          std::cerr << text;
          if (!a.out.empty()) {
            std::string base =
                a.out + "/seed" + std::to_string(r.diff.seed);
            std::ofstream repro(base + ".jules", std::ios::binary);
            if (repro) repro << text;
            std::ofstream verdict(base + ".json", std::ios::binary);
            if (verdict) {
              verdict << to_json(!r.diff.match ? r.diff : r.aot) << "\n";
            }
            if (!repro || !verdict) {
              std::cerr << "cannot write repro under " << a.out << "\n";
            }
          }
        }
        if (bad && a.do_shrink) {
          EntryPoint entry;
          auto pred = [&](const TypeTable& t, const MethodTable& m) {
            return !diff_test(t, m, entry, a.fuel).match;
          };
          GenProgram small =
              shrink(r.program.types, r.program.methods, pred);
          std::cerr << "shrunk:\n"
                    << print_program(small.types, small.methods);
        }
      });
  if (range) {
    std::cout << "checked " << checked << " seeds, " << mismatches
              << " mismatches\n";
  }
  return mismatches ? kMismatch : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jules: a straight-line register machine with dynamic "
               "dispatch and a specializing compiler"};
  app.require_subcommand(1);

  FileArgs check_args;
  CLI::App* check = app.add_subcommand("check", "Parse and validate");
  check->add_option("file", check_args.path, "program file")->required();
  check->add_flag("--compiled", check_args.compiled,
                  "accept compiled tables (invoke, origin annotations)");

  RunArgs run_args;
  CLI::App* runc = app.add_subcommand("run", "Execute a program");
  runc->add_option("file", run_args.file.path, "program file")->required();
  runc->add_flag("--compiled", run_args.file.compiled,
                 "accept compiled tables");
  runc->add_option("--entry", run_args.entry,
                   "entry method, `name` or `name(T1,T2)`");
  runc->add_option("--semantics", run_args.semantics, "dispatch | jit")
      ->check(CLI::IsMember({"dispatch", "jit"}));
  runc->add_option("--fuel", run_args.fuel, "step budget");
  runc->add_flag("--trace", run_args.trace, "print one line per step");
  runc->add_flag("--check-soundness", run_args.check_soundness,
                 "check every defined value against the inferred register "
                 "types (violations on stderr; exit code unchanged)");

  SigArgs infer_args;
  CLI::App* inferc = app.add_subcommand("infer", "Type a method");
  inferc->add_option("file", infer_args.file.path, "program file")
      ->required();
  inferc->add_flag("--compiled", infer_args.file.compiled,
                   "accept compiled tables");
  inferc->add_option("--method", infer_args.method, "method name")
      ->required();
  inferc->add_option("--sig", infer_args.sig,
                     "argument types, comma separated");

  SigArgs analyze_args;
  CLI::App* analyzec =
      app.add_subcommand("analyze", "Stability and groundedness");
  analyzec->add_option("file", analyze_args.file.path, "program file")
      ->required();
  analyzec->add_flag("--compiled", analyze_args.file.compiled,
                     "accept compiled tables");
  analyzec->add_option("--method", analyze_args.method,
                       "method name (default: all)");
  analyzec->add_option("--sig", analyze_args.sig,
                       "argument types, comma separated");
  analyzec->add_flag("--all", analyze_args.all,
                     "classify every method at its declared signature");

  SigArgs compile_args;
  CLI::App* compilec =
      app.add_subcommand("compile", "Specialize a method at concrete types");
  compilec->add_option("file", compile_args.file.path, "program file")
      ->required();
  compilec->add_flag("--compiled", compile_args.file.compiled,
                     "accept compiled tables");
  compilec->add_option("--method", compile_args.method, "method name")
      ->required();
  compilec->add_option("--sig", compile_args.sig,
                       "concrete argument types, comma separated");
  compilec->add_option("-o,--out", compile_args.out,
                       "write the compiled table to a file");

  RunArgs stats_args;
  CLI::App* statsc =
      app.add_subcommand("stats", "Run under the compiler and report the "
                                  "instance census");
  statsc->add_option("file", stats_args.file.path, "program file")
      ->required();
  statsc->add_flag("--compiled", stats_args.file.compiled,
                   "accept compiled tables");
  statsc->add_option("--entry", stats_args.entry,
                     "entry method, `name` or `name(T1,T2)`");
  statsc->add_option("--fuel", stats_args.fuel, "step budget");

  DiffArgs diff_args;
  CLI::App* diffc = app.add_subcommand(
      "difftest", "Generate programs and compare the two semantics");
  diffc->add_option("--seed", diff_args.seed, "single seed");
  CLI::Option* seeds_opt =
      diffc->add_option("--seeds", diff_args.seeds, "seed range A..B");
  seeds_opt->excludes("--seed");
  diffc->add_option("--out", diff_args.out,
                    "directory for mismatch repro files (must exist)");
  diffc->add_option("--fuel", diff_args.fuel, "step budget per run");
  diffc->add_flag("--aot", diff_args.aot,
                  "also compare a plain run of the harvested table");
  diffc->add_flag("--shrink", diff_args.do_shrink,
                  "minimize mismatching programs");
  diffc->add_option("--jobs", diff_args.jobs,
                    "worker threads (default: hardware)");
  diffc->add_option("--max-types", diff_args.cfg.max_types,
                    "generator: struct type budget");
  diffc->add_option("--max-methods", diff_args.cfg.max_methods_per_name,
                    "generator: overloads per name");
  diffc->add_option("--max-body", diff_args.cfg.max_body_len,
                    "generator: body length budget");
  diffc->add_option("--max-arity", diff_args.cfg.max_arity,
                    "generator: arity budget");
  diffc->add_option("--depth-bias", diff_args.cfg.max_call_depth_bias,
                    "generator: recursion guard bias");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*check) return cmd_check(check_args);
    if (*runc) return cmd_run(run_args);
    if (*inferc) return cmd_infer(infer_args);
    if (*analyzec) return cmd_analyze(analyze_args);
    if (*compilec) return cmd_compile(compile_args);
    if (*statsc) return cmd_stats(stats_args);
    if (*diffc) return cmd_difftest(diff_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kUsage;
}
