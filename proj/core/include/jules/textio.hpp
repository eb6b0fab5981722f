// Textual program format, canonical printing, trace line formatting, and
// JSON serialization of reports.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "jules/analysis.hpp"
#include "jules/fuzz.hpp"
#include "jules/ir.hpp"

namespace jules {

struct ParseErrorInfo {
  std::string message;
  int line = 0;  // 1-based
  int col = 0;   // 1-based
};

std::string to_string(const ParseErrorInfo& e);

// Source mode accepts declarations and dispatched calls only; compiled
// mode additionally accepts direct calls (invoke) and origin annotations
// (`# origin: name(sig)` after a method's opening brace), so printed
// compiled tables round-trip.
enum class ParseMode { Source, Compiled };

struct ParseResult {
  bool ok = false;
  TypeTable types;
  MethodTable methods;
  std::vector<ParseErrorInfo> errors;
};

// Total on arbitrary bytes: never throws, reports errors with positions.
ParseResult parse_program(std::string_view text,
                          ParseMode mode = ParseMode::Source);

// Canonical form: type declarations in declaration order, methods sorted
// by (name, signature), one instruction per line. Instances print their
// origin annotation. parse_program(print_program(tt, mt), Compiled)
// reconstructs (tt, mt) exactly, and printing is a fixpoint.
std::string print_program(const TypeTable& tt, const MethodTable& mt);

// `step <n> <rule> depth=<d> <payload>` where payload is `%<i>=<value>`
// for assigning rules and `%<i>=call name[types]` / `%<i>=invoke
// name[sig]` for frame pushes.
std::string trace_line(std::uint64_t n, const char* rule, std::size_t depth,
                       const std::string& payload);

std::string to_json(const StabilityReport& r);
std::string to_json(const CensusReport& r);
std::string to_json(const DiffVerdict& v);
std::string typing_to_json(const std::string& method, const Signature& sig,
                           const Inferred& inf);

}  // namespace jules
