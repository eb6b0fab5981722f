#include "jules/textio.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace jules {

std::string to_string(const ParseErrorInfo& e) {
  return std::to_string(e.line) + ":" + std::to_string(e.col) + ": " +
         e.message;
}

namespace {

enum class Tok {
  KwType, KwMethod, KwConst, KwReg, KwNew, KwField, KwIf, KwCall, KwInvoke,
  KwElse, Ident, Int, RegTok, LParen, RParen, LBrace, RBrace, LBracket,
  RBracket, Comma, Equals, Subtype, Origin, End, Error,
};

struct Token {
  Tok kind;
  std::string text;
  long long num = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> lex() {
    std::vector<Token> out;
    while (true) {
      Token t = next();
      out.push_back(t);
      if (t.kind == Tok::End) break;
    }
    return out;
  }

 private:
  Token make(Tok kind, std::string text, int line, int col) {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.line = line;
    t.col = col;
    return t;
  }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  char get() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  bool eof() const { return pos_ >= src_.size(); }

  Token next() {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        get();
        continue;
      }
      if (c == '#') {
        int line = line_, col = col_;
        std::string comment;
        while (!eof() && peek() != '\n') comment.push_back(get());
        // Only the origin annotation is a token; other comments vanish.
        std::size_t i = 1;
        while (i < comment.size() && comment[i] == ' ') ++i;
        if (comment.compare(i, 7, "origin:") == 0) {
          Token t = make(Tok::Origin, comment.substr(i + 7), line, col);
          return t;
        }
        continue;
      }
      break;
    }
    int line = line_, col = col_;
    if (eof()) return make(Tok::End, "", line, col);
    char c = get();
    switch (c) {
      case '(': return make(Tok::LParen, "(", line, col);
      case ')': return make(Tok::RParen, ")", line, col);
      case '{': return make(Tok::LBrace, "{", line, col);
      case '}': return make(Tok::RBrace, "}", line, col);
      case '[': return make(Tok::LBracket, "[", line, col);
      case ']': return make(Tok::RBracket, "]", line, col);
      case ',': return make(Tok::Comma, ",", line, col);
      case '=': return make(Tok::Equals, "=", line, col);
      case '<':
        if (peek() == ':') {
          get();
          return make(Tok::Subtype, "<:", line, col);
        }
        return make(Tok::Error, "<", line, col);
      case '%': {
        std::string digits;
        while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
          digits.push_back(get());
        }
        if (digits.empty() || digits.size() > 9) {
          return make(Tok::Error, "%" + digits, line, col);
        }
        Token t = make(Tok::RegTok, "%" + digits, line, col);
        t.num = std::strtoll(digits.c_str(), nullptr, 10);
        return t;
      }
      default: break;
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      std::string digits(1, c);
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
        digits.push_back(get());
      }
      if (digits == "-" || digits.size() > 18) {
        return make(Tok::Error, digits, line, col);
      }
      Token t = make(Tok::Int, digits, line, col);
      t.num = std::strtoll(digits.c_str(), nullptr, 10);
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word(1, c);
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                        peek() == '_')) {
        word.push_back(get());
      }
      static const std::unordered_map<std::string, Tok> kw = {
          {"type", Tok::KwType},     {"method", Tok::KwMethod},
          {"const", Tok::KwConst},   {"reg", Tok::KwReg},
          {"new", Tok::KwNew},       {"field", Tok::KwField},
          {"if", Tok::KwIf},         {"call", Tok::KwCall},
          {"invoke", Tok::KwInvoke}, {"else", Tok::KwElse},
      };
      auto it = kw.find(word);
      return make(it == kw.end() ? Tok::Ident : it->second, std::move(word),
                  line, col);
    }
    return make(Tok::Error, std::string(1, c), line, col);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, ParseMode mode)
      : toks_(std::move(toks)), mode_(mode) {
    // Names declared as struct types resolve concrete everywhere,
    // including before their declaration.
    for (std::size_t i = 0; i + 1 < toks_.size(); ++i) {
      if (toks_[i].kind == Tok::KwType && toks_[i + 1].kind == Tok::Ident) {
        concrete_names_.insert(toks_[i + 1].text);
      }
    }
  }

  ParseResult parse() {
    ParseResult res;
    while (errors_.size() < 100) {
      const Token& t = peek();
      if (t.kind == Tok::End) break;
      if (t.kind == Tok::KwType) {
        parse_typedecl(res.types);
      } else if (t.kind == Tok::KwMethod) {
        parse_methoddecl(res.methods);
      } else {
        error(t, "expected 'type' or 'method'");
        sync_decl();
      }
    }
    res.errors = std::move(errors_);
    res.ok = res.errors.empty();
    return res;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& get() {
    const Token& t = toks_[pos_];
    if (t.kind != Tok::End) ++pos_;
    return t;
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool accept(Tok k) {
    if (!at(k)) return false;
    get();
    return true;
  }
  bool expect(Tok k, const char* what) {
    if (accept(k)) return true;
    error(peek(), std::string("expected ") + what);
    return false;
  }

  void error(const Token& t, std::string msg) {
    if (t.kind == Tok::Error) msg += " (stray '" + t.text + "')";
    errors_.push_back({std::move(msg), t.line, t.col});
  }

  void sync_decl() {
    while (!at(Tok::End) && !at(Tok::KwType) && !at(Tok::KwMethod)) get();
  }

  bool resolve_type(const Token& t, Type& out) {
    if (t.kind != Tok::Ident) {
      error(t, "expected a type name");
      return false;
    }
    if (!std::isupper(static_cast<unsigned char>(t.text[0]))) {
      error(t, "type name '" + t.text + "' must be capitalized");
      return false;
    }
    if (t.text == "Int") {
      out = Type::Int();
    } else if (concrete_names_.count(t.text)) {
      out = Type::concrete_named(t.text);
    } else {
      out = Type::abstract_named(t.text);  // includes Any
    }
    return true;
  }

  bool parse_tylist(Tok open, Tok close, const char* what, Signature& out) {
    if (!expect(open, what)) return false;
    if (accept(close)) return true;
    while (true) {
      Type ty;
      if (!resolve_type(get(), ty)) return false;
      out.push_back(std::move(ty));
      if (accept(close)) return true;
      if (!expect(Tok::Comma, "','")) return false;
    }
  }

  void parse_typedecl(TypeTable& tt) {
    get();  // 'type'
    const Token& name = get();
    if (name.kind != Tok::Ident ||
        !std::isupper(static_cast<unsigned char>(name.text[0]))) {
      error(name, "expected a capitalized struct type name");
      sync_decl();
      return;
    }
    TypeDecl decl;
    decl.name = name.text;
    if (!parse_tylist(Tok::LParen, Tok::RParen, "'('", decl.field_types)) {
      sync_decl();
      return;
    }
    if (!expect(Tok::Subtype, "'<:'")) {
      sync_decl();
      return;
    }
    const Token& sup = get();
    Type sup_ty;
    if (!resolve_type(sup, sup_ty)) {
      sync_decl();
      return;
    }
    if (sup_ty.concrete()) {
      error(sup, "supertype '" + sup_ty.name + "' must be abstract");
      sync_decl();
      return;
    }
    decl.supertype = std::move(sup_ty);
    tt.add(std::move(decl));
  }

  bool parse_reglist(Signature*, std::vector<Reg>& out) {
    if (!expect(Tok::LParen, "'('")) return false;
    if (accept(Tok::RParen)) return true;
    while (true) {
      const Token& t = get();
      if (t.kind != Tok::RegTok) {
        error(t, "expected a register");
        return false;
      }
      out.push_back(static_cast<Reg>(t.num));
      if (accept(Tok::RParen)) return true;
      if (!expect(Tok::Comma, "','")) return false;
    }
  }

  // origin payload: `name(T1,T2)`
  bool parse_origin_payload(const Token& tok, const std::string& method_name,
                            Signature& out) {
    std::string s = tok.text;
    std::size_t p = 0;
    while (p < s.size() && s[p] == ' ') ++p;
    std::size_t open = s.find('(', p);
    if (open == std::string::npos || s.back() != ')') {
      error(tok, "malformed origin annotation");
      return false;
    }
    std::string name = s.substr(p, open - p);
    while (!name.empty() && name.back() == ' ') name.pop_back();
    if (name != method_name) {
      error(tok, "origin annotation names '" + name + "', expected '" +
                     method_name + "'");
      return false;
    }
    std::string inner = s.substr(open + 1, s.size() - open - 2);
    std::size_t start = 0;
    while (start <= inner.size()) {
      std::size_t comma = inner.find(',', start);
      std::string piece = inner.substr(
          start, comma == std::string::npos ? std::string::npos
                                            : comma - start);
      std::size_t a = piece.find_first_not_of(' ');
      std::size_t b = piece.find_last_not_of(' ');
      if (a != std::string::npos) {
        piece = piece.substr(a, b - a + 1);
      } else {
        piece.clear();
      }
      if (!piece.empty()) {
        Token fake;
        fake.kind = Tok::Ident;
        fake.text = piece;
        fake.line = tok.line;
        fake.col = tok.col;
        Type ty;
        if (!resolve_type(fake, ty)) return false;
        out.push_back(std::move(ty));
      } else if (!inner.empty()) {
        error(tok, "malformed origin annotation");
        return false;
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return true;
  }

  void parse_methoddecl(MethodTable& mt) {
    get();  // 'method'
    const Token& name = get();
    if (name.kind != Tok::Ident) {
      error(name, "expected a method name");
      sync_decl();
      return;
    }
    Method m;
    m.name = name.text;
    if (!parse_tylist(Tok::LParen, Tok::RParen, "'('", m.param_types)) {
      sync_decl();
      return;
    }
    if (!expect(Tok::LBrace, "'{'")) {
      sync_decl();
      return;
    }
    m.origin_signature = m.param_types;
    if (at(Tok::Origin)) {
      const Token& o = get();
      if (mode_ == ParseMode::Source) {
        error(o, "origin annotations are only allowed in compiled tables");
        sync_method();
        return;
      }
      Signature origin;
      if (!parse_origin_payload(o, m.name, origin)) {
        sync_method();
        return;
      }
      m.origin_signature = std::move(origin);
    }
    std::vector<Instruction> body;
    while (!at(Tok::RBrace)) {
      if (at(Tok::End)) {
        error(peek(), "unterminated method body");
        mt.add(std::move(m));
        return;
      }
      if (at(Tok::Origin)) {
        error(get(), "origin annotation must follow the opening brace");
        continue;
      }
      Instruction in;
      if (!parse_instr(in)) {
        sync_method();
        return;
      }
      body.push_back(std::move(in));
    }
    get();  // '}'
    m.body = make_body(std::move(body));
    mt.add(std::move(m));
  }

  void sync_method() {
    int depth = 1;
    while (!at(Tok::End)) {
      if (at(Tok::LBrace)) ++depth;
      if (at(Tok::RBrace) && --depth == 0) {
        get();
        return;
      }
      if (at(Tok::KwType) || at(Tok::KwMethod)) return;
      get();
    }
  }

  bool parse_instr(Instruction& out) {
    const Token& target = get();
    if (target.kind != Tok::RegTok) {
      error(target, "expected a register definition");
      return false;
    }
    Reg tgt = static_cast<Reg>(target.num);
    if (!expect(Tok::Equals, "'='")) return false;
    const Token& op = get();
    switch (op.kind) {
      case Tok::KwConst: {
        const Token& v = get();
        if (v.kind != Tok::Int) {
          error(v, "expected an integer literal");
          return false;
        }
        out = AssignConst{tgt, v.num};
        return true;
      }
      case Tok::KwReg: {
        const Token& r = get();
        if (r.kind != Tok::RegTok) {
          error(r, "expected a register");
          return false;
        }
        out = AssignReg{tgt, static_cast<Reg>(r.num)};
        return true;
      }
      case Tok::KwNew: {
        const Token& ty = get();
        Type t;
        if (!resolve_type(ty, t)) return false;
        if (!t.concrete() || t.is_int()) {
          error(ty, "'" + ty.text + "' is not a declared struct type");
          return false;
        }
        std::vector<Reg> args;
        if (!parse_reglist(nullptr, args)) return false;
        out = New{tgt, std::move(t), std::move(args)};
        return true;
      }
      case Tok::KwField: {
        const Token& r = get();
        if (r.kind != Tok::RegTok) {
          error(r, "expected a register");
          return false;
        }
        const Token& idx = get();
        if (idx.kind != Tok::Int || idx.num < 0) {
          error(idx, "expected a field index");
          return false;
        }
        out = GetField{tgt, static_cast<Reg>(r.num),
                       static_cast<std::uint32_t>(idx.num)};
        return true;
      }
      case Tok::KwIf: {
        const Token& g = get();
        if (g.kind != Tok::RegTok) {
          error(g, "expected a guard register");
          return false;
        }
        if (accept(Tok::KwCall)) {
          const Token& callee = get();
          if (callee.kind != Tok::Ident) {
            error(callee, "expected a method name");
            return false;
          }
          std::vector<Reg> args;
          if (!parse_reglist(nullptr, args)) return false;
          if (!expect(Tok::KwElse, "'else'")) return false;
          const Token& alt = get();
          if (alt.kind != Tok::RegTok) {
            error(alt, "expected a register");
            return false;
          }
          out = DispatchCall{tgt, static_cast<Reg>(g.num), callee.text,
                             std::move(args), static_cast<Reg>(alt.num)};
          return true;
        }
        if (accept(Tok::KwInvoke)) {
          const Token& callee = get();
          if (callee.kind != Tok::Ident) {
            error(callee, "expected a method name");
            return false;
          }
          if (mode_ == ParseMode::Source) {
            error(callee, "direct calls ('invoke') are only allowed in "
                          "compiled tables");
            return false;
          }
          Signature sig;
          if (!parse_tylist(Tok::LBracket, Tok::RBracket, "'['", sig)) {
            return false;
          }
          std::vector<Reg> args;
          if (!parse_reglist(nullptr, args)) return false;
          if (!expect(Tok::KwElse, "'else'")) return false;
          const Token& alt = get();
          if (alt.kind != Tok::RegTok) {
            error(alt, "expected a register");
            return false;
          }
          out = DirectCall{tgt,           static_cast<Reg>(g.num),
                           callee.text,   std::move(sig),
                           std::move(args), static_cast<Reg>(alt.num)};
          return true;
        }
        error(peek(), "expected 'call' or 'invoke'");
        return false;
      }
      default:
        error(op, "expected an instruction");
        return false;
    }
  }

  std::vector<Token> toks_;
  ParseMode mode_;
  std::size_t pos_ = 0;
  std::vector<ParseErrorInfo> errors_;
  std::unordered_set<std::string> concrete_names_;
};

std::string sig_with_spaces(const Signature& sig) {
  std::string out;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i) out += ", ";
    out += sig[i].name;
  }
  return out;
}

void print_instr(std::ostringstream& os, const Instruction& in) {
  if (const auto* c = std::get_if<AssignConst>(&in)) {
    os << "%" << c->target << " = const " << c->value;
  } else if (const auto* a = std::get_if<AssignReg>(&in)) {
    os << "%" << a->target << " = reg %" << a->source;
  } else if (const auto* n = std::get_if<New>(&in)) {
    os << "%" << n->target << " = new " << n->struct_type.name << "(";
    for (std::size_t i = 0; i < n->args.size(); ++i) {
      if (i) os << ", ";
      os << "%" << n->args[i];
    }
    os << ")";
  } else if (const auto* g = std::get_if<GetField>(&in)) {
    os << "%" << g->target << " = field %" << g->receiver << " " << g->index;
  } else if (const auto* d = std::get_if<DispatchCall>(&in)) {
    os << "%" << d->target << " = if %" << d->guard << " call " << d->callee
       << "(";
    for (std::size_t i = 0; i < d->args.size(); ++i) {
      if (i) os << ", ";
      os << "%" << d->args[i];
    }
    os << ") else %" << d->alt;
  } else {
    const auto& v = std::get<DirectCall>(in);
    os << "%" << v.target << " = if %" << v.guard << " invoke " << v.callee
       << "[" << to_string(v.sig) << "](";
    for (std::size_t i = 0; i < v.args.size(); ++i) {
      if (i) os << ", ";
      os << "%" << v.args[i];
    }
    os << ") else %" << v.alt;
  }
}

}  // namespace

ParseResult parse_program(std::string_view text, ParseMode mode) {
  Lexer lex(text);
  Parser p(lex.lex(), mode);
  return p.parse();
}

std::string print_program(const TypeTable& tt, const MethodTable& mt) {
  std::ostringstream os;
  for (const TypeDecl& d : tt.entries()) {
    os << "type " << d.name << "(" << sig_with_spaces(d.field_types)
       << ") <: " << d.supertype.name << "\n";
  }
  std::vector<const Method*> sorted;
  sorted.reserve(mt.size());
  for (const Method& m : mt.methods()) sorted.push_back(&m);
  std::sort(sorted.begin(), sorted.end(),
            [](const Method* a, const Method* b) {
              if (a->name != b->name) return a->name < b->name;
              return a->param_types < b->param_types;
            });
  bool first = tt.entries().empty();
  for (const Method* m : sorted) {
    if (!first) os << "\n";
    first = false;
    os << "method " << m->name << "(" << sig_with_spaces(m->param_types)
       << ") {";
    if (m->is_instance()) {
      os << " # origin: " << m->name << "(" << to_string(m->origin_signature)
         << ")";
    }
    os << "\n";
    // Stubs have no body and do not round-trip; they never escape
    // compilation in well-formed use.
    if (m->body != nullptr) {
      for (const Instruction& in : *m->body) {
        std::ostringstream line;
        print_instr(line, in);
        os << "  " << line.str() << "\n";
      }
    }
    os << "}\n";
  }
  return os.str();
}

std::string trace_line(std::uint64_t n, const char* rule, std::size_t depth,
                       const std::string& payload) {
  return "step " + std::to_string(n) + " " + rule +
         " depth=" + std::to_string(depth) + " " + payload;
}

namespace {

nlohmann::ordered_json sig_json(const Signature& sig) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Type& t : sig) arr.push_back(t.name);
  return arr;
}

nlohmann::ordered_json stability_json(const StabilityReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["sig"] = sig_json(r.sig);
  j["ok"] = r.ok;
  if (!r.ok) {
    j["error"] = r.error;
    return j;
  }
  j["stable"] = r.stable;
  j["grounded"] = r.grounded;
  j["return_type"] = r.return_type.name;
  j["param_count"] = r.typing.param_count;
  j["register_types"] = sig_json(r.typing.types);
  return j;
}

nlohmann::ordered_json outcome_json(const OutcomeSummary& o) {
  nlohmann::ordered_json j;
  j["outcome"] = outcome_name(o.kind);
  j["steps"] = o.steps;
  if (!o.detail.empty()) j["detail"] = o.detail;
  return j;
}

}  // namespace

std::string to_json(const StabilityReport& r) {
  return stability_json(r).dump();
}

std::string to_json(const CensusReport& r) {
  nlohmann::ordered_json j;
  j["instance_count"] = r.instance_count;
  j["failed_count"] = r.failed_count;
  j["zero_denominator"] = r.zero_denominator;
  j["stable_fraction"] = r.stable_fraction;
  j["grounded_fraction"] = r.grounded_fraction;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const StabilityReport& s : r.per_instance) {
    arr.push_back(stability_json(s));
  }
  j["instances"] = arr;
  return j.dump();
}

std::string to_json(const DiffVerdict& v) {
  nlohmann::ordered_json j;
  if (v.match) {
    j["verdict"] = "match";
    j["steps"] = v.dispatch_outcome.steps;
    return j.dump();
  }
  j["verdict"] = "mismatch";
  j["seed"] = v.seed;
  j["dispatch"] = outcome_json(v.dispatch_outcome);
  j["jit"] = outcome_json(v.jit_outcome);
  j["step_counts"] = nlohmann::ordered_json::array(
      {v.dispatch_outcome.steps, v.jit_outcome.steps});
  nlohmann::ordered_json fails = nlohmann::ordered_json::array();
  for (const std::string& f : v.property_failures) fails.push_back(f);
  j["property_failures"] = fails;
  return j.dump();
}

std::string typing_to_json(const std::string& method, const Signature& sig,
                           const Inferred& inf) {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["sig"] = sig_json(sig);
  j["ok"] = inf.ok;
  if (!inf.ok) {
    j["error"] = inf.error;
    return j.dump();
  }
  j["param_count"] = inf.typing.param_count;
  j["register_types"] = sig_json(inf.typing.types);
  j["return_type"] = inf.typing.types.empty()
                         ? ""
                         : inf.typing.return_type().name;
  return j.dump();
}

}  // namespace jules
