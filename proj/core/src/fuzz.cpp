#include "jules/fuzz.hpp"

#include <algorithm>
#include <cassert>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>

#include "jules/analysis.hpp"
#include "jules/infer.hpp"
#include "jules/jit.hpp"
#include "jules/textio.hpp"
#include "jules/typesys.hpp"

namespace jules {

namespace {

class Gen {
 public:
  Gen(const GenConfig& cfg, std::uint64_t salt)
      : cfg_(cfg),
        rng_(cfg.seed * 0x9E3779B97F4A7C15ull +
             salt * 0xBF58476D1CE4E5B9ull + 0x94D049BB133111EBull) {}

  GenProgram build() {
    gen_types();
    gen_signatures();
    gen_bodies();
    repair();
    return GenProgram{tt_, mt_};
  }

 private:
  std::uint64_t draw(std::uint64_t n) { return n ? rng_() % n : 0; }
  bool chance(unsigned num, unsigned den) { return draw(den) < num; }

  // --- type universe -------------------------------------------------

  void gen_types() {
    unsigned n_conc = 1 + static_cast<unsigned>(draw(cfg_.max_types));
    unsigned n_abs = 1 + static_cast<unsigned>(draw(2));
    if (n_abs > n_conc) n_abs = n_conc;
    for (unsigned i = 0; i < n_abs; ++i) {
      abstracts_.push_back(Type::abstract_named("A" + std::to_string(i)));
    }
    std::vector<TypeDecl> decls(n_conc);
    for (unsigned i = 0; i < n_conc; ++i) {
      decls[i].name = "C" + std::to_string(i);
      // The first n_abs structs pin one child under each abstract so every
      // abstract name is declared and refinable.
      if (i < n_abs) {
        decls[i].supertype = abstracts_[i];
      } else if (chance(1, 8)) {
        decls[i].supertype = Type::Any();
      } else {
        decls[i].supertype = abstracts_[draw(n_abs)];
      }
      concretes_.push_back(Type::concrete_named(decls[i].name));
    }
    for (TypeDecl& d : decls) {
      unsigned nf = static_cast<unsigned>(draw(3));
      for (unsigned f = 0; f < nf; ++f) {
        std::uint64_t roll = draw(10);
        if (roll < 4) {
          d.field_types.push_back(Type::Int());
        } else if (roll < 7) {
          d.field_types.push_back(concretes_[draw(concretes_.size())]);
        } else {
          // Abstract fields are the main source of imprecisely typed
          // registers, which keep runtime dispatch errors reachable.
          d.field_types.push_back(abstracts_[draw(abstracts_.size())]);
        }
      }
    }
    for (TypeDecl& d : decls) tt_.add(std::move(d));
    value_types_ = concretes_;
    value_types_.push_back(Type::Int());
  }

  const Type* super_of(const Type& c) const {
    const TypeDecl* d = tt_.find(c.name);
    return d ? &d->supertype : nullptr;
  }

  std::vector<Type> concrete_subs(const Type& t) const {
    if (t.concrete()) return {t};
    if (t.is_any()) return value_types_;
    std::vector<Type> out;
    for (const Type& c : concretes_) {
      const Type* s = super_of(c);
      if (s && *s == t) out.push_back(c);
    }
    return out;
  }

  bool types_overlap(const Type& a, const Type& b) const {
    for (const Type& c : concrete_subs(a)) {
      if (subtype(tt_, c, b)) return true;
    }
    return false;
  }

  // --- names and signatures -------------------------------------------

  Type draw_param_type() {
    std::uint64_t roll = draw(10);
    if (roll < 5) return value_types_[draw(value_types_.size())];
    if (roll < 8) return abstracts_[draw(abstracts_.size())];
    return Type::Any();
  }

  bool sig_acceptable(const std::vector<Signature>& sigs,
                      const Signature& cand) const {
    for (const Signature& s : sigs) {
      if (s == cand) return false;
      if (s.size() != cand.size()) continue;
      // Comparable or positionally disjoint pairs keep every applicable
      // set a chain, so dispatch is never ambiguous.
      if (subtype_sig(tt_, s, cand) || subtype_sig(tt_, cand, s)) continue;
      bool disjoint = false;
      for (std::size_t i = 0; i < s.size() && !disjoint; ++i) {
        disjoint = !types_overlap(s[i], cand[i]);
      }
      if (!disjoint) return false;
    }
    return true;
  }

  void gen_signatures() {
    unsigned n_names = 2 + static_cast<unsigned>(draw(3));
    for (unsigned i = 0; i < n_names; ++i) {
      names_.push_back("f" + std::to_string(i));
      sigs_.emplace_back();
      unsigned want = 1 + static_cast<unsigned>(draw(cfg_.max_methods_per_name));
      for (unsigned k = 0; k < want; ++k) {
        for (unsigned attempt = 0; attempt < 40; ++attempt) {
          Signature cand(draw(cfg_.max_arity + 1));
          for (Type& t : cand) t = draw_param_type();
          if (sig_acceptable(sigs_.back(), cand)) {
            sigs_.back().push_back(std::move(cand));
            break;
          }
        }
      }
    }
  }

  // --- bodies ---------------------------------------------------------

  struct Ctx {
    Signature types;  // conservative: real inference never types wider
    std::vector<std::optional<std::int64_t>> known;
    std::vector<Instruction> body;
  };

  Reg any_reg(const Ctx& c) { return static_cast<Reg>(draw(c.types.size())); }

  void push_type(Ctx& c, Type t, std::optional<std::int64_t> known) {
    c.types.push_back(std::move(t));
    c.known.push_back(known);
  }

  void emit_const(Ctx& c) {
    static const std::int64_t pool[] = {0, 0, 1, 1, 2, -1, 7};
    std::int64_t v = pool[draw(std::size(pool))];
    c.body.push_back(AssignConst{static_cast<Reg>(c.types.size()), v});
    push_type(c, Type::Int(), v);
  }

  bool emit_reg(Ctx& c) {
    if (c.types.empty()) return false;
    Reg src = any_reg(c);
    c.body.push_back(AssignReg{static_cast<Reg>(c.types.size()), src});
    push_type(c, c.types[src], c.known[src]);
    return true;
  }

  bool emit_new(Ctx& c) {
    std::vector<const TypeDecl*> feasible;
    for (const TypeDecl& d : tt_.entries()) {
      bool ok = true;
      for (const Type& ft : d.field_types) {
        bool found = false;
        for (const Type& rt : c.types) {
          if (subtype(tt_, rt, ft)) {
            found = true;
            break;
          }
        }
        if (!found) {
          ok = false;
          break;
        }
      }
      if (ok) feasible.push_back(&d);
    }
    if (feasible.empty()) return false;
    const TypeDecl* d = feasible[draw(feasible.size())];
    std::vector<Reg> args;
    for (const Type& ft : d->field_types) {
      std::vector<Reg> fits;
      for (Reg r = 0; r < c.types.size(); ++r) {
        if (subtype(tt_, c.types[r], ft)) fits.push_back(r);
      }
      args.push_back(fits[draw(fits.size())]);
    }
    c.body.push_back(New{static_cast<Reg>(c.types.size()),
                         Type::concrete_named(d->name), std::move(args)});
    push_type(c, Type::concrete_named(d->name), std::nullopt);
    return true;
  }

  bool emit_field(Ctx& c) {
    std::vector<Reg> structs;
    for (Reg r = 0; r < c.types.size(); ++r) {
      if (!c.types[r].concrete() || c.types[r].is_int()) continue;
      const TypeDecl* d = tt_.find(c.types[r].name);
      if (d && !d->field_types.empty()) structs.push_back(r);
    }
    if (structs.empty()) return false;
    Reg recv = structs[draw(structs.size())];
    const TypeDecl* d = tt_.find(c.types[recv].name);
    std::uint32_t idx = static_cast<std::uint32_t>(draw(d->field_types.size()));
    c.body.push_back(
        GetField{static_cast<Reg>(c.types.size()), recv, idx});
    push_type(c, d->field_types[idx], std::nullopt);
    return true;
  }

  // Mirrors the call transfer rule over the built-so-far table, which is
  // exact for completed names and conservative (Any) for the name under
  // construction.
  Type call_result_type(const Ctx& c, bool self, const std::string& callee,
                        const std::vector<Reg>& args, Reg alt) {
    if (self) return Type::Any();
    Signature arg_types;
    for (Reg r : args) arg_types.push_back(c.types[r]);
    Type r = Type::Any();
    if (all_concrete(arg_types) &&
        dispatch(tt_, mt_, callee, arg_types).defined()) {
      Inferred inf = infer_method(tt_, mt_, callee, arg_types, &gen_cache_);
      if (inf.ok) r = inf.typing.return_type();
    }
    return join(tt_, r, c.types[alt]);
  }

  Reg pick_guard(const Ctx& c, bool self) {
    std::vector<Reg> zero, nonzero;
    for (Reg r = 0; r < c.types.size(); ++r) {
      if (!c.known[r]) continue;
      (*c.known[r] == 0 ? zero : nonzero).push_back(r);
    }
    if (self && !zero.empty() &&
        chance(cfg_.max_call_depth_bias, cfg_.max_call_depth_bias + 1)) {
      return zero[draw(zero.size())];
    }
    if (!self && !nonzero.empty() && chance(1, 2)) {
      return nonzero[draw(nonzero.size())];
    }
    return any_reg(c);
  }

  bool emit_call(Ctx& c, std::size_t name_idx) {
    if (c.types.empty()) return false;
    // name_idx == names_.size() marks main, which may call every name and
    // is never a callee itself.
    std::size_t n_choices = std::min(name_idx + 1, names_.size());
    std::size_t callee_idx = draw(n_choices);
    bool self = callee_idx == name_idx;
    const std::string& callee = names_[callee_idx];
    const Signature& shape = sigs_[callee_idx][draw(sigs_[callee_idx].size())];
    std::vector<Reg> args;
    for (const Type& want : shape) {
      std::vector<Reg> fits;
      for (Reg r = 0; r < c.types.size(); ++r) {
        if (subtype(tt_, c.types[r], want)) fits.push_back(r);
      }
      if (!fits.empty() && chance(7, 10)) {
        args.push_back(fits[draw(fits.size())]);
      } else {
        args.push_back(any_reg(c));
      }
    }
    Reg guard = pick_guard(c, self);
    Reg alt = any_reg(c);
    Type result = call_result_type(c, self, callee, args, alt);
    c.body.push_back(DispatchCall{static_cast<Reg>(c.types.size()), guard,
                                  callee, std::move(args), alt});
    push_type(c, std::move(result), std::nullopt);
    return true;
  }

  void emit_instr(Ctx& c, std::size_t name_idx) {
    std::uint64_t roll = draw(13);
    bool done = false;
    if (roll < 3) {
      emit_const(c);
      done = true;
    } else if (roll < 5) {
      done = emit_reg(c);
    } else if (roll < 7) {
      done = emit_new(c);
    } else if (roll < 9) {
      done = emit_field(c);
    } else {
      done = emit_call(c, name_idx);
    }
    if (!done) emit_const(c);
  }

  // Appends a call which is dispatch-defined whenever its inferred argument
  // types are concrete (every argument fits the chosen signature), so the
  // entry run exercises the machine past main.
  void force_live_call(Ctx& c) {
    bool have_nonzero = false;
    for (std::size_t r = 0; r < c.known.size(); ++r) {
      if (c.known[r] && *c.known[r] != 0) have_nonzero = true;
    }
    if (!have_nonzero) {
      c.body.push_back(AssignConst{static_cast<Reg>(c.types.size()), 1});
      push_type(c, Type::Int(), 1);
    }
    struct Cand {
      std::size_t name_idx;
      const Signature* shape;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      for (const Signature& s : sigs_[i]) {
        bool ok = true;
        for (const Type& want : s) {
          bool found = false;
          for (const Type& rt : c.types) {
            if (subtype(tt_, rt, want)) {
              found = true;
              break;
            }
          }
          if (!found) {
            ok = false;
            break;
          }
        }
        if (ok) cands.push_back({i, &s});
      }
    }
    if (cands.empty()) {
      emit_const(c);
      return;
    }
    const Cand& pick = cands[draw(cands.size())];
    std::vector<Reg> args;
    for (const Type& want : *pick.shape) {
      std::vector<Reg> fits;
      for (Reg r = 0; r < c.types.size(); ++r) {
        if (subtype(tt_, c.types[r], want)) fits.push_back(r);
      }
      args.push_back(fits[draw(fits.size())]);
    }
    std::vector<Reg> nonzero;
    for (Reg r = 0; r < c.types.size(); ++r) {
      if (c.known[r] && *c.known[r] != 0) nonzero.push_back(r);
    }
    Reg guard = nonzero[draw(nonzero.size())];
    Reg alt = any_reg(c);
    const std::string& callee = names_[pick.name_idx];
    Type result = call_result_type(c, false, callee, args, alt);
    c.body.push_back(DispatchCall{static_cast<Reg>(c.types.size()), guard,
                                  callee, std::move(args), alt});
    push_type(c, std::move(result), std::nullopt);
  }

  void gen_bodies() {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      for (const Signature& sig : sigs_[i]) {
        Ctx c;
        c.types = sig;
        c.known.assign(sig.size(), std::nullopt);
        unsigned len = 1 + static_cast<unsigned>(draw(cfg_.max_body_len));
        for (unsigned k = 0; k < len; ++k) emit_instr(c, i);
        mt_.add(Method{names_[i], sig, make_body(std::move(c.body)), sig});
      }
    }
    Ctx c;
    unsigned len = 1 + static_cast<unsigned>(draw(cfg_.max_body_len));
    for (unsigned k = 0; k < len; ++k) emit_instr(c, names_.size());
    force_live_call(c);
    mt_.add(Method{"main", {}, make_body(std::move(c.body)), {}});
  }

  // --- repair ----------------------------------------------------------

  // Rewrites every dispatched call whose inferred argument types are all
  // concrete with undefined dispatch, at any concrete refinement of the
  // declared signature, into the alt copy it would take anyway. The
  // rewrite only narrows downstream types, so inference stays valid and
  // newly exposed sites are caught by the outer fixpoint.
  void repair() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t mi = 0; mi < mt_.methods().size(); ++mi) {
        while (repair_one(mi)) changed = true;
      }
    }
  }

  bool repair_one(std::size_t mi) {
    const Method& m = mt_.methods()[mi];
    std::vector<std::vector<Type>> options;
    std::size_t product = 1;
    for (const Type& p : m.param_types) {
      options.push_back(concrete_subs(p));
      if (options.back().empty()) return false;
      product *= options.back().size();
      if (product > 4096) return false;
    }
    std::vector<std::size_t> odo(options.size(), 0);
    InferenceCache cache;
    while (true) {
      Signature refined(options.size());
      for (std::size_t i = 0; i < options.size(); ++i) {
        refined[i] = options[i][odo[i]];
      }
      Inferred inf = infer_body(tt_, mt_, refined, *m.body, &cache);
      if (!inf.ok) {
        throw std::logic_error("generated body fails refined inference: " +
                               inf.error);
      }
      for (std::size_t idx = 0; idx < m.body->size(); ++idx) {
        const auto* d = std::get_if<DispatchCall>(&(*m.body)[idx]);
        if (!d) continue;
        Signature arg_types;
        for (Reg r : d->args) arg_types.push_back(inf.typing.types[r]);
        if (!all_concrete(arg_types)) continue;
        if (dispatch(tt_, mt_, d->callee, arg_types).defined()) continue;
        std::vector<Instruction> body = *m.body;
        body[idx] = AssignReg{d->target, d->alt};
        mt_.replace_body(m.name, m.param_types, make_body(std::move(body)));
        return true;
      }
      std::size_t i = 0;
      for (; i < odo.size(); ++i) {
        if (++odo[i] < options[i].size()) break;
        odo[i] = 0;
      }
      if (i == odo.size()) return false;
    }
  }

  GenConfig cfg_;
  std::mt19937_64 rng_;
  TypeTable tt_;
  MethodTable mt_;
  std::vector<Type> concretes_;
  std::vector<Type> abstracts_;
  std::vector<Type> value_types_;  // concretes plus Int
  std::vector<std::string> names_;
  std::vector<std::vector<Signature>> sigs_;
  InferenceCache gen_cache_;
};

std::string env_to_string(const Environment& env) {
  std::string out = "[";
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (i) out += ", ";
    out += value_to_string(env[i]);
  }
  return out + "]";
}

std::string witness_to_string(const AnalysisWitness& w) {
  std::string out = w.method + "(" + to_string(w.sig) + ")";
  if (w.instr >= 0) out += " instr " + std::to_string(w.instr);
  return out + ": " + w.reason;
}

OutcomeSummary summarize(const RunOutcome& r) {
  return OutcomeSummary{r.kind, r.steps, r.detail};
}

void compare_runs(const RunOutcome& a, const RunOutcome& b,
                  const char* a_label, const char* b_label,
                  std::vector<std::string>& fails) {
  if (a.kind != b.kind) {
    fails.push_back(std::string("outcome: ") + a_label + "=" +
                    outcome_name(a.kind) + " " + b_label + "=" +
                    outcome_name(b.kind));
  }
  if (a.steps != b.steps) {
    fails.push_back(std::string("steps: ") + a_label + "=" +
                    std::to_string(a.steps) + " " + b_label + "=" +
                    std::to_string(b.steps));
  }
  if (a.kind == RunOutcome::Kind::Finished &&
      b.kind == RunOutcome::Kind::Finished && a.final_env != b.final_env) {
    fails.push_back(std::string("env: ") + a_label + "=" +
                    env_to_string(a.final_env) + " " + b_label + "=" +
                    env_to_string(b.final_env));
  }
}

}  // namespace

GenProgram gen_program(const GenConfig& cfg) {
  std::string first_error;
  for (std::uint64_t salt = 0; salt < 20; ++salt) {
    Gen g(cfg, salt);
    GenProgram p = g.build();
    std::vector<Diagnostic> diags = validate(p.types, p.methods);
    if (diags.empty()) return p;
    if (first_error.empty()) first_error = to_string(diags.front());
  }
  throw std::logic_error("program generator cannot satisfy validate(): " +
                         first_error);
}

DiffVerdict diff_test(const TypeTable& tt, const MethodTable& mt,
                      const EntryPoint& entry, std::uint64_t fuel) {
  RunOptions opts;
  opts.fuel = fuel;
  opts.check_soundness = true;
  opts.check_callee_stability = true;
  opts.semantics = Semantics::Dispatch;
  RunOutcome d = run(tt, mt, entry, opts);
  opts.semantics = Semantics::Jit;
  RunOutcome j = run(tt, mt, entry, opts);

  DiffVerdict v;
  v.dispatch_outcome = summarize(d);
  v.jit_outcome = summarize(j);
  auto& fails = v.property_failures;
  compare_runs(d, j, "dispatch", "jit", fails);

  for (const Method& m : j.final_table.methods()) {
    if (m.is_stub()) {
      fails.push_back("stubs: " +
                      to_string(MethodKey{m.name, m.param_types}));
    }
  }
  if (!(originals(j.final_table) == originals(mt))) {
    fails.push_back("originals: original methods changed under jit");
  }
  if (CheckResult c = max_devirt_table(tt, j.final_table); !c.ok) {
    fails.push_back("max-devirt: " + witness_to_string(c.witness));
  }
  if (CheckResult c = table_optimizes(tt, mt, j.final_table); !c.ok) {
    fails.push_back("table-optimizes: " + witness_to_string(c.witness));
  }
  for (const Method& m : j.final_table.methods()) {
    if (!m.is_instance() || m.is_stub()) continue;
    StabilityReport rep = classify(tt, j.final_table, m.name, m.param_types);
    if (rep.ok && rep.grounded && !fully_devirtualized(m)) {
      fails.push_back("grounded-devirt: " +
                      to_string(MethodKey{m.name, m.param_types}) +
                      " grounded but keeps a dispatched call");
    }
  }
  for (const std::string& s : d.soundness_violations) {
    fails.push_back("soundness: dispatch: " + s);
  }
  for (const std::string& s : j.soundness_violations) {
    fails.push_back("soundness: jit: " + s);
  }
  for (const std::string& s : d.callee_stability_violations) {
    fails.push_back("callee-stability: dispatch: " + s);
  }
  for (const std::string& s : j.callee_stability_violations) {
    fails.push_back("callee-stability: jit: " + s);
  }
  v.match = fails.empty();
  return v;
}

DiffVerdict aot_test(const TypeTable& tt, const MethodTable& mt,
                     const EntryPoint& entry, std::uint64_t fuel) {
  RunOptions opts;
  opts.fuel = fuel;
  opts.semantics = Semantics::Jit;
  RunOutcome warm = run(tt, mt, entry, opts);
  opts.semantics = Semantics::Dispatch;
  RunOutcome a = run(tt, mt, entry, opts);
  RunOutcome b = run(tt, warm.final_table, entry, opts);

  DiffVerdict v;
  v.dispatch_outcome = summarize(a);
  v.jit_outcome = summarize(b);
  compare_runs(a, b, "dispatch", "aot", v.property_failures);
  v.match = v.property_failures.empty();
  return v;
}

SeedReport seed_report(const GenConfig& cfg, std::uint64_t fuel,
                       bool with_aot) {
  SeedReport r;
  r.program = gen_program(cfg);
  EntryPoint entry;
  r.diff = diff_test(r.program.types, r.program.methods, entry, fuel);
  r.diff.seed = cfg.seed;
  if (!r.diff.match) {
    r.diff.program_text = print_program(r.program.types, r.program.methods);
  }
  if (with_aot) {
    r.aot = aot_test(r.program.types, r.program.methods, entry, fuel);
    r.aot.seed = cfg.seed;
    if (!r.aot.match) {
      r.aot.program_text = print_program(r.program.types, r.program.methods);
    }
  } else {
    r.aot.match = true;
  }
  return r;
}

void run_seed_range(const GenConfig& base, std::uint64_t first,
                    std::uint64_t last, std::uint64_t fuel, bool with_aot,
                    unsigned workers,
                    const std::function<void(const SeedReport&)>& sink) {
  if (last < first) return;
  if (workers <= 1) {
    for (std::uint64_t s = first; s <= last; ++s) {
      GenConfig cfg = base;
      cfg.seed = s;
      sink(seed_report(cfg, fuel, with_aot));
    }
    return;
  }
  std::size_t n = static_cast<std::size_t>(last - first + 1);
  std::vector<std::optional<SeedReport>> results(n);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < n; k += workers) {
        GenConfig cfg = base;
        cfg.seed = first + k;
        results[k] = seed_report(cfg, fuel, with_aot);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (std::size_t k = 0; k < n; ++k) sink(*results[k]);
}

namespace {

// Shifts register references after removing the instruction defining reg t.
Instruction renumber_after(const Instruction& in, Reg t) {
  auto fix = [t](Reg r) { return r > t ? r - 1 : r; };
  Instruction out = in;
  std::visit(
      [&](auto& v) {
        using T = std::decay_t<decltype(v)>;
        v.target = fix(v.target);
        if constexpr (std::is_same_v<T, AssignReg>) {
          v.source = fix(v.source);
        } else if constexpr (std::is_same_v<T, New>) {
          for (Reg& r : v.args) r = fix(r);
        } else if constexpr (std::is_same_v<T, GetField>) {
          v.receiver = fix(v.receiver);
        } else if constexpr (std::is_same_v<T, DispatchCall> ||
                             std::is_same_v<T, DirectCall>) {
          v.guard = fix(v.guard);
          for (Reg& r : v.args) r = fix(r);
          v.alt = fix(v.alt);
        }
      },
      out);
  return out;
}

bool reads_reg(const Instruction& in, Reg r) {
  for (Reg x : instr_reads(in)) {
    if (x == r) return true;
  }
  return false;
}

}  // namespace

GenProgram shrink(const TypeTable& tt, const MethodTable& mt,
                  const FailPredicate& still_failing) {
  GenProgram cur{tt, mt};
  auto keeps_failure = [&](const TypeTable& t, const MethodTable& m) {
    return validate(t, m).empty() && still_failing(t, m);
  };
  bool improved = true;
  while (improved) {
    improved = false;
    // Whole methods.
    for (std::size_t i = 0; i < cur.methods.size();) {
      const Method& m = cur.methods.methods()[i];
      if (m.name == "main" && m.is_original()) {
        ++i;
        continue;
      }
      MethodTable cand;
      for (std::size_t j = 0; j < cur.methods.size(); ++j) {
        if (j != i) cand.add(cur.methods.methods()[j]);
      }
      if (keeps_failure(cur.types, cand)) {
        cur.methods = std::move(cand);
        improved = true;
      } else {
        ++i;
      }
    }
    // Single instructions whose result is never read.
    for (std::size_t i = 0; i < cur.methods.size(); ++i) {
      const Method& m = cur.methods.methods()[i];
      if (m.is_stub() || m.body->size() <= 1) continue;
      for (std::size_t k = m.body->size(); k-- > 0;) {
        Reg t = static_cast<Reg>(m.param_types.size() + k);
        bool read_later = false;
        for (std::size_t j = k + 1; j < m.body->size() && !read_later; ++j) {
          read_later = reads_reg((*m.body)[j], t);
        }
        if (read_later) continue;
        std::vector<Instruction> body;
        for (std::size_t j = 0; j < m.body->size(); ++j) {
          if (j == k) continue;
          body.push_back(j > k ? renumber_after((*m.body)[j], t)
                               : (*m.body)[j]);
        }
        MethodTable cand = cur.methods;
        cand.replace_body(m.name, m.param_types, make_body(std::move(body)));
        if (keeps_failure(cur.types, cand)) {
          cur.methods = std::move(cand);
          improved = true;
          break;  // body changed; rescan this method from its new tail
        }
      }
    }
    // Type declarations.
    for (std::size_t i = 0; i < cur.types.entries().size();) {
      TypeTable cand;
      for (std::size_t j = 0; j < cur.types.entries().size(); ++j) {
        if (j != i) cand.add(cur.types.entries()[j]);
      }
      if (keeps_failure(cand, cur.methods)) {
        cur.types = std::move(cand);
        improved = true;
      } else {
        ++i;
      }
    }
  }
  return cur;
}

}  // namespace jules
