#include "chkc/props.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

namespace chkc {

namespace {

// Integer view of an annotated stack, as used for bound decisions.
IntStack int_view(const Stack& phi) {
  IntStack out;
  for (const auto& [x, v] : phi)
    if (v.annot.is_int) out[x] = v.n;
  return out;
}

TypeEnv env_of_stack(const Stack& phi) {
  TypeEnv G;
  for (const auto& [x, v] : phi) G[x] = v.annot;
  return G;
}

bool is_shadow(const std::string& x) {
  return x.find('$') != std::string::npos;
}

// Final-state agreement between two compiled runs: same outcome kind, and
// for values also the same result, heap cells, and common named stack
// slots (compiler-introduced '$' temporaries are run-local and ignored).
bool outcomes_agree(const COutcome& a, const COutcome& b, std::string* why) {
  if (a.kind != b.kind) {
    *why = "outcome kinds differ: " + outcome_word(a) + " vs " +
           outcome_word(b);
    return false;
  }
  if (a.kind != COutcome::Kind::Value) return true;
  if (a.value != b.value) {
    *why = "values differ: " + std::to_string(a.value) + " vs " +
           std::to_string(b.value);
    return false;
  }
  if (a.final_config.heap.cells != b.final_config.heap.cells) {
    *why = "final heaps differ";
    return false;
  }
  for (const auto& [x, n] : a.final_config.phi) {
    if (is_shadow(x)) continue;
    auto it = b.final_config.phi.find(x);
    if (it != b.final_config.phi.end() && it->second != n) {
      *why = "stack slot " + x + " differs: " + std::to_string(n) + " vs " +
             std::to_string(it->second);
      return false;
    }
  }
  return true;
}

const char* source_kind_word(EvalOutcome::Kind k) {
  switch (k) {
    case EvalOutcome::Kind::Value: return "value";
    case EvalOutcome::Kind::Null: return "null";
    case EvalOutcome::Kind::Bounds: return "bounds";
    case EvalOutcome::Kind::Stuck: return "stuck";
    case EvalOutcome::Kind::Fuel: return "fuel";
  }
  return "?";
}

bool same_error_kind(EvalOutcome::Kind s, COutcome::Kind t) {
  return (s == EvalOutcome::Kind::Null && t == COutcome::Kind::Null) ||
         (s == EvalOutcome::Kind::Bounds && t == COutcome::Kind::Bounds);
}

} // namespace

bool compile_config(const Program& p, const Config& c,
                    const CompileOptions& opts, CConfig* out,
                    std::string* err) {
  TypeEnv G = env_of_stack(c.phi);
  ShadowMap rho;
  CStack stack = erase_stack(c.phi);
  for (const auto& [x, v] : c.phi) {
    if (!is_checked_nt_ptr(v.annot)) continue;
    const BoundPair& b = v.annot.pointee->bounds;
    if (!b.lo.is_const() || !b.hi.is_const()) {
      if (err) *err = "open bounds on stack variable " + x;
      return false;
    }
    ShadowPair sp{x + "$l", x + "$h"};
    stack[sp.lo] = b.lo.off;
    stack[sp.hi] = b.hi.off;
    rho[x] = sp;
  }
  try {
    Compiler cc(p.funs, p.structs, opts);
    cc.phi = int_view(c.phi);
    Compiled r = cc.compile(G, PredEnv{}, rho, c.e);
    out->phi = std::move(stack);
    out->heap = erase_heap(c.heap);
    out->e = r.code.plug(r.atom);
    return true;
  } catch (const CompileError& e) {
    if (err) *err = e.what();
    return false;
  }
}

namespace {

PropOutcome check_blame(const EvalOutcome& out, std::string* detail) {
  switch (out.kind) {
    case EvalOutcome::Kind::Fuel:
      return PropOutcome::Inconclusive;
    case EvalOutcome::Kind::Stuck: {
      // A checked program never sticks; an injected one may, but only if
      // an unchecked region took part: either some step ran in unchecked
      // mode, or the stuck redex itself sits in an unchecked context.
      for (Mode m : out.step_modes)
        if (m == Mode::U) return PropOutcome::Pass;
      Decomp d = decompose(out.final_config.e, Mode::C);
      if (!d.is_value && d.mode == Mode::U) return PropOutcome::Pass;
      *detail = "stuck without unchecked involvement at " +
                print_expr(out.final_config.e);
      return PropOutcome::Fail;
    }
    default:
      return PropOutcome::Pass;
  }
}

PropOutcome check_preservation(const Program& p, const EvalOutcome& out,
                               std::string* detail) {
  bool partial = out.kind == EvalOutcome::Kind::Fuel;
  std::optional<WordType> prev;
  for (size_t i = 0; i < out.trace.size(); i++) {
    const Config& c = out.trace[i];
    TypingCtx ctx;
    ctx.funs = &p.funs;
    ctx.structs = &p.structs;
    ctx.heap = &c.heap;
    ctx.phi = int_view(c.phi);
    TypeResult r = type_expr(ctx, env_of_stack(c.phi), PredEnv{}, Mode::C, c.e);
    if (!ok(r)) {
      *detail = "config " + std::to_string(i) +
                " no longer type-checks: " + error_of(r).to_string();
      return PropOutcome::Fail;
    }
    if (prev && !subtype(type_of(r), *prev, PredEnv{}, ctx.phi, p.structs)) {
      *detail = "type grew across step " + std::to_string(i) + ": " +
                print_type(type_of(r)) + " is not below " + print_type(*prev);
      return PropOutcome::Fail;
    }
    if (i > 0 &&
        !heap_heap_consistent(out.trace[i - 1].heap, c.heap, p.structs)) {
      *detail = "heap consistency lost across step " + std::to_string(i);
      return PropOutcome::Fail;
    }
    prev = type_of(r);
  }
  return partial ? PropOutcome::Inconclusive : PropOutcome::Pass;
}

PropOutcome check_simulation(const Program& p, const EvalOutcome& out,
                             const CheckOptions& opts, std::string* detail) {
  if (out.kind == EvalOutcome::Kind::Fuel) return PropOutcome::Inconclusive;
  std::vector<COutcome> runs;
  runs.reserve(out.trace.size());
  CProgram cp;
  try {
    cp = compile_program(p, opts.compile);
  } catch (const CompileError& e) {
    *detail = std::string("program compilation failed: ") + e.what();
    return PropOutcome::Fail;
  }
  for (size_t i = 0; i < out.trace.size(); i++) {
    CConfig cc;
    std::string err;
    if (!compile_config(p, out.trace[i], opts.compile, &cc, &err)) {
      *detail = "config " + std::to_string(i) + " failed to compile: " + err;
      return PropOutcome::Fail;
    }
    COutcome r = eval_corec(cp.funs, cc, opts.target_fuel);
    if (r.kind == COutcome::Kind::Fuel) return PropOutcome::Inconclusive;
    if (r.kind == COutcome::Kind::Stuck) {
      *detail = "compiled run of config " + std::to_string(i) + " is stuck";
      return PropOutcome::Fail;
    }
    runs.push_back(std::move(r));
  }
  for (size_t i = 0; i + 1 < runs.size(); i++) {
    std::string why;
    if (!outcomes_agree(runs[i], runs[i + 1], &why)) {
      *detail = "compiled runs of configs " + std::to_string(i) + " and " +
                std::to_string(i + 1) + " disagree: " + why;
      return PropOutcome::Fail;
    }
  }
  if (runs.empty()) return PropOutcome::Pass;
  const COutcome& last = runs.back();
  switch (out.kind) {
    case EvalOutcome::Kind::Value:
      if (last.kind != COutcome::Kind::Value || last.value != out.value) {
        *detail = "source yields " + std::to_string(out.value) +
                  " but compiled run ends as " + outcome_word(last);
        return PropOutcome::Fail;
      }
      return PropOutcome::Pass;
    case EvalOutcome::Kind::Null:
    case EvalOutcome::Kind::Bounds:
      if (!same_error_kind(out.kind, last.kind)) {
        *detail = std::string("source fails with ") +
                  source_kind_word(out.kind) + " but compiled run ends as " +
                  outcome_word(last);
        return PropOutcome::Fail;
      }
      return PropOutcome::Pass;
    default:
      // Stuck source runs are progress failures; simulation says nothing.
      return PropOutcome::Inconclusive;
  }
}

} // namespace

TermChecks check_term(const Program& p, bool injected,
                      const CheckOptions& opts) {
  TermChecks tc;
  TypeResult tr = check_program(p);
  if (!ok(tr)) {
    tc.welltyped = PropOutcome::Fail;
    tc.detail = error_of(tr).to_string();
    return tc;
  }
  tc.welltyped = PropOutcome::Pass;

  EvalOptions eo;
  eo.fuel = opts.fuel;
  eo.keep_trace = !injected &&
                  (opts.check_preservation || opts.check_simulation);
  EvalOutcome out = eval_program(p, eo);

  if (injected) {
    tc.blame = check_blame(out, &tc.detail);
    return tc;
  }

  if (opts.check_progress) {
    switch (out.kind) {
      case EvalOutcome::Kind::Stuck:
        tc.progress = PropOutcome::Fail;
        tc.detail = "stuck at " + print_expr(out.final_config.e);
        break;
      case EvalOutcome::Kind::Fuel:
        tc.progress = PropOutcome::Inconclusive;
        break;
      default:
        tc.progress = PropOutcome::Pass;
    }
  }
  if (opts.check_preservation)
    tc.preservation = check_preservation(p, out, &tc.detail);
  if (opts.check_simulation)
    tc.simulation = check_simulation(p, out, opts, &tc.detail);
  return tc;
}

/***** Reports *****/

void PropertyReport::add(const std::string& prop, PropOutcome o) {
  switch (o) {
    case PropOutcome::Pass: props[prop].pass++; break;
    case PropOutcome::Fail: props[prop].fail++; break;
    case PropOutcome::Inconclusive: props[prop].inconclusive++; break;
    case PropOutcome::Skip: break;
  }
}

void PropertyReport::merge(const PropertyReport& other) {
  for (const auto& [name, c] : other.props) {
    PropCount& mine = props[name];
    mine.pass += c.pass;
    mine.fail += c.fail;
    mine.inconclusive += c.inconclusive;
  }
  cexs.insert(cexs.end(), other.cexs.begin(), other.cexs.end());
  std::sort(cexs.begin(), cexs.end(),
            [](const Counterexample& a, const Counterexample& b) {
              return a.index < b.index;
            });
  if (cexs.size() > max_cexs) cexs.resize(max_cexs);
}

bool PropertyReport::any_fail() const {
  for (const auto& [name, c] : props)
    if (c.fail > 0) return true;
  return false;
}

std::string PropertyReport::to_text() const {
  static const char* order[] = {"welltyped", "progress", "preservation",
                                "blame", "simulation"};
  std::ostringstream os;
  for (const char* name : order) {
    auto it = props.find(name);
    if (it == props.end()) continue;
    os << "PROP " << name << " PASS " << it->second.pass << " FAIL "
       << it->second.fail << " INCONCLUSIVE " << it->second.inconclusive
       << "\n";
  }
  for (const Counterexample& cx : cexs)
    os << "CEX seed=" << cx.index << " program=" << cx.program << "\n";
  return os.str();
}

PropertyReport run_properties(const GenConfig& cfg, const CheckOptions& opts,
                              int workers) {
  if (workers <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    workers = static_cast<int>(std::min(8u, hw ? hw : 1u));
  }
  if (static_cast<Int>(workers) > cfg.count && cfg.count > 0)
    workers = static_cast<int>(cfg.count);

  std::vector<PropertyReport> shards(workers);
  auto work = [&](int w) {
    Generator gen(cfg);
    PropertyReport& rep = shards[w];
    rep.max_cexs = SIZE_MAX; // cap only after the deterministic merge
    for (Int i = w; i < cfg.count; i += workers) {
      GenResult gr = gen.gen_term(static_cast<uint64_t>(i));
      TermChecks tc = check_term(gr.program, gr.injected, opts);
      rep.add("welltyped", tc.welltyped);
      rep.add("progress", tc.progress);
      rep.add("preservation", tc.preservation);
      rep.add("blame", tc.blame);
      rep.add("simulation", tc.simulation);
      const std::pair<const char*, PropOutcome> outs[] = {
          {"welltyped", tc.welltyped},   {"progress", tc.progress},
          {"preservation", tc.preservation}, {"blame", tc.blame},
          {"simulation", tc.simulation}};
      for (const auto& [name, o] : outs) {
        if (o != PropOutcome::Fail) continue;
        rep.cexs.push_back(Counterexample{name, static_cast<uint64_t>(i),
                                          print_program(gr.program),
                                          tc.detail});
        break;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; w++) threads.emplace_back(work, w);
  for (auto& t : threads) t.join();

  PropertyReport total;
  for (const PropertyReport& s : shards) total.merge(s);
  return total;
}

} // namespace chkc
