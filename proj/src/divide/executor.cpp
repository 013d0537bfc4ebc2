#include "shardsym/divide/executor.hpp"

#include <algorithm>

namespace shardsym {

using sym::Sym;

Executor::Executor(const TypedProgram& p, const AnalysisConfig& cfg, ExecMode mode, const SummaryTable* summaries,
                   CalleeResolver resolver)
    : prog_(p), cfg_(cfg), mode_(mode), summaries_(summaries), resolver_(std::move(resolver)) {}

const Cfg& Executor::cfg_of(const FunctionDecl& f) {
  auto it = cfgs_.find(f.name);
  if (it == cfgs_.end()) it = cfgs_.emplace(f.name, build_cfg(f)).first;
  return it->second;
}

ExecState Executor::initial_state(const FunctionDecl& f) const {
  ExecState s;
  s.chain = {{f.name, -1}};
  for (const auto& p : f.params) {
    switch (p.type.kind) {
      case MinType::Kind::Int: s.env[p.name] = sym::param_var(p.name); break;
      case MinType::Kind::Str: s.env[p.name] = sym::TaintString::param(p.name); break;
      case MinType::Kind::Ref: s.env[p.name] = Origin::param(p.name, p.type.record); break;
      default: break;
    }
  }
  return s;
}

void Executor::run(const FunctionDecl& f, ExecState init, const EndFn& on_end) {
  end_ = &on_end;
  Frame fr{&f, &cfg_of(f)};
  Ret ret = [this](ExecState s, std::optional<SymValue> v) {
    count_path();
    (*end_)(std::move(s), std::move(v));
  };
  exec_block(std::move(init), fr, fr.cfg->entry, 0, ret);
}

void Executor::count_path() {
  ++paths_;
  if (path_budget_ >= 0 && paths_ > path_budget_) throw BudgetExceeded{"paths"};
  if (has_deadline_ && (paths_ & 63) == 0 && std::chrono::steady_clock::now() > deadline_) throw BudgetExceeded{"timeout"};
}

bool Executor::feasible(const sym::PathCondition& pc) {
  if (!cfg_.prune_infeasible) return true;
  return !sym::check_sat(pc, cfg_.solver).unsat();
}

void Executor::fault(ExecState s, FaultKind kind, SourceLoc loc, std::string detail, int input_index) {
  s.fault = RangeFinding{kind, loc, s.pc.size(), std::move(detail), input_index};
  count_path();
  (*end_)(std::move(s), std::nullopt);
}

void Executor::push_feature(ExecState& s, Feature f) {
  if (mode_ != ExecMode::Summarize) return;
  f.guard_len = s.pc.size();
  s.features.push_back(std::move(f));
}

void Executor::exec_block(ExecState s, const Frame& fr, int block, size_t idx, const Ret& ret) {
  const BasicBlock& b = fr.cfg->blocks[static_cast<size_t>(block)];
  if (idx < b.stmts.size()) {
    exec_stmt(std::move(s), *b.stmts[idx], [this, &fr, block, idx, &ret](ExecState s2) {
      exec_block(std::move(s2), fr, block, idx + 1, ret);
    });
    return;
  }
  terminate(std::move(s), fr, block, ret);
}

void Executor::terminate(ExecState s, const Frame& fr, int block, const Ret& ret) {
  const BasicBlock& b = fr.cfg->blocks[static_cast<size_t>(block)];
  switch (b.term) {
    case Terminator::Goto: {
      auto out = fr.cfg->successors(block);
      follow(std::move(s), fr, block, out.at(0).to, out.at(0).kind, ret);
      return;
    }
    case Terminator::Branch:
      eval(std::move(s), *b.cond, [this, &fr, block, &ret, &b](ExecState s1, SymValue c) {
        branch(std::move(s1), std::get<Sym>(c), [this, &fr, block, &ret, &b](ExecState s2, bool taken) {
          int to = fr.cfg->successor(block, taken ? EdgeKind::TrueBranch : EdgeKind::FalseBranch);
          if (b.loop_guard) {
            if (taken) {
              if (s2.loops[block] >= cfg_.loop_bound) {
                truncated_ = true;
                warnings_.insert("loop bound " + std::to_string(cfg_.loop_bound) + " reached in " + fr.fn->name +
                                 " at " + to_string(b.loc));
                count_path();
                return;
              }
              ++s2.loops[block];
            } else {
              s2.loops.erase(block);
            }
          }
          exec_block(std::move(s2), fr, to, 0, ret);
        });
      });
      return;
    case Terminator::Return:
      if (b.ret && b.ret->value) {
        eval(std::move(s), *b.ret->value, [&ret](ExecState s1, SymValue v) { ret(std::move(s1), std::move(v)); });
      } else {
        ret(std::move(s), std::nullopt);
      }
      return;
    case Terminator::Exit: ret(std::move(s), std::nullopt); return;
  }
}

void Executor::follow(ExecState s, const Frame& fr, int, int to, EdgeKind, const Ret& ret) {
  exec_block(std::move(s), fr, to, 0, ret);
}

void Executor::branch(ExecState s, const Sym& cond, const std::function<void(ExecState, bool)>& k) {
  if (auto c = sym::const_value(cond)) {
    k(std::move(s), *c != 0);
    return;
  }
  if (has_deadline_ && std::chrono::steady_clock::now() > deadline_) throw BudgetExceeded{"timeout"};
  sym::PathCondition pt = s.pc, pf = s.pc;
  pt.push_back({cond, true});
  pf.push_back({cond, false});
  bool t = feasible(pt), f = feasible(pf);
  if (t && f) {
    ExecState other = s;
    other.pc = std::move(pf);
    s.pc = std::move(pt);
    k(std::move(s), true);
    k(std::move(other), false);
  } else if (t) {
    s.pc = std::move(pt);
    k(std::move(s), true);
  } else if (f) {
    s.pc = std::move(pf);
    k(std::move(s), false);
  }
}

void Executor::with_index(ExecState s, const Sym& index, int len, SourceLoc loc, const std::function<void(ExecState, int)>& k,
                          const std::function<void(ExecState)>& widened) {
  if (auto c = sym::const_value(index)) {
    if (*c < 0 || *c >= len) {
      fault(std::move(s), FaultKind::OutOfBoundsAccess, loc,
            "index " + std::to_string(*c) + " outside [0, " + std::to_string(len) + ")");
      return;
    }
    k(std::move(s), *c);
    return;
  }
  Sym oob = sym::binary(BinOp::Or, sym::binary(BinOp::Lt, index, sym::constant(0)),
                        sym::binary(BinOp::Ge, index, sym::constant(len)));
  sym::PathCondition po = s.pc, pi = s.pc;
  po.push_back({oob, true});
  pi.push_back({oob, false});
  bool out = feasible(po), in = feasible(pi);
  if (out) {
    ExecState sf = s;
    sf.pc = std::move(po);
    fault(std::move(sf), FaultKind::OutOfBoundsAccess, loc,
          "index " + sym::to_string(index) + " may fall outside [0, " + std::to_string(len) + ")");
  }
  if (!in) return;
  s.pc = std::move(pi);
  if (!widened) {
    // The caller does not care which element: any in-range index will do.
    k(std::move(s), -1);
    return;
  }
  if (len > 64) {
    widened(std::move(s));
    return;
  }
  for (int j = 0; j < len; ++j) {
    sym::PathCondition pj = s.pc;
    pj.push_back({sym::binary(BinOp::Eq, index, sym::constant(j)), true});
    if (!feasible(pj)) continue;
    ExecState sj = s;
    sj.pc = std::move(pj);
    k(std::move(sj), j);
  }
}

void Executor::exec_stmt(ExecState s, const Stmt& st, const KS& k) {
  switch (st.kind) {
    case StmtKind::Let:
      eval(std::move(s), *st.value, [&st, &k](ExecState s1, SymValue v) {
        if (st.decl_type.is_array() && std::holds_alternative<Sym>(v))
          v = SymArray{std::vector<Sym>(static_cast<size_t>(st.decl_type.length), std::get<Sym>(v))};
        s1.env[st.name] = std::move(v);
        k(std::move(s1));
      });
      return;
    case StmtKind::Assign:
      eval(std::move(s), *st.value, [this, &st, &k](ExecState s1, SymValue v) { assign(std::move(s1), *st.target, std::move(v), k); });
      return;
    case StmtKind::Free:
      eval(std::move(s), *st.value, [this, &st, &k](ExecState s1, SymValue v) {
        Origin o = resolve(s1, std::get<Origin>(v));
        Feature f;
        f.kind = FeatureKind::Free;
        f.loc = st.loc;
        f.origin = o;
        f.record = o.record;
        push_feature(s1, std::move(f));
        if (o.kind == Origin::Kind::Null) {
          fault(std::move(s1), FaultKind::InvalidFree, st.loc, "free of a never-allocated (null) reference");
          return;
        }
        if (o.kind == Origin::Kind::Opaque) {
          k(std::move(s1));
          return;
        }
        sym::BlockId b = block_for(s1, o);
        auto r = s1.heap.free(b);
        if (auto* hf = std::get_if<sym::HeapFault>(&r)) {
          fault(std::move(s1), hf->kind, st.loc, "free of " + o.str());
          return;
        }
        s1.heap = std::get<sym::HeapState>(std::move(r));
        k(std::move(s1));
      });
      return;
    case StmtKind::ExprStmt:
      eval(std::move(s), *st.value, [&k](ExecState s1, SymValue) { k(std::move(s1)); });
      return;
    default: return;   // control flow lives in the CFG
  }
}

sym::BlockId Executor::block_for(ExecState& s, const Origin& o) {
  std::string key = o.str();
  auto it = s.block_of.find(key);
  if (it != s.block_of.end()) return it->second;
  // A block the function did not allocate itself: a parameter or something reached through one.
  sym::BlockId id = -1;
  const RecordDecl* r = prog_.program().record(o.record);
  s.heap = s.heap.with_external(o.record, r ? size_of(*r) : 0, &id);
  s.block_of[key] = id;
  s.unknown_fields.insert(id);
  return id;
}

Origin Executor::resolve(const ExecState& s, const Origin& o) const {
  if (o.kind != Origin::Kind::Load) return o;
  Origin base = resolve(s, *o.base);
  auto it = s.block_of.find(base.str());
  if (it != s.block_of.end()) {
    auto fs = s.fields.find(it->second);
    if (fs != s.fields.end()) {
      auto v = fs->second.find(o.field);
      if (v != fs->second.end()) return std::get<Origin>(v->second);
    }
    if (!s.unknown_fields.count(it->second)) return Origin::null(o.record);
  }
  return Origin::load(base, o.field, o.record);
}

bool Executor::check_access(ExecState& s, const Origin& o, const std::string& record, SourceLoc loc) {
  Feature f;
  f.kind = FeatureKind::Access;
  f.loc = loc;
  f.origin = o;
  f.record = record;
  push_feature(s, std::move(f));
  if (o.kind == Origin::Kind::Null) {
    fault(std::move(s), FaultKind::InvalidAccess, loc, "access through a never-allocated (null) reference");
    return false;
  }
  if (o.kind == Origin::Kind::Opaque) return true;
  sym::BlockId b = block_for(s, o);
  if (auto hf = s.heap.access(b, record)) {
    fault(std::move(s), hf->kind, loc, "access of " + o.str() + " as " + record);
    return false;
  }
  return true;
}

SymValue Executor::unknown_value(ExecState& s, const MinType& t, const std::string& stem) {
  std::string key = stem + std::to_string(s.fresh++);
  switch (t.kind) {
    case MinType::Kind::Str: return sym::TaintString::opaque(key);
    case MinType::Kind::Ref: return Origin::opaque(key, t.record);
    default: return sym::unconstrained(key);
  }
}

std::optional<SymValue> Executor::read_field(ExecState& s, const Origin& o, const std::string& field, const MinType& t,
                                             SourceLoc loc) {
  if (o.kind == Origin::Kind::Opaque) return unknown_value(s, t, "u");
  sym::BlockId b = block_for(s, o);
  auto& fs = s.fields[b];
  auto it = fs.find(field);
  if (it != fs.end()) return it->second;
  SymValue v;
  if (!s.unknown_fields.count(b)) {
    switch (t.kind) {
      case MinType::Kind::Str: v = sym::TaintString{}; break;
      case MinType::Kind::Ref: v = Origin::null(t.record); break;
      default: v = sym::constant(0); break;
    }
    return v;
  }
  if (t.is_ref()) {
    v = Origin::load(o, field, t.record);
  } else {
    v = unknown_value(s, t, "u");
    Feature f;
    f.kind = FeatureKind::Load;
    f.loc = loc;
    f.origin = o;
    f.field = field;
    f.value = v;
    push_feature(s, std::move(f));
  }
  s.fields[b][field] = v;
  return v;
}

void Executor::assign(ExecState s, const Expr& target, SymValue v, const KS& k) {
  switch (target.kind) {
    case ExprKind::Var:
      s.env[target.text] = std::move(v);
      k(std::move(s));
      return;
    case ExprKind::Field:
      eval(std::move(s), *target.kids[0], [this, &target, &k, v](ExecState s1, SymValue bv) {
        Origin o = resolve(s1, std::get<Origin>(bv));
        if (!check_access(s1, o, target.kids[0]->type.record, target.loc)) return;
        SymValue stored = v;
        if (auto* ov = std::get_if<Origin>(&stored)) stored = resolve(s1, *ov);
        Feature f;
        f.kind = FeatureKind::Store;
        f.loc = target.loc;
        f.origin = o;
        f.field = target.text;
        f.value = stored;
        push_feature(s1, std::move(f));
        if (o.kind != Origin::Kind::Opaque) s1.fields[block_for(s1, o)][target.text] = stored;
        k(std::move(s1));
      });
      return;
    case ExprKind::Index:
      eval(std::move(s), *target.kids[0], [this, &target, &k, v](ExecState s1, SymValue iv) {
        int len = static_cast<int>(std::get<SymArray>(s1.env.at(target.text)).elems.size());
        with_index(
            std::move(s1), std::get<Sym>(iv), len, target.loc,
            [&target, &k, &v](ExecState s2, int j) {
              std::get<SymArray>(s2.env.at(target.text)).elems[static_cast<size_t>(j)] = std::get<Sym>(v);
              k(std::move(s2));
            },
            [this, &target, &k](ExecState s2) {
              // Too long to split per element: forget the contents.
              truncated_ = true;
              auto& arr = std::get<SymArray>(s2.env.at(target.text));
              for (auto& e : arr.elems) e = std::get<Sym>(unknown_value(s2, MinType::Int(), "u"));
              k(std::move(s2));
            });
      });
      return;
    default: return;
  }
}

void Executor::eval_args(ExecState s, const Expr& call, size_t i, std::vector<SymValue> acc,
                         const std::function<void(ExecState, std::vector<SymValue>)>& k) {
  if (i == call.kids.size()) {
    k(std::move(s), std::move(acc));
    return;
  }
  eval(std::move(s), *call.kids[i], [this, &call, i, &acc, &k](ExecState s1, SymValue v) {
    std::vector<SymValue> next = acc;
    next.push_back(std::move(v));
    eval_args(std::move(s1), call, i + 1, std::move(next), k);
  });
}

void Executor::eval(ExecState s, const Expr& e, const K& k) {
  switch (e.kind) {
    case ExprKind::IntLit: k(std::move(s), sym::constant(e.int_value)); return;
    case ExprKind::StrLit: k(std::move(s), sym::TaintString::literal(e.text)); return;
    case ExprKind::Var: {
      SymValue v = s.env.at(e.text);
      k(std::move(s), std::move(v));
      return;
    }
    case ExprKind::Binary:
      eval(std::move(s), *e.kids[0], [this, &e, &k](ExecState s1, SymValue l) {
        eval(std::move(s1), *e.kids[1], [&e, &k, l](ExecState s2, SymValue r) {
          k(std::move(s2), sym::binary(e.op, std::get<Sym>(l), std::get<Sym>(r)));
        });
      });
      return;
    case ExprKind::Not:
      eval(std::move(s), *e.kids[0], [&k](ExecState s1, SymValue v) { k(std::move(s1), sym::logical_not(std::get<Sym>(v))); });
      return;
    case ExprKind::Input: {
      int idx = s.ints++;
      k(std::move(s), sym::input_var(idx));
      return;
    }
    case ExprKind::InputStr: {
      int idx = s.strs++;
      k(std::move(s), sym::TaintString::input(idx));
      return;
    }
    case ExprKind::Sanitize:
      eval(std::move(s), *e.kids[0], [&k](ExecState s1, SymValue v) { k(std::move(s1), std::get<sym::TaintString>(v).sanitized()); });
      return;
    case ExprKind::Concat:
      eval(std::move(s), *e.kids[0], [this, &e, &k](ExecState s1, SymValue a) {
        eval(std::move(s1), *e.kids[1], [&k, a](ExecState s2, SymValue b) {
          k(std::move(s2), std::get<sym::TaintString>(a).concat(std::get<sym::TaintString>(b)));
        });
      });
      return;
    case ExprKind::DbQuery:
      eval(std::move(s), *e.kids[0], [this, &e, &k](ExecState s1, SymValue v) {
        const auto& q = std::get<sym::TaintString>(v);
        if (mode_ == ExecMode::Inline && q.has_unsanitized_input()) {
          int slot = *q.first_unsanitized_input();
          fault(std::move(s1), FaultKind::UnsanitizedQuery, e.loc, "query carries unsanitized input " + std::to_string(slot),
                slot);
          return;
        }
        Feature f;
        f.kind = FeatureKind::DbQuery;
        f.loc = e.loc;
        f.query = q;
        push_feature(s1, std::move(f));
        k(std::move(s1), sym::constant(0));
      });
      return;
    case ExprKind::Alloc: {
      std::string site = "a" + std::to_string(e.site);
      int n = s.counters[site]++;
      Origin o = Origin::alloc(s.prefix + site + "." + std::to_string(n), e.text);
      int size = size_of(prog_.record(e.text));
      auto mode = mode_ == ExecMode::Inline ? sym::AllocMode::Deterministic : sym::AllocMode::FreshOnly;
      auto [h, id] = s.heap.alloc(e.text, size, mode)[0];
      s.heap = std::move(h);
      s.block_of[o.str()] = id;
      s.fields.erase(id);
      s.unknown_fields.erase(id);
      if (mode_ == ExecMode::Inline) s.alloc_site[id] = {e.loc, s.chain};
      Feature f;
      f.kind = FeatureKind::Malloc;
      f.loc = e.loc;
      f.origin = o;
      f.record = e.text;
      f.size = size;
      push_feature(s, std::move(f));
      k(std::move(s), o);
      return;
    }
    case ExprKind::Field:
      eval(std::move(s), *e.kids[0], [this, &e, &k](ExecState s1, SymValue bv) {
        Origin o = resolve(s1, std::get<Origin>(bv));
        if (!check_access(s1, o, e.kids[0]->type.record, e.loc)) return;
        auto v = read_field(s1, o, e.text, e.type, e.loc);
        if (auto* ov = std::get_if<Origin>(&*v)) v = resolve(s1, *ov);
        k(std::move(s1), std::move(*v));
      });
      return;
    case ExprKind::Index:
      eval(std::move(s), *e.kids[0], [this, &e, &k](ExecState s1, SymValue iv) {
        const auto& arr = std::get<SymArray>(s1.env.at(e.text)).elems;
        int len = static_cast<int>(arr.size());
        bool uniform = std::all_of(arr.begin(), arr.end(), [&](const Sym& x) { return sym::equal(x, arr[0]); });
        Sym first = arr[0];
        if (uniform) {
          with_index(std::move(s1), std::get<Sym>(iv), len, e.loc, [&k, first](ExecState s2, int) { k(std::move(s2), first); }, {});
          return;
        }
        with_index(
            std::move(s1), std::get<Sym>(iv), len, e.loc,
            [&e, &k](ExecState s2, int j) {
              Sym v = std::get<SymArray>(s2.env.at(e.text)).elems[static_cast<size_t>(j)];
              k(std::move(s2), v);
            },
            [this, &k](ExecState s2) {
              truncated_ = true;
              SymValue v = unknown_value(s2, MinType::Int(), "u");
              k(std::move(s2), std::move(v));
            });
      });
      return;
    case ExprKind::Call:
      eval_args(std::move(s), e, 0, {}, [this, &e, &k](ExecState s1, std::vector<SymValue> args) {
        call(std::move(s1), e, std::move(args), k);
      });
      return;
  }
}

void Executor::call(ExecState s, const Expr& e, std::vector<SymValue> args, const K& k) {
  if (mode_ == ExecMode::Inline) call_inline(std::move(s), e, std::move(args), k);
  else call_summary(std::move(s), e, std::move(args), k);
}

void Executor::call_inline(ExecState s, const Expr& e, std::vector<SymValue> args, const K& k) {
  const FunctionDecl& callee = prog_.function(e.text);
  long depth = std::count_if(s.chain.begin(), s.chain.end(), [&](const CallFrame& f) { return f.function == callee.name; });
  if (depth >= cfg_.call_depth) {
    truncated_ = true;
    warnings_.insert("recursion into " + callee.name + " cut off at depth " + std::to_string(cfg_.call_depth));
    SymValue r = callee.return_type.is_void() ? SymValue{sym::constant(0)} : unknown_value(s, callee.return_type, "r");
    k(std::move(s), std::move(r));
    return;
  }
  std::string site = "c" + std::to_string(e.site);
  int n = s.counters[site]++;
  auto saved_env = std::move(s.env);
  auto saved_counters = std::move(s.counters);
  auto saved_loops = std::move(s.loops);
  std::string saved_prefix = s.prefix;
  s.env.clear();
  s.counters.clear();
  s.loops.clear();
  for (size_t i = 0; i < callee.params.size(); ++i) s.env[callee.params[i].name] = std::move(args[i]);
  s.prefix = saved_prefix + site + "." + std::to_string(n) + "/";
  s.chain.push_back({callee.name, e.site});
  Frame fr{&callee, &cfg_of(callee)};
  Ret ret = [&](ExecState s2, std::optional<SymValue> rv) {
    s2.env = saved_env;
    s2.counters = saved_counters;
    s2.loops = saved_loops;
    s2.prefix = saved_prefix;
    s2.chain.pop_back();
    k(std::move(s2), rv ? std::move(*rv) : SymValue{sym::constant(0)});
  };
  exec_block(std::move(s), fr, fr.cfg->entry, 0, ret);
}

void Executor::call_summary(ExecState s, const Expr& e, std::vector<SymValue> args, const K& k) {
  const FunctionDecl& callee = prog_.function(e.text);
  std::string site = "c" + std::to_string(e.site);
  int n = s.counters[site]++;
  std::string tag = site + "." + std::to_string(n) + "/";
  auto key = resolver_ ? resolver_(callee.name) : std::optional<std::string>(callee.name);
  if (!key) {
    truncated_ = true;
    warnings_.insert("recursion into " + callee.name + " cut off at depth " + std::to_string(cfg_.call_depth) +
                     ": deeper calls return an unknown value and contribute no features");
    bool reaches_heap = std::any_of(callee.params.begin(), callee.params.end(),
                                    [](const Param& p) { return p.type.is_ref(); });
    if (reaches_heap) {
      // The cut-off call may write anywhere it can reach: record a write to
      // an unknown block so callers forget what they knew, and forget here too.
      Feature h;
      h.kind = FeatureKind::Store;
      h.loc = e.loc;
      h.origin = Origin::opaque(tag + "cut", "");
      h.field = "*";
      h.value = sym::constant(0);
      push_feature(s, std::move(h));
      for (const auto& [key_, b] : s.block_of) s.unknown_fields.insert(b);
      s.fields.clear();
    }
    SymValue r = callee.return_type.is_void() ? SymValue{sym::constant(0)} : unknown_value(s, callee.return_type, "r");
    k(std::move(s), std::move(r));
    return;
  }
  const FunctionSummary& sum = summaries_->at(*key);
  if (sum.truncated) truncated_ = true;
  auto applied = apply_summary(sum, callee, args, s.pc, cfg_, tag, s.ints, s.strs);
  for (size_t i = 0; i < applied.size(); ++i) {
    AppliedEntry& a = applied[i];
    const SummaryEntry& ent = sum.entries[static_cast<size_t>(a.entries[0])];
    ExecState s2 = (i + 1 == applied.size()) ? std::move(s) : s;
    size_t call_guard = s2.pc.size();
    s2.pc.insert(s2.pc.end(), a.guard.begin(), a.guard.end());
    if (a.entries.size() == 1 && ent.featureful()) {
      Feature f;
      f.kind = FeatureKind::CallSite;
      f.loc = e.loc;
      f.callee = callee.name;
      f.summary_key = *key;
      f.entry = a.entries[0];
      f.site = e.site;
      f.tag = tag;
      f.args = args;
      f.int_offset = s2.ints;
      f.str_offset = s2.strs;
      push_feature(s2, std::move(f));
      s2.features.back().guard_len = call_guard;
      // Replaying the callee's heap effects in order pins each value it read
      // from a block this frame knows; contradicted entries are dropped.
      std::vector<Sym> reads;
      replay(s2, a.features, reads);
      for (auto& r : reads) s2.pc.push_back({std::move(r), true});
      if (!reads.empty() && !feasible(s2.pc)) continue;
    }
    s2.ints += ent.int_inputs;
    s2.strs += ent.str_inputs;
    if (ent.terminates()) {
      s2.callee_fault = true;
      count_path();
      (*end_)(std::move(s2), std::nullopt);
      continue;
    }
    SymValue r = a.result ? *a.result : SymValue{sym::constant(0)};
    if (auto* o = std::get_if<Origin>(&r)) r = resolve(s2, *o);
    k(std::move(s2), std::move(r));
  }
}

void Executor::replay(ExecState& s, const std::vector<Feature>& features, std::vector<Sym>& reads) {
  auto forget_all = [&s]() {
    for (const auto& [key, b] : s.block_of) s.unknown_fields.insert(b);
    s.fields.clear();
  };
  for (const auto& f : features) {
    switch (f.kind) {
      case FeatureKind::Malloc: {
        auto [h, id] = s.heap.alloc(f.record, f.size, sym::AllocMode::FreshOnly)[0];
        s.heap = std::move(h);
        s.block_of[f.origin.str()] = id;
        break;
      }
      case FeatureKind::Free: {
        Origin o = resolve(s, f.origin);
        if (o.kind == Origin::Kind::Null || o.kind == Origin::Kind::Opaque) break;
        auto r = s.heap.free(block_for(s, o));
        if (auto* h = std::get_if<sym::HeapState>(&r)) s.heap = std::move(*h);
        break;
      }
      case FeatureKind::Store: {
        Origin o = resolve(s, f.origin);
        if (o.kind == Origin::Kind::Null) break;
        if (o.kind == Origin::Kind::Opaque) {
          forget_all();   // the write may have hit any block
          break;
        }
        SymValue v = *f.value;
        if (auto* ov = std::get_if<Origin>(&v)) v = resolve(s, *ov);
        s.fields[block_for(s, o)][f.field] = v;
        break;
      }
      case FeatureKind::Load: {
        Origin o = resolve(s, f.origin);
        if (o.kind == Origin::Kind::Null || o.kind == Origin::Kind::Opaque) break;
        sym::BlockId b = block_for(s, o);
        auto& fs = s.fields[b];
        const Sym* read = std::get_if<Sym>(&*f.value);
        auto it = fs.find(f.field);
        if (read && it != fs.end()) {
          if (const Sym* known = std::get_if<Sym>(&it->second)) reads.push_back(sym::binary(BinOp::Eq, *read, *known));
        } else if (read && !s.unknown_fields.count(b)) {
          reads.push_back(sym::binary(BinOp::Eq, *read, sym::constant(0)));
          fs[f.field] = *f.value;
        } else {
          fs.emplace(f.field, *f.value);
        }
        break;
      }
      case FeatureKind::CallSite: {
        const FunctionSummary& ns = summaries_->at(f.summary_key);
        const SummaryEntry& ne = ns.entries.at(static_cast<size_t>(f.entry));
        Instantiation in = call_instantiation(f, prog_.function(f.callee));
        std::vector<Feature> inner;
        for (const auto& nf : ne.features) inner.push_back(instantiate(nf, in));
        replay(s, inner, reads);
        break;
      }
      case FeatureKind::Access:
      case FeatureKind::DbQuery: break;
    }
  }
}

}  // namespace shardsym
