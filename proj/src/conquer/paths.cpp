#include "shardsym/conquer/paths.hpp"

#include <map>

namespace shardsym {

const char* to_string(PathEventKind k) {
  switch (k) {
    case PathEventKind::Malloc: return "malloc";
    case PathEventKind::Free: return "free";
    case PathEventKind::Access: return "access";
    case PathEventKind::DbQuery: return "dbquery";
    case PathEventKind::Fault: return "fault";
    case PathEventKind::End: return "end";
  }
  return "?";
}

namespace {

// Where a main-terms reference points on the simulated heap.
struct Target {
  enum class Kind { Null, Block, Unknown };
  Kind kind = Kind::Unknown;
  sym::BlockId block = -1;
};

struct Cursor {
  const SummaryEntry* entry = nullptr;
  size_t idx = 0;
  Instantiation to_main;   // this frame's terms -> main's terms
  std::vector<FrameRef> frames;
  CallChain chain;
};

struct Sim {
  sym::HeapState heap;
  std::map<std::string, sym::BlockId> block_of;
  std::map<sym::BlockId, std::map<std::string, Target>> ref_fields;
  std::map<sym::BlockId, std::map<std::string, sym::Sym>> int_fields;
  std::vector<Cursor> stack;
  std::shared_ptr<FeaturePath> path;
  bool havoc = false;   // a write hit an unknown block: unwritten fields are unknown
};

class Enumerator {
public:
  Enumerator(const TypedProgram& p, const ProgramSummaries& s, const AnalysisConfig& cfg,
             const std::function<bool(std::shared_ptr<const FeaturePath>)>& sink)
      : prog_(p), sums_(s), cfg_(cfg), sink_(sink) {}

  PathStats run() {
    const std::string& main = prog_.program().entry;
    const FunctionSummary& ms = sums_.of(main);
    if (ms.truncated) stats_.truncated = true;
    for (size_t i = 0; i < ms.entries.size() && !stopped_; ++i) {
      const SummaryEntry& e = ms.entries[i];
      if (cfg_.prune_infeasible && sym::check_sat(e.guard, cfg_.solver).unsat()) {
        ++stats_.pruned;
        continue;
      }
      Sim s;
      s.path = std::make_shared<FeaturePath>();
      s.path->main_entry = static_cast<int>(i);
      s.path->guard = e.guard;
      Cursor c;
      c.entry = &e;
      c.frames = {FrameRef{main, ms.key, static_cast<int>(i), {}}};
      c.chain = {{main, -1}};
      s.stack.push_back(std::move(c));
      walk(std::move(s));
    }
    return std::move(stats_);
  }

private:
  static void forget(Sim& s) {
    s.havoc = true;
    s.ref_fields.clear();
    s.int_fields.clear();
  }

  Target resolve(const Sim& s, const Origin& o) const {
    switch (o.kind) {
      case Origin::Kind::Null: return {Target::Kind::Null, -1};
      case Origin::Kind::Alloc: {
        auto it = s.block_of.find(o.str());
        if (it == s.block_of.end()) return {};
        return {Target::Kind::Block, it->second};
      }
      case Origin::Kind::Load: {
        Target base = resolve(s, *o.base);
        if (base.kind != Target::Kind::Block) return {};
        auto fs = s.ref_fields.find(base.block);
        if (fs != s.ref_fields.end()) {
          auto v = fs->second.find(o.field);
          if (v != fs->second.end()) return v->second;
        }
        if (s.havoc) return {};
        return {Target::Kind::Null, -1};   // never stored: the default null
      }
      default: return {};
    }
  }

  PathEvent event(const Cursor& c, PathEventKind k, const Feature& f) const {
    PathEvent e;
    e.kind = k;
    e.loc = f.loc;
    e.chain = c.chain;
    e.frames = c.frames;
    e.guard_len = f.guard_len;
    e.origin = f.origin.str();
    e.record = f.record;
    return e;
  }

  bool feasible(const Sim& s) const {
    sym::PathCondition pc = s.path->guard;
    for (const auto& [at, b] : s.path->bindings) pc.push_back({b, true});
    return !sym::check_sat(pc, cfg_.solver).unsat();
  }

  void finish(Sim& s, bool complete) {
    if (complete) {
      PathEvent end;
      end.kind = PathEventKind::End;
      end.chain = {{prog_.program().entry, -1}};
      end.frames = {FrameRef{prog_.program().entry, sums_.of(prog_.program().entry).key, s.path->main_entry, {}}};
      s.path->events.push_back(std::move(end));
    }
    if (s.path->truncated) stats_.truncated = true;
    if (++stats_.paths > cfg_.paths_max) {
      stats_.truncated = true;
      stats_.warnings.insert("TraceBudgetExceeded: more than " + std::to_string(cfg_.paths_max) +
                             " feature paths; the remaining paths were not explored");
      stopped_ = true;
      return;
    }
    if (!sink_(s.path)) stopped_ = true;
  }

  // Advances one path until it ends or forks on a heap placement.
  void walk(Sim s) {
    for (;;) {
      if (stopped_) return;
      if (s.stack.empty()) {
        finish(s, true);
        return;
      }
      Cursor& c = s.stack.back();
      if (c.idx == c.entry->features.size()) {
        if (c.entry->fault) {
          PathEvent e;
          e.kind = PathEventKind::Fault;
          e.loc = c.entry->fault->loc;
          e.chain = c.chain;
          e.frames = c.frames;
          e.guard_len = c.entry->fault->guard_len;
          e.fault = c.entry->fault->kind;
          s.path->events.push_back(std::move(e));
          finish(s, false);
          return;
        }
        s.stack.pop_back();
        continue;
      }
      if (static_cast<int>(s.path->events.size()) >= cfg_.trace_max) {
        s.path->truncated = true;
        stats_.warnings.insert("TraceBudgetExceeded: a feature path exceeded " + std::to_string(cfg_.trace_max) +
                               " events and was cut");
        finish(s, false);
        return;
      }
      const Feature& local = c.entry->features[c.idx++];
      Feature f = instantiate(local, c.to_main);
      switch (f.kind) {
        case FeatureKind::Malloc: {
          PathEvent proto = event(c, PathEventKind::Malloc, f);
          proto.size = f.size;
          std::string key = f.origin.str();
          auto branches = s.heap.alloc(f.record, f.size, sym::AllocMode::AlsoReuse);
          for (size_t i = 0; i < branches.size(); ++i) {
            Sim b;
            if (i + 1 == branches.size()) {
              b = std::move(s);
            } else {
              b = s;
              b.path = std::make_shared<FeaturePath>(*s.path);
            }
            auto& [heap, id] = branches[i];
            b.heap = std::move(heap);
            b.block_of[key] = id;
            PathEvent e = proto;
            e.block = id;
            e.placement = b.heap.block(id)->placement;
            b.path->events.push_back(std::move(e));
            walk(std::move(b));
            if (stopped_) return;
          }
          return;
        }
        case FeatureKind::Free: {
          PathEvent e = event(c, PathEventKind::Free, f);
          Target t = resolve(s, f.origin);
          if (t.kind == Target::Kind::Unknown) {
            s.path->events.push_back(std::move(e));
            break;
          }
          if (t.kind == Target::Kind::Null) {
            e.fault = FaultKind::InvalidFree;
            s.path->events.push_back(std::move(e));
            finish(s, false);
            return;
          }
          e.block = t.block;
          e.record = s.heap.block(t.block)->record;
          auto r = s.heap.free(t.block);
          if (auto* hf = std::get_if<sym::HeapFault>(&r)) {
            e.fault = hf->kind;
            s.path->events.push_back(std::move(e));
            finish(s, false);
            return;
          }
          s.heap = std::get<sym::HeapState>(std::move(r));
          s.path->events.push_back(std::move(e));
          break;
        }
        case FeatureKind::Access: {
          PathEvent e = event(c, PathEventKind::Access, f);
          Target t = resolve(s, f.origin);
          if (t.kind == Target::Kind::Null) {
            e.fault = FaultKind::InvalidAccess;
            s.path->events.push_back(std::move(e));
            finish(s, false);
            return;
          }
          if (t.kind == Target::Kind::Block) {
            e.block = t.block;
            if (auto hf = s.heap.access(t.block, f.record)) {
              e.fault = hf->kind;
              s.path->events.push_back(std::move(e));
              finish(s, false);
              return;
            }
          }
          s.path->events.push_back(std::move(e));
          break;
        }
        case FeatureKind::Store: {
          Target t = resolve(s, f.origin);
          if (t.kind == Target::Kind::Unknown) {
            forget(s);
            break;
          }
          if (t.kind != Target::Kind::Block || !f.value) break;
          if (auto* o = std::get_if<Origin>(&*f.value)) s.ref_fields[t.block][f.field] = resolve(s, *o);
          else if (auto* v = std::get_if<sym::Sym>(&*f.value)) s.int_fields[t.block][f.field] = *v;
          break;
        }
        case FeatureKind::Load: {
          Target t = resolve(s, f.origin);
          if (t.kind != Target::Kind::Block || !f.value) break;
          auto* var = std::get_if<sym::Sym>(&*f.value);
          if (!var) break;
          sym::Sym stored = sym::constant(0);
          auto fs = s.int_fields.find(t.block);
          bool known = false;
          if (fs != s.int_fields.end()) {
            auto it = fs->second.find(f.field);
            if (it != fs->second.end()) {
              stored = it->second;
              known = true;
            }
          }
          if (!known && s.havoc) {
            s.int_fields[t.block][f.field] = *var;
            break;
          }
          // Later reads of the same field see the same value.
          s.int_fields[t.block][f.field] = stored;
          sym::Sym b = sym::binary(BinOp::Eq, *var, stored);
          if (sym::const_value(b)) break;
          // A fresh unknown can always take the stored value; only check when it is shared.
          bool shared = false;
          auto vars = sym::vars_of(*var);
          for (const auto& l : s.path->guard)
            for (const auto& v : sym::vars_of(l.cond)) shared |= vars.count(v) > 0;
          for (const auto& [at, prev] : s.path->bindings)
            for (const auto& v : sym::vars_of(prev)) shared |= vars.count(v) > 0;
          s.path->bindings.push_back({s.path->events.size(), b});
          if (shared && cfg_.prune_infeasible && !feasible(s)) {
            ++stats_.pruned;
            return;
          }
          break;
        }
        case FeatureKind::DbQuery: {
          PathEvent e = event(c, PathEventKind::DbQuery, f);
          e.query = f.query;
          s.path->events.push_back(std::move(e));
          break;
        }
        case FeatureKind::CallSite: {
          const FunctionDecl& callee = prog_.function(f.callee);
          const FunctionSummary& cs = sums_.table.at(f.summary_key);
          Cursor next;
          next.entry = &cs.entries.at(static_cast<size_t>(f.entry));
          next.to_main = call_instantiation(f, callee);
          next.frames = c.frames;
          next.frames.push_back(FrameRef{callee.name, f.summary_key, f.entry, local});
          next.chain = c.chain;
          next.chain.push_back({callee.name, f.site});
          if (cs.truncated) s.path->truncated = true;
          s.stack.push_back(std::move(next));
          break;
        }
      }
    }
  }

  const TypedProgram& prog_;
  const ProgramSummaries& sums_;
  const AnalysisConfig& cfg_;
  const std::function<bool(std::shared_ptr<const FeaturePath>)>& sink_;
  PathStats stats_;
  bool stopped_ = false;
};

}  // namespace

PathStats enumerate_feature_paths(const TypedProgram& p, const ProgramSummaries& s, const AnalysisConfig& cfg,
                                  const std::function<bool(std::shared_ptr<const FeaturePath>)>& sink) {
  return Enumerator(p, s, cfg, sink).run();
}

}  // namespace shardsym
