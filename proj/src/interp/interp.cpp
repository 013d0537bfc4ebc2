#include "shardsym/interp/interp.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "shardsym/symcore/expr.hpp"

namespace shardsym {

std::string to_string(const CallChain& chain) {
  std::string out;
  for (size_t i = 0; i < chain.size(); ++i) {
    if (i) out += ">";
    out += chain[i].function;
    if (chain[i].site >= 0) out += "#" + std::to_string(chain[i].site);
  }
  return out;
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Malloc: return "malloc";
    case EventKind::Free: return "free";
    case EventKind::Access: return "access";
    case EventKind::DbQuery: return "dbquery";
  }
  return "?";
}

std::string ConcreteString::text() const {
  std::string out;
  for (const auto& p : parts) out += p.text;
  return out;
}

const std::vector<std::string>& sql_keywords() {
  static const std::vector<std::string> k = {"SELECT", "UPDATE", "DELETE", "*", "LIKE"};
  return k;
}

bool same_weakness_class(FaultKind a, FaultKind b) {
  auto cls = [](FaultKind k) {
    return k == FaultKind::TypeConfusedUseAfterFree ? FaultKind::UseAfterFree : k;
  };
  return cls(a) == cls(b);
}

namespace {

struct Halt {
  FaultKind kind;
  SourceLoc loc;
  std::string keyword;
};

struct OutOfFuel {};

struct ReturnSignal {
  std::optional<Value> value;
};

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

class Machine {
public:
  Machine(const TypedProgram& p, const InputTape& tape, const RunConfig& cfg) : prog_(p), tape_(tape), cfg_(cfg) {}

  RunOutcome run_main() {
    RunOutcome out = call_top(prog_.program().entry, {});
    if (out.status == RunOutcome::Status::Completed) {
      for (sym::BlockId b : heap_.allocated()) out.leaks.push_back(alloc_event_.at(b));
    }
    return out;
  }

  RunOutcome call_top(const std::string& name, std::vector<Value> args) {
    RunOutcome out;
    try {
      chain_.push_back({name, -1});
      out.result = invoke(prog_.function(name), std::move(args));
      out.status = RunOutcome::Status::Completed;
    } catch (const Halt& h) {
      out.status = RunOutcome::Status::Fault;
      out.fault = h.kind;
      out.fault_loc = h.loc;
      out.fault_chain = chain_;
      out.keyword = h.keyword;
    } catch (const OutOfFuel&) {
      out.status = RunOutcome::Status::FuelExhausted;
    }
    out.trace = std::move(trace_);
    out.steps = steps_;
    return out;
  }

private:
  using Env = std::map<std::string, Value>;

  void tick() {
    if (++steps_ > cfg_.fuel) throw OutOfFuel{};
  }

  std::optional<Value> invoke(const FunctionDecl& f, std::vector<Value> args) {
    Env env;
    for (size_t i = 0; i < f.params.size(); ++i) env[f.params[i].name] = std::move(args[i]);
    envs_.push_back(std::move(env));
    std::optional<Value> result;
    try {
      exec_block(f.body);
    } catch (ReturnSignal& r) {
      result = std::move(r.value);
    }
    envs_.pop_back();
    return result;
  }

  Env& env() { return envs_.back(); }

  void exec_block(const Block& b) {
    for (const auto& s : b) exec(*s);
  }

  void exec(const Stmt& s) {
    tick();
    switch (s.kind) {
      case StmtKind::Let: {
        Value v = eval(*s.value);
        if (s.decl_type.is_array() && std::holds_alternative<std::int32_t>(v))
          v = std::vector<std::int32_t>(static_cast<size_t>(s.decl_type.length), std::get<std::int32_t>(v));
        env()[s.name] = std::move(v);
        break;
      }
      case StmtKind::Assign: assign(*s.target, eval(*s.value)); break;
      case StmtKind::If:
        if (as_int(eval(*s.value)) != 0) exec_block(s.then_block);
        else if (s.has_else) exec_block(s.else_block);
        break;
      case StmtKind::While:
        while (as_int(eval(*s.value)) != 0) {
          tick();
          exec_block(s.then_block);
        }
        break;
      case StmtKind::Return:
        if (s.value) throw ReturnSignal{eval(*s.value)};
        throw ReturnSignal{};
      case StmtKind::Free: {
        sym::BlockId b = std::get<RefValue>(eval(*s.value)).block;
        if (b < 0) throw Halt{FaultKind::InvalidFree, s.loc, {}};
        record_event(EventKind::Free, s.loc, b, heap_.block(b) ? heap_.block(b)->record : "");
        auto r = heap_.free(b);
        if (auto* fault = std::get_if<sym::HeapFault>(&r)) throw Halt{fault->kind, s.loc, {}};
        heap_ = std::get<sym::HeapState>(std::move(r));
        break;
      }
      case StmtKind::ExprStmt: eval(*s.value); break;
    }
  }

  static std::int32_t as_int(const Value& v) { return std::get<std::int32_t>(v); }

  TraceEvent& record_event(EventKind k, SourceLoc loc, sym::BlockId b, std::string record) {
    TraceEvent e;
    e.kind = k;
    e.loc = loc;
    e.chain = chain_;
    e.block = b;
    e.record = std::move(record);
    trace_.push_back(std::move(e));
    return trace_.back();
  }

  // Checks a field access through a reference of static type Ref(record).
  sym::BlockId check_access(const Expr& base_expr, const Value& base, SourceLoc loc) {
    sym::BlockId b = std::get<RefValue>(base).block;
    if (b < 0) throw Halt{FaultKind::InvalidAccess, loc, {}};
    record_event(EventKind::Access, loc, b, base_expr.type.record);
    if (auto fault = heap_.access(b, base_expr.type.record)) throw Halt{fault->kind, loc, {}};
    return b;
  }

  void assign(const Expr& target, Value v) {
    switch (target.kind) {
      case ExprKind::Var: env()[target.text] = std::move(v); break;
      case ExprKind::Field: {
        Value base = eval(*target.kids[0]);
        sym::BlockId b = check_access(*target.kids[0], base, target.loc);
        fields_[b][target.text] = std::move(v);
        break;
      }
      case ExprKind::Index: {
        std::int32_t i = as_int(eval(*target.kids[0]));
        auto& arr = std::get<std::vector<std::int32_t>>(env().at(target.text));
        if (i < 0 || i >= static_cast<std::int32_t>(arr.size())) throw Halt{FaultKind::OutOfBoundsAccess, target.loc, {}};
        arr[static_cast<size_t>(i)] = as_int(v);
        break;
      }
      default: break;
    }
  }

  Value default_value(const MinType& t) {
    switch (t.kind) {
      case MinType::Kind::Str: return ConcreteString{};
      case MinType::Kind::Ref: return RefValue{};
      default: return std::int32_t{0};
    }
  }

  Value eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return e.int_value;
      case ExprKind::StrLit: return ConcreteString{{{e.text, false, false}}};
      case ExprKind::Var: return env().at(e.text);
      case ExprKind::Field: {
        Value base = eval(*e.kids[0]);
        sym::BlockId b = check_access(*e.kids[0], base, e.loc);
        auto& fs = fields_[b];
        auto it = fs.find(e.text);
        if (it == fs.end()) return default_value(e.type);
        return it->second;
      }
      case ExprKind::Index: {
        std::int32_t i = as_int(eval(*e.kids[0]));
        const auto& arr = std::get<std::vector<std::int32_t>>(env().at(e.text));
        if (i < 0 || i >= static_cast<std::int32_t>(arr.size())) throw Halt{FaultKind::OutOfBoundsAccess, e.loc, {}};
        return arr[static_cast<size_t>(i)];
      }
      case ExprKind::Binary: {
        std::int32_t l = as_int(eval(*e.kids[0]));
        std::int32_t r = as_int(eval(*e.kids[1]));
        return sym::apply_binop(e.op, l, r);
      }
      case ExprKind::Not: return std::int32_t{as_int(eval(*e.kids[0])) == 0 ? 1 : 0};
      case ExprKind::Call: {
        std::vector<Value> args;
        for (const auto& k : e.kids) args.push_back(eval(*k));
        tick();
        chain_.push_back({e.text, e.site});
        auto r = invoke(prog_.function(e.text), std::move(args));
        chain_.pop_back();
        return r ? *r : Value{std::int32_t{0}};
      }
      case ExprKind::Alloc: {
        int size = size_of(prog_.record(e.text));
        auto [next, id] = heap_.alloc(e.text, size, sym::AllocMode::Deterministic)[0];
        heap_ = std::move(next);
        fields_.erase(id);
        TraceEvent& ev = record_event(EventKind::Malloc, e.loc, id, e.text);
        ev.size = size;
        ev.placement = heap_.block(id)->placement;
        alloc_event_[id] = ev;
        return RefValue{id};
      }
      case ExprKind::Input: {
        std::int32_t v = next_int_ < tape_.ints.size() ? tape_.ints[next_int_] : 0;
        ++next_int_;
        return v;
      }
      case ExprKind::InputStr: {
        std::string s = next_str_ < tape_.strs.size() ? tape_.strs[next_str_] : std::string();
        ++next_str_;
        return ConcreteString{{{s, true, false}}};
      }
      case ExprKind::Sanitize: {
        ConcreteString s = std::get<ConcreteString>(eval(*e.kids[0]));
        for (auto& p : s.parts) p.sanitized = true;
        return s;
      }
      case ExprKind::Concat: {
        ConcreteString a = std::get<ConcreteString>(eval(*e.kids[0]));
        ConcreteString b = std::get<ConcreteString>(eval(*e.kids[1]));
        a.parts.insert(a.parts.end(), b.parts.begin(), b.parts.end());
        return a;
      }
      case ExprKind::DbQuery: {
        ConcreteString q = std::get<ConcreteString>(eval(*e.kids[0]));
        record_event(EventKind::DbQuery, e.loc, -1, "").query = q.text();
        for (const auto& p : q.parts) {
          if (!p.from_input || p.sanitized) continue;
          std::string t = upper(p.text);
          for (const auto& k : sql_keywords())
            if (t.find(k) != std::string::npos) throw Halt{FaultKind::UnsanitizedQuery, e.loc, k};
        }
        return std::int32_t{0};
      }
    }
    return std::int32_t{0};
  }

  const TypedProgram& prog_;
  const InputTape& tape_;
  RunConfig cfg_;
  sym::HeapState heap_;
  std::map<sym::BlockId, std::map<std::string, Value>> fields_;
  std::map<sym::BlockId, TraceEvent> alloc_event_;
  std::vector<Env> envs_;
  CallChain chain_;
  std::vector<TraceEvent> trace_;
  size_t next_int_ = 0;
  size_t next_str_ = 0;
  std::int64_t steps_ = 0;
};

}  // namespace

RunOutcome run(const TypedProgram& p, const InputTape& tape, const RunConfig& cfg) {
  Machine m(p, tape, cfg);
  return m.run_main();
}

RunOutcome call_function(const TypedProgram& p, const std::string& name, const std::vector<std::int32_t>& args,
                         const InputTape& tape, const RunConfig& cfg) {
  Machine m(p, tape, cfg);
  std::vector<Value> vs(args.begin(), args.end());
  return m.call_top(name, std::move(vs));
}

bool replay_witness(const TypedProgram& p, const InputTape& tape, const ExpectedFault& expected, const RunConfig& cfg) {
  RunOutcome o = run(p, tape, cfg);
  if (!o.faulted()) return false;
  if (!same_weakness_class(o.fault, expected.kind)) return false;
  if (!(o.fault_loc == expected.loc)) return false;
  return expected.chain.empty() || o.fault_chain == expected.chain;
}

}  // namespace shardsym
