#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shardsym/divide/summary.hpp"
#include "shardsym/graphs/cfg.hpp"
#include "shardsym/interp/interp.hpp"

namespace shardsym {

enum class ExecMode {
  Summarize,   // calls apply callee summaries; features are recorded
  Inline,      // calls are executed in place over one precise heap (baseline)
};

/// Symbolic state of one path.
struct ExecState {
  std::map<std::string, SymValue> env;   // current frame
  sym::PathCondition pc;
  std::vector<Feature> features;
  sym::HeapState heap;
  std::map<std::string, sym::BlockId> block_of;   // origin -> block
  std::map<sym::BlockId, std::map<std::string, SymValue>> fields;
  std::set<sym::BlockId> unknown_fields;   // unset fields of these blocks are unknown, not default
  int ints = 0;
  int strs = 0;
  int fresh = 0;
  std::map<std::string, int> counters;     // per-frame instance numbers of alloc and call sites
  std::map<int, int> loops;                // per-frame iterations per loop guard
  std::string prefix;                      // Inline: allocation key prefix of the current frame
  CallChain chain;
  std::optional<RangeFinding> fault;
  bool callee_fault = false;
  std::map<sym::BlockId, std::pair<SourceLoc, CallChain>> alloc_site;   // Inline: for leak reports
};

struct BudgetExceeded {
  std::string what;   // "timeout" or "paths"
};

class Executor {
public:
  using CalleeResolver = std::function<std::optional<std::string>(const std::string&)>;
  using EndFn = std::function<void(ExecState&&, std::optional<SymValue>)>;

  Executor(const TypedProgram& p, const AnalysisConfig& cfg, ExecMode mode, const SummaryTable* summaries = nullptr,
           CalleeResolver resolver = {});

  /// Explores every path of `f` from `init`, calling `on_end` once per
  /// finished path (including paths that end in a fault). May throw
  /// BudgetExceeded.
  void run(const FunctionDecl& f, ExecState init, const EndFn& on_end);

  /// Parameters bound to their symbolic leaves (Summarize mode).
  ExecState initial_state(const FunctionDecl& f) const;

  void set_deadline(std::chrono::steady_clock::time_point d) { deadline_ = d; has_deadline_ = true; }
  void set_path_budget(long long n) { path_budget_ = n; }

  bool truncated() const { return truncated_; }
  const std::set<std::string>& warnings() const { return warnings_; }
  long long paths() const { return paths_; }

private:
  using K = std::function<void(ExecState, SymValue)>;
  using KS = std::function<void(ExecState)>;
  using Ret = std::function<void(ExecState, std::optional<SymValue>)>;

  struct Frame {
    const FunctionDecl* fn;
    const Cfg* cfg;
  };

  const Cfg& cfg_of(const FunctionDecl& f);

  void exec_block(ExecState s, const Frame& fr, int block, size_t idx, const Ret& ret);
  void terminate(ExecState s, const Frame& fr, int block, const Ret& ret);
  void follow(ExecState s, const Frame& fr, int from, int to, EdgeKind kind, const Ret& ret);
  void exec_stmt(ExecState s, const Stmt& st, const KS& k);
  void eval(ExecState s, const Expr& e, const K& k);
  void eval_args(ExecState s, const Expr& call, size_t i, std::vector<SymValue> acc,
                 const std::function<void(ExecState, std::vector<SymValue>)>& k);
  void assign(ExecState s, const Expr& target, SymValue v, const KS& k);
  void call(ExecState s, const Expr& e, std::vector<SymValue> args, const K& k);
  void call_inline(ExecState s, const Expr& e, std::vector<SymValue> args, const K& k);
  void call_summary(ExecState s, const Expr& e, std::vector<SymValue> args, const K& k);

  // Branches on `cond`; each feasible side continues with the literal added.
  void branch(ExecState s, const sym::Sym& cond, const std::function<void(ExecState, bool)>& k);
  // Forks on every feasible in-range value of a symbolic index after splitting off the out-of-range path.
  void with_index(ExecState s, const sym::Sym& index, int len, SourceLoc loc, const std::function<void(ExecState, int)>& k,
                  const std::function<void(ExecState)>& widened);

  bool feasible(const sym::PathCondition& pc);
  void fault(ExecState s, FaultKind kind, SourceLoc loc, std::string detail, int input_index = -1);
  void count_path();

  sym::BlockId block_for(ExecState& s, const Origin& o);
  Origin resolve(const ExecState& s, const Origin& o) const;
  // Applies the heap effects of instantiated callee features to the local
  // heap; every callee read of a field this frame knows adds an equality to `reads`.
  void replay(ExecState& s, const std::vector<Feature>& features, std::vector<sym::Sym>& reads);
  bool check_access(ExecState& s, const Origin& o, const std::string& record, SourceLoc loc);
  std::optional<SymValue> read_field(ExecState& s, const Origin& o, const std::string& field, const MinType& t,
                                     SourceLoc loc);
  SymValue unknown_value(ExecState& s, const MinType& t, const std::string& stem);
  void push_feature(ExecState& s, Feature f);

  const TypedProgram& prog_;
  AnalysisConfig cfg_;
  ExecMode mode_;
  const SummaryTable* summaries_;
  CalleeResolver resolver_;
  std::map<std::string, Cfg> cfgs_;
  const EndFn* end_ = nullptr;
  bool truncated_ = false;
  std::set<std::string> warnings_;
  long long paths_ = 0;
  long long path_budget_ = -1;
  bool has_deadline_ = false;
  std::chrono::steady_clock::time_point deadline_;
};

}  // namespace shardsym
