#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "shardsym/divide/summary_json.hpp"
#include "shardsym/driver/driver.hpp"
#include "shardsym/graphs/callgraph.hpp"
#include "shardsym/graphs/cfg.hpp"

using namespace shardsym;

namespace {

struct Options {
  AnalysisConfig cfg;
  std::string domain;
  std::string models_dir = SHARDSYM_MODELS_DIR;
  bool no_prune = false;
};

void add_analysis_flags(CLI::App* app, Options& o) {
  app->add_option("--loop-bound", o.cfg.loop_bound, "Loop iterations explored per loop")->capture_default_str();
  app->add_option("--call-depth", o.cfg.call_depth, "Recursion unfolding depth")->capture_default_str();
  app->add_option("--paths-max", o.cfg.paths_max, "Summary entries per function and feature paths")->capture_default_str();
  app->add_option("--trace-max", o.cfg.trace_max, "Events per feature path")->capture_default_str();
  app->add_option("--solver-domain", o.domain, "Integer domain LO..HI (default -1024..1023)");
  app->add_option("--solver-vars-max", o.cfg.solver.vars_max, "Variables per query before Unknown")->capture_default_str();
  app->add_option("--timeout", o.cfg.timeout_s, "Seconds per phase (summary per function, baseline per program)")
      ->capture_default_str();
  app->add_option("--baseline-paths-max", o.cfg.baseline_paths_max, "Baseline path budget")->capture_default_str();
  app->add_option("--models", o.models_dir, "Weakness model directory")->capture_default_str();
  app->add_flag("--no-prune", o.no_prune, "Keep paths the solver proves infeasible");
}

void finish_options(Options& o) {
  if (!o.domain.empty()) {
    auto dots = o.domain.find("..");
    if (dots == std::string::npos) throw CLI::ValidationError("--solver-domain", "expected LO..HI");
    try {
      o.cfg.solver.domain.lo = std::stoi(o.domain.substr(0, dots));
      o.cfg.solver.domain.hi = std::stoi(o.domain.substr(dots + 2));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--solver-domain", "expected LO..HI");
    }
    if (o.cfg.solver.domain.lo > o.cfg.solver.domain.hi) throw CLI::ValidationError("--solver-domain", "LO > HI");
  }
  if (o.no_prune) o.cfg.prune_infeasible = false;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void emit_cfgs(const TypedProgram& p, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& f : p.program().functions) write_file(dir + "/" + f.name + ".dot", cfg_to_dot(build_cfg(f)));
  write_file(dir + "/callgraph.dot", callgraph_to_dot(build_call_graph(p)));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(item);
  if (s.back() == ',') out.emplace_back();
  return out;
}

void print_summary(const Report& r, std::ostream& os) {
  os << r.program << " [" << r.mode << "]: " << r.count(FindingStatus::Verified) << " verified, "
     << r.count(FindingStatus::Refuted) << " refuted, " << r.count(FindingStatus::Unknown) << " unknown, "
     << r.count(FindingStatus::Warning) << " leak warning(s)";
  if (r.limit_hit != "none") os << ", limit hit: " << r.limit_hit;
  os << "\n";
  for (const auto& f : r.findings) {
    os << "  " << to_string(f.status) << " " << f.cwe << " at " << to_string(f.loc) << " in " << to_string(f.chain);
    if (f.status == FindingStatus::Verified) {
      os << " witness ints=[";
      for (size_t i = 0; i < f.witness.ints.size(); ++i) os << (i ? "," : "") << f.witness.ints[i];
      os << "] strs=[";
      for (size_t i = 0; i < f.witness.strs.size(); ++i) os << (i ? "," : "") << '"' << f.witness.strs[i] << '"';
      os << "]";
    } else if (!f.reason.empty()) {
      os << " (" << f.reason << ")";
    }
    os << "\n";
  }
  for (const auto& w : r.warnings) os << "  warning: " << w << "\n";
}

int emit_report(const Report& r, const std::string& report_path) {
  std::string json = report_json(r).dump(2) + "\n";
  if (report_path.empty()) {
    std::cout << json;
  } else {
    write_file(report_path, json);
    print_summary(r, std::cout);
  }
  return r.has_verified() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional symbolic execution for heap and injection weaknesses in MinC programs"};
  app.require_subcommand(1);

  Options opt;
  std::string file, report_path, cfg_dir, summaries_path;

  auto* analyze_cmd = app.add_subcommand("analyze", "Divide, conquer and verify one program");
  analyze_cmd->add_option("file", file, "MinC source file")->required();
  analyze_cmd->add_option("--report", report_path, "Write the JSON report here (default: standard output)");
  analyze_cmd->add_option("--emit-cfg", cfg_dir, "Write one DOT file per function and the call graph here");
  analyze_cmd->add_option("--emit-summaries", summaries_path, "Write the function summaries as JSON here");
  add_analysis_flags(analyze_cmd, opt);

  auto* baseline_cmd = app.add_subcommand("baseline", "Whole-program symbolic execution with inlined calls");
  baseline_cmd->add_option("file", file, "MinC source file")->required();
  baseline_cmd->add_option("--report", report_path, "Write the JSON report here (default: standard output)");
  baseline_cmd->add_option("--emit-cfg", cfg_dir, "Write one DOT file per function and the call graph here");
  add_analysis_flags(baseline_cmd, opt);

  std::string ints_arg, strs_arg;
  std::int64_t fuel = RunConfig{}.fuel;
  auto* run_cmd = app.add_subcommand("run", "Run a program concretely on an input tape");
  run_cmd->add_option("file", file, "MinC source file")->required();
  run_cmd->add_option("--ints", ints_arg, "Comma-separated int inputs");
  run_cmd->add_option("--strs", strs_arg, "Comma-separated string inputs");
  run_cmd->add_option("--fuel", fuel, "Step limit")->capture_default_str();

  std::string bench_dir, csv_path, method = "both";
  std::optional<double> baseline_timeout;
  auto* bench_cmd = app.add_subcommand("bench", "Run both methods over a corpus and check expectations");
  bench_cmd->add_option("dir", bench_dir, "Corpus directory")->required();
  bench_cmd->add_option("--csv", csv_path, "Write the CSV here (default: standard output)");
  bench_cmd->add_option("--method", method, "both | divide | baseline")
      ->check(CLI::IsMember({"both", "divide", "baseline"}))
      ->capture_default_str();
  bench_cmd->add_option("--baseline-timeout", baseline_timeout, "Baseline seconds per program (default: --timeout)");
  add_analysis_flags(bench_cmd, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    finish_options(opt);
    if (*run_cmd) {
      InputTape tape;
      for (const auto& s : split_list(ints_arg)) tape.ints.push_back(static_cast<std::int32_t>(std::stol(s)));
      tape.strs = split_list(strs_arg);
      TypedProgram p = load_program_file(file);
      RunConfig rc;
      rc.fuel = fuel;
      RunOutcome o;
      run_with_large_stack([&] { o = run(p, tape, rc); });
      std::cout << run_outcome_json(o).dump(2) << "\n";
      return 0;
    }
    if (*bench_cmd) {
      BenchOptions bo;
      bo.divide = method != "baseline";
      bo.baseline = method != "divide";
      bo.baseline_timeout_s = baseline_timeout;
      auto models = bo.divide ? load_models(opt.models_dir) : std::vector<WeaknessModel>{};
      auto rows = bench(bench_dir, opt.cfg, models, bo, [](const BenchRow& r) {
        char ms[32];
        std::snprintf(ms, sizeof ms, "%.1f", r.time_ms);
        std::cerr << r.program << " " << r.method << " " << ms << " ms"
                  << (r.limit_hit != "none" ? " (limit: " + r.limit_hit + ")" : "") << "\n";
      });
      std::string csv = bench_csv(rows);
      if (csv_path.empty()) std::cout << csv;
      else write_file(csv_path, csv);
      int bad = 0;
      for (const auto& r : rows)
        for (const auto& m : r.mismatches) {
          std::cerr << "mismatch: " << r.program << " [" << r.method << "]: " << m << "\n";
          ++bad;
        }
      return bad ? 1 : 0;
    }
    TypedProgram p = load_program_file(file);
    if (!cfg_dir.empty()) emit_cfgs(p, cfg_dir);
    Report r;
    if (*analyze_cmd) {
      auto models = load_models(opt.models_dir);
      ProgramSummaries sums;
      run_with_large_stack([&] { r = analyze(p, file, opt.cfg, models, &sums); });
      if (!summaries_path.empty()) write_file(summaries_path, to_json(sums).dump(2) + "\n");
    } else {
      run_with_large_stack([&] { r = baseline_analyze(p, file, opt.cfg); });
    }
    return emit_report(r, report_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
