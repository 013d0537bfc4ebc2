#include <filesystem>
#include <sstream>

#include "shardsym/driver/driver.hpp"

namespace shardsym {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

BenchRow row_of(const std::string& program, const Report& r, const std::optional<Expectation>& e, bool check) {
  BenchRow row;
  row.program = program;
  row.method = r.mode;
  row.time_ms = r.timing.total_ms;
  row.peak_paths = r.paths;
  row.limit_hit = r.limit_hit;
  row.verified = r.count(FindingStatus::Verified);
  row.leak_warnings = r.count(FindingStatus::Warning);
  if (e) {
    std::vector<std::string> mism = check_expectation(r, *e);
    row.found = std::none_of(mism.begin(), mism.end(), [](const std::string& m) { return m.rfind("missing", 0) == 0; });
    if (check) row.mismatches = std::move(mism);
  } else {
    row.found = row.verified > 0;
    if (check) row.mismatches.push_back("no expectation sidecar");
  }
  return row;
}

}  // namespace

std::vector<BenchRow> bench(const std::string& dir, const AnalysisConfig& cfg, const std::vector<WeaknessModel>& models,
                            const BenchOptions& opt, const std::function<void(const BenchRow&)>& progress) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".minc") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<BenchRow> rows;
  for (const auto& file : files) {
    std::string name = file.stem().string();
    TypedProgram p = load_program_file(file.string());
    std::optional<Expectation> exp;
    auto side = file;
    side.replace_extension(".expect.json");
    if (std::filesystem::exists(side)) exp = load_expectation(side.string());
    auto emit = [&](BenchRow row) {
      if (progress) progress(row);
      rows.push_back(std::move(row));
    };
    if (opt.divide) {
      Report r;
      run_with_large_stack([&] { r = analyze(p, file.string(), cfg, models); });
      emit(row_of(name, r, exp, true));
    }
    if (opt.baseline) {
      AnalysisConfig bc = cfg;
      if (opt.baseline_timeout_s) bc.timeout_s = *opt.baseline_timeout_s;
      Report r;
      run_with_large_stack([&] { r = baseline_analyze(p, file.string(), bc); });
      emit(row_of(name, r, exp, r.limit_hit == "none"));
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "program,method,found,time_ms,peak_paths,limit_hit,verified,leak_warnings,mismatches\n";
  for (const auto& r : rows) {
    std::string mism;
    for (const auto& m : r.mismatches) mism += (mism.empty() ? "" : "; ") + m;
    char t[32];
    std::snprintf(t, sizeof t, "%.1f", r.time_ms);
    out << csv_field(r.program) << ',' << r.method << ',' << (r.found ? "true" : "false") << ',' << t << ','
        << r.peak_paths << ',' << r.limit_hit << ',' << r.verified << ',' << r.leak_warnings << ',' << csv_field(mism)
        << '\n';
  }
  return out.str();
}

}  // namespace shardsym
