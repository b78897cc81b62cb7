#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ffnspec/fixtures.hpp"
#include "ffnspec/pipeline.hpp"
#include "ffnspec/report.hpp"
#include "ffnspec/scaling_fit.hpp"
#include "ffnspec/synthetic.hpp"

namespace ffnspec::cli {

namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> metric_names() {
  std::vector<std::string> names;
  for (auto m : kAllMetrics) names.emplace_back(to_string(m));
  return names;
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<AuditRecord> read_reports(const std::vector<std::string>& paths) {
  std::vector<AuditRecord> records;
  for (const auto& p : paths) {
    auto part = parse_audit_json(read_text(p));
    records.insert(records.end(), part.begin(), part.end());
  }
  return records;
}

StepWindow parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--window expects START:END");
  try {
    std::size_t used = 0;
    StepWindow w;
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    w.start = std::stoll(a, &used);
    if (used != a.size()) throw UsageError("bad window start");
    w.end = std::stoll(b, &used);
    if (used != b.size()) throw UsageError("bad window end");
    if (w.end < w.start) throw UsageError("--window END is before START");
    return w;
  } catch (const std::logic_error&) {
    throw UsageError("--window expects integer START:END");
  }
}

Tap require_tap(const std::string& text) {
  auto tap = parse_tap(text);
  if (!tap) throw UsageError("unknown tap " + text);
  return *tap;
}

// ---------------------------------------------------------------- audit

struct AuditArgs {
  std::vector<std::string> inputs;
  std::string output = "-";
  std::string run_id;
  double tol = kDefaultClampTolerance;
  unsigned jobs = 1;
};

int cmd_audit(const AuditArgs& a, std::ostream& out, std::ostream& err) {
  if (!a.run_id.empty() && a.inputs.size() > 1) {
    throw UsageError("--run-id applies to a single --input directory");
  }
  AuditOptions options;
  options.tolerance = a.tol;
  options.jobs = a.jobs;

  std::vector<AuditRecord> records;
  std::size_t failures = 0;
  for (const auto& input : a.inputs) {
    const fs::path dir(input);
    std::string run = a.run_id;
    if (run.empty()) {
      run = fs::path(dir).lexically_normal().filename().string();
      if (run.empty()) run = fs::path(dir).lexically_normal().parent_path().filename().string();
    }
    const RunAudit result = audit_run(dir, run, options);
    for (const auto& f : result.failures) {
      ++failures;
      if (f.group) {
        err << fmt::format("audit: run {} layer {} step {} {}: {}\n", f.run, f.group->layer,
                           f.group->step, to_string(f.group->tap), f.message);
      } else {
        err << fmt::format("audit: run {} file {}: {}\n", f.run, f.path.string(), f.message);
      }
    }
    records.insert(records.end(), result.records.begin(), result.records.end());
  }
  sort_records(records);
  write_output(a.output, emit_json(records), out);
  if (a.output != "-") {
    out << fmt::format("audited {} groups, {} failures\n", records.size(), failures);
  }
  return failures == 0 ? kExitOk : kExitDataError;
}

// ---------------------------------------------------------------- table3

struct Table3Args {
  std::vector<double> alphas = kDefaultAlphas;
  std::vector<std::int64_t> dims = kDefaultWidths;
  std::string output = "-";
  bool display = false;
};

int cmd_table3(const Table3Args& a, std::ostream& out) {
  const auto rows = table3_report(a.alphas, a.dims);
  write_output(a.output, table3_csv(rows, a.display), out);
  return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> metrics = {"hard_rank", "soft_rank"};
  std::vector<std::string> norms = {"raw", "per_width_minus_one"};
  std::string window;
  std::string stat = "median";
  std::string tap = "post_activation";
  std::string output = "-";
  int decimals = 3;
  bool per_layer = false;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const Tap tap = require_tap(a.tap);
  FitOptions options;
  options.statistic = *parse_statistic(a.stat);
  if (!a.window.empty()) options.window = parse_window(a.window);

  const auto records = read_reports(a.inputs);
  const WidthSweepSeries series = to_series(records, tap);

  const auto widths = series.widths();
  if (widths.size() < 3) {
    throw Error(ErrorCode::TooFewWidths,
                fmt::format("report has {} distinct widths, need at least 3", widths.size()));
  }

  std::vector<FitRequest> requests;
  for (const auto& m : a.metrics) {
    for (const auto& n : a.norms) {
      requests.push_back({*parse_metric(m), *parse_norm(n)});
    }
  }
  std::string table;
  if (a.per_layer) {
    const auto fits = fit_sweep_per_layer(series, requests, options);
    table = emit_layer_fit_table(fits, a.decimals);
  } else {
    const auto fits = fit_sweep(series, requests, options);
    table = emit_fit_table(fits, a.decimals);
    if (a.output != "-") {
      for (const auto& f : fits) {
        out << fmt::format("{} {}: beta={:.3f} r2={:.3f} ci95={:.3f}{}\n",
                           to_string(f.request.metric), to_string(f.request.norm), f.fit.beta,
                           f.fit.r2, f.fit.ci95, f.fit.degenerate ? " (degenerate)" : "");
      }
    } else {
      for (const auto& f : fits) {
        err << fmt::format("{} {}: beta={:.3f} r2={:.3f}\n", to_string(f.request.metric),
                           to_string(f.request.norm), f.fit.beta, f.fit.r2);
      }
    }
  }
  write_output(a.output, table, out);
  return kExitOk;
}

// ---------------------------------------------------------------- heatmap

struct HeatmapArgs {
  std::vector<std::string> inputs;
  std::string metric;
  std::string output = "-";
  std::string tap = "post_activation";
  std::string run;
  std::int64_t width = 0;
};

int cmd_heatmap(const HeatmapArgs& a, std::ostream& out) {
  const Tap tap = require_tap(a.tap);
  const auto all = read_reports(a.inputs);
  std::vector<AuditRecord> selected;
  for (const auto& r : all) {
    if (r.tap != tap) continue;
    if (!a.run.empty() && r.run != a.run) continue;
    if (a.width != 0 && r.width != a.width) continue;
    selected.push_back(r);
  }
  const HeatmapGrid grid = emit_heatmap(selected, *parse_metric(a.metric));
  write_output(a.output, heatmap_json(grid), out);
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string output;
  SweepFixture fixture;
  bool f64 = false;
};

int cmd_synth(SynthArgs a, std::ostream& out) {
  if (a.fixture.steps.empty()) throw UsageError("--steps must not be empty");
  std::sort(a.fixture.widths.begin(), a.fixture.widths.end());
  a.fixture.dtype = a.f64 ? DType::F64 : DType::F32;
  const auto runs = write_sweep_fixture(a.output, a.fixture);
  for (const auto& r : runs) out << r.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral utilization diagnostics for feed-forward activations", "ffnspec"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  const auto metric_check = CLI::IsMember(metric_names());

  AuditArgs audit_args;
  auto* audit = app.add_subcommand("audit", "Audit every (layer, step) group of dump directories");
  audit->add_option("-i,--input", audit_args.inputs, "Run directory of SPDC dumps (repeatable)")
      ->required()
      ->check(CLI::ExistingDirectory);
  audit->add_option("-o,--output", audit_args.output, "Audit report JSON path, - for stdout")
      ->capture_default_str();
  audit->add_option("--run-id", audit_args.run_id,
                    "Run label for a single input (default: directory name)");
  audit->add_option("--tol", audit_args.tol, "Symmetry and negative-eigenvalue clamp tolerance")
      ->check(CLI::Range(0.0, 1e-3))
      ->capture_default_str();
  audit->add_option("-j,--jobs", audit_args.jobs, "Worker threads")
      ->check(CLI::Range(1u, 256u))
      ->capture_default_str();

  Table3Args table3_args;
  auto* table3 = app.add_subcommand("table3", "Concentration summary of synthetic power-law spectra");
  table3->add_option("--alpha", table3_args.alphas, "Decay exponents")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 100.0))
      ->capture_default_str();
  table3->add_option("--dims", table3_args.dims, "Latent widths")
      ->delimiter(',')
      ->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 24))
      ->capture_default_str();
  table3->add_option("-o,--output", table3_args.output, "CSV path, - for stdout")
      ->capture_default_str();
  table3->add_flag("--display", table3_args.display,
                   "Print percentages (1 decimal) and concentration (2 decimals)");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit log-log width scaling laws from audit reports");
  fit->add_option("-i,--input", fit_args.inputs, "Audit report JSON (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("-m,--metric", fit_args.metrics, "Metrics to fit")
      ->delimiter(',')
      ->check(metric_check)
      ->capture_default_str();
  fit->add_option("--norm", fit_args.norms,
                  "Width normalizations: raw, per_width_minus_one, per_width")
      ->delimiter(',')
      ->check(CLI::IsMember({"raw", "per_width_minus_one", "per_width"}))
      ->capture_default_str();
  fit->add_option("--window", fit_args.window,
                  "Inclusive step window START:END (default: final 1000 steps)");
  fit->add_option("--stat", fit_args.stat, "Layer aggregation statistic")
      ->check(CLI::IsMember({"median", "mean"}))
      ->capture_default_str();
  fit->add_option("--tap", fit_args.tap, "Activation tap: post_activation or pre_activation")
      ->check(CLI::IsMember({"post_activation", "pre_activation", "post", "pre"}))
      ->capture_default_str();
  fit->add_option("--decimals", fit_args.decimals,
                  "Decimals for beta, ci95, r2 (-1 for 17 significant digits)")
      ->check(CLI::Range(-1, 17))
      ->capture_default_str();
  fit->add_flag("--per-layer", fit_args.per_layer, "Fit each layer separately instead of medians");
  fit->add_option("-o,--output", fit_args.output, "Fit table CSV path, - for stdout")
      ->capture_default_str();

  HeatmapArgs heatmap_args;
  auto* heatmap = app.add_subcommand("heatmap", "Layers x steps grid of one metric");
  heatmap->add_option("-i,--input", heatmap_args.inputs, "Audit report JSON (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  heatmap->add_option("-m,--metric", heatmap_args.metric, "Metric to grid")
      ->required()
      ->check(metric_check);
  heatmap->add_option("--tap", heatmap_args.tap, "Activation tap")
      ->check(CLI::IsMember({"post_activation", "pre_activation", "post", "pre"}))
      ->capture_default_str();
  heatmap->add_option("--run", heatmap_args.run, "Select one run from the report");
  heatmap->add_option("--width", heatmap_args.width, "Select one width from the report")
      ->check(CLI::Range(std::int64_t{0}, std::int64_t{1} << 24));
  heatmap->add_option("-o,--output", heatmap_args.output, "Heatmap JSON path, - for stdout")
      ->capture_default_str();

  SynthArgs synth_args;
  auto* synth = app.add_subcommand(
      "synth", "Write a seeded synthetic width sweep of dumps with power-law spectra");
  synth->add_option("-o,--output", synth_args.output, "Root directory (one run per width)")
      ->required();
  synth->add_option("--dims", synth_args.fixture.widths, "Widths")
      ->delimiter(',')
      ->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 16))
      ->capture_default_str();
  synth->add_option("--layers", synth_args.fixture.layers, "Layers per width")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{1024}))
      ->capture_default_str();
  synth->add_option("--steps", synth_args.fixture.steps, "Training steps to emit")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  synth->add_option("--beta", synth_args.fixture.soft_beta, "Soft-rank width exponent")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth->add_option("--alpha", synth_args.fixture.base_alpha,
                    "Power-law exponent at the smallest width")
      ->check(CLI::Range(0.0, 10.0))
      ->capture_default_str();
  synth->add_option("--tokens-per-width", synth_args.fixture.tokens_per_width,
                    "Tokens per dump as a multiple of width")
      ->check(CLI::Range(0.01, 1e4))
      ->capture_default_str();
  synth->add_option("--seed", synth_args.fixture.seed, "Random seed")->capture_default_str();
  synth->add_flag("--f64", synth_args.f64, "Write f64 payloads instead of f32");

  std::vector<std::string> argv_storage{"ffnspec"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*audit) return cmd_audit(audit_args, out, err);
    if (*table3) return cmd_table3(table3_args, out);
    if (*fit) return cmd_fit(fit_args, out, err);
    if (*heatmap) return cmd_heatmap(heatmap_args, out);
    if (*synth) return cmd_synth(synth_args, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace ffnspec::cli
