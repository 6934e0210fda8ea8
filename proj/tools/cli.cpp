#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "moodsense/changedetect.hpp"
#include "moodsense/classifier.hpp"
#include "moodsense/config.hpp"
#include "moodsense/error.hpp"
#include "moodsense/fusion.hpp"
#include "moodsense/ingest.hpp"
#include "moodsense/report.hpp"
#include "moodsense/synth.hpp"

namespace moodsense::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.3.0";

struct Globals {
  std::string config;
  std::string data = "data";
  std::string out = "out";
  std::optional<std::uint64_t> seed;
};

struct Context {
  Globals g;
  StudyConfig cfg;
  std::ostream& out;
  std::ostream& err;
  std::vector<fs::path> inputs;   // files digested into the run manifest
  std::vector<fs::path> outputs;  // files this run wrote
};

void write_text(Context& ctx, const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "IO", "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "IO", "cannot write " + path.string());
  f << text;
  f.flush();
  if (!f) throw Error(ErrorKind::Io, "IO", "error while writing " + path.string());
  ctx.outputs.push_back(path);
}

void write_json(Context& ctx, const fs::path& path, const json& j) { write_text(ctx, path, j.dump(2) + "\n"); }

void collect_inputs(Context& ctx, const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  ctx.inputs.insert(ctx.inputs.end(), files.begin(), files.end());
}

std::vector<PatientDataset> load(Context& ctx) {
  auto cohort = load_cohort(ctx.g.data, ctx.cfg);
  if (cohort.empty()) throw Error(ErrorKind::Data, "EMPTY_COHORT", "no patient directories under " + ctx.g.data);
  collect_inputs(ctx, ctx.g.data);
  return cohort;
}

std::vector<std::optional<Modality>> detection_scopes() {
  std::vector<std::optional<Modality>> scopes(kModalities.begin(), kModalities.end());
  scopes.push_back(std::nullopt);
  return scopes;
}

std::vector<ChangeRun> change_runs(std::span<const PatientDataset> cohort, const StudyConfig& cfg) {
  std::vector<ChangeRun> runs;
  for (const auto& ds : cohort) {
    for (const auto& s : detection_scopes()) runs.push_back(run_change_detection(ds, cfg, s));
  }
  return runs;
}

// ---- subcommands ---------------------------------------------------------

int cmd_synth(Context& ctx, int cohort_size, const std::string& template_path) {
  CohortTemplate tmpl = default_cohort_template();
  if (!template_path.empty()) {
    tmpl = load_cohort_template(template_path);
    ctx.inputs.push_back(template_path);
  }
  const std::uint64_t seed = ctx.g.seed.value_or(ctx.cfg.seed);
  const fs::path dir = ctx.g.out;
  const auto specs = generate_cohort(cohort_size, tmpl, seed, dir, ctx.cfg);
  for (const auto& s : specs) {
    for (const char* f : {"accel.csv", "gps.csv", "calls.csv", "voice.csv", "exams.csv"}) {
      ctx.outputs.push_back(dir / s.patient_id / f);
    }
  }
  ctx.outputs.push_back(dir / "manifest.json");
  ctx.err << fmt::format("synth: wrote {} patients to {}\n", specs.size(), dir.string());
  return kOk;
}

int cmd_validate(Context& ctx, const std::string& dir_arg) {
  const fs::path dir = dir_arg.empty() ? fs::path(ctx.g.data) : fs::path(dir_arg);
  const auto layout = discover_cohort(dir, ctx.cfg);
  std::size_t violations = 0;
  auto emit = [&](const std::string& code, const std::string& where, const std::string& msg) {
    ctx.out << code << '\t' << where << '\t' << msg << '\n';
    ++violations;
  };
  if (layout.patient_dirs.empty()) emit("EMPTY_COHORT", dir.string(), "no patient directories with exams.csv");
  for (const auto& pdir : layout.patient_dirs) {
    const std::string id = pdir.filename().string();
    try {
      const auto ds = load_patient(pdir, layout.config);
      for (const auto& v : validate(ds)) emit(v.code, v.location, v.message);
    } catch (const ParseError& e) {
      emit(e.code(), fmt::format("{}/{}:{}", id, fs::path(e.file()).filename().string(), e.line()), e.what());
    } catch (const Error& e) {
      emit(e.code(), id, e.what());
    }
  }
  collect_inputs(ctx, dir);
  ctx.err << fmt::format("validate: {} patient(s), {} violation(s)\n", layout.patient_dirs.size(), violations);
  return violations ? kDataError : kOk;
}

int cmd_features(Context& ctx) {
  const auto cohort = load(ctx);
  for (const auto& ds : cohort) {
    write_text(ctx, fs::path(ctx.g.out) / ds.patient_id / "features.csv", features_csv(ds, ctx.cfg));
  }
  ctx.err << fmt::format("features: {} patient(s)\n", cohort.size());
  return kOk;
}

int cmd_correlate(Context& ctx) {
  const auto cohort = load(ctx);
  write_json(ctx, fs::path(ctx.g.out) / "correlation.json", correlation_json(correlation_report(cohort, ctx.cfg)));
  return kOk;
}

int cmd_classify(Context& ctx) {
  const auto cohort = load(ctx);
  const auto sets = default_modality_sets();
  const auto report = cross_validate_cohort(cohort, ctx.cfg, sets);
  write_json(ctx, fs::path(ctx.g.out) / "classification.json", classification_json(report));
  for (const auto& [name, acc] : report.mean_accuracy) ctx.err << fmt::format("classify: {} mean accuracy {:.3f}\n", name, acc);
  return kOk;
}

int cmd_detect(Context& ctx) {
  const auto cohort = load(ctx);
  const auto runs = change_runs(cohort, ctx.cfg);
  write_text(ctx, fs::path(ctx.g.out) / "changes.csv", changes_csv(runs));
  write_json(ctx, fs::path(ctx.g.out) / "change_eval.json", change_eval_json(summarize_change_runs(runs), ctx.cfg));
  return kOk;
}

int cmd_fuse(Context& ctx) {
  const auto cohort = load(ctx);
  write_json(ctx, fs::path(ctx.g.out) / "fusion_eval.json", fusion_eval_json(evaluate_fusion_cohort(cohort, ctx.cfg)));
  return kOk;
}

json read_report(const fs::path& p) {
  std::ifstream f(p);
  if (!f) return nullptr;
  try {
    return json::parse(f);
  } catch (const json::exception&) {
    return nullptr;
  }
}

int cmd_report(Context& ctx) {
  const auto cohort = load(ctx);
  const auto runs = change_runs(cohort, ctx.cfg);

  std::vector<TimelinePanel> panels;
  for (const auto& ds : cohort) {
    TimelinePanel p{ds.patient_id, ds.exams, {}};
    for (const auto& run : runs) {
      if (run.patient_id == ds.patient_id) p.decisions.insert(p.decisions.end(), run.decisions.begin(), run.decisions.end());
    }
    panels.push_back(std::move(p));
  }
  const fs::path out = ctx.g.out;
  write_text(ctx, out / "timeline.svg", render_timeline(panels));

  json patients = json::array();
  for (const auto& ds : cohort) {
    patients.push_back({{"patient_id", ds.patient_id},
                        {"exams", ds.exams.size()},
                        {"accel_samples", ds.accel.size()},
                        {"gps_fixes", ds.gps.size()},
                        {"calls", ds.calls.size()},
                        {"voice_rows", ds.voice.size()}});
  }
  json headline = json::object();
  if (const auto j = read_report(out / "correlation.json"); !j.is_null()) headline["correlation"] = j.value("pooled", json(nullptr));
  if (const auto j = read_report(out / "classification.json"); !j.is_null()) {
    headline["classification"] = {{"mean_accuracy", j.value("mean_accuracy", json(nullptr))},
                                  {"mean_macro_recall", j.value("mean_macro_recall", json(nullptr))},
                                  {"mean_macro_precision", j.value("mean_macro_precision", json(nullptr))}};
  }
  const auto eval = summarize_change_runs(runs);
  const json change = change_eval_json(eval, ctx.cfg);
  headline["change_detection"] = {{"mean_recall", change.at("mean_recall")},
                                  {"mean_precision", change.at("mean_precision")}};
  if (const auto j = read_report(out / "fusion_eval.json"); !j.is_null()) headline["fusion"] = j.value("rows", json(nullptr));

  write_json(ctx, out / "summary.json",
             {{"schema_version", kReportSchemaVersion},
              {"report", "summary"},
              {"patients", patients},
              {"headline", headline},
              {"timeline", "timeline.svg"}});
  return kOk;
}

// ---- run manifest --------------------------------------------------------

void update_run_manifest(Context& ctx, const std::string& command, double wall_ms) {
  const fs::path out = ctx.g.out;
  const fs::path path = out / "run_manifest.json";
  json manifest = read_report(path);
  if (!manifest.is_object()) manifest = json::object();

  json inputs = json::array(), outputs = json::array();
  for (const auto& p : ctx.inputs) {
    if (fs::exists(p)) inputs.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
  }
  for (const auto& p : ctx.outputs) outputs.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});

  manifest["schema_version"] = kReportSchemaVersion;
  manifest["tool"] = "moodsense";
  manifest["version"] = kVersion;
  manifest["runs"][command] = {{"config", ctx.cfg},
                               {"seed", ctx.g.seed ? json(*ctx.g.seed) : json(nullptr)},
                               {"inputs", inputs},
                               {"outputs", outputs},
                               {"wall_ms", wall_ms}};
  std::error_code ec;
  fs::create_directories(out, ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "IO", "cannot write " + path.string());
  f << manifest.dump(2) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"moodsense: smartphone mood-state analytics on patient sensor cohorts", "moodsense"};
  app.set_version_flag("--version", kVersion);
  Globals g;
  app.add_option("--config", g.config, "StudyConfig JSON file")->check(CLI::ExistingFile);
  app.add_option("--data", g.data, "Cohort directory (one subdirectory per patient)")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed (synth master seed; overrides the config seed)");
  app.require_subcommand(1, 1);

  int cohort_size = 0;
  std::string template_path, validate_dir;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort under --out");
  synth->add_option("--cohort-size", cohort_size, "Number of patients")->required()->check(CLI::PositiveNumber);
  synth->add_option("--template", template_path, "Cohort template JSON")->check(CLI::ExistingFile);
  auto* validate_cmd = app.add_subcommand("validate", "Check a cohort against the data invariants");
  validate_cmd->add_option("dir", validate_dir, "Cohort directory (defaults to --data)");
  auto* features = app.add_subcommand("features", "Write <out>/<patient>/features.csv");
  auto* correlate = app.add_subcommand("correlate", "Activity/score correlation study -> correlation.json");
  auto* classify = app.add_subcommand("classify", "Within-patient naive Bayes -> classification.json");
  auto* detect = app.add_subcommand("detect", "Default-state change detection -> changes.csv, change_eval.json");
  auto* fuse = app.add_subcommand("fuse", "Decision-level fusion -> fusion_eval.json");
  auto* report = app.add_subcommand("report", "State timeline and summary -> timeline.svg, summary.json");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  try {
    StudyConfig cfg;
    if (!g.config.empty()) cfg = load_config(g.config);
    if (g.seed) cfg.seed = *g.seed;
    cfg.validate();
    Context ctx{g, cfg, out, err, {}, {}};
    if (!g.config.empty()) ctx.inputs.push_back(g.config);

    const auto t0 = std::chrono::steady_clock::now();
    int rc = kOk;
    if (sub == synth) rc = cmd_synth(ctx, cohort_size, template_path);
    else if (sub == validate_cmd) rc = cmd_validate(ctx, validate_dir);
    else if (sub == features) rc = cmd_features(ctx);
    else if (sub == correlate) rc = cmd_correlate(ctx);
    else if (sub == classify) rc = cmd_classify(ctx);
    else if (sub == detect) rc = cmd_detect(ctx);
    else if (sub == fuse) rc = cmd_fuse(ctx);
    else if (sub == report) rc = cmd_report(ctx);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    // validate only reads; it leaves no trace in the output directory.
    if (sub != validate_cmd) update_run_manifest(ctx, command, wall_ms);
    return rc;
  } catch (const Error& e) {
    err << fmt::format("moodsense {}: error [{}]: {}\n", command, e.code(), e.what());
    return kDataError;
  } catch (const std::exception& e) {
    err << fmt::format("moodsense {}: internal error: {}\n", command, e.what());
    return kInternalError;
  }
}

}  // namespace moodsense::cli
