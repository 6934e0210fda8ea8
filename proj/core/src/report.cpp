#include "moodsense/report.hpp"

#include <cmath>

#include <fmt/format.h>

#include "moodsense/error.hpp"
#include "moodsense/features.hpp"
#include "moodsense/timeline.hpp"

namespace moodsense {
namespace {

using nlohmann::json;

json opt(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

json result_json(const CorrelationResult& r) {
  return {{"r", r.r}, {"n", r.n}, {"t", opt(r.t_stat)}, {"p_two_tailed", opt(r.p_two_tailed)}};
}

json study_json(const std::optional<CorrelationStudy>& s) {
  if (!s) return nullptr;
  json j{{"mode", s->mode == CorrelationMode::Daily ? "daily" : "interval"}, {"overall", result_json(s->overall)}};
  if (s->mode == CorrelationMode::Interval) {
    json per = json::object();
    for (DayInterval i : kDayIntervals) {
      const auto& r = s->per_interval[static_cast<std::size_t>(i)];
      per[std::string(interval_name(i))] = r ? result_json(*r) : json(nullptr);
    }
    j["per_interval"] = per;
  }
  return j;
}

json mean_map(const std::map<std::string, double>& m, const std::vector<std::string>& keys) {
  json j = json::object();
  for (const auto& k : keys) {
    auto it = m.find(k);
    j[k] = it == m.end() ? json(nullptr) : json(it->second);
  }
  return j;
}

std::string cell_text(const Cell& c) { return c ? fmt::format("{}", *c) : std::string(); }

}  // namespace

CorrelationReport correlation_report(std::span<const PatientDataset> cohort, const StudyConfig& cfg) {
  CorrelationReport report;
  std::vector<ActivityPairs> daily_pairs, interval_pairs;
  for (const auto& ds : cohort) {
    PatientCorrelation pc;
    pc.patient_id = ds.patient_id;
    auto daily = correlation_pairs(ds, cfg, CorrelationMode::Daily);
    auto interval = correlation_pairs(ds, cfg, CorrelationMode::Interval);
    try {
      pc.daily = correlation_study(daily, CorrelationMode::Daily);
      pc.interval = correlation_study(interval, CorrelationMode::Interval);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Io) throw;
      pc.reason = e.what();
    }
    daily_pairs.push_back(std::move(daily));
    interval_pairs.push_back(std::move(interval));
    report.patients.push_back(std::move(pc));
  }
  try {
    report.pooled_daily = pooled_correlation_study(daily_pairs, CorrelationMode::Daily);
    report.pooled_interval = pooled_correlation_study(interval_pairs, CorrelationMode::Interval);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    report.pooled_reason = e.what();
  }
  return report;
}

json correlation_json(const CorrelationReport& report) {
  json patients = json::array();
  for (const auto& p : report.patients) {
    patients.push_back({{"patient_id", p.patient_id},
                        {"daily", study_json(p.daily)},
                        {"interval", study_json(p.interval)},
                        {"reason", opt(p.reason)}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"report", "activity_score_correlation"},
          {"patients", patients},
          {"pooled",
           {{"daily", study_json(report.pooled_daily)},
            {"interval", study_json(report.pooled_interval)},
            {"reason", opt(report.pooled_reason)}}}};
}

json classification_json(const CVReport& report) {
  json patients = json::array();
  for (const auto& p : report.patients) {
    json results = json::object();
    for (const auto& e : p.entries) {
      json r{{"available", e.available}, {"instances", e.instances}};
      if (!e.available) {
        r["reason"] = e.reason;
      } else {
        const auto& m = *e.matrix;
        json per_label = json::array();
        for (int l : m.labels()) {
          per_label.push_back(
              {{"label", l}, {"support", m.support(l)}, {"recall", opt(m.recall(l))}, {"precision", opt(m.precision(l))}});
        }
        json confusion = json::array();
        for (int t : m.labels()) {
          json row = json::array();
          for (int q : m.labels()) row.push_back(m.count(t, q));
          confusion.push_back(row);
        }
        r["accuracy"] = m.accuracy();
        r["macro_recall"] = m.macro_recall();
        r["macro_precision"] = m.macro_precision();
        r["micro_recall"] = m.weighted_recall();
        r["micro_precision"] = m.accuracy();
        r["labels"] = m.labels();
        r["per_label"] = per_label;
        r["confusion"] = confusion;
      }
      results[e.modality_set] = r;
    }
    patients.push_back({{"patient_id", p.patient_id}, {"skipped_reason", opt(p.skipped_reason)}, {"results", results}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"report", "within_patient_classification"},
          {"classifier", "gaussian_naive_bayes"},
          {"validation", "leave_one_window_out"},
          {"modality_sets", report.modality_sets},
          {"patients", patients},
          {"mean_accuracy", mean_map(report.mean_accuracy, report.modality_sets)},
          {"mean_macro_recall", mean_map(report.mean_macro_recall, report.modality_sets)},
          {"mean_macro_precision", mean_map(report.mean_macro_precision, report.modality_sets)}};
}

json change_eval_json(const ChangeEvalReport& report, const StudyConfig& cfg) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"patient_id", r.patient_id},
                    {"modality", r.modality},
                    {"skipped_reason", opt(r.skipped_reason)},
                    {"tp", r.days.tp},
                    {"fp", r.days.fp},
                    {"fn", r.days.fn},
                    {"tn", r.days.tn},
                    {"recall", opt(r.days.recall())},
                    {"precision", opt(r.days.precision())},
                    {"episodes", r.episodes},
                    {"episodes_detected", r.episodes_detected}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"report", "state_change_detection"},
          {"chi2_confidence", cfg.chi2_confidence},
          {"unit", "day"},
          {"episode_rule", "a non-default window counts as detected when any of its days fires"},
          {"modalities", report.modalities},
          {"patients", rows},
          {"mean_recall", mean_map(report.mean_recall, report.modalities)},
          {"mean_precision", mean_map(report.mean_precision, report.modalities)},
          {"mean_episode_recall", mean_map(report.mean_episode_recall, report.modalities)}};
}

json fusion_eval_json(const FusionReport& report) {
  auto row_json = [&](const std::string& name) {
    auto r = report.mean_recall.find(name);
    auto p = report.mean_precision.find(name);
    return json{{"name", name},
                {"recall", r == report.mean_recall.end() ? json(nullptr) : json(r->second)},
                {"precision", p == report.mean_precision.end() ? json(nullptr) : json(p->second)}};
  };
  json fused = json::array(), single = json::array();
  for (const char* name : kFusedRowNames) fused.push_back(row_json(name));
  for (Modality m : kModalities) single.push_back(row_json(scope_code(m)));

  json patients = json::array();
  for (const auto& p : report.patients) {
    json rows = json::array();
    for (const auto& r : p.rows) {
      rows.push_back({{"name", r.name},
                      {"tp", r.counts.tp},
                      {"fp", r.counts.fp},
                      {"fn", r.counts.fn},
                      {"tn", r.counts.tn},
                      {"recall", opt(r.counts.recall())},
                      {"precision", opt(r.counts.precision())}});
    }
    patients.push_back({{"patient_id", p.patient_id},
                        {"skipped_reason", opt(p.skipped_reason)},
                        {"notice", opt(p.notice)},
                        {"modalities", p.modalities},
                        {"weights", p.weights},
                        {"al_weights", p.al_weights},
                        {"calibration_days", p.calibration_days},
                        {"test_days", p.test_days},
                        {"rows", rows}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"report", "fused_state_change_detection"},
          {"weighted_fusion",
           "reconstruction: precision-weighted mean of threshold-normalized Mahalanobis scores, fires at 1; "
           "weights proportional to max(precision - 0.5, 0.01) on the calibration half"},
          {"split", "chronological 50/50 over non-default-window days; first half calibrates, second half tests"},
          {"rows", fused},
          {"single_modality", single},
          {"patients", patients}};
}

std::string features_csv(const PatientDataset& ds, const StudyConfig& cfg) {
  const FeatureSchema schema(ds.voice_columns);
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "epoch");
  for (const auto& n : schema.names()) fmt::format_to(std::back_inserter(out), ",{}", n);
  out.push_back('\n');
  for (const auto& v : day_feature_vectors(ds, cfg)) {
    fmt::format_to(std::back_inserter(out), "{}", format_date(v.epoch));
    for (const auto& c : v.cells) fmt::format_to(std::back_inserter(out), ",{}", cell_text(c));
    out.push_back('\n');
  }
  return fmt::to_string(out);
}

std::string changes_csv(std::span<const ChangeRun> runs) {
  fmt::memory_buffer out;
  fmt::format_to(std::back_inserter(out), "patient,epoch,modality,distance,normalized_score,fired\n");
  for (const auto& run : runs) {
    for (const auto& d : run.decisions) {
      fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{}\n", run.patient_id, format_date(d.epoch), d.modality,
                     d.distance, d.normalized_score, d.fired ? 1 : 0);
    }
  }
  return fmt::to_string(out);
}

}  // namespace moodsense
