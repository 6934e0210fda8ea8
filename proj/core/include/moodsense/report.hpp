#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moodsense/changedetect.hpp"
#include "moodsense/classifier.hpp"
#include "moodsense/config.hpp"
#include "moodsense/fusion.hpp"
#include "moodsense/ingest.hpp"
#include "moodsense/stats.hpp"

namespace moodsense {

/// Bumped whenever a report layout changes.
inline constexpr int kReportSchemaVersion = 1;

struct PatientCorrelation {
  std::string patient_id;
  std::optional<CorrelationStudy> daily;
  std::optional<CorrelationStudy> interval;
  std::optional<std::string> reason;  // why a study is missing
};

struct CorrelationReport {
  std::vector<PatientCorrelation> patients;
  std::optional<CorrelationStudy> pooled_daily;
  std::optional<CorrelationStudy> pooled_interval;
  std::optional<std::string> pooled_reason;
};

/// Per-patient daily and interval studies plus the pooled cohort studies.
CorrelationReport correlation_report(std::span<const PatientDataset> cohort, const StudyConfig& cfg);

nlohmann::json correlation_json(const CorrelationReport& report);
nlohmann::json classification_json(const CVReport& report);
nlohmann::json change_eval_json(const ChangeEvalReport& report, const StudyConfig& cfg);
nlohmann::json fusion_eval_json(const FusionReport& report);

/// `epoch` then every schema column; missing cells are empty fields.
std::string features_csv(const PatientDataset& ds, const StudyConfig& cfg);

/// patient,epoch,modality,distance,normalized_score,fired
std::string changes_csv(std::span<const ChangeRun> runs);

struct TimelinePanel {
  std::string patient_id;
  std::vector<ExamRecord> exams;
  std::vector<ChangeDecision> decisions;
};

/// Stacked per-patient step plots of exam scores on a [-3, 3] axis with
/// fired change decisions marked in one lane per modality. Byte-identical
/// output for identical input.
std::string render_timeline(std::span<const TimelinePanel> panels);

}  // namespace moodsense
