#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "moodsense/classifier.hpp"
#include "moodsense/config.hpp"
#include "moodsense/features.hpp"
#include "moodsense/ingest.hpp"

namespace moodsense {

/// Default-state Gaussian: mean, regularized covariance and its Cholesky
/// factor, plus the squared-distance threshold.
struct GaussianStateModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::LLT<Eigen::MatrixXd> factor;
  double regularization = 0;  // epsilon added to the diagonal
  double threshold_sq = 0;    // chi-square quantile, d dof
  double confidence = 0;
  Label default_label = 0;

  int dimension() const { return static_cast<int>(mean.size()); }
};

/// Fits on rows that are not sparse. Missing cells are imputed with the
/// column mean of present cells. Covariance uses the n-1 denominator and is
/// regularized by epsilon = cfg.covariance_ridge * trace / d (the ridge itself
/// when the trace is 0).
/// Throws EMPTY_DIMENSION for d = 0 and TOO_FEW_ROWS below d + 2 usable rows.
GaussianStateModel fit_default_state(std::span<const FeatureRow> rows, const StudyConfig& cfg,
                                     Label default_label = 0);

/// sqrt((x - mu)^T Sigma^-1 (x - mu)) through the Cholesky factor.
double mahalanobis(const GaussianStateModel& model, const Eigen::VectorXd& x);

/// Missing cells take the model mean and so add nothing.
double mahalanobis(const GaussianStateModel& model, std::span<const Cell> x);

struct ChangeDecision {
  LocalDate epoch;
  double distance = 0;
  double normalized_score = 0;  // distance^2 / threshold^2
  bool fired = false;           // normalized_score >= 1
  std::string modality;         // "A", "G", "P", "S" or "all"
};

struct DayRow {
  LocalDate epoch;
  FeatureRow cells;
};

/// One decision per non-sparse day, in input order (callers pass epochs
/// ascending).
std::vector<ChangeDecision> detect(const GaussianStateModel& model, std::span<const DayRow> days,
                                   const std::string& modality, const StudyConfig& cfg);

/// "A", "G", "P", "S", or "all" for nullopt.
std::string scope_code(std::optional<Modality> scope);

/// Per-day decisions over a patient's labeled days for one feature scope,
/// with the ground truth each day carries.
struct ChangeRun {
  std::string patient_id;
  std::string modality;
  std::optional<std::string> skipped_reason;
  Label default_label = 0;
  std::size_t default_window = 0;
  std::optional<GaussianStateModel> model;
  std::vector<ChangeDecision> decisions;  // ascending by epoch
  std::vector<bool> is_change;            // window label != default label
  std::vector<std::size_t> window;        // window index of each decision
};

/// The first labeled window defines the default state. Features are
/// z-scored with parameters fitted on that window, then the Gaussian is
/// fitted on the same rows and every labeled, non-sparse day is scored.
ChangeRun run_change_detection(const PatientDataset& ds, const StudyConfig& cfg, std::optional<Modality> scope);

struct DetectionCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;

  std::optional<double> recall() const;
  std::optional<double> precision() const;
  void add(bool truth, bool fired);
};

struct ChangeEvaluation {
  std::string patient_id;
  std::string modality;
  std::optional<std::string> skipped_reason;
  DetectionCounts days;
  int episodes = 0;  // windows whose label differs from the default
  int episodes_detected = 0;
};

ChangeEvaluation evaluate_change_detection(const PatientDataset& ds, const StudyConfig& cfg,
                                           std::optional<Modality> scope);
ChangeEvaluation summarize_change_run(const ChangeRun& run);

struct ChangeEvalReport {
  std::vector<std::string> modalities;
  std::vector<ChangeEvaluation> rows;  // patient-major
  /// Means over patients where the metric is defined.
  std::map<std::string, double> mean_recall;
  std::map<std::string, double> mean_precision;
  std::map<std::string, double> mean_episode_recall;
};

/// Rows in run order; modality order follows first appearance.
ChangeEvalReport summarize_change_runs(std::span<const ChangeRun> runs);

ChangeEvalReport evaluate_change_detection_cohort(std::span<const PatientDataset> cohort, const StudyConfig& cfg,
                                                  std::span<const std::optional<Modality>> scopes);

}  // namespace moodsense
