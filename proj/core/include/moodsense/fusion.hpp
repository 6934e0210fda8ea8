#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moodsense/changedetect.hpp"
#include "moodsense/config.hpp"
#include "moodsense/ingest.hpp"

namespace moodsense {

enum class FusionVariant { And, Or, Weighted };

/// How per-modality change decisions for one epoch are combined. Weights are
/// keyed by modality code and normalized to sum 1 at construction.
class FusionStrategy {
 public:
  static FusionStrategy logical_and();
  static FusionStrategy logical_or();
  /// Throws INVALID_WEIGHTS for negative or non-finite weights, or when no
  /// weight is positive.
  static FusionStrategy weighted(const std::map<std::string, double>& weights);

  FusionVariant variant() const { return variant_; }
  const std::map<std::string, double>& weights() const { return weights_; }
  std::string name() const;

 private:
  FusionVariant variant_ = FusionVariant::Or;
  std::map<std::string, double> weights_;
};

struct FusedDecision {
  LocalDate epoch;
  std::vector<ChangeDecision> inputs;
  /// AND: min normalized score; OR: max; WEIGHTED: weighted mean over the
  /// present modalities with the weights renormalized over that set.
  double fused_score = 0;
  bool fired = false;
};

/// Throws EMPTY_INPUT without decisions, EPOCH_MISMATCH when the inputs are
/// from different days, and NO_WEIGHT when WEIGHTED has zero total weight on
/// the present modalities.
FusedDecision fuse(const FusionStrategy& strategy, std::span<const ChangeDecision> inputs);

/// w proportional to max(precision - 0.5, 0.01); a modality without a
/// precision gets the 0.01 minimum.
std::map<std::string, double> calibrate_weights(const std::map<std::string, std::optional<double>>& precisions);

struct FusionRow {
  std::string name;
  DetectionCounts counts;
};

struct PatientFusion {
  std::string patient_id;
  std::optional<std::string> skipped_reason;
  std::optional<std::string> notice;
  std::vector<std::string> modalities;   // modalities with a fitted model
  std::map<std::string, double> weights;     // all-in weighted
  std::map<std::string, double> al_weights;  // accelerometer + location
  std::size_t calibration_days = 0;
  std::size_t test_days = 0;
  std::vector<FusionRow> rows;  // single modalities, then the fused rows
};

/// Fused row names in report order.
inline constexpr const char* kFusedRowNames[] = {"A+L weighted", "all-in AND", "all-in OR", "all-in weighted"};

/// Runs per-modality change detection, keeps the days outside the default
/// window on which every fitted modality has a decision, and splits them
/// chronologically: the first half calibrates the weights, the second half
/// is scored for every row.
PatientFusion evaluate_fusion(const PatientDataset& ds, const StudyConfig& cfg);

struct FusionReport {
  std::vector<std::string> row_names;
  std::vector<PatientFusion> patients;
  /// Means over patients where the metric is defined.
  std::map<std::string, double> mean_recall;
  std::map<std::string, double> mean_precision;
};

FusionReport evaluate_fusion_cohort(std::span<const PatientDataset> cohort, const StudyConfig& cfg);

}  // namespace moodsense
