#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moodsense/config.hpp"
#include "moodsense/features.hpp"
#include "moodsense/ingest.hpp"
#include "moodsense/stats.hpp"

namespace moodsense {

using Label = int;

/// Per-class Gaussian sufficient statistics for naive Bayes.
struct GaussianNBModel {
  std::vector<Label> labels;  // ascending
  std::vector<double> priors;
  std::vector<std::vector<double>> means;      // [class][dimension]
  std::vector<std::vector<double>> variances;  // [class][dimension], >= variance_floor
  /// False where a class had no present cell in a dimension; such a
  /// dimension is ignored at prediction time.
  std::vector<std::vector<bool>> has_stats;
  double variance_floor = 0;

  std::size_t dimension() const { return means.empty() ? 0 : means.front().size(); }
};

/// Sample means and population variances per class, skipping missing cells.
/// The floor is `floor_ratio` times the largest global per-dimension
/// variance. Throws EMPTY_INPUT, LENGTH_MISMATCH and SINGLE_CLASS.
GaussianNBModel fit_nb(std::span<const FeatureRow> X, std::span<const Label> y, double floor_ratio);

struct NBPrediction {
  Label label = 0;
  std::map<Label, double> posterior;  // sums to 1
};

/// Log-space naive Bayes over the present dimensions of `x`. Ties resolve to
/// the smaller label. Throws ALL_MISSING when no dimension is usable.
NBPrediction predict_nb(const GaussianNBModel& model, std::span<const Cell> x);

/// A named group of feature blocks classified together.
struct ModalitySet {
  std::string name;
  std::vector<Modality> blocks;
};

/// A, G, P, S individually, then all four fused at feature level ("fusion").
std::vector<ModalitySet> default_modality_sets();

/// Window-labeled days for one modality set.
struct LabeledRows {
  std::vector<FeatureRow> rows;
  std::vector<Label> labels;
  std::vector<std::size_t> window;  // index into build_windows()
  std::vector<LocalDate> epochs;
};

/// Days inside labeled windows where at least one block of the set is present.
LabeledRows labeled_rows(const PatientDataset& ds, const StudyConfig& cfg, std::span<const Modality> blocks);

/// Model trained on every row outside `held_out_window`. When the training
/// part holds a single class, `model` is empty and `constant_label` is used.
struct FoldFit {
  Standardizer standardizer;
  std::optional<GaussianNBModel> model;
  Label constant_label = 0;
};

FoldFit fit_fold(const LabeledRows& data, std::optional<std::size_t> held_out_window, double floor_ratio);

struct CVEntry {
  std::string modality_set;
  bool available = false;
  std::string reason;  // set when unavailable
  std::optional<ConfusionMatrix> matrix;
  std::size_t instances = 0;
};

struct PatientCV {
  std::string patient_id;
  std::optional<std::string> skipped_reason;
  std::vector<CVEntry> entries;  // one per requested modality set
};

/// Leave-one-window-out cross-validation. Patients with fewer than two
/// windows or a single distinct label are skipped with a reason.
PatientCV within_patient_cv(const PatientDataset& ds, const StudyConfig& cfg, std::span<const ModalitySet> sets);

struct CVReport {
  std::vector<std::string> modality_sets;
  std::vector<PatientCV> patients;
  /// Mean over patients where the set was available; absent if none.
  std::map<std::string, double> mean_accuracy;
  std::map<std::string, double> mean_macro_recall;
  std::map<std::string, double> mean_macro_precision;
};

CVReport cross_validate_cohort(std::span<const PatientDataset> cohort, const StudyConfig& cfg,
                               std::span<const ModalitySet> sets);

}  // namespace moodsense
