#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "moodsense/config.hpp"
#include "moodsense/ingest.hpp"

namespace moodsense {

struct CorrelationResult {
  double r = 0;
  std::size_t n = 0;
  std::optional<double> t_stat;        // defined for n >= 3
  std::optional<double> p_two_tailed;  // defined for n >= 3
};

/// Pearson product-moment correlation with a two-tailed Student-t p-value.
/// Throws LENGTH_MISMATCH, TOO_FEW_POINTS (n < 2) and UNDEFINED_CORRELATION
/// (either input has zero variance).
CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys);

/// Square count matrix over a fixed label set; rows are truth, columns are
/// predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<int> labels);

  void add(int truth, int predicted, long count = 1);
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  const std::vector<int>& labels() const { return labels_; }
  long count(int truth, int predicted) const;
  long total() const;
  long support(int label) const;  // row sum

  double accuracy() const;
  /// Nullopt when the label never occurs in the truth.
  std::optional<double> recall(int label) const;
  /// Nullopt when the label is never predicted.
  std::optional<double> precision(int label) const;

  /// Averages over labels present in the truth. A present label that is
  /// never predicted contributes precision 0.
  double macro_recall() const;
  double macro_precision() const;
  /// Recall weighted by label frequency in the truth (equals accuracy).
  double weighted_recall() const;

 private:
  std::size_t index(int label) const;

  std::vector<int> labels_;
  std::vector<long> counts_;
};

/// Confusion matrix over the union of observed labels. Throws
/// LENGTH_MISMATCH and EMPTY_INPUT.
ConfusionMatrix evaluate(std::span<const int> labels, std::span<const int> predictions);

enum class CorrelationMode { Daily, Interval };

/// (activity score, window label) pairs for one patient. `interval` is -1 in
/// daily mode, else the DayInterval index.
struct ActivityPairs {
  std::vector<double> activity;
  std::vector<double> score;
  std::vector<int> interval;
};

/// Pairs every correlation day (exam days excluded) that lies in a labeled
/// window with that window's label.
ActivityPairs correlation_pairs(const PatientDataset& ds, const StudyConfig& cfg, CorrelationMode mode);

struct CorrelationStudy {
  CorrelationMode mode = CorrelationMode::Daily;
  CorrelationResult overall;
  /// Interval mode only; nullopt where an interval lacks 3 usable pairs or variance.
  std::array<std::optional<CorrelationResult>, 4> per_interval;
};

/// Throws INSUFFICIENT_PAIRS below 3 pairs.
CorrelationStudy correlation_study(const ActivityPairs& pairs, CorrelationMode mode);
CorrelationStudy correlation_study(const PatientDataset& ds, const StudyConfig& cfg, CorrelationMode mode);

/// Concatenates patients after z-scoring activity within each patient (and
/// within each interval in interval mode). Subsets without spread are dropped.
CorrelationStudy pooled_correlation_study(std::span<const ActivityPairs> patients, CorrelationMode mode);

}  // namespace moodsense
