#include "moodsense/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "moodsense/error.hpp"
#include "moodsense/features.hpp"
#include "moodsense/special_functions.hpp"
#include "moodsense/timeline.hpp"

namespace moodsense {

CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorKind::InvalidArgument, "LENGTH_MISMATCH",
                fmt::format("pearson: {} xs vs {} ys", xs.size(), ys.size()));
  }
  const std::size_t n = xs.size();
  if (n < 2) throw Error(ErrorKind::Data, "TOO_FEW_POINTS", "pearson needs at least 2 points");

  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw Error(ErrorKind::Data, "UNDEFINED_CORRELATION", "pearson: an input has zero variance");
  }

  CorrelationResult res;
  res.n = n;
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (n >= 3) {
    const double dof = static_cast<double>(n - 2);
    const double one_minus = 1.0 - res.r * res.r;
    if (one_minus <= 0.0) {
      res.t_stat = std::copysign(std::numeric_limits<double>::infinity(), res.r);
      res.p_two_tailed = 0.0;
    } else {
      res.t_stat = res.r * std::sqrt(dof / one_minus);
      res.p_two_tailed = std::clamp(student_t_two_tailed_p(*res.t_stat, dof), 0.0, 1.0);
    }
  }
  return res;
}

// ---------------------------------------------------------------------------

ConfusionMatrix::ConfusionMatrix(std::vector<int> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  counts_.assign(labels_.size() * labels_.size(), 0);
}

std::size_t ConfusionMatrix::index(int label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) {
    throw Error(ErrorKind::InvalidArgument, "UNKNOWN_LABEL", fmt::format("label {} not in matrix", label));
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

void ConfusionMatrix::add(int truth, int predicted, long count) {
  counts_[index(truth) * labels_.size() + index(predicted)] += count;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.labels_ != labels_) {
    std::vector<int> merged = labels_;
    merged.insert(merged.end(), other.labels_.begin(), other.labels_.end());
    ConfusionMatrix grown(merged);
    for (int t : labels_) {
      for (int p : labels_) grown.add(t, p, count(t, p));
    }
    *this = std::move(grown);
  }
  for (int t : other.labels_) {
    for (int p : other.labels_) add(t, p, other.count(t, p));
  }
  return *this;
}

long ConfusionMatrix::count(int truth, int predicted) const {
  return counts_[index(truth) * labels_.size() + index(predicted)];
}

long ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), 0L); }

long ConfusionMatrix::support(int label) const {
  long s = 0;
  for (int p : labels_) s += count(label, p);
  return s;
}

double ConfusionMatrix::accuracy() const {
  const long n = total();
  if (n == 0) return 0.0;
  long diag = 0;
  for (int l : labels_) diag += count(l, l);
  return static_cast<double>(diag) / static_cast<double>(n);
}

std::optional<double> ConfusionMatrix::recall(int label) const {
  const long s = support(label);
  if (s == 0) return std::nullopt;
  return static_cast<double>(count(label, label)) / static_cast<double>(s);
}

std::optional<double> ConfusionMatrix::precision(int label) const {
  long col = 0;
  for (int t : labels_) col += count(t, label);
  if (col == 0) return std::nullopt;
  return static_cast<double>(count(label, label)) / static_cast<double>(col);
}

double ConfusionMatrix::macro_recall() const {
  double sum = 0;
  int k = 0;
  for (int l : labels_) {
    if (auto r = recall(l)) {
      sum += *r;
      ++k;
    }
  }
  return k ? sum / k : 0.0;
}

double ConfusionMatrix::macro_precision() const {
  double sum = 0;
  int k = 0;
  for (int l : labels_) {
    if (support(l) == 0) continue;
    sum += precision(l).value_or(0.0);
    ++k;
  }
  return k ? sum / k : 0.0;
}

double ConfusionMatrix::weighted_recall() const {
  const long n = total();
  if (n == 0) return 0.0;
  double sum = 0;
  for (int l : labels_) {
    if (auto r = recall(l)) sum += *r * static_cast<double>(support(l)) / static_cast<double>(n);
  }
  return sum;
}

ConfusionMatrix evaluate(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.size() != predictions.size()) {
    throw Error(ErrorKind::InvalidArgument, "LENGTH_MISMATCH",
                fmt::format("evaluate: {} labels vs {} predictions", labels.size(), predictions.size()));
  }
  if (labels.empty()) throw Error(ErrorKind::InvalidArgument, "EMPTY_INPUT", "evaluate needs at least one label");
  std::vector<int> all(labels.begin(), labels.end());
  all.insert(all.end(), predictions.begin(), predictions.end());
  ConfusionMatrix m(std::move(all));
  for (std::size_t i = 0; i < labels.size(); ++i) m.add(labels[i], predictions[i]);
  return m;
}

// ---------------------------------------------------------------------------

ActivityPairs correlation_pairs(const PatientDataset& ds, const StudyConfig& cfg, CorrelationMode mode) {
  ActivityPairs out;
  if (ds.exams.empty()) return out;

  std::map<LocalDate, int> label_of;
  for (const auto& w : build_windows(ds.exams, cfg)) {
    for (const auto d : w.days) label_of[d] = w.label;
  }

  for (const LocalDate day : correlation_days(ds)) {
    const auto lab = label_of.find(day);
    if (lab == label_of.end()) continue;
    const auto act = activity_features(samples_on(ds.accel, day, ds.utc_offset_minutes), ds.utc_offset_minutes,
                                       cfg.interval_bounds, cfg.activity);
    if (mode == CorrelationMode::Daily) {
      if (!act.daily_score) continue;
      out.activity.push_back(*act.daily_score);
      out.score.push_back(lab->second);
      out.interval.push_back(-1);
    } else {
      for (std::size_t i = 0; i < 4; ++i) {
        if (!act.interval_scores[i]) continue;
        out.activity.push_back(*act.interval_scores[i]);
        out.score.push_back(lab->second);
        out.interval.push_back(static_cast<int>(i));
      }
    }
  }
  return out;
}

namespace {

std::optional<CorrelationResult> try_pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 3) return std::nullopt;
  try {
    return pearson(xs, ys);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

CorrelationStudy correlation_study(const ActivityPairs& pairs, CorrelationMode mode) {
  if (pairs.activity.size() < 3) {
    throw Error(ErrorKind::Data, "INSUFFICIENT_PAIRS",
                fmt::format("correlation needs >= 3 (activity, score) pairs, have {}", pairs.activity.size()));
  }
  CorrelationStudy s;
  s.mode = mode;
  s.overall = pearson(pairs.activity, pairs.score);
  if (mode == CorrelationMode::Interval) {
    for (int i = 0; i < 4; ++i) {
      std::vector<double> xs, ys;
      for (std::size_t k = 0; k < pairs.activity.size(); ++k) {
        if (pairs.interval[k] != i) continue;
        xs.push_back(pairs.activity[k]);
        ys.push_back(pairs.score[k]);
      }
      s.per_interval[static_cast<std::size_t>(i)] = try_pearson(xs, ys);
    }
  }
  return s;
}

CorrelationStudy correlation_study(const PatientDataset& ds, const StudyConfig& cfg, CorrelationMode mode) {
  return correlation_study(correlation_pairs(ds, cfg, mode), mode);
}

CorrelationStudy pooled_correlation_study(std::span<const ActivityPairs> patients, CorrelationMode mode) {
  ActivityPairs pooled;
  for (const auto& p : patients) {
    std::set<int> groups(p.interval.begin(), p.interval.end());
    for (const int g : groups) {
      std::vector<std::size_t> idx;
      for (std::size_t k = 0; k < p.interval.size(); ++k) {
        if (p.interval[k] == g) idx.push_back(k);
      }
      double mean = 0;
      for (auto k : idx) mean += p.activity[k];
      mean /= static_cast<double>(idx.size());
      double ss = 0;
      for (auto k : idx) ss += (p.activity[k] - mean) * (p.activity[k] - mean);
      const double sd = std::sqrt(ss / static_cast<double>(idx.size()));
      if (!(sd > 0.0)) continue;
      for (auto k : idx) {
        pooled.activity.push_back((p.activity[k] - mean) / sd);
        pooled.score.push_back(p.score[k]);
        pooled.interval.push_back(g);
      }
    }
  }
  return correlation_study(pooled, mode);
}

}  // namespace moodsense
