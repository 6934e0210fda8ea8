#include "moodsense/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "moodsense/error.hpp"
#include "moodsense/timeline.hpp"

namespace moodsense {

GaussianNBModel fit_nb(std::span<const FeatureRow> X, std::span<const Label> y, double floor_ratio) {
  if (X.empty()) throw Error(ErrorKind::InvalidArgument, "EMPTY_INPUT", "fit_nb: empty training matrix");
  if (X.size() != y.size()) {
    throw Error(ErrorKind::InvalidArgument, "LENGTH_MISMATCH", fmt::format("fit_nb: {} rows vs {} labels", X.size(), y.size()));
  }
  GaussianNBModel m;
  m.labels.assign(y.begin(), y.end());
  std::sort(m.labels.begin(), m.labels.end());
  m.labels.erase(std::unique(m.labels.begin(), m.labels.end()), m.labels.end());
  if (m.labels.size() < 2) throw Error(ErrorKind::Data, "SINGLE_CLASS", "fit_nb: training set has a single class");

  const std::size_t d = X.front().size();
  const std::size_t k = m.labels.size();
  auto class_of = [&](Label l) {
    return static_cast<std::size_t>(std::lower_bound(m.labels.begin(), m.labels.end(), l) - m.labels.begin());
  };

  std::vector<double> class_rows(k, 0.0);
  std::vector<std::vector<double>> sum(k, std::vector<double>(d, 0.0));
  std::vector<std::vector<double>> n(k, std::vector<double>(d, 0.0));
  for (std::size_t r = 0; r < X.size(); ++r) {
    const std::size_t c = class_of(y[r]);
    class_rows[c] += 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (X[r][j]) {
        sum[c][j] += *X[r][j];
        n[c][j] += 1.0;
      }
    }
  }

  m.priors.resize(k);
  m.means.assign(k, std::vector<double>(d, 0.0));
  m.variances.assign(k, std::vector<double>(d, 0.0));
  m.has_stats.assign(k, std::vector<bool>(d, false));
  for (std::size_t c = 0; c < k; ++c) {
    m.priors[c] = class_rows[c] / static_cast<double>(X.size());
    for (std::size_t j = 0; j < d; ++j) {
      if (n[c][j] > 0) {
        m.means[c][j] = sum[c][j] / n[c][j];
        m.has_stats[c][j] = true;
      }
    }
  }
  for (std::size_t r = 0; r < X.size(); ++r) {
    const std::size_t c = class_of(y[r]);
    for (std::size_t j = 0; j < d; ++j) {
      if (X[r][j]) {
        const double dev = *X[r][j] - m.means[c][j];
        m.variances[c][j] += dev * dev / n[c][j];
      }
    }
  }

  // Largest global per-dimension variance sets the floor.
  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0, ss = 0, cnt = 0;
    for (const auto& row : X) {
      if (row[j]) {
        s += *row[j];
        ss += *row[j] * *row[j];
        cnt += 1.0;
      }
    }
    if (cnt > 0) max_var = std::max(max_var, ss / cnt - (s / cnt) * (s / cnt));
  }
  m.variance_floor = floor_ratio * (max_var > 0.0 ? max_var : 1.0);
  for (auto& per_class : m.variances) {
    for (auto& v : per_class) v = std::max(v, m.variance_floor);
  }
  return m;
}

NBPrediction predict_nb(const GaussianNBModel& m, std::span<const Cell> x) {
  if (x.size() != m.dimension()) {
    throw Error(ErrorKind::InvalidArgument, "DIMENSION_MISMATCH",
                fmt::format("predict_nb: row has {} cells, model {}", x.size(), m.dimension()));
  }
  const std::size_t k = m.labels.size();
  std::vector<double> logp(k);
  for (std::size_t c = 0; c < k; ++c) logp[c] = std::log(m.priors[c]);

  std::size_t used = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!x[j]) continue;
    bool all = true;
    for (std::size_t c = 0; c < k; ++c) all = all && m.has_stats[c][j];
    if (!all) continue;
    ++used;
    for (std::size_t c = 0; c < k; ++c) {
      const double var = m.variances[c][j];
      const double dev = *x[j] - m.means[c][j];
      logp[c] += -0.5 * std::log(2.0 * std::numbers::pi * var) - dev * dev / (2.0 * var);
    }
  }
  if (used == 0) throw Error(ErrorKind::Data, "ALL_MISSING", "predict_nb: no usable feature in row");

  const double top = *std::max_element(logp.begin(), logp.end());
  double norm = 0;
  for (double lp : logp) norm += std::exp(lp - top);

  NBPrediction out;
  std::size_t best = 0;
  for (std::size_t c = 0; c < k; ++c) {
    out.posterior[m.labels[c]] = std::exp(logp[c] - top) / norm;
    if (logp[c] > logp[best]) best = c;  // strict: ties keep the smaller label
  }
  out.label = m.labels[best];
  return out;
}

std::vector<ModalitySet> default_modality_sets() {
  return {
      {"A", {Modality::Accel}},
      {"G", {Modality::Gps}},
      {"P", {Modality::Phone}},
      {"S", {Modality::Sound}},
      {"fusion", {Modality::Accel, Modality::Gps, Modality::Phone, Modality::Sound}},
  };
}

LabeledRows labeled_rows(const PatientDataset& ds, const StudyConfig& cfg, std::span<const Modality> blocks) {
  LabeledRows out;
  if (ds.exams.empty()) return out;
  const FeatureSchema schema(ds.voice_columns);
  const auto cols = schema.columns(blocks);
  const auto windows = build_windows(ds.exams, cfg);
  for (std::size_t w = 0; w < windows.size(); ++w) {
    for (const LocalDate day : windows[w].days) {
      const auto v = day_feature_vector(ds, day, cfg);
      if (std::none_of(blocks.begin(), blocks.end(), [&](Modality m) { return v.has(m); })) continue;
      auto row = select_columns(v.cells, cols);
      if (missing_fraction(row) >= 1.0) continue;
      out.rows.push_back(std::move(row));
      out.labels.push_back(windows[w].label);
      out.window.push_back(w);
      out.epochs.push_back(day);
    }
  }
  return out;
}

FoldFit fit_fold(const LabeledRows& data, std::optional<std::size_t> held_out_window, double floor_ratio) {
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    if (data.window[i] != held_out_window) train.push_back(i);
  }
  if (train.empty()) throw Error(ErrorKind::Data, "EMPTY_INPUT", "fold has no training rows");

  FoldFit fit;
  fit.standardizer = fit_standardizer(data.rows, train);
  std::vector<FeatureRow> X;
  std::vector<Label> y;
  X.reserve(train.size());
  for (std::size_t i : train) {
    X.push_back(fit.standardizer.apply(data.rows[i]));
    y.push_back(data.labels[i]);
  }
  if (std::all_of(y.begin(), y.end(), [&](Label l) { return l == y.front(); })) {
    fit.constant_label = y.front();
  } else {
    fit.model = fit_nb(X, y, floor_ratio);
  }
  return fit;
}

namespace {

CVEntry run_set(const PatientDataset& ds, const StudyConfig& cfg, const ModalitySet& set, std::size_t n_windows) {
  CVEntry e;
  e.modality_set = set.name;
  const auto data = labeled_rows(ds, cfg, set.blocks);
  std::set<std::size_t> windows(data.window.begin(), data.window.end());
  std::set<Label> labels(data.labels.begin(), data.labels.end());
  if (data.rows.empty()) {
    e.reason = "no data for this modality";
    return e;
  }
  if (windows.size() < 2 || labels.size() < 2) {
    e.reason = fmt::format("data in {} of {} windows with {} distinct label(s)", windows.size(), n_windows,
                           labels.size());
    return e;
  }

  std::vector<Label> truth, pred;
  for (const std::size_t w : windows) {
    const FoldFit fit = fit_fold(data, w, cfg.nb_floor_ratio);
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
      if (data.window[i] != w) continue;
      Label p = fit.constant_label;
      if (fit.model) {
        const auto z = fit.standardizer.apply(data.rows[i]);
        try {
          p = predict_nb(*fit.model, z).label;
        } catch (const Error& err) {
          if (err.code() != "ALL_MISSING") throw;
          continue;
        }
      }
      truth.push_back(data.labels[i]);
      pred.push_back(p);
    }
  }
  if (truth.empty()) {
    e.reason = "no predictable rows";
    return e;
  }
  e.available = true;
  e.instances = truth.size();
  e.matrix = evaluate(truth, pred);
  return e;
}

}  // namespace

PatientCV within_patient_cv(const PatientDataset& ds, const StudyConfig& cfg, std::span<const ModalitySet> sets) {
  PatientCV out;
  out.patient_id = ds.patient_id;
  if (ds.exams.size() < 2) {
    out.skipped_reason = fmt::format("{} exam window(s); at least 2 required", ds.exams.size());
    return out;
  }
  const auto windows = build_windows(ds.exams, cfg);
  std::set<Label> labels;
  for (const auto& w : windows) labels.insert(w.label);
  if (labels.size() < 2) {
    out.skipped_reason = fmt::format("no change of state: every exam scored {}", *labels.begin());
    return out;
  }
  for (const auto& set : sets) out.entries.push_back(run_set(ds, cfg, set, windows.size()));
  return out;
}

CVReport cross_validate_cohort(std::span<const PatientDataset> cohort, const StudyConfig& cfg,
                               std::span<const ModalitySet> sets) {
  CVReport report;
  for (const auto& s : sets) report.modality_sets.push_back(s.name);
  for (const auto& ds : cohort) report.patients.push_back(within_patient_cv(ds, cfg, sets));

  for (const auto& s : sets) {
    double acc = 0, rec = 0, prec = 0;
    int n = 0;
    for (const auto& p : report.patients) {
      for (const auto& e : p.entries) {
        if (e.modality_set != s.name || !e.available) continue;
        acc += e.matrix->accuracy();
        rec += e.matrix->macro_recall();
        prec += e.matrix->macro_precision();
        ++n;
      }
    }
    if (n > 0) {
      report.mean_accuracy[s.name] = acc / n;
      report.mean_macro_recall[s.name] = rec / n;
      report.mean_macro_precision[s.name] = prec / n;
    }
  }
  return report;
}

}  // namespace moodsense
