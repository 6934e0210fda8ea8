#include "moodsense/changedetect.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "moodsense/error.hpp"
#include "moodsense/special_functions.hpp"
#include "moodsense/timeline.hpp"

namespace moodsense {

GaussianStateModel fit_default_state(std::span<const FeatureRow> rows, const StudyConfig& cfg, Label default_label) {
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "EMPTY_DIMENSION", "default-state model needs d >= 1");

  std::vector<const FeatureRow*> usable;
  for (const auto& r : rows) {
    if (r.size() != d) throw Error(ErrorKind::InvalidArgument, "DIMENSION_MISMATCH", "ragged default-state rows");
    if (missing_fraction(r) <= cfg.sparse_threshold) usable.push_back(&r);
  }
  if (usable.size() < d + 2) {
    throw Error(ErrorKind::Data, "TOO_FEW_ROWS",
                fmt::format("default-state fit needs >= {} complete rows, have {}", d + 2, usable.size()));
  }

  // Column means over present cells double as the imputation values.
  Eigen::VectorXd fill = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0;
    int n = 0;
    for (const auto* r : usable) {
      if ((*r)[j]) {
        s += *(*r)[j];
        ++n;
      }
    }
    fill[static_cast<Eigen::Index>(j)] = n ? s / n : 0.0;
  }

  const auto n = static_cast<Eigen::Index>(usable.size());
  Eigen::MatrixXd X(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto& c = (*usable[static_cast<std::size_t>(i)])[j];
      X(i, static_cast<Eigen::Index>(j)) = c ? *c : fill[static_cast<Eigen::Index>(j)];
    }
  }

  GaussianStateModel m;
  m.default_label = default_label;
  m.confidence = cfg.chi2_confidence;
  m.mean = X.colwise().mean().transpose();
  const Eigen::MatrixXd centered = X.rowwise() - m.mean.transpose();
  m.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose());
  const double trace = m.covariance.trace();
  m.regularization = trace > 0.0 ? cfg.covariance_ridge * trace / static_cast<double>(d) : cfg.covariance_ridge;
  m.covariance.diagonal().array() += m.regularization;
  m.factor.compute(m.covariance);
  if (m.factor.info() != Eigen::Success) {
    throw Error(ErrorKind::Data, "COVARIANCE_NOT_PD", "regularized covariance is not positive definite");
  }
  m.threshold_sq = chi2_quantile(static_cast<int>(d), cfg.chi2_confidence);
  return m;
}

double mahalanobis(const GaussianStateModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.mean.size()) {
    throw Error(ErrorKind::InvalidArgument, "DIMENSION_MISMATCH",
                fmt::format("mahalanobis: x has {} dims, model {}", x.size(), m.mean.size()));
  }
  // With Sigma = L L^T, the squared distance is |L^-1 (x - mu)|^2.
  const Eigen::VectorXd z = m.factor.matrixL().solve(x - m.mean);
  return std::sqrt(z.squaredNorm());
}

double mahalanobis(const GaussianStateModel& m, std::span<const Cell> x) {
  if (static_cast<Eigen::Index>(x.size()) != m.mean.size()) {
    throw Error(ErrorKind::InvalidArgument, "DIMENSION_MISMATCH",
                fmt::format("mahalanobis: x has {} dims, model {}", x.size(), m.mean.size()));
  }
  Eigen::VectorXd v(m.mean.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const auto& c = x[static_cast<std::size_t>(j)];
    v[j] = c ? *c : m.mean[j];
  }
  return mahalanobis(m, v);
}

std::vector<ChangeDecision> detect(const GaussianStateModel& model, std::span<const DayRow> days,
                                   const std::string& modality, const StudyConfig& cfg) {
  std::vector<ChangeDecision> out;
  out.reserve(days.size());
  for (const auto& day : days) {
    if (missing_fraction(day.cells) > cfg.sparse_threshold) continue;
    ChangeDecision dec;
    dec.epoch = day.epoch;
    dec.distance = mahalanobis(model, day.cells);
    dec.normalized_score = dec.distance * dec.distance / model.threshold_sq;
    dec.fired = dec.normalized_score >= 1.0;
    dec.modality = modality;
    out.push_back(std::move(dec));
  }
  return out;
}

std::string scope_code(std::optional<Modality> scope) {
  return scope ? std::string(1, modality_code(*scope)) : std::string("all");
}

ChangeRun run_change_detection(const PatientDataset& ds, const StudyConfig& cfg, std::optional<Modality> scope) {
  ChangeRun run;
  run.patient_id = ds.patient_id;
  run.modality = scope_code(scope);
  if (ds.exams.empty()) {
    run.skipped_reason = "no exams";
    return run;
  }

  const auto windows = build_windows(ds.exams, cfg);
  run.default_window = 0;
  run.default_label = windows.front().label;
  if (std::all_of(windows.begin(), windows.end(), [&](const LabeledWindow& w) { return w.label == run.default_label; })) {
    run.skipped_reason = fmt::format("no change of state: every window labeled {}", run.default_label);
    return run;
  }

  const std::vector<Modality> blocks = scope ? std::vector<Modality>{*scope}
                                             : std::vector<Modality>(kModalities.begin(), kModalities.end());
  const LabeledRows data = labeled_rows(ds, cfg, blocks);

  std::vector<std::size_t> fit_rows;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    if (data.window[i] == run.default_window && missing_fraction(data.rows[i]) <= cfg.sparse_threshold) {
      fit_rows.push_back(i);
    }
  }
  if (fit_rows.empty()) {
    run.skipped_reason = "default window has no usable days for this modality";
    return run;
  }

  const Standardizer z = fit_standardizer(data.rows, fit_rows);
  std::vector<FeatureRow> train;
  train.reserve(fit_rows.size());
  for (std::size_t i : fit_rows) train.push_back(z.apply(data.rows[i]));
  try {
    run.model = fit_default_state(train, cfg, run.default_label);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Data) throw;
    run.skipped_reason = e.what();
    return run;
  }

  std::vector<DayRow> days;
  days.reserve(data.rows.size());
  for (std::size_t i = 0; i < data.rows.size(); ++i) days.push_back({data.epochs[i], z.apply(data.rows[i])});
  // labeled_rows walks windows in exam order, so epochs are already ascending.
  run.decisions = detect(*run.model, days, run.modality, cfg);

  std::size_t k = 0;
  for (std::size_t i = 0; i < data.rows.size() && k < run.decisions.size(); ++i) {
    if (data.epochs[i] != run.decisions[k].epoch) continue;
    run.is_change.push_back(data.labels[i] != run.default_label);
    run.window.push_back(data.window[i]);
    ++k;
  }
  return run;
}

std::optional<double> DetectionCounts::recall() const {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

std::optional<double> DetectionCounts::precision() const {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

void DetectionCounts::add(bool truth, bool fired) {
  if (truth && fired) ++tp;
  if (!truth && fired) ++fp;
  if (truth && !fired) ++fn;
  if (!truth && !fired) ++tn;
}

ChangeEvaluation summarize_change_run(const ChangeRun& run) {
  ChangeEvaluation ev;
  ev.patient_id = run.patient_id;
  ev.modality = run.modality;
  ev.skipped_reason = run.skipped_reason;
  if (run.skipped_reason) return ev;

  std::set<std::size_t> episodes, detected;
  for (std::size_t i = 0; i < run.decisions.size(); ++i) {
    ev.days.add(run.is_change[i], run.decisions[i].fired);
    if (run.is_change[i]) {
      episodes.insert(run.window[i]);
      if (run.decisions[i].fired) detected.insert(run.window[i]);
    }
  }
  ev.episodes = static_cast<int>(episodes.size());
  ev.episodes_detected = static_cast<int>(detected.size());
  return ev;
}

ChangeEvaluation evaluate_change_detection(const PatientDataset& ds, const StudyConfig& cfg,
                                           std::optional<Modality> scope) {
  return summarize_change_run(run_change_detection(ds, cfg, scope));
}

ChangeEvalReport summarize_change_runs(std::span<const ChangeRun> runs) {
  ChangeEvalReport report;
  for (const auto& run : runs) {
    if (std::find(report.modalities.begin(), report.modalities.end(), run.modality) == report.modalities.end()) {
      report.modalities.push_back(run.modality);
    }
    report.rows.push_back(summarize_change_run(run));
  }
  for (const auto& code : report.modalities) {
    double rec = 0, prec = 0, ep = 0;
    int nr = 0, np = 0, ne = 0;
    for (const auto& r : report.rows) {
      if (r.modality != code || r.skipped_reason) continue;
      if (auto v = r.days.recall()) {
        rec += *v;
        ++nr;
      }
      if (auto v = r.days.precision()) {
        prec += *v;
        ++np;
      }
      if (r.episodes > 0) {
        ep += static_cast<double>(r.episodes_detected) / r.episodes;
        ++ne;
      }
    }
    if (nr) report.mean_recall[code] = rec / nr;
    if (np) report.mean_precision[code] = prec / np;
    if (ne) report.mean_episode_recall[code] = ep / ne;
  }
  return report;
}

ChangeEvalReport evaluate_change_detection_cohort(std::span<const PatientDataset> cohort, const StudyConfig& cfg,
                                                  std::span<const std::optional<Modality>> scopes) {
  std::vector<ChangeRun> runs;
  for (const auto& ds : cohort) {
    for (const auto& s : scopes) runs.push_back(run_change_detection(ds, cfg, s));
  }
  auto report = summarize_change_runs(runs);
  report.modalities.clear();
  for (const auto& s : scopes) report.modalities.push_back(scope_code(s));
  return report;
}

}  // namespace moodsense
