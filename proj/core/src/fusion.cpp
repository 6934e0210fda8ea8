#include "moodsense/fusion.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "moodsense/error.hpp"

namespace moodsense {

FusionStrategy FusionStrategy::logical_and() {
  FusionStrategy s;
  s.variant_ = FusionVariant::And;
  return s;
}

FusionStrategy FusionStrategy::logical_or() {
  FusionStrategy s;
  s.variant_ = FusionVariant::Or;
  return s;
}

FusionStrategy FusionStrategy::weighted(const std::map<std::string, double>& weights) {
  double total = 0;
  for (const auto& [m, w] : weights) {
    if (!std::isfinite(w) || w < 0) {
      throw Error(ErrorKind::InvalidArgument, "INVALID_WEIGHTS", fmt::format("weight for {} is {}", m, w));
    }
    total += w;
  }
  if (!(total > 0)) throw Error(ErrorKind::InvalidArgument, "INVALID_WEIGHTS", "no positive weight");
  FusionStrategy s;
  s.variant_ = FusionVariant::Weighted;
  for (const auto& [m, w] : weights) s.weights_[m] = w / total;
  return s;
}

std::string FusionStrategy::name() const {
  switch (variant_) {
    case FusionVariant::And:
      return "AND";
    case FusionVariant::Or:
      return "OR";
    case FusionVariant::Weighted:
      return "WEIGHTED";
  }
  return "?";
}

FusedDecision fuse(const FusionStrategy& strategy, std::span<const ChangeDecision> inputs) {
  if (inputs.empty()) throw Error(ErrorKind::InvalidArgument, "EMPTY_INPUT", "fuse: no modality decisions");
  FusedDecision out;
  out.epoch = inputs.front().epoch;
  out.inputs.assign(inputs.begin(), inputs.end());
  for (const auto& d : inputs) {
    if (d.epoch != out.epoch) throw Error(ErrorKind::InvalidArgument, "EPOCH_MISMATCH", "fuse: inputs span several days");
  }

  switch (strategy.variant()) {
    case FusionVariant::And:
      out.fired = std::all_of(inputs.begin(), inputs.end(), [](const ChangeDecision& d) { return d.fired; });
      out.fused_score = std::min_element(inputs.begin(), inputs.end(), [](const auto& a, const auto& b) {
                          return a.normalized_score < b.normalized_score;
                        })->normalized_score;
      break;
    case FusionVariant::Or:
      out.fired = std::any_of(inputs.begin(), inputs.end(), [](const ChangeDecision& d) { return d.fired; });
      out.fused_score = std::max_element(inputs.begin(), inputs.end(), [](const auto& a, const auto& b) {
                          return a.normalized_score < b.normalized_score;
                        })->normalized_score;
      break;
    case FusionVariant::Weighted: {
      double wsum = 0, acc = 0;
      for (const auto& d : inputs) {
        const auto it = strategy.weights().find(d.modality);
        const double w = it == strategy.weights().end() ? 0.0 : it->second;
        wsum += w;
        acc += w * d.normalized_score;
      }
      if (!(wsum > 0)) throw Error(ErrorKind::InvalidArgument, "NO_WEIGHT", "fuse: present modalities carry no weight");
      out.fused_score = acc / wsum;
      out.fired = out.fused_score >= 1.0;
      break;
    }
  }
  return out;
}

std::map<std::string, double> calibrate_weights(const std::map<std::string, std::optional<double>>& precisions) {
  constexpr double kMinWeight = 0.01;
  std::map<std::string, double> w;
  double total = 0;
  for (const auto& [m, p] : precisions) {
    w[m] = p ? std::max(*p - 0.5, kMinWeight) : kMinWeight;
    total += w[m];
  }
  for (auto& [m, v] : w) v /= total;
  return w;
}

namespace {

struct EpochDecisions {
  bool is_change = false;
  std::map<std::string, ChangeDecision> by_modality;
};

std::vector<ChangeDecision> pick(const EpochDecisions& e, std::span<const std::string> modalities) {
  std::vector<ChangeDecision> out;
  for (const auto& m : modalities) out.push_back(e.by_modality.at(m));
  return out;
}

}  // namespace

PatientFusion evaluate_fusion(const PatientDataset& ds, const StudyConfig& cfg) {
  PatientFusion out;
  out.patient_id = ds.patient_id;

  std::vector<ChangeRun> runs;
  std::vector<std::string> reasons;
  for (Modality m : kModalities) {
    auto run = run_change_detection(ds, cfg, m);
    if (run.skipped_reason) {
      reasons.push_back(run.modality + ": " + *run.skipped_reason);
      continue;
    }
    out.modalities.push_back(run.modality);
    runs.push_back(std::move(run));
  }
  if (runs.empty()) {
    out.skipped_reason = fmt::format("no modality has a fitted default-state model ({})", fmt::join(reasons, "; "));
    return out;
  }
  if (runs.size() < 2) {
    out.notice = fmt::format("only modality {} has a fitted model; fused rows omitted", runs.front().modality);
  }

  // Outside the default window, keep the days every fitted modality scored.
  std::map<LocalDate, EpochDecisions> epochs;
  for (const auto& run : runs) {
    for (std::size_t i = 0; i < run.decisions.size(); ++i) {
      if (run.window[i] == run.default_window) continue;
      auto& e = epochs[run.decisions[i].epoch];
      e.is_change = run.is_change[i];
      e.by_modality[run.modality] = run.decisions[i];
    }
  }
  std::vector<const EpochDecisions*> days;
  for (const auto& [epoch, e] : epochs) {
    if (e.by_modality.size() == runs.size()) days.push_back(&e);
  }
  const std::size_t n_cal = days.size() / 2;
  out.calibration_days = n_cal;
  out.test_days = days.size() - n_cal;

  std::map<std::string, std::optional<double>> precision, al_precision;
  for (const auto& m : out.modalities) {
    DetectionCounts c;
    for (std::size_t i = 0; i < n_cal; ++i) c.add(days[i]->is_change, days[i]->by_modality.at(m).fired);
    precision[m] = c.precision();
    if (m == "A" || m == "G") al_precision[m] = c.precision();
  }
  out.weights = calibrate_weights(precision);

  for (const auto& m : out.modalities) {
    FusionRow row{m, {}};
    for (std::size_t i = n_cal; i < days.size(); ++i) row.counts.add(days[i]->is_change, days[i]->by_modality.at(m).fired);
    out.rows.push_back(std::move(row));
  }
  if (runs.size() < 2) return out;

  auto score = [&](const char* name, const FusionStrategy& s, std::span<const std::string> modalities) {
    FusionRow row{name, {}};
    for (std::size_t i = n_cal; i < days.size(); ++i) {
      const auto inputs = pick(*days[i], modalities);
      row.counts.add(days[i]->is_change, fuse(s, inputs).fired);
    }
    out.rows.push_back(std::move(row));
  };

  if (al_precision.size() == 2) {
    out.al_weights = calibrate_weights(al_precision);
    const std::vector<std::string> al{"A", "G"};
    score(kFusedRowNames[0], FusionStrategy::weighted(out.al_weights), al);
  }
  score(kFusedRowNames[1], FusionStrategy::logical_and(), out.modalities);
  score(kFusedRowNames[2], FusionStrategy::logical_or(), out.modalities);
  score(kFusedRowNames[3], FusionStrategy::weighted(out.weights), out.modalities);
  return out;
}

FusionReport evaluate_fusion_cohort(std::span<const PatientDataset> cohort, const StudyConfig& cfg) {
  FusionReport report;
  for (Modality m : kModalities) report.row_names.push_back(scope_code(m));
  for (const char* name : kFusedRowNames) report.row_names.emplace_back(name);
  for (const auto& ds : cohort) report.patients.push_back(evaluate_fusion(ds, cfg));

  for (const auto& name : report.row_names) {
    double rec = 0, prec = 0;
    int nr = 0, np = 0;
    for (const auto& p : report.patients) {
      for (const auto& row : p.rows) {
        if (row.name != name) continue;
        if (auto v = row.counts.recall()) {
          rec += *v;
          ++nr;
        }
        if (auto v = row.counts.precision()) {
          prec += *v;
          ++np;
        }
      }
    }
    if (nr) report.mean_recall[name] = rec / nr;
    if (np) report.mean_precision[name] = prec / np;
  }
  return report;
}

}  // namespace moodsense
