#include <vector>

#include <benchmark/benchmark.h>

#include "moodsense/changedetect.hpp"
#include "moodsense/classifier.hpp"
#include "moodsense/features.hpp"
#include "moodsense/special_functions.hpp"
#include "moodsense/synth.hpp"

namespace {

using namespace moodsense;

const PatientDataset& patient() {
  static const PatientDataset ds = [] {
    SyntheticPatientSpec spec;
    spec.days = 14;
    spec.timeline = {{0, 0}, {7, -2}};
    return generate_patient(spec, StudyConfig{});
  }();
  return ds;
}

void BM_ActivityScoreDay(benchmark::State& state) {
  const auto& ds = patient();
  const auto day = samples_on(ds.accel, ds.exams.front().date, ds.utc_offset_minutes);
  const ActivityParams params;
  for (auto _ : state) benchmark::DoNotOptimize(activity_score(day, params));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(day.size()));
}
BENCHMARK(BM_ActivityScoreDay);

void BM_DayFeatureVector(benchmark::State& state) {
  const auto& ds = patient();
  const StudyConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(day_feature_vector(ds, ds.exams.front().date, cfg));
}
BENCHMARK(BM_DayFeatureVector);

void BM_Mahalanobis(benchmark::State& state) {
  const auto d = static_cast<int>(state.range(0));
  Rng rng(7);
  std::vector<FeatureRow> rows(static_cast<std::size_t>(4 * d));
  for (auto& r : rows) {
    for (int j = 0; j < d; ++j) r.emplace_back(rng.gaussian());
  }
  const auto model = fit_default_state(rows, StudyConfig{});
  Eigen::VectorXd x(d);
  for (int j = 0; j < d; ++j) x[j] = rng.gaussian();
  for (auto _ : state) benchmark::DoNotOptimize(mahalanobis(model, x));
}
BENCHMARK(BM_Mahalanobis)->Arg(2)->Arg(5)->Arg(22);

void BM_PredictNB(benchmark::State& state) {
  Rng rng(11);
  std::vector<FeatureRow> X;
  std::vector<Label> y;
  for (int i = 0; i < 60; ++i) {
    FeatureRow r;
    for (int j = 0; j < 16; ++j) r.emplace_back(rng.gaussian(i % 3, 1.0));
    X.push_back(std::move(r));
    y.push_back(i % 3);
  }
  const auto model = fit_nb(X, y, 1e-9);
  for (auto _ : state) benchmark::DoNotOptimize(predict_nb(model, X.front()));
}
BENCHMARK(BM_PredictNB);

void BM_Chi2Quantile(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(chi2_quantile(static_cast<int>(state.range(0)), 0.975));
}
BENCHMARK(BM_Chi2Quantile)->Arg(1)->Arg(5)->Arg(22);

}  // namespace

BENCHMARK_MAIN();
