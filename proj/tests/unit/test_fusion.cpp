#include <algorithm>

#include "doctest.h"
#include "moodsense/error.hpp"
#include "moodsense/fusion.hpp"
#include "moodsense/synth.hpp"

using namespace moodsense;

namespace {

template <typename F>
std::string code_of(F f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

ChangeDecision decision(const char* modality, double score, int day = 10) {
  return {LocalDate{day}, 0.0, score, score >= 1.0, modality};
}

const FusionRow& row(const PatientFusion& p, const std::string& name) {
  return *std::find_if(p.rows.begin(), p.rows.end(), [&](const FusionRow& r) { return r.name == name; });
}

}  // namespace

TEST_CASE("fusion examples") {
  const std::vector<ChangeDecision> in{decision("A", 1.4), decision("G", 0.6)};
  const auto a = fuse(FusionStrategy::logical_and(), in);
  CHECK_FALSE(a.fired);
  CHECK(a.fused_score == 0.6);
  const auto o = fuse(FusionStrategy::logical_or(), in);
  CHECK(o.fired);
  CHECK(o.fused_score == 1.4);
  CHECK(o.epoch == LocalDate{10});
  CHECK(o.inputs.size() == 2);

  const auto w = FusionStrategy::weighted({{"A", 3.0}, {"G", 1.0}});
  CHECK(w.weights().at("A") == 0.75);
  const auto f = fuse(w, in);
  CHECK(f.fused_score == doctest::Approx(0.75 * 1.4 + 0.25 * 0.6));
  CHECK(f.fired);
  const auto g = fuse(FusionStrategy::weighted({{"A", 1.0}, {"G", 3.0}}), in);
  CHECK(g.fused_score == doctest::Approx(0.25 * 1.4 + 0.75 * 0.6));
  CHECK_FALSE(g.fired);

  // Weights renormalize over the modalities present.
  const std::vector<ChangeDecision> only_g{decision("G", 0.6)};
  CHECK(fuse(FusionStrategy::weighted({{"A", 3.0}, {"G", 1.0}, {"S", 2.0}}), only_g).fused_score ==
        doctest::Approx(0.6));
  CHECK(FusionStrategy::logical_and().name() == "AND");
  CHECK(FusionStrategy::logical_or().name() == "OR");
  CHECK(w.name() == "WEIGHTED");
}

TEST_CASE("fusion errors") {
  CHECK(code_of([] { FusionStrategy::weighted({{"A", -1.0}, {"G", 2.0}}); }) == "INVALID_WEIGHTS");
  CHECK(code_of([] { FusionStrategy::weighted({{"A", 0.0}}); }) == "INVALID_WEIGHTS");
  CHECK(code_of([] { FusionStrategy::weighted({{"A", std::nan("")}}); }) == "INVALID_WEIGHTS");
  CHECK(code_of([] { fuse(FusionStrategy::logical_or(), std::vector<ChangeDecision>{}); }) == "EMPTY_INPUT");
  const std::vector<ChangeDecision> split{decision("A", 1.0, 1), decision("G", 1.0, 2)};
  CHECK(code_of([&] { fuse(FusionStrategy::logical_or(), split); }) == "EPOCH_MISMATCH");
  const std::vector<ChangeDecision> s_only{decision("S", 2.0)};
  CHECK(code_of([&] { fuse(FusionStrategy::weighted({{"A", 1.0}, {"S", 0.0}}), s_only); }) == "NO_WEIGHT");
}

TEST_CASE("AND implies every input, every input implies OR, weighted lies between") {
  Rng rng(6);
  const auto w = FusionStrategy::weighted({{"A", 0.4}, {"G", 0.3}, {"P", 0.2}, {"S", 0.1}});
  for (int k = 0; k < 500; ++k) {
    std::vector<ChangeDecision> in;
    for (const char* m : {"A", "G", "P", "S"}) {
      if (rng.uniform() < 0.8 || in.empty()) in.push_back(decision(m, rng.uniform(0, 2.5)));
    }
    const auto a = fuse(FusionStrategy::logical_and(), in);
    const auto o = fuse(FusionStrategy::logical_or(), in);
    const auto f = fuse(w, in);
    for (const auto& d : in) {
      if (a.fired) CHECK(d.fired);
      if (d.fired) CHECK(o.fired);
    }
    CHECK(a.fused_score <= f.fused_score + 1e-12);
    CHECK(f.fused_score <= o.fused_score + 1e-12);
    if (a.fired) CHECK(f.fired);
    if (f.fired) CHECK(o.fired);
  }
}

TEST_CASE("calibrated weights") {
  const auto w = calibrate_weights({{"A", 0.9}, {"G", 0.7}, {"P", 0.4}, {"S", std::nullopt}});
  const double total = 0.4 + 0.2 + 0.01 + 0.01;
  CHECK(w.at("A") == doctest::Approx(0.4 / total));
  CHECK(w.at("G") == doctest::Approx(0.2 / total));
  CHECK(w.at("P") == doctest::Approx(0.01 / total));
  CHECK(w.at("S") == doctest::Approx(0.01 / total));
  double sum = 0;
  for (const auto& [m, v] : w) sum += v;
  CHECK(sum == doctest::Approx(1.0));
  CHECK_NOTHROW(FusionStrategy::weighted(w));
}

TEST_CASE("per-patient fusion evaluation") {
  const StudyConfig cfg;
  SyntheticPatientSpec spec;
  spec.timeline = {{0, 0}, {21, 2}, {42, 0}, {63, -2}};
  spec.activity.effect_per_score = {0.35, 0.35, 0.35, 0.35};
  spec.voice.effect = {15, 4, 0.5};
  const auto p = evaluate_fusion(generate_patient(spec, cfg), cfg);
  CHECK_FALSE(p.skipped_reason);
  CHECK(p.modalities == std::vector<std::string>{"A", "G", "P", "S"});
  CHECK(p.calibration_days > 0);
  CHECK(p.test_days >= p.calibration_days);
  REQUIRE(p.rows.size() == 8);
  const std::vector<std::string> names{"A", "G", "P", "S", "A+L weighted", "all-in AND", "all-in OR", "all-in weighted"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    CHECK(p.rows[i].name == names[i]);
    const auto& c = p.rows[i].counts;
    CHECK(c.tp + c.fp + c.fn + c.tn == p.test_days);
  }
  CHECK(p.al_weights.size() == 2);
  CHECK(p.weights.size() == 4);

  // Day-level ordering of the logical rules.
  const auto& and_row = row(p, "all-in AND").counts;
  const auto& or_row = row(p, "all-in OR").counts;
  for (const char* m : {"A", "G", "P", "S"}) {
    CHECK(and_row.tp <= row(p, m).counts.tp);
    CHECK(row(p, m).counts.tp <= or_row.tp);
    CHECK(and_row.fp <= row(p, m).counts.fp);
    CHECK(row(p, m).counts.fp <= or_row.fp);
  }

  spec.timeline = {{0, -1}};
  const auto flat = evaluate_fusion(generate_patient(spec, cfg), cfg);
  REQUIRE(flat.skipped_reason);
  CHECK(flat.rows.empty());
}

TEST_CASE("a single fitted modality omits the fused rows") {
  const StudyConfig cfg;
  SyntheticPatientSpec spec;
  spec.timeline = {{0, 0}, {21, 2}};
  spec.calls.enabled = false;
  auto ds = generate_patient(spec, cfg);
  ds.gps.clear();
  const auto p = evaluate_fusion(ds, cfg);
  CHECK_FALSE(p.skipped_reason);
  REQUIRE(p.notice);
  REQUIRE(p.rows.size() == 1);
  CHECK(p.rows[0].name == "A");
}

TEST_CASE("cohort fusion report") {
  const StudyConfig cfg;
  SyntheticPatientSpec a, b;
  a.timeline = {{0, 0}, {21, 2}};
  b.patient_id = "p0002";
  b.timeline = {{0, 0}};
  const std::vector<PatientDataset> cohort{generate_patient(a, cfg), generate_patient(b, cfg)};
  const auto r = evaluate_fusion_cohort(cohort, cfg);
  CHECK(r.row_names.size() == 8);
  REQUIRE(r.patients.size() == 2);
  CHECK(r.patients[1].skipped_reason);
  CHECK(r.mean_recall.at("all-in OR") == doctest::Approx(*row(r.patients[0], "all-in OR").counts.recall()));
}
