#include <cmath>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "moodsense/error.hpp"
#include "moodsense/features.hpp"
#include "moodsense/ingest.hpp"
#include "moodsense/synth.hpp"
#include "support/fixtures.hpp"

using namespace moodsense;
namespace fs = std::filesystem;

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

// Reference splitmix64 step, written out independently.
std::uint64_t reference_next(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string snapshot(const fs::path& dir) {
  std::string out;
  for (const char* f : {"accel.csv", "gps.csv", "calls.csv", "voice.csv", "exams.csv"}) {
    out += fixtures::read_file(dir / f);
  }
  return out;
}

}  // namespace

TEST_CASE("splitmix64 matches the reference arithmetic") {
  Rng zero(0);
  CHECK(zero.next_u64() == 0xE220A8397B1DCDAFULL);
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xFFFFFFFFFFFFFFFFULL}) {
    Rng rng(seed);
    std::uint64_t ref = seed;
    for (int i = 0; i < 1000; ++i) CHECK(rng.next_u64() == reference_next(ref));
    CHECK(rng.state() == ref);
  }
  CHECK(Rng(1).next_u64() != Rng(2).next_u64());
}

TEST_CASE("uniforms and Gaussians") {
  Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) CHECK(a.gaussian() == b.gaussian());

  // A Gaussian is built from exactly two consecutive uniforms.
  Rng g(5), u(5);
  const double u1 = 1.0 - u.uniform();
  const double u2 = u.uniform();
  CHECK(g.gaussian() == std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2));
  CHECK(g.state() == u.state());

  Rng rng(123);
  const int n = 100'000;
  double s = 0, s2 = 0, umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gaussian();
    s += x;
    s2 += x * x;
    const double v = rng.uniform();
    umin = std::min(umin, v);
    umax = std::max(umax, v);
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(umin >= 0.0);
  CHECK(umax < 1.0);

  double pois = 0;
  for (int i = 0; i < 20'000; ++i) pois += rng.poisson(3.0);
  CHECK(pois / 20'000 == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("spec validation") {
  SyntheticPatientSpec s;
  CHECK_NOTHROW(s.validate());
  auto bad = [&](auto mutate) {
    SyntheticPatientSpec t;
    mutate(t);
    return code_of([&] { t.validate(); });
  };
  CHECK(bad([](auto& t) { t.patient_id.clear(); }) == "SPEC_INVALID");
  CHECK(bad([](auto& t) { t.days = 0; }) == "SPEC_INVALID");
  CHECK(bad([](auto& t) { t.timeline = {{1, 0}}; }) == "SPEC_INVALID");
  CHECK(bad([](auto& t) { t.timeline = {{0, 4}}; }) == "SPEC_INVALID");
  CHECK(bad([](auto& t) { t.timeline = {{0, 0}, {30, 1}, {20, 2}}; }) == "SPEC_INVALID");
  CHECK(bad([](auto& t) { t.timeline = {{0, 0}, {84, 1}}; }) == "SPEC_INVALID");
  CHECK(bad([](auto& t) { t.first_exam_day = 84; }) == "SPEC_INVALID");
  CHECK(bad([](auto& t) { t.exam_interval_days = 0; }) == "SPEC_INVALID");
  CHECK(bad([](auto& t) { t.utc_offset_minutes = 900; }) == "SPEC_INVALID");
  CHECK(bad([](auto& t) { t.voice.effect.pop_back(); }) == "SPEC_INVALID");
  CHECK(code_of([&] {
          SyntheticPatientSpec t;
          t.days = 0;
          generate_patient(t, StudyConfig{});
        }) == "SPEC_INVALID");
}

TEST_CASE("timeline queries") {
  SyntheticPatientSpec s;
  s.timeline = {{0, 0}, {21, -2}, {42, 0}, {63, 1}};
  CHECK(s.score_on(0) == 0);
  CHECK(s.score_on(20) == 0);
  CHECK(s.score_on(21) == -2);
  CHECK(s.score_on(83) == 1);
  CHECK(s.exam_days() == std::vector<int>{7, 28, 49, 70});
  const auto change = s.change_days();
  CHECK(change.size() == 21 + 21);
  CHECK(change.front() == 21);
  CHECK(change.back() == 83);
}

TEST_CASE("generated patients validate, carry the timeline labels and reproduce") {
  const StudyConfig cfg;
  SyntheticPatientSpec s;
  s.timeline = {{0, 0}, {21, -2}, {42, 3}};
  const auto ds = generate_patient(s, cfg);
  CHECK(validate(ds).empty());
  CHECK(ds.patient_id == "p0001");
  REQUIRE(ds.exams.size() == s.exam_days().size());
  for (std::size_t i = 0; i < ds.exams.size(); ++i) {
    CHECK(ds.exams[i].date == s.start_date + s.exam_days()[i]);
    CHECK(ds.exams[i].score == s.score_on(s.exam_days()[i]));
  }
  CHECK_FALSE(ds.accel.empty());
  CHECK_FALSE(ds.gps.empty());
  CHECK_FALSE(ds.calls.empty());
  CHECK(ds.voice.size() == ds.calls.size());

  fixtures::TempDir tmp;
  write_patient(ds, tmp / "a");
  write_patient(generate_patient(s, cfg), tmp / "b");
  CHECK(snapshot(tmp / "a") == snapshot(tmp / "b"));
  s.seed = 43;
  write_patient(generate_patient(s, cfg), tmp / "c");
  CHECK(snapshot(tmp / "a") != snapshot(tmp / "c"));

  s.calls.enabled = false;
  const auto quiet = generate_patient(s, cfg);
  CHECK(quiet.calls.empty());
  CHECK(quiet.voice.empty());
}

TEST_CASE("doubling the activity std doubles the activity score") {
  const StudyConfig cfg;
  SyntheticPatientSpec s;
  s.days = 56;
  s.timeline = {{0, 0}, {28, 1}};
  s.activity.effect_per_score = {std::log(2.0), std::log(2.0), std::log(2.0), std::log(2.0)};
  const auto ds = generate_patient(s, cfg);
  double base = 0, doubled = 0;
  for (int day = 0; day < 56; ++day) {
    const auto f = activity_features(samples_on(ds.accel, s.start_date + day, ds.utc_offset_minutes),
                                     ds.utc_offset_minutes, cfg.interval_bounds, cfg.activity);
    REQUIRE(f.daily_score);
    (day < 28 ? base : doubled) += *f.daily_score;
  }
  const double ratio = doubled / base;
  CAPTURE(ratio);
  CHECK(ratio >= 1.7);
  CHECK(ratio <= 2.3);
}

TEST_CASE("cohort specs, templates and manifests") {
  const auto tmpl = default_cohort_template();
  CHECK(tmpl.base.days == 84);
  CHECK(tmpl.base.exam_interval_days == 21);

  const auto specs = cohort_specs(12, tmpl, 42);
  REQUIRE(specs.size() == 12);
  CHECK(specs[0].patient_id == "p0001");
  CHECK(specs[11].patient_id == "p0012");
  Rng master(42);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    CHECK(specs[i].seed == master.next_u64());
    CHECK(specs[i].timeline == tmpl.timelines[i % tmpl.timelines.size()]);
  }

  nlohmann::json j = tmpl;
  const auto back = j.get<CohortTemplate>();
  CHECK(nlohmann::json(back) == j);

  const auto m = cohort_manifest(specs, 42);
  CHECK(m == cohort_manifest(cohort_specs(12, tmpl, 42), 42));
  CHECK(m["master_seed"] == 42);
  REQUIRE(m["patients"].size() == 12);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& p = m["patients"][i];
    std::vector<std::string> expected;
    for (int d : specs[i].change_days()) expected.push_back(format_date(specs[i].start_date + d));
    CHECK(p["change_days"].get<std::vector<std::string>>() == expected);
    CHECK(p["exams"].size() == specs[i].exam_days().size());
  }
}

TEST_CASE("generate_cohort writes loadable directories") {
  const StudyConfig cfg;
  fixtures::TempDir tmp;
  auto tmpl = default_cohort_template();
  tmpl.base.days = 42;
  tmpl.timelines = {{{0, 0}, {21, 1}}, {{0, -1}}};
  const auto specs = generate_cohort(3, tmpl, 7, tmp.path(), cfg);
  CHECK(specs.size() == 3);
  CHECK(fs::exists(tmp / "manifest.json"));
  const auto cohort = load_cohort(tmp.path(), cfg);
  REQUIRE(cohort.size() == 3);
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    CHECK(cohort[i].patient_id == specs[i].patient_id);
    CHECK(cohort[i].utc_offset_minutes == specs[i].utc_offset_minutes);
    CHECK(validate(cohort[i]).empty());
  }
  const auto manifest = nlohmann::json::parse(fixtures::read_file(tmp / "manifest.json"));
  CHECK(manifest == cohort_manifest(specs, 7));
}
