#include <cmath>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "moodsense/config.hpp"
#include "moodsense/error.hpp"
#include "moodsense/special_functions.hpp"
#include "moodsense/time.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace moodsense;

TEST_CASE("dates round-trip through their text form") {
  const auto d = parse_date("2024-01-01");
  REQUIRE(d);
  CHECK(d->days == 19723);
  CHECK(format_date(*d) == "2024-01-01");
  CHECK(format_date(LocalDate{0}) == "1970-01-01");
  CHECK(format_date(LocalDate{-1}) == "1969-12-31");
  CHECK(parse_date("2024-02-29"));
  CHECK_FALSE(parse_date("2023-02-29"));
  CHECK_FALSE(parse_date("2024-13-01"));
  CHECK_FALSE(parse_date("2024-1-01"));
  CHECK_FALSE(parse_date(""));
}

TEST_CASE("RFC 3339 timestamps") {
  CHECK(parse_rfc3339("1970-01-01T00:00:00Z") == 0);
  CHECK(parse_rfc3339("1970-01-01T00:00:01.5Z") == 1500);
  CHECK(parse_rfc3339("1970-01-01T00:00:00.123456Z") == 123);
  CHECK(parse_rfc3339("1970-01-01T02:00:00+02:00") == 0);
  CHECK(parse_rfc3339("1969-12-31T23:00:00-01:00") == 0);
  CHECK_FALSE(parse_rfc3339("1970-01-01 00:00:00Z"));
  CHECK_FALSE(parse_rfc3339("1970-01-01T25:00:00Z"));
  CHECK_FALSE(parse_rfc3339("1970-01-01T00:00:00"));

  const TimestampMs t = *parse_rfc3339("2024-03-10T08:15:30.250Z");
  CHECK(format_rfc3339(t) == "2024-03-10T08:15:30.250Z");
  CHECK(parse_rfc3339(format_rfc3339(-1)) == -1);
}

TEST_CASE("local days and minutes follow the fixed offset") {
  const TimestampMs t = *parse_rfc3339("2024-01-01T23:30:00Z");
  CHECK(format_date(local_date_of(t, 0)) == "2024-01-01");
  CHECK(format_date(local_date_of(t, 120)) == "2024-01-02");
  CHECK(local_minute_of_day(t, 120) == 90);
  CHECK(format_date(local_date_of(t, -720)) == "2024-01-01");
  const LocalDate d = *parse_date("2024-01-02");
  CHECK(local_midnight_utc(d, 120) == *parse_rfc3339("2024-01-01T22:00:00Z"));
  CHECK(local_date_of(local_midnight_utc(d, -300), -300) == d);
}

TEST_CASE("config defaults and JSON round trip") {
  const StudyConfig def;
  CHECK(def.pre_days == 7);
  CHECK(def.post_days == 2);
  CHECK(def.include_exam_day);
  CHECK(def.interval_bounds == std::array<int, 4>{6, 12, 18, 0});
  CHECK(def.chi2_confidence == 0.975);
  CHECK_NOTHROW(def.validate());

  StudyConfig c;
  c.pre_days = 5;
  c.chi2_confidence = 0.99;
  c.patient_utc_offsets["p0001"] = -300;
  const nlohmann::json j = c;
  const auto back = j.get<StudyConfig>();
  CHECK(back.pre_days == 5);
  CHECK(back.chi2_confidence == 0.99);
  CHECK(back.offset_for("p0001") == -300);
  CHECK(back.offset_for("p0002") == 0);

  const auto partial = nlohmann::json::parse(R"({"post_days": 3})").get<StudyConfig>();
  CHECK(partial.post_days == 3);
  CHECK(partial.pre_days == 7);
}

TEST_CASE("config invariants") {
  auto broken = [](auto edit) {
    StudyConfig c;
    edit(c);
    try {
      c.validate();
    } catch (const Error& e) {
      return e.code() == "CONFIG_INVALID" && e.kind() == ErrorKind::InvalidArgument;
    }
    return false;
  };
  CHECK(broken([](StudyConfig& c) { c.chi2_confidence = 1.0; }));
  CHECK(broken([](StudyConfig& c) { c.chi2_confidence = 0.0; }));
  CHECK(broken([](StudyConfig& c) { c.pre_days = -1; }));
  CHECK(broken([](StudyConfig& c) { c.interval_bounds = {6, 12, 12, 0}; }));
  CHECK(broken([](StudyConfig& c) { c.interval_bounds = {12, 6, 18, 0}; }));
  CHECK(broken([](StudyConfig& c) { c.utc_offset_minutes = 900; }));

  StudyConfig shifted;
  shifted.interval_bounds = {5, 11, 17, 23};
  CHECK_NOTHROW(shifted.validate());
}

TEST_CASE("config file loading") {
  fixtures::TempDir tmp;
  fixtures::write_file(tmp / "ok.json", R"({"chi2_confidence": 0.95, "mobility": {"stay_radius_m": 200}})");
  const auto c = load_config(tmp / "ok.json");
  CHECK(c.chi2_confidence == 0.95);
  CHECK(c.mobility.stay_radius_m == 200);
  CHECK(c.mobility.place_merge_m == 300);

  fixtures::write_file(tmp / "bad.json", R"({"chi2_confidence": 2})");
  CHECK_THROWS_AS(load_config(tmp / "bad.json"), Error);
  fixtures::write_file(tmp / "garbled.json", "{not json");
  CHECK_THROWS_AS(load_config(tmp / "garbled.json"), Error);
  CHECK_THROWS_AS(load_config(tmp / "absent.json"), Error);
}

TEST_CASE("chi-square quantiles") {
  CHECK(chi2_quantile(2, 0.95) == doctest::Approx(-2.0 * std::log(0.05)).epsilon(1e-10));
  CHECK(chi2_quantile(2, 0.5) == doctest::Approx(-2.0 * std::log(0.5)).epsilon(1e-10));
  // d = 1 against numerical integration of the density.
  const double x = chi2_quantile(1, 0.95);
  CHECK(x == doctest::Approx(3.8415).epsilon(1e-4));
  CHECK(oracle::chi2_cdf_numeric(1, x) == doctest::Approx(0.95).epsilon(1e-6));
  for (int d : {3, 5, 10, 22}) {
    for (double q : {0.1, 0.5, 0.975}) {
      CHECK(oracle::chi2_cdf_numeric(d, chi2_quantile(d, q)) == doctest::Approx(q).epsilon(1e-6));
    }
  }
  CHECK(chi2_quantile(5, 0.99) > chi2_quantile(5, 0.975));

  auto code_of = [](auto f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return std::string();
  };
  CHECK(code_of([] { chi2_quantile(2, 0.0); }) == "INVALID_PROBABILITY");
  CHECK(code_of([] { chi2_quantile(2, 1.0); }) == "INVALID_PROBABILITY");
  CHECK(code_of([] { chi2_quantile(0, 0.5); }) == "INVALID_DOF");
}

TEST_CASE("incomplete beta and Student t") {
  CHECK(regularized_incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3));
  CHECK(regularized_incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(2, 3, 1.0) == 1.0);
  // I_x(a, b) = 1 - I_{1-x}(b, a).
  CHECK(regularized_incomplete_beta(2.5, 4, 0.3) == doctest::Approx(1 - regularized_incomplete_beta(4, 2.5, 0.7)));
  CHECK(student_t_two_tailed_p(0.0, 10) == doctest::Approx(1.0));
  // Critical values from standard tables.
  CHECK(student_t_two_tailed_p(2.228, 10) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(student_t_two_tailed_p(-2.228, 10) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(student_t_two_tailed_p(12.706, 1) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(regularized_lower_gamma(1, 2) == doctest::Approx(1 - std::exp(-2.0)));
}
