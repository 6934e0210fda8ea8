#include <string>

#include "doctest.h"
#include "moodsense/error.hpp"
#include "moodsense/ingest.hpp"
#include "moodsense/synth.hpp"
#include "support/fixtures.hpp"

using namespace moodsense;
namespace fs = std::filesystem;

namespace {

const char* kTwoExams = "date,score\n2024-01-08,0\n2024-01-29,-2\n";

std::string error_code(const fs::path& dir) {
  try {
    load_patient(dir, StudyConfig{});
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
  for (const auto& v : vs) {
    if (v.code == code) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("minimal patient: exams only") {
  fixtures::TempDir tmp;
  const auto dir = fixtures::exams_only(tmp.path(), "p0101", kTwoExams);
  const auto ds = load_patient(dir, StudyConfig{});
  CHECK(ds.patient_id == "p0101");
  REQUIRE(ds.exams.size() == 2);
  CHECK(ds.exams[0].score == 0);
  CHECK(ds.exams[1].score == -2);
  CHECK(format_date(ds.exams[1].date) == "2024-01-29");
  CHECK(ds.accel.empty());
  CHECK(ds.gps.empty());
  CHECK(ds.calls.empty());
  CHECK(ds.voice.empty());
  CHECK(validate(ds).empty());
}

TEST_CASE("empty stream files are empty streams") {
  fixtures::TempDir tmp;
  const auto dir = fixtures::exams_only(tmp.path(), "p1", kTwoExams);
  fixtures::write_file(dir / "accel.csv", "t,x,y,z\n");
  fixtures::write_file(dir / "gps.csv", "");
  const auto ds = load_patient(dir, StudyConfig{});
  CHECK(ds.accel.empty());
  CHECK(ds.gps.empty());
}

TEST_CASE("out-of-order rows are sorted, duplicates kept") {
  fixtures::TempDir tmp;
  const auto dir = fixtures::exams_only(tmp.path(), "p1", kTwoExams);
  fixtures::write_file(dir / "accel.csv",
                       "t,x,y,z\n"
                       "2024-01-02T10:00:02.000Z,3,0,0\n"
                       "2024-01-02T10:00:00.000Z,1,0,0\n"
                       "2024-01-02T10:00:01.000Z,2,0,0\n"
                       "2024-01-02T10:00:01.000Z,2.5,0,0\n");
  const auto ds = load_patient(dir, StudyConfig{});
  REQUIRE(ds.accel.size() == 4);
  CHECK(ds.accel[0].x == 1);
  CHECK(ds.accel[1].x == 2);    // stable among equal timestamps
  CHECK(ds.accel[2].x == 2.5);
  CHECK(ds.accel[3].x == 3);
  CHECK(ds.accel[0].t < ds.accel[1].t);
}

TEST_CASE("exam errors name their line") {
  fixtures::TempDir tmp;
  const auto dir = fixtures::exams_only(tmp.path(), "p1", "date,score\n2024-01-08,0\n2024-01-29,4\n");
  try {
    load_patient(dir, StudyConfig{});
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.code() == "EXAM_SCORE_RANGE");
    CHECK(e.line() == 3);
    CHECK(e.column() == 12);
    CHECK(std::string(e.what()).find("exams.csv:3:12") != std::string::npos);
  }

  fixtures::exams_only(tmp.path(), "p2", "date,score\n2024-01-29,0\n2024-01-08,1\n");
  CHECK(error_code(tmp / "p2") == "EXAM_ORDER");
  fixtures::exams_only(tmp.path(), "p3", "date,score\n2024-01-08,0\n2024-01-08,1\n");
  CHECK(error_code(tmp / "p3") == "EXAM_ORDER");
  fs::create_directories(tmp / "p4");
  CHECK(error_code(tmp / "p4") == "EXAMS_MISSING");
}

TEST_CASE("malformed CSV is reported with file, line and column") {
  fixtures::TempDir tmp;
  auto broken = [&](const std::string& name, const std::string& file, const std::string& text, int line, int col) {
    const auto dir = fixtures::exams_only(tmp.path(), name, kTwoExams);
    fixtures::write_file(dir / file, text);
    try {
      load_patient(dir, StudyConfig{});
      FAIL("expected a parse error for " << name);
    } catch (const ParseError& e) {
      CHECK(e.code() == "CSV_MALFORMED");
      CHECK(e.file().find(file) != std::string::npos);
      CHECK(e.line() == line);
      CHECK(e.column() == col);
    }
  };
  broken("header", "accel.csv", "t,x,y\n", 1, 1);
  broken("number", "accel.csv", "t,x,y,z\n2024-01-02T10:00:00Z,1,abc,0\n", 2, 24);
  broken("width", "gps.csv", "t,lat,lon,accuracy_m\n2024-01-02T10:00:00Z,60,24\n", 2, 1);
  broken("time", "calls.csv", "t,direction,duration_s,contact\nyesterday,in,60,c1\n", 2, 1);
  broken("direction", "calls.csv", "t,direction,duration_s,contact\n2024-01-02T10:00:00Z,sideways,60,c1\n", 2, 22);
  broken("exams-score", "exams.csv", "date,score\n2024-01-08,1.5\n", 2, 12);
}

TEST_CASE("validate flags each invariant") {
  PatientDataset ds;
  ds.patient_id = "p1";
  ds.exams = {{LocalDate{100}, 0}};
  CHECK(has_code(validate(ds), "EXAMS_TOO_FEW"));

  ds.exams = {{LocalDate{100}, 0}, {LocalDate{121}, 4}};
  CHECK(has_code(validate(ds), "EXAM_SCORE_RANGE"));
  ds.exams = {{LocalDate{121}, 0}, {LocalDate{100}, 1}};
  CHECK(has_code(validate(ds), "EXAM_ORDER"));
  ds.exams = {{LocalDate{100}, 0}, {LocalDate{121}, 1}};
  CHECK(validate(ds).empty());

  ds.gps = {{1000, 95.0, 24.0, 5.0}};
  const auto vs = validate(ds);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].code == "GPS_RANGE");
  ds.gps = {{1000, 60.0, 190.0, 5.0}};
  CHECK(has_code(validate(ds), "GPS_RANGE"));
  ds.gps = {{1000, 60.0, 24.0, -1.0}};
  CHECK(has_code(validate(ds), "GPS_ACCURACY"));
  ds.gps.clear();

  ds.accel = {{2000, 0, 0, 9.81}, {1000, 200.0, 0, 0}};
  const auto av = validate(ds);
  CHECK(has_code(av, "ACCEL_MAGNITUDE"));
  CHECK(has_code(av, "STREAM_UNSORTED"));
  ds.accel.clear();

  ds.calls = {{1000, CallDirection::In, -5.0, "c"}};
  CHECK(has_code(validate(ds), "CALL_DURATION"));
  ds.calls.clear();

  ds.voice_columns = {"a", "a"};
  CHECK(has_code(validate(ds), "VOICE_SCHEMA"));
  ds.voice_columns = {"a", "b"};
  ds.voice = {{"c1", 1000, {1.0}}};
  CHECK(has_code(validate(ds), "VOICE_SCHEMA"));
  ds.voice.clear();

  ds.utc_offset_minutes = 900;
  CHECK(has_code(validate(ds), "UTC_OFFSET_RANGE"));
}

TEST_CASE("validate is pure") {
  const auto ds = generate_patient(SyntheticPatientSpec{}, StudyConfig{});
  const auto copy = ds;
  const auto a = validate(ds);
  const auto b = validate(ds);
  CHECK(a == b);
  CHECK(a.empty());
  CHECK(ds.accel.size() == copy.accel.size());
  CHECK(ds.exams.size() == copy.exams.size());
}

TEST_CASE("load then write is byte-identical for generated data") {
  fixtures::TempDir tmp;
  SyntheticPatientSpec spec;
  spec.days = 21;
  spec.timeline = {{0, 0}, {10, 2}};
  const auto ds = generate_patient(spec, StudyConfig{});
  write_patient(ds, tmp / "first" / "p0001");

  StudyConfig cfg;
  cfg.patient_utc_offsets["p0001"] = spec.utc_offset_minutes;
  const auto loaded = load_patient(tmp / "first" / "p0001", cfg);
  CHECK(loaded.accel.size() == ds.accel.size());
  CHECK(loaded.voice_columns == ds.voice_columns);
  write_patient(loaded, tmp / "second" / "p0001");
  for (const char* f : {"accel.csv", "gps.csv", "calls.csv", "voice.csv", "exams.csv"}) {
    CAPTURE(f);
    const auto a = fixtures::read_file(tmp / "first" / "p0001" / f);
    CHECK(!a.empty());
    CHECK(a == fixtures::read_file(tmp / "second" / "p0001" / f));
  }
}

TEST_CASE("cohort discovery reads offsets from the manifest") {
  fixtures::TempDir tmp;
  auto tmpl = default_cohort_template();
  tmpl.base.days = 28;
  tmpl.timelines = {{{0, 0}, {14, 1}}};
  tmpl.base.utc_offset_minutes = -300;
  generate_cohort(2, tmpl, 7, tmp.path(), StudyConfig{});
  fs::create_directories(tmp / "notes");  // no exams.csv: ignored

  const auto layout = discover_cohort(tmp.path(), StudyConfig{});
  REQUIRE(layout.patient_dirs.size() == 2);
  CHECK(layout.patient_dirs[0].filename() == "p0001");
  CHECK(layout.config.offset_for("p0002") == -300);

  StudyConfig explicit_cfg;
  explicit_cfg.patient_utc_offsets["p0001"] = 60;
  const auto cohort = load_cohort(tmp.path(), explicit_cfg);
  REQUIRE(cohort.size() == 2);
  CHECK(cohort[0].utc_offset_minutes == 60);
  CHECK(cohort[1].utc_offset_minutes == -300);

  fixtures::write_file(tmp / "manifest.json", "{broken");
  CHECK_THROWS_AS(discover_cohort(tmp.path(), StudyConfig{}), Error);
}
