#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "moodsense/config.hpp"
#include "moodsense/time.hpp"

namespace moodsense {

/// Largest acceleration magnitude accepted as a plausible phone reading, m/s^2.
inline constexpr double kMaxAccelMagnitude = 160.0;

struct AccelSample {
  TimestampMs t = 0;
  double x = 0, y = 0, z = 0;
};

struct GpsFix {
  TimestampMs t = 0;
  double lat = 0, lon = 0;
  double accuracy_m = 0;
};

enum class CallDirection { In, Out };

struct CallRecord {
  TimestampMs t = 0;
  CallDirection direction = CallDirection::In;
  double duration_s = 0;
  std::string contact;
};

struct VoiceFeatureRow {
  std::string call_id;
  TimestampMs t = 0;
  std::vector<double> values;
};

struct ExamRecord {
  LocalDate date;
  int score = 0;
};

/// Everything recorded for one patient. Streams are sorted by timestamp
/// (stable, duplicates kept). Treat as immutable once loaded.
struct PatientDataset {
  std::string patient_id;
  int utc_offset_minutes = 0;
  std::vector<AccelSample> accel;
  std::vector<GpsFix> gps;
  std::vector<CallRecord> calls;
  std::vector<std::string> voice_columns;
  std::vector<VoiceFeatureRow> voice;
  std::vector<ExamRecord> exams;
};

/// Reads data/<patient_id>/{accel,gps,calls,voice,exams}.csv. Only exams.csv
/// is mandatory. Throws ParseError on malformed rows, EXAM_SCORE_RANGE and
/// EXAM_ORDER on bad exam records.
PatientDataset load_patient(const std::filesystem::path& dir, const StudyConfig& cfg);

/// Patient directories (subdirectories holding an exams.csv, sorted) and the
/// config with UTC offsets filled in from the cohort's manifest.json.
struct CohortLayout {
  StudyConfig config;
  std::vector<std::filesystem::path> patient_dirs;
};

CohortLayout discover_cohort(const std::filesystem::path& data_dir, const StudyConfig& cfg);

/// Loads every subdirectory of `data_dir` holding an exams.csv, sorted by
/// patient id. UTC offsets come from the config, then from a manifest.json
/// in `data_dir` written by the synthesizer, then from the config default.
std::vector<PatientDataset> load_cohort(const std::filesystem::path& data_dir, const StudyConfig& cfg);

struct Violation {
  std::string code;
  std::string location;
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Invariant check over a loaded dataset. Pure; never throws.
std::vector<Violation> validate(const PatientDataset& ds);

}  // namespace moodsense
