#include "moodsense/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string_view>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "moodsense/error.hpp"

namespace moodsense {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "IO", "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Splits a whole CSV file into rows of fields, tracking each field's
/// 1-based column so errors can point at it.
class CsvTable {
 public:
  CsvTable(std::string file, std::string content)
      : file_(std::move(file)), content_(std::make_unique<const std::string>(std::move(content))) {
    std::string_view rest(*content_);
    int line = 0;
    while (!rest.empty()) {
      ++line;
      const auto nl = rest.find('\n');
      std::string_view row = rest.substr(0, nl);
      rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
      if (row.empty()) continue;
      Row r{line, {}, {}};
      std::size_t start = 0;
      while (true) {
        const auto comma = row.find(',', start);
        r.fields.push_back(row.substr(start, comma == std::string_view::npos ? row.npos : comma - start));
        r.columns.push_back(static_cast<int>(start) + 1);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      rows_.push_back(std::move(r));
    }
  }

  struct Row {
    int line;
    std::vector<std::string_view> fields;
    std::vector<int> columns;
  };

  const std::string& file() const { return file_; }
  const std::vector<Row>& rows() const { return rows_; }

  [[noreturn]] void fail(const Row& r, std::size_t field, const std::string& msg) const {
    const int col = field < r.columns.size() ? r.columns[field] : 1;
    throw ParseError("CSV_MALFORMED", file_, r.line, col, msg);
  }

  /// Returns the data rows after checking the header. A zero-byte file is
  /// an empty stream.
  std::span<const Row> data(const std::vector<std::string_view>& expected_header) const {
    if (rows_.empty()) return {};
    const Row& h = rows_.front();
    if (h.fields != expected_header) {
      std::string want;
      for (std::size_t i = 0; i < expected_header.size(); ++i) {
        want += (i ? "," : "") + std::string(expected_header[i]);
      }
      fail(h, 0, "header must be exactly '" + want + "'");
    }
    return {rows_.data() + 1, rows_.size() - 1};
  }

  void expect_width(const Row& r, std::size_t n) const {
    if (r.fields.size() != n) {
      fail(r, std::min(r.fields.size(), n), fmt::format("expected {} fields, found {}", n, r.fields.size()));
    }
  }

  double number(const Row& r, std::size_t i) const {
    const auto f = r.fields[i];
    double v = 0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) {
      fail(r, i, "not a number: '" + std::string(f) + "'");
    }
    return v;
  }

  TimestampMs timestamp(const Row& r, std::size_t i) const {
    const auto t = parse_rfc3339(r.fields[i]);
    if (!t) fail(r, i, "not an RFC 3339 timestamp: '" + std::string(r.fields[i]) + "'");
    return *t;
  }

 private:
  std::string file_;
  std::unique_ptr<const std::string> content_;  // rows_ holds views into it
  std::vector<Row> rows_;
};

std::optional<CsvTable> open_table(const fs::path& dir, const char* name) {
  const fs::path p = dir / name;
  if (!fs::exists(p)) return std::nullopt;
  return CsvTable(p.string(), read_file(p));
}

template <typename T>
void sort_by_time(std::vector<T>& v) {
  std::stable_sort(v.begin(), v.end(), [](const T& a, const T& b) { return a.t < b.t; });
}

template <typename T>
bool is_time_sorted(const std::vector<T>& v) {
  return std::is_sorted(v.begin(), v.end(), [](const T& a, const T& b) { return a.t < b.t; });
}

}  // namespace

PatientDataset load_patient(const fs::path& dir, const StudyConfig& cfg) {
  PatientDataset ds;
  ds.patient_id = dir.filename().string();
  if (ds.patient_id.empty()) ds.patient_id = dir.parent_path().filename().string();
  ds.utc_offset_minutes = cfg.offset_for(ds.patient_id);

  auto exams = open_table(dir, "exams.csv");
  if (!exams) throw Error(ErrorKind::Data, "EXAMS_MISSING", (dir / "exams.csv").string() + " not found");
  for (const auto& r : exams->data({"date", "score"})) {
    exams->expect_width(r, 2);
    const auto date = parse_date(r.fields[0]);
    if (!date) exams->fail(r, 0, "not a YYYY-MM-DD date: '" + std::string(r.fields[0]) + "'");
    int score = 0;
    const auto f = r.fields[1];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), score);
    if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) {
      exams->fail(r, 1, "score is not an integer: '" + std::string(f) + "'");
    }
    if (score < -3 || score > 3) {
      throw ParseError("EXAM_SCORE_RANGE", exams->file(), r.line, r.columns[1],
                       fmt::format("exam score {} outside [-3, 3]", score));
    }
    if (!ds.exams.empty() && !(ds.exams.back().date < *date)) {
      throw ParseError("EXAM_ORDER", exams->file(), r.line, r.columns[0], "exam dates must be strictly increasing");
    }
    ds.exams.push_back({*date, score});
  }

  if (auto accel = open_table(dir, "accel.csv")) {
    const auto rows = accel->data({"t", "x", "y", "z"});
    ds.accel.reserve(rows.size());
    for (const auto& r : rows) {
      accel->expect_width(r, 4);
      ds.accel.push_back({accel->timestamp(r, 0), accel->number(r, 1), accel->number(r, 2), accel->number(r, 3)});
    }
    sort_by_time(ds.accel);
  }

  if (auto gps = open_table(dir, "gps.csv")) {
    const auto rows = gps->data({"t", "lat", "lon", "accuracy_m"});
    ds.gps.reserve(rows.size());
    for (const auto& r : rows) {
      gps->expect_width(r, 4);
      ds.gps.push_back({gps->timestamp(r, 0), gps->number(r, 1), gps->number(r, 2), gps->number(r, 3)});
    }
    sort_by_time(ds.gps);
  }

  if (auto calls = open_table(dir, "calls.csv")) {
    for (const auto& r : calls->data({"t", "direction", "duration_s", "contact"})) {
      calls->expect_width(r, 4);
      CallRecord c;
      c.t = calls->timestamp(r, 0);
      if (r.fields[1] == "in") {
        c.direction = CallDirection::In;
      } else if (r.fields[1] == "out") {
        c.direction = CallDirection::Out;
      } else {
        calls->fail(r, 1, "direction must be 'in' or 'out'");
      }
      c.duration_s = calls->number(r, 2);
      c.contact = std::string(r.fields[3]);
      ds.calls.push_back(std::move(c));
    }
    sort_by_time(ds.calls);
  }

  if (auto voice = open_table(dir, "voice.csv"); voice && !voice->rows().empty()) {
    const auto& header = voice->rows().front();
    if (header.fields.size() < 2 || header.fields[0] != "call_id" || header.fields[1] != "t") {
      voice->fail(header, 0, "header must start with 'call_id,t'");
    }
    std::set<std::string_view> seen;
    for (std::size_t i = 2; i < header.fields.size(); ++i) {
      const auto name = header.fields[i];
      if (name.empty() || name == "call_id" || name == "t" || !seen.insert(name).second) {
        voice->fail(header, i, "voice feature names must be unique and non-empty");
      }
      ds.voice_columns.emplace_back(name);
    }
    const auto width = header.fields.size();
    for (const auto& r : voice->data(header.fields)) {
      voice->expect_width(r, width);
      VoiceFeatureRow row;
      row.call_id = std::string(r.fields[0]);
      row.t = voice->timestamp(r, 1);
      row.values.reserve(width - 2);
      for (std::size_t i = 2; i < width; ++i) row.values.push_back(voice->number(r, i));
      ds.voice.push_back(std::move(row));
    }
    sort_by_time(ds.voice);
  }

  return ds;
}

CohortLayout discover_cohort(const fs::path& data_dir, const StudyConfig& cfg) {
  if (!fs::is_directory(data_dir)) throw Error(ErrorKind::Io, "IO", data_dir.string() + " is not a directory");

  CohortLayout layout{cfg, {}};
  const fs::path manifest = data_dir / "manifest.json";
  if (fs::exists(manifest)) {
    try {
      const auto j = nlohmann::json::parse(read_file(manifest));
      for (const auto& p : j.value("patients", nlohmann::json::array())) {
        const auto id = p.at("patient_id").get<std::string>();
        if (!cfg.patient_utc_offsets.contains(id) && p.contains("utc_offset_minutes")) {
          layout.config.patient_utc_offsets[id] = p.at("utc_offset_minutes").get<int>();
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Data, "MANIFEST_MALFORMED", manifest.string() + ": " + e.what());
    }
  }

  for (const auto& entry : fs::directory_iterator(data_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "exams.csv")) layout.patient_dirs.push_back(entry.path());
  }
  std::sort(layout.patient_dirs.begin(), layout.patient_dirs.end());
  return layout;
}

std::vector<PatientDataset> load_cohort(const fs::path& data_dir, const StudyConfig& cfg) {
  const auto layout = discover_cohort(data_dir, cfg);
  std::vector<PatientDataset> out;
  out.reserve(layout.patient_dirs.size());
  for (const auto& d : layout.patient_dirs) out.push_back(load_patient(d, layout.config));
  return out;
}

std::vector<Violation> validate(const PatientDataset& ds) {
  std::vector<Violation> out;
  auto add = [&](std::string code, std::string where, std::string msg) {
    out.push_back({std::move(code), ds.patient_id + "/" + where, std::move(msg)});
  };

  if (ds.utc_offset_minutes < -720 || ds.utc_offset_minutes > 840) {
    add("UTC_OFFSET_RANGE", "config", fmt::format("utc offset {} outside [-720, 840]", ds.utc_offset_minutes));
  }

  if (ds.exams.size() < 2) {
    add("EXAMS_TOO_FEW", "exams.csv", fmt::format("{} exam(s); at least 2 required", ds.exams.size()));
  }
  for (std::size_t i = 0; i < ds.exams.size(); ++i) {
    const auto& e = ds.exams[i];
    if (e.score < -3 || e.score > 3) {
      add("EXAM_SCORE_RANGE", fmt::format("exams.csv record {}", i + 1), fmt::format("score {} outside [-3, 3]", e.score));
    }
    if (i > 0 && !(ds.exams[i - 1].date < e.date)) {
      add("EXAM_ORDER", fmt::format("exams.csv record {}", i + 1), "exam dates not strictly increasing");
    }
  }

  for (std::size_t i = 0; i < ds.accel.size(); ++i) {
    const auto& s = ds.accel[i];
    if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.z)) {
      add("ACCEL_NONFINITE", fmt::format("accel.csv record {}", i + 1), "non-finite component");
    } else if (std::sqrt(s.x * s.x + s.y * s.y + s.z * s.z) > kMaxAccelMagnitude) {
      add("ACCEL_MAGNITUDE", fmt::format("accel.csv record {}", i + 1),
          fmt::format("magnitude exceeds {} m/s^2", kMaxAccelMagnitude));
    }
  }

  for (std::size_t i = 0; i < ds.gps.size(); ++i) {
    const auto& g = ds.gps[i];
    if (!(g.lat >= -90.0 && g.lat <= 90.0) || !(g.lon >= -180.0 && g.lon <= 180.0)) {
      add("GPS_RANGE", fmt::format("gps.csv record {}", i + 1),
          fmt::format("coordinate ({}, {}) out of range", g.lat, g.lon));
    }
    if (!(g.accuracy_m >= 0.0) || !std::isfinite(g.accuracy_m)) {
      add("GPS_ACCURACY", fmt::format("gps.csv record {}", i + 1), "accuracy must be finite and >= 0");
    }
  }

  for (std::size_t i = 0; i < ds.calls.size(); ++i) {
    const auto& c = ds.calls[i];
    if (!std::isfinite(c.duration_s) || c.duration_s < 0.0) {
      add("CALL_DURATION", fmt::format("calls.csv record {}", i + 1), "duration must be finite and >= 0");
    }
  }

  std::set<std::string> names(ds.voice_columns.begin(), ds.voice_columns.end());
  if (names.size() != ds.voice_columns.size()) add("VOICE_SCHEMA", "voice.csv header", "duplicate feature names");
  for (std::size_t i = 0; i < ds.voice.size(); ++i) {
    const auto& v = ds.voice[i];
    if (v.values.size() != ds.voice_columns.size()) {
      add("VOICE_SCHEMA", fmt::format("voice.csv record {}", i + 1), "row width differs from header");
    }
    if (std::any_of(v.values.begin(), v.values.end(), [](double x) { return !std::isfinite(x); })) {
      add("VOICE_NONFINITE", fmt::format("voice.csv record {}", i + 1), "non-finite feature value");
    }
  }

  if (!is_time_sorted(ds.accel)) add("STREAM_UNSORTED", "accel.csv", "samples not sorted by t");
  if (!is_time_sorted(ds.gps)) add("STREAM_UNSORTED", "gps.csv", "fixes not sorted by t");
  if (!is_time_sorted(ds.calls)) add("STREAM_UNSORTED", "calls.csv", "calls not sorted by t");
  if (!is_time_sorted(ds.voice)) add("STREAM_UNSORTED", "voice.csv", "rows not sorted by t");

  return out;
}

}  // namespace moodsense
