#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "moodsense/config.hpp"
#include "moodsense/ingest.hpp"
#include "moodsense/synth.hpp"

namespace fixtures {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("moodsense-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << text;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

/// Writes a patient directory holding only exams.csv.
inline fs::path exams_only(const fs::path& root, const std::string& id, const std::string& exams_csv) {
  const auto dir = root / id;
  write_file(dir / "exams.csv", exams_csv);
  return dir;
}

/// Cohort used by the acceptance suite: every modality shifts strongly with
/// the state score. Four timelines change state; the fifth never does.
inline moodsense::CohortTemplate acceptance_template() {
  moodsense::CohortTemplate t;
  auto& b = t.base;
  b.days = 84;
  b.activity.effect_per_score = {0.35, 0.35, 0.35, 0.35};
  b.activity.day_noise = 0.06;
  b.mobility.outings_per_day = 6.0;
  b.mobility.outing_effect = 0.2;
  b.mobility.radius_effect = 0.4;
  b.calls.calls_per_day = 6.0;
  b.calls.rate_effect = 0.35;
  b.calls.duration_effect = 0.3;
  b.calls.outgoing_effect = 0.15;
  b.voice.effect = {15.0, 4.0, 0.5};
  t.timelines = {
      {{0, 0}, {21, -2}, {63, 0}},
      {{0, 0}, {21, 2}, {63, 0}},
      {{0, 0}, {42, -2}},
      {{0, -1}, {21, 1}, {42, -1}, {63, 1}},
      {{0, 0}},
  };
  return t;
}

/// Only Morning activity follows the state; the other intervals are noise.
inline moodsense::CohortTemplate morning_only_template() {
  moodsense::CohortTemplate t = acceptance_template();
  t.base.activity.effect_per_score = {0.25, 0.0, 0.0, 0.0};
  t.base.activity.day_noise = 0.25;
  t.timelines.pop_back();  // every patient changes state
  return t;
}

inline std::vector<moodsense::PatientDataset> generate_in_memory(int n, const moodsense::CohortTemplate& tmpl,
                                                                 std::uint64_t seed,
                                                                 const moodsense::StudyConfig& cfg = {}) {
  std::vector<moodsense::PatientDataset> out;
  for (const auto& spec : moodsense::cohort_specs(n, tmpl, seed)) out.push_back(moodsense::generate_patient(spec, cfg));
  return out;
}

}  // namespace fixtures
