#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "moodsense/config.hpp"
#include "moodsense/ingest.hpp"
#include "moodsense/time.hpp"

namespace moodsense {

/// splitmix64 finalizer.
std::uint64_t splitmix64_mix(std::uint64_t z);

/// splitmix64 stream. Uniforms take the top 53 bits; each Gaussian consumes
/// one pair of consecutive uniforms (Box-Muller, cosine branch).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// In [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian();
  double gaussian(double mean, double sd) { return mean + sd * gaussian(); }
  /// Knuth's product method; fine for the small rates used here.
  int poisson(double lambda);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

struct StateSegment {
  int start_day = 0;  // days after start_date
  int score = 0;      // [-3, 3]

  bool operator==(const StateSegment&) const = default;
};

/// Noise standard deviation per interval is
/// baseline_std * exp(effect_per_score * score) * exp(day_noise * z).
struct ActivityModel {
  std::array<double, 4> baseline_std{0.6, 0.8, 0.7, 0.15};  // m/s^2, Morning..Night
  std::array<double, 4> effect_per_score{0.15, 0.15, 0.15, 0.15};
  double day_noise = 0.08;
  int bins_per_hour = 4;
  int samples_per_bin = 12;
  int sample_spacing_ms = 5000;
};

struct MobilityModel {
  double home_lat = 60.1699;
  double home_lon = 24.9384;
  double outings_per_day = 2.0;
  double outing_effect = 0.2;  // log-rate per score unit
  double place_radius_m = 1500;
  double radius_effect = 0.2;  // log-radius per score unit
  double fix_interval_s = 300;
  double jitter_m = 15;
  double bad_fix_prob = 0.02;
};

struct CallModel {
  bool enabled = true;
  double calls_per_day = 3.0;
  double rate_effect = 0.2;
  double duration_log_mean = 4.5;  // log seconds
  double duration_log_sd = 0.6;
  double duration_effect = 0.1;
  double outgoing_prob = 0.5;
  double outgoing_effect = 0.08;
  int contacts = 12;
  double night_fraction = 0.15;
};

/// One voice row per call; value = baseline + effect * score + noise * z.
struct VoiceModel {
  bool enabled = true;
  std::vector<std::string> names{"pitch_mean_hz", "pitch_std_hz", "speech_rate"};
  std::vector<double> baseline{180.0, 25.0, 4.0};
  std::vector<double> effect{8.0, 2.0, 0.25};
  std::vector<double> noise{6.0, 3.0, 0.3};
};

struct SyntheticPatientSpec {
  std::string patient_id = "p0001";
  int utc_offset_minutes = 60;
  LocalDate start_date{19723};  // 2024-01-01
  int days = 84;
  std::vector<StateSegment> timeline{{0, 0}};
  int first_exam_day = 7;
  int exam_interval_days = 21;
  ActivityModel activity;
  MobilityModel mobility;
  CallModel calls;
  VoiceModel voice;
  std::uint64_t seed = 42;

  /// Throws SPEC_INVALID.
  void validate() const;
  int score_on(int day) const;
  std::vector<int> exam_days() const;
  /// Days whose state differs from the first segment's.
  std::vector<int> change_days() const;
};

/// Fully determined by the patient spec (including its seed) and the interval bounds.
PatientDataset generate_patient(const SyntheticPatientSpec& spec, const StudyConfig& cfg);

/// Writes the five CSV streams in the ingest format. Throws Error(Io).
void write_patient(const PatientDataset& ds, const std::filesystem::path& dir);

/// Base spec plus timelines handed out round-robin.
struct CohortTemplate {
  SyntheticPatientSpec base;
  std::vector<std::vector<StateSegment>> timelines;
};

/// 12-patient study-scale template: 84 days, exams every 21 days.
CohortTemplate default_cohort_template();

void to_json(nlohmann::json& j, const SyntheticPatientSpec& s);
void from_json(const nlohmann::json& j, SyntheticPatientSpec& s);
void to_json(nlohmann::json& j, const CohortTemplate& t);
void from_json(const nlohmann::json& j, CohortTemplate& t);
CohortTemplate load_cohort_template(const std::filesystem::path& path);

/// Patient i gets id p000(i+1), the i-th output of a stream seeded with
/// `master_seed` as its seed, and timeline i modulo the template's count.
std::vector<SyntheticPatientSpec> cohort_specs(int n, const CohortTemplate& tmpl, std::uint64_t master_seed);

/// Ground-truth manifest for a cohort.
nlohmann::json cohort_manifest(std::span<const SyntheticPatientSpec> specs, std::uint64_t master_seed);

/// Generates n patients under `out_dir` plus manifest.json; returns the patient specs.
std::vector<SyntheticPatientSpec> generate_cohort(int n, const CohortTemplate& tmpl, std::uint64_t master_seed,
                                                  const std::filesystem::path& out_dir, const StudyConfig& cfg);

}  // namespace moodsense
