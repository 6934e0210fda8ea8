#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace moodsense {

struct ActivityParams {
  int bin_seconds = 60;
  int min_samples_per_bin = 10;
};

struct MobilityParams {
  double max_accuracy_m = 100.0;
  double max_speed_kmh = 200.0;
  double stay_min_seconds = 600.0;
  double stay_radius_m = 150.0;
  double place_merge_m = 300.0;
};

/// Analysis parameters shared by every stage. All fields are optional in the
/// JSON form; missing keys keep the defaults below.
struct StudyConfig {
  int pre_days = 7;
  int post_days = 2;
  bool include_exam_day = true;
  /// Local start hour of Morning, Afternoon, Evening, Night.
  std::array<int, 4> interval_bounds{6, 12, 18, 0};
  double chi2_confidence = 0.975;
  std::uint64_t seed = 42;
  bool collapse_to_sign = false;
  double nb_floor_ratio = 1e-9;
  /// Rows with more than this fraction of missing cells are `sparse`.
  double sparse_threshold = 0.5;
  /// Default-state covariance gets ridge * trace / d added to its diagonal
  /// (ridge itself when the trace is 0).
  double covariance_ridge = 1e-6;

  /// Fallback UTC offset; per-patient entries take precedence.
  int utc_offset_minutes = 0;
  std::map<std::string, int> patient_utc_offsets;

  ActivityParams activity;
  MobilityParams mobility;

  /// Throws Error(InvalidArgument) when an invariant is broken.
  void validate() const;

  int offset_for(const std::string& patient_id) const;
};

void to_json(nlohmann::json& j, const StudyConfig& cfg);
void from_json(const nlohmann::json& j, StudyConfig& cfg);

StudyConfig load_config(const std::filesystem::path& path);

}  // namespace moodsense
