#include "moodsense/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "moodsense/error.hpp"

namespace moodsense {
namespace {

void invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, "CONFIG_INVALID", what); }

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) it->get_to(out);
}

}  // namespace

void StudyConfig::validate() const {
  if (pre_days < 0 || post_days < 0) invalid("pre_days and post_days must be >= 0");
  if (!(chi2_confidence > 0.0 && chi2_confidence < 1.0)) invalid("chi2_confidence must lie in (0, 1)");
  if (!(nb_floor_ratio > 0.0)) invalid("nb_floor_ratio must be > 0");
  if (!(sparse_threshold >= 0.0 && sparse_threshold <= 1.0)) invalid("sparse_threshold must lie in [0, 1]");
  if (!(covariance_ridge >= 0.0)) invalid("covariance_ridge must be >= 0");
  if (utc_offset_minutes < -720 || utc_offset_minutes > 840) invalid("utc_offset_minutes out of [-720, 840]");
  for (const auto& [id, off] : patient_utc_offsets) {
    if (off < -720 || off > 840) invalid("utc offset for " + id + " out of [-720, 840]");
  }

  std::set<int> distinct(interval_bounds.begin(), interval_bounds.end());
  if (distinct.size() != 4) invalid("interval_bounds must be four distinct hours");
  for (int h : interval_bounds) {
    if (h < 0 || h > 23) invalid("interval_bounds hours must lie in [0, 23]");
  }
  // Starts must follow Morning -> Afternoon -> Evening -> Night around the clock.
  int wraps = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (interval_bounds[(i + 1) % 4] < interval_bounds[i]) ++wraps;
  }
  if (wraps != 1) invalid("interval_bounds must be in cyclic Morning/Afternoon/Evening/Night order");

  if (activity.bin_seconds <= 0 || activity.min_samples_per_bin <= 0) invalid("activity bin parameters must be > 0");
  if (mobility.max_accuracy_m < 0 || mobility.max_speed_kmh <= 0 || mobility.stay_min_seconds < 0 ||
      mobility.stay_radius_m <= 0 || mobility.place_merge_m <= 0) {
    invalid("mobility parameters out of range");
  }
}

int StudyConfig::offset_for(const std::string& patient_id) const {
  if (auto it = patient_utc_offsets.find(patient_id); it != patient_utc_offsets.end()) return it->second;
  return utc_offset_minutes;
}

void to_json(nlohmann::json& j, const StudyConfig& c) {
  j = nlohmann::json{
      {"pre_days", c.pre_days},
      {"post_days", c.post_days},
      {"include_exam_day", c.include_exam_day},
      {"interval_bounds", c.interval_bounds},
      {"chi2_confidence", c.chi2_confidence},
      {"seed", c.seed},
      {"collapse_to_sign", c.collapse_to_sign},
      {"nb_floor_ratio", c.nb_floor_ratio},
      {"sparse_threshold", c.sparse_threshold},
      {"covariance_ridge", c.covariance_ridge},
      {"utc_offset_minutes", c.utc_offset_minutes},
      {"patient_utc_offsets", c.patient_utc_offsets},
      {"activity",
       {{"bin_seconds", c.activity.bin_seconds}, {"min_samples_per_bin", c.activity.min_samples_per_bin}}},
      {"mobility",
       {{"max_accuracy_m", c.mobility.max_accuracy_m},
        {"max_speed_kmh", c.mobility.max_speed_kmh},
        {"stay_min_seconds", c.mobility.stay_min_seconds},
        {"stay_radius_m", c.mobility.stay_radius_m},
        {"place_merge_m", c.mobility.place_merge_m}}},
  };
}

void from_json(const nlohmann::json& j, StudyConfig& c) {
  if (!j.is_object()) invalid("config must be a JSON object");
  read_opt(j, "pre_days", c.pre_days);
  read_opt(j, "post_days", c.post_days);
  read_opt(j, "include_exam_day", c.include_exam_day);
  read_opt(j, "interval_bounds", c.interval_bounds);
  read_opt(j, "chi2_confidence", c.chi2_confidence);
  read_opt(j, "seed", c.seed);
  read_opt(j, "collapse_to_sign", c.collapse_to_sign);
  read_opt(j, "nb_floor_ratio", c.nb_floor_ratio);
  read_opt(j, "sparse_threshold", c.sparse_threshold);
  read_opt(j, "covariance_ridge", c.covariance_ridge);
  read_opt(j, "utc_offset_minutes", c.utc_offset_minutes);
  read_opt(j, "patient_utc_offsets", c.patient_utc_offsets);
  if (auto it = j.find("activity"); it != j.end()) {
    read_opt(*it, "bin_seconds", c.activity.bin_seconds);
    read_opt(*it, "min_samples_per_bin", c.activity.min_samples_per_bin);
  }
  if (auto it = j.find("mobility"); it != j.end()) {
    read_opt(*it, "max_accuracy_m", c.mobility.max_accuracy_m);
    read_opt(*it, "max_speed_kmh", c.mobility.max_speed_kmh);
    read_opt(*it, "stay_min_seconds", c.mobility.stay_min_seconds);
    read_opt(*it, "stay_radius_m", c.mobility.stay_radius_m);
    read_opt(*it, "place_merge_m", c.mobility.place_merge_m);
  }
}

StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "IO", "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    invalid("config " + path.string() + ": " + e.what());
  }
  StudyConfig cfg;
  try {
    from_json(j, cfg);
  } catch (const nlohmann::json::exception& e) {
    invalid("config " + path.string() + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace moodsense
