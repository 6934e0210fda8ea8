#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moodsense/config.hpp"
#include "moodsense/ingest.hpp"
#include "moodsense/time.hpp"

namespace moodsense {

/// Sensor family. Codes A/G/P/S are used in file formats and reports.
enum class Modality { Accel = 0, Gps = 1, Phone = 2, Sound = 3 };

inline constexpr std::array<Modality, 4> kModalities{Modality::Accel, Modality::Gps, Modality::Phone,
                                                     Modality::Sound};

char modality_code(Modality m);
std::optional<Modality> parse_modality(std::string_view code);

/// Records of a time-sorted stream falling on local day `day`.
template <typename Record>
std::span<const Record> samples_on(const std::vector<Record>& stream, LocalDate day, int utc_offset_minutes) {
  const TimestampMs begin = local_midnight_utc(day, utc_offset_minutes);
  const TimestampMs end = begin + kMsPerDay;
  const auto by_time = [](const Record& r, TimestampMs t) { return r.t < t; };
  const auto lo = std::lower_bound(stream.begin(), stream.end(), begin, by_time);
  const auto hi = std::lower_bound(lo, stream.end(), end, by_time);
  return {lo, hi};
}

/// A feature value; nullopt marks a missing cell.
using Cell = std::optional<double>;
using FeatureRow = std::vector<Cell>;

// ---------------------------------------------------------------------------
// Accelerometer

struct ActivityFeatures {
  Cell daily_score;
  std::array<Cell, 4> interval_scores;  // indexed by DayInterval
  double valid_bin_fraction = 0.0;
};

/// Mean over valid bins of the per-bin population standard deviation of the
/// acceleration magnitude. Bins are `bin_seconds` long and aligned to the
/// epoch; a bin is valid with at least `min_samples_per_bin` samples.
/// Missing when no bin is valid.
Cell activity_score(std::span<const AccelSample> samples, const ActivityParams& params);

/// Daily and per-interval scores for one local day's samples.
ActivityFeatures activity_features(std::span<const AccelSample> day_samples, int utc_offset_minutes,
                                   const std::array<int, 4>& interval_bounds, const ActivityParams& params);

// ---------------------------------------------------------------------------
// GPS

struct StayPoint {
  double lat = 0, lon = 0;
  TimestampMs arrive = 0, leave = 0;
};

struct MobilityFeatures {
  double total_distance_m = 0;
  double radius_of_gyration_m = 0;
  int place_count = 0;
  Cell top_place_fraction;  // defined only when place_count >= 1
  int fix_count = 0;        // usable fixes after filtering
};

/// Great-circle distance on a sphere of radius 6371008.8 m.
double haversine_m(double lat1, double lon1, double lat2, double lon2);

/// Drops fixes less accurate than `max_accuracy_m`, then any fix that would
/// imply a speed above `max_speed_kmh` from the last kept fix.
std::vector<GpsFix> usable_fixes(std::span<const GpsFix> fixes, const MobilityParams& params);

/// Stay points: maximal runs within `stay_radius_m` of the run's first fix
/// lasting at least `stay_min_seconds`.
std::vector<StayPoint> detect_stay_points(std::span<const GpsFix> usable, const MobilityParams& params);

MobilityFeatures mobility_features(std::span<const GpsFix> fixes, const MobilityParams& params);

// ---------------------------------------------------------------------------
// Phone calls and voice

struct CallFeatures {
  int call_count = 0;
  double total_duration_s = 0;
  Cell mean_duration_s;
  Cell outgoing_fraction;
  int unique_contacts = 0;
  int night_call_count = 0;
};

CallFeatures call_features(std::span<const CallRecord> calls, int utc_offset_minutes,
                           const std::array<int, 4>& interval_bounds);

struct SoundFeatures {
  std::vector<double> mean;
  std::vector<double> stddev;  // population
};

/// Per-column mean and standard deviation; nullopt with no rows.
std::optional<SoundFeatures> sound_features(std::span<const VoiceFeatureRow> rows, std::size_t width);

// ---------------------------------------------------------------------------
// Day vectors

/// Column layout of a patient's day vectors: A (5), G (5), P (6), S (2k).
class FeatureSchema {
 public:
  explicit FeatureSchema(const std::vector<std::string>& voice_columns);

  std::size_t dimension() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t block_offset(Modality m) const { return offsets_[static_cast<std::size_t>(m)]; }
  std::size_t block_width(Modality m) const { return widths_[static_cast<std::size_t>(m)]; }

  /// Column indices of the listed blocks, in block order.
  std::vector<std::size_t> columns(std::span<const Modality> blocks) const;

 private:
  std::vector<std::string> names_;
  std::array<std::size_t, 4> offsets_{};
  std::array<std::size_t, 4> widths_{};
};

struct DayFeatureVector {
  LocalDate epoch;
  FeatureRow cells;
  std::array<bool, 4> present{};  // per Modality
  bool sparse = false;            // more than cfg.sparse_threshold of cells missing

  bool has(Modality m) const { return present[static_cast<std::size_t>(m)]; }
};

/// Fraction of missing cells; 1 for an empty row.
double missing_fraction(std::span<const Cell> row);

FeatureRow select_columns(std::span<const Cell> row, std::span<const std::size_t> columns);

/// Assembles one day. Blocks: A present when the day has a valid activity
/// bin; G when at least one usable fix; P when the patient has a call log at
/// all (a day without calls then counts zero calls); S when the day has a
/// voice row.
DayFeatureVector day_feature_vector(const PatientDataset& ds, LocalDate epoch, const StudyConfig& cfg);

/// Day vectors for every day with data, ascending by epoch. Days where no
/// block is present are omitted.
std::vector<DayFeatureVector> day_feature_vectors(const PatientDataset& ds, const StudyConfig& cfg);

// ---------------------------------------------------------------------------
// Standardization

/// Per-column z-score parameters. Columns with zero spread (or no present
/// fit cells) map every present value to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  FeatureRow apply(std::span<const Cell> row) const;
};

/// Fits on `fit_rows` only. Throws EMPTY_FIT_SET when `fit_rows` is empty.
Standardizer fit_standardizer(std::span<const FeatureRow> matrix, std::span<const std::size_t> fit_rows);

struct Standardized {
  std::vector<FeatureRow> matrix;
  Standardizer params;
};

Standardized standardize(std::span<const FeatureRow> matrix, std::span<const std::size_t> fit_rows);

}  // namespace moodsense
