#include "moodsense/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "moodsense/error.hpp"
#include "moodsense/timeline.hpp"

namespace moodsense {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct BinStats {
  double score_sum = 0;
  int valid = 0;
  int observed = 0;
};

BinStats bin_stats(std::span<const AccelSample> samples, const ActivityParams& params) {
  BinStats out;
  const std::int64_t bin_ms = static_cast<std::int64_t>(params.bin_seconds) * 1000;
  std::size_t i = 0;
  while (i < samples.size()) {
    const std::int64_t bin = floor_div(samples[i].t, bin_ms);
    std::size_t j = i;
    double mean = 0, m2 = 0;
    int n = 0;
    // Welford over the magnitudes in this bin.
    while (j < samples.size() && floor_div(samples[j].t, bin_ms) == bin) {
      const auto& s = samples[j];
      const double mag = std::sqrt(s.x * s.x + s.y * s.y + s.z * s.z);
      ++n;
      const double delta = mag - mean;
      mean += delta / n;
      m2 += delta * (mag - mean);
      ++j;
    }
    ++out.observed;
    if (n >= params.min_samples_per_bin) {
      out.score_sum += std::sqrt(std::max(0.0, m2 / n));
      ++out.valid;
    }
    i = j;
  }
  return out;
}

}  // namespace

char modality_code(Modality m) {
  static constexpr std::array<char, 4> codes{'A', 'G', 'P', 'S'};
  return codes[static_cast<std::size_t>(m)];
}

std::optional<Modality> parse_modality(std::string_view code) {
  if (code == "A") return Modality::Accel;
  if (code == "G") return Modality::Gps;
  if (code == "P") return Modality::Phone;
  if (code == "S") return Modality::Sound;
  return std::nullopt;
}

Cell activity_score(std::span<const AccelSample> samples, const ActivityParams& params) {
  const BinStats b = bin_stats(samples, params);
  if (b.valid == 0) return std::nullopt;
  return b.score_sum / b.valid;
}

ActivityFeatures activity_features(std::span<const AccelSample> day_samples, int utc_offset_minutes,
                                   const std::array<int, 4>& interval_bounds, const ActivityParams& params) {
  ActivityFeatures out;
  const BinStats all = bin_stats(day_samples, params);
  if (all.valid > 0) out.daily_score = all.score_sum / all.valid;
  out.valid_bin_fraction = all.observed ? static_cast<double>(all.valid) / all.observed : 0.0;

  std::array<std::vector<AccelSample>, 4> per_interval;
  for (const auto& s : day_samples) {
    per_interval[static_cast<std::size_t>(interval_of(s.t, utc_offset_minutes, interval_bounds))].push_back(s);
  }
  for (std::size_t i = 0; i < 4; ++i) out.interval_scores[i] = activity_score(per_interval[i], params);
  return out;
}

CallFeatures call_features(std::span<const CallRecord> calls, int utc_offset_minutes,
                           const std::array<int, 4>& interval_bounds) {
  CallFeatures f;
  std::set<std::string> contacts;
  int outgoing = 0;
  for (const auto& c : calls) {
    ++f.call_count;
    f.total_duration_s += c.duration_s;
    if (c.direction == CallDirection::Out) ++outgoing;
    contacts.insert(c.contact);
    if (interval_of(c.t, utc_offset_minutes, interval_bounds) == DayInterval::Night) ++f.night_call_count;
  }
  f.unique_contacts = static_cast<int>(contacts.size());
  if (f.call_count > 0) {
    f.mean_duration_s = f.total_duration_s / f.call_count;
    f.outgoing_fraction = static_cast<double>(outgoing) / f.call_count;
  }
  return f;
}

std::optional<SoundFeatures> sound_features(std::span<const VoiceFeatureRow> rows, std::size_t width) {
  if (rows.empty()) return std::nullopt;
  SoundFeatures f;
  f.mean.assign(width, 0.0);
  f.stddev.assign(width, 0.0);
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < width; ++k) f.mean[k] += r.values[k] / n;
  }
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < width; ++k) {
      const double d = r.values[k] - f.mean[k];
      f.stddev[k] += d * d / n;
    }
  }
  for (auto& s : f.stddev) s = std::sqrt(s);
  return f;
}

FeatureSchema::FeatureSchema(const std::vector<std::string>& voice_columns) {
  auto block = [&](Modality m, std::initializer_list<const char*> names) {
    offsets_[static_cast<std::size_t>(m)] = names_.size();
    for (const char* n : names) names_.emplace_back(n);
    widths_[static_cast<std::size_t>(m)] = names.size();
  };
  block(Modality::Accel, {"A.daily_score", "A.morning_score", "A.afternoon_score", "A.evening_score", "A.night_score"});
  block(Modality::Gps, {"G.total_distance_m", "G.radius_of_gyration_m", "G.place_count", "G.top_place_fraction",
                        "G.fix_count"});
  block(Modality::Phone, {"P.call_count", "P.total_duration_s", "P.mean_duration_s", "P.outgoing_fraction",
                          "P.unique_contacts", "P.night_call_count"});
  offsets_[static_cast<std::size_t>(Modality::Sound)] = names_.size();
  for (const auto& c : voice_columns) {
    names_.push_back("S." + c + ".mean");
    names_.push_back("S." + c + ".std");
  }
  widths_[static_cast<std::size_t>(Modality::Sound)] = 2 * voice_columns.size();
}

std::vector<std::size_t> FeatureSchema::columns(std::span<const Modality> blocks) const {
  std::vector<std::size_t> cols;
  for (Modality m : kModalities) {
    if (std::find(blocks.begin(), blocks.end(), m) == blocks.end()) continue;
    for (std::size_t k = 0; k < block_width(m); ++k) cols.push_back(block_offset(m) + k);
  }
  return cols;
}

double missing_fraction(std::span<const Cell> row) {
  if (row.empty()) return 1.0;
  const auto missing = std::count_if(row.begin(), row.end(), [](const Cell& c) { return !c.has_value(); });
  return static_cast<double>(missing) / static_cast<double>(row.size());
}

FeatureRow select_columns(std::span<const Cell> row, std::span<const std::size_t> columns) {
  FeatureRow out;
  out.reserve(columns.size());
  for (std::size_t c : columns) out.push_back(row[c]);
  return out;
}

DayFeatureVector day_feature_vector(const PatientDataset& ds, LocalDate epoch, const StudyConfig& cfg) {
  const FeatureSchema schema(ds.voice_columns);
  DayFeatureVector v;
  v.epoch = epoch;
  v.cells.assign(schema.dimension(), std::nullopt);

  const int off = ds.utc_offset_minutes;

  const auto accel = activity_features(samples_on(ds.accel, epoch, off), off, cfg.interval_bounds, cfg.activity);
  if (accel.daily_score) {
    const std::size_t o = schema.block_offset(Modality::Accel);
    v.cells[o] = accel.daily_score;
    for (std::size_t i = 0; i < 4; ++i) v.cells[o + 1 + i] = accel.interval_scores[i];
    v.present[static_cast<std::size_t>(Modality::Accel)] = true;
  }

  const auto mob = mobility_features(samples_on(ds.gps, epoch, off), cfg.mobility);
  if (mob.fix_count > 0) {
    const std::size_t o = schema.block_offset(Modality::Gps);
    v.cells[o + 0] = mob.total_distance_m;
    v.cells[o + 1] = mob.radius_of_gyration_m;
    v.cells[o + 2] = mob.place_count;
    v.cells[o + 3] = mob.top_place_fraction;
    v.cells[o + 4] = mob.fix_count;
    v.present[static_cast<std::size_t>(Modality::Gps)] = true;
  }

  if (!ds.calls.empty()) {
    const auto calls = call_features(samples_on(ds.calls, epoch, off), off, cfg.interval_bounds);
    const std::size_t o = schema.block_offset(Modality::Phone);
    v.cells[o + 0] = calls.call_count;
    v.cells[o + 1] = calls.total_duration_s;
    v.cells[o + 2] = calls.mean_duration_s;
    v.cells[o + 3] = calls.outgoing_fraction;
    v.cells[o + 4] = calls.unique_contacts;
    v.cells[o + 5] = calls.night_call_count;
    v.present[static_cast<std::size_t>(Modality::Phone)] = true;
  }

  if (const auto sound = sound_features(samples_on(ds.voice, epoch, off), ds.voice_columns.size())) {
    const std::size_t o = schema.block_offset(Modality::Sound);
    for (std::size_t k = 0; k < ds.voice_columns.size(); ++k) {
      v.cells[o + 2 * k] = sound->mean[k];
      v.cells[o + 2 * k + 1] = sound->stddev[k];
    }
    v.present[static_cast<std::size_t>(Modality::Sound)] = true;
  }

  v.sparse = missing_fraction(v.cells) > cfg.sparse_threshold;
  return v;
}

std::vector<DayFeatureVector> day_feature_vectors(const PatientDataset& ds, const StudyConfig& cfg) {
  std::vector<DayFeatureVector> out;
  for (const LocalDate d : data_days(ds)) {
    auto v = day_feature_vector(ds, d, cfg);
    if (std::any_of(v.present.begin(), v.present.end(), [](bool p) { return p; })) out.push_back(std::move(v));
  }
  return out;
}

FeatureRow Standardizer::apply(std::span<const Cell> row) const {
  FeatureRow out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (!row[j]) continue;
    out[j] = stddev[j] > 0.0 ? (*row[j] - mean[j]) / stddev[j] : 0.0;
  }
  return out;
}

Standardizer fit_standardizer(std::span<const FeatureRow> matrix, std::span<const std::size_t> fit_rows) {
  if (fit_rows.empty()) throw Error(ErrorKind::InvalidArgument, "EMPTY_FIT_SET", "standardize needs fit rows");
  const std::size_t d = matrix[fit_rows.front()].size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0;
    int n = 0;
    for (std::size_t r : fit_rows) {
      if (matrix[r][j]) {
        sum += *matrix[r][j];
        ++n;
      }
    }
    if (n == 0) continue;
    const double mean = sum / n;
    double ss = 0;
    for (std::size_t r : fit_rows) {
      if (matrix[r][j]) ss += (*matrix[r][j] - mean) * (*matrix[r][j] - mean);
    }
    s.mean[j] = mean;
    s.stddev[j] = std::sqrt(ss / n);
  }
  return s;
}

Standardized standardize(std::span<const FeatureRow> matrix, std::span<const std::size_t> fit_rows) {
  Standardized out{{}, fit_standardizer(matrix, fit_rows)};
  out.matrix.reserve(matrix.size());
  for (const auto& row : matrix) out.matrix.push_back(out.params.apply(row));
  return out;
}

}  // namespace moodsense
