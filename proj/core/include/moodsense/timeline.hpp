#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "moodsense/config.hpp"
#include "moodsense/ingest.hpp"
#include "moodsense/time.hpp"

namespace moodsense {

enum class DayInterval { Morning = 0, Afternoon = 1, Evening = 2, Night = 3 };

inline constexpr std::array<DayInterval, 4> kDayIntervals{DayInterval::Morning, DayInterval::Afternoon,
                                                          DayInterval::Evening, DayInterval::Night};

std::string_view interval_name(DayInterval i);

/// Interval containing local time `t + offset`. Each interval runs from its
/// start hour up to the next interval's start hour (half-open).
DayInterval interval_of(TimestampMs t, int utc_offset_minutes, const std::array<int, 4>& bounds);

/// Same, for a minute-of-day already in local time.
DayInterval interval_of_minute(int local_minute, const std::array<int, 4>& bounds);

/// An exam together with the days whose sensor data inherit its score.
struct LabeledWindow {
  LocalDate exam_date;
  int label = 0;
  std::vector<LocalDate> days;  // ascending
};

/// One window per exam covering [exam - pre_days, exam + post_days]. Where
/// windows overlap, a day goes to the nearest exam; ties go to the later one.
/// With include_exam_day = false the exam date itself is left out.
std::vector<LabeledWindow> build_windows(std::span<const ExamRecord> exams, const StudyConfig& cfg);

/// Local days with any accelerometer data, minus exam dates.
std::vector<LocalDate> correlation_days(const PatientDataset& ds);

/// Every local day on which any stream has data, ascending.
std::vector<LocalDate> data_days(const PatientDataset& ds);

/// Labels carried by the windows, optionally collapsed to {-1, 0, +1}.
int window_label(int score, const StudyConfig& cfg);

}  // namespace moodsense
