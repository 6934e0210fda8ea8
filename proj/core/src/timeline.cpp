#include "moodsense/timeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <set>

#include "moodsense/error.hpp"

namespace moodsense {

std::string_view interval_name(DayInterval i) {
  switch (i) {
    case DayInterval::Morning: return "morning";
    case DayInterval::Afternoon: return "afternoon";
    case DayInterval::Evening: return "evening";
    case DayInterval::Night: return "night";
  }
  return "?";
}

DayInterval interval_of_minute(int local_minute, const std::array<int, 4>& bounds) {
  // The owning interval is the one whose start is the latest at or before
  // the minute, wrapping to the latest start overall.
  int best = -1;
  int best_start = -1;
  int latest = 0;
  for (int i = 0; i < 4; ++i) {
    const int start = bounds[static_cast<std::size_t>(i)] * 60;
    if (start <= local_minute && start > best_start) {
      best = i;
      best_start = start;
    }
    if (start > bounds[static_cast<std::size_t>(latest)] * 60) latest = i;
  }
  return static_cast<DayInterval>(best >= 0 ? best : latest);
}

DayInterval interval_of(TimestampMs t, int utc_offset_minutes, const std::array<int, 4>& bounds) {
  return interval_of_minute(local_minute_of_day(t, utc_offset_minutes), bounds);
}

int window_label(int score, const StudyConfig& cfg) {
  if (!cfg.collapse_to_sign) return score;
  return (score > 0) - (score < 0);
}

std::vector<LabeledWindow> build_windows(std::span<const ExamRecord> exams, const StudyConfig& cfg) {
  if (exams.empty()) throw Error(ErrorKind::Data, "EXAMS_EMPTY", "cannot build windows without exams");

  std::vector<LabeledWindow> windows;
  windows.reserve(exams.size());
  for (const auto& e : exams) windows.push_back({e.date, window_label(e.score, cfg), {}});

  // Enumerate every candidate day once and hand it to the closest exam whose
  // span contains it.
  std::set<LocalDate> candidates;
  for (const auto& e : exams) {
    for (int k = -cfg.pre_days; k <= cfg.post_days; ++k) {
      if (k == 0 && !cfg.include_exam_day) continue;
      candidates.insert(e.date + k);
    }
  }
  for (const LocalDate day : candidates) {
    std::size_t owner = exams.size();
    int owner_dist = 0;
    for (std::size_t i = 0; i < exams.size(); ++i) {
      const int delta = day - exams[i].date;
      if (delta < -cfg.pre_days || delta > cfg.post_days) continue;
      if (delta == 0 && !cfg.include_exam_day) continue;
      const int dist = std::abs(delta);
      if (owner == exams.size() || dist <= owner_dist) {  // later exam wins ties
        owner = i;
        owner_dist = dist;
      }
    }
    if (owner < exams.size()) windows[owner].days.push_back(day);
  }
  return windows;
}

std::vector<LocalDate> correlation_days(const PatientDataset& ds) {
  std::set<LocalDate> exam_days;
  for (const auto& e : ds.exams) exam_days.insert(e.date);

  std::vector<LocalDate> out;
  std::optional<LocalDate> last;
  for (const auto& s : ds.accel) {
    const LocalDate d = local_date_of(s.t, ds.utc_offset_minutes);
    if (last == d) continue;
    last = d;
    if (!exam_days.contains(d)) out.push_back(d);
  }
  return out;
}

std::vector<LocalDate> data_days(const PatientDataset& ds) {
  std::set<LocalDate> days;
  const int off = ds.utc_offset_minutes;
  for (const auto& s : ds.accel) days.insert(local_date_of(s.t, off));
  for (const auto& g : ds.gps) days.insert(local_date_of(g.t, off));
  for (const auto& c : ds.calls) days.insert(local_date_of(c.t, off));
  for (const auto& v : ds.voice) days.insert(local_date_of(v.t, off));
  return {days.begin(), days.end()};
}

}  // namespace moodsense
