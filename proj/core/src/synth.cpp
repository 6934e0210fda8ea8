#include "moodsense/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "moodsense/error.hpp"
#include "moodsense/timeline.hpp"

namespace moodsense {

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return splitmix64_mix(state_);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::gaussian() {
  const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::poisson(double lambda) {
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = uniform();
  while (p > limit) {
    ++k;
    p *= uniform();
  }
  return k;
}

namespace {

void spec_invalid(const std::string& what) { throw Error(ErrorKind::InvalidArgument, "SPEC_INVALID", what); }

double round_to(double v, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::round(v * scale) / scale;
}

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kGravity = 9.81;

// Offsets a coordinate by (north, east) meters on a local tangent plane.
std::pair<double, double> displace(double lat, double lon, double north_m, double east_m) {
  const double dlat = north_m / kEarthRadiusM * 180.0 / std::numbers::pi;
  const double dlon = east_m / (kEarthRadiusM * std::cos(lat * std::numbers::pi / 180.0)) * 180.0 / std::numbers::pi;
  return {lat + dlat, lon + dlon};
}

void gen_accel(const SyntheticPatientSpec& spec, const StudyConfig& cfg, Rng& rng, PatientDataset& ds) {
  const auto& a = spec.activity;
  const int bin_minutes = 60 / a.bins_per_hour;
  for (int day = 0; day < spec.days; ++day) {
    const int score = spec.score_on(day);
    std::array<double, 4> sigma{};
    for (std::size_t i = 0; i < 4; ++i) {
      sigma[i] = a.baseline_std[i] * std::exp(a.effect_per_score[i] * score) * std::exp(a.day_noise * rng.gaussian());
    }
    const TimestampMs midnight = local_midnight_utc(spec.start_date + day, spec.utc_offset_minutes);
    for (int bin = 0; bin < 24 * a.bins_per_hour; ++bin) {
      const int minute = bin * bin_minutes;
      const double s = sigma[static_cast<std::size_t>(interval_of_minute(minute, cfg.interval_bounds))];
      // Phone orientation is fixed within a bin.
      double ux = rng.gaussian(), uy = rng.gaussian(), uz = rng.gaussian();
      const double norm = std::sqrt(ux * ux + uy * uy + uz * uz);
      ux /= norm;
      uy /= norm;
      uz /= norm;
      const TimestampMs start = midnight + minute * kMsPerMinute;
      for (int k = 0; k < a.samples_per_bin; ++k) {
        AccelSample smp;
        smp.t = start + static_cast<TimestampMs>(k) * a.sample_spacing_ms;
        smp.x = round_to(kGravity * ux + s * rng.gaussian(), 4);
        smp.y = round_to(kGravity * uy + s * rng.gaussian(), 4);
        smp.z = round_to(kGravity * uz + s * rng.gaussian(), 4);
        ds.accel.push_back(smp);
      }
    }
  }
}

void gen_gps(const SyntheticPatientSpec& spec, Rng& rng, PatientDataset& ds) {
  const auto& m = spec.mobility;
  const auto fix_ms = static_cast<TimestampMs>(m.fix_interval_s * 1000.0);
  for (int day = 0; day < spec.days; ++day) {
    const int score = spec.score_on(day);
    const TimestampMs midnight = local_midnight_utc(spec.start_date + day, spec.utc_offset_minutes);

    struct Outing {
      TimestampMs begin, end;
      double lat, lon;
    };
    std::vector<Outing> outings;
    const int n = std::min(8, rng.poisson(m.outings_per_day * std::exp(m.outing_effect * score)));
    double hour = 8.0 + rng.uniform(0.0, 2.0);
    for (int k = 0; k < n && hour < 21.0; ++k) {
      const double dwell_h = rng.uniform(0.5, 2.0);
      const double dist = std::min(10'000.0, m.place_radius_m * std::exp(m.radius_effect * score) *
                                                  std::exp(0.3 * rng.gaussian()));
      const double bearing = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const auto [lat, lon] = displace(m.home_lat, m.home_lon, dist * std::cos(bearing), dist * std::sin(bearing));
      const auto begin = midnight + static_cast<TimestampMs>(hour * 3'600'000.0);
      const auto end = midnight + static_cast<TimestampMs>((hour + dwell_h) * 3'600'000.0);
      outings.push_back({begin, end, lat, lon});
      hour += dwell_h + rng.uniform(0.5, 2.0);
    }

    std::size_t o = 0;
    for (TimestampMs t = midnight; t < midnight + kMsPerDay; t += fix_ms) {
      while (o < outings.size() && outings[o].end <= t) ++o;
      double lat = m.home_lat, lon = m.home_lon;
      if (o < outings.size() && outings[o].begin <= t) {
        lat = outings[o].lat;
        lon = outings[o].lon;
      }
      GpsFix fix;
      fix.t = t;
      const double jn = m.jitter_m * rng.gaussian();
      const double je = m.jitter_m * rng.gaussian();
      const double acc = 5.0 + std::abs(10.0 * rng.gaussian());
      if (rng.uniform() < m.bad_fix_prob) {
        // A poor fix: far off and flagged by its accuracy estimate.
        const auto [blat, blon] = displace(lat, lon, rng.uniform(-800.0, 800.0), rng.uniform(-800.0, 800.0));
        fix.lat = blat;
        fix.lon = blon;
        fix.accuracy_m = round_to(rng.uniform(150.0, 300.0), 1);
      } else {
        const auto [plat, plon] = displace(lat, lon, jn, je);
        fix.lat = plat;
        fix.lon = plon;
        fix.accuracy_m = round_to(acc, 1);
      }
      fix.lat = round_to(fix.lat, 6);
      fix.lon = round_to(fix.lon, 6);
      ds.gps.push_back(fix);
    }
  }
}

void gen_calls_and_voice(const SyntheticPatientSpec& spec, Rng& rng, PatientDataset& ds) {
  const auto& c = spec.calls;
  const auto& v = spec.voice;
  if (v.enabled) ds.voice_columns = v.names;
  if (!c.enabled) return;

  std::vector<std::string> contacts;
  for (int k = 0; k < std::max(1, c.contacts); ++k) contacts.push_back(fmt::format("{:016x}", rng.next_u64()));

  int call_no = 0;
  for (int day = 0; day < spec.days; ++day) {
    const int score = spec.score_on(day);
    const TimestampMs midnight = local_midnight_utc(spec.start_date + day, spec.utc_offset_minutes);
    const int n = rng.poisson(c.calls_per_day * std::exp(c.rate_effect * score));
    std::vector<CallRecord> today;
    for (int k = 0; k < n; ++k) {
      CallRecord r;
      const double hour = rng.uniform() < c.night_fraction ? rng.uniform(0.0, 6.0) : rng.uniform(7.0, 23.0);
      r.t = midnight + static_cast<TimestampMs>(hour * 3600.0) * 1000;
      const double p_out = std::clamp(c.outgoing_prob + c.outgoing_effect * score, 0.05, 0.95);
      r.direction = rng.uniform() < p_out ? CallDirection::Out : CallDirection::In;
      r.duration_s = round_to(
          std::exp(c.duration_log_mean + c.duration_effect * score + c.duration_log_sd * rng.gaussian()), 1);
      r.contact = contacts[rng.below(contacts.size())];
      today.push_back(std::move(r));
    }
    std::stable_sort(today.begin(), today.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    for (auto& r : today) {
      if (v.enabled) {
        VoiceFeatureRow row;
        row.call_id = fmt::format("c{:06d}", ++call_no);
        row.t = r.t;
        for (std::size_t k = 0; k < v.names.size(); ++k) {
          row.values.push_back(round_to(v.baseline[k] + v.effect[k] * score + v.noise[k] * rng.gaussian(), 4));
        }
        ds.voice.push_back(std::move(row));
      }
      ds.calls.push_back(std::move(r));
    }
  }
}

}  // namespace

void SyntheticPatientSpec::validate() const {
  if (patient_id.empty()) spec_invalid("patient_id is empty");
  if (days < 1) spec_invalid("days must be >= 1");
  if (utc_offset_minutes < -720 || utc_offset_minutes > 840) spec_invalid("utc_offset_minutes out of [-720, 840]");
  if (timeline.empty() || timeline.front().start_day != 0) spec_invalid("timeline must start at day 0");
  for (std::size_t i = 0; i < timeline.size(); ++i) {
    if (timeline[i].score < -3 || timeline[i].score > 3) spec_invalid("timeline score out of [-3, 3]");
    if (timeline[i].start_day >= days) spec_invalid("timeline segment starts after the last day");
    if (i > 0 && timeline[i].start_day <= timeline[i - 1].start_day) spec_invalid("timeline segments must be ordered");
  }
  if (first_exam_day < 0 || first_exam_day >= days) spec_invalid("first exam outside the data range");
  if (exam_interval_days < 1) spec_invalid("exam_interval_days must be >= 1");
  if (activity.bins_per_hour < 1 || 60 % activity.bins_per_hour != 0 || activity.samples_per_bin < 1 ||
      activity.sample_spacing_ms < 1) {
    spec_invalid("activity sampling parameters invalid");
  }
  if (static_cast<TimestampMs>(activity.samples_per_bin) * activity.sample_spacing_ms >
      60'000LL * (60 / activity.bins_per_hour)) {
    spec_invalid("activity samples overflow their bin");
  }
  if (!(mobility.fix_interval_s > 0)) spec_invalid("fix_interval_s must be > 0");
  if (voice.baseline.size() != voice.names.size() || voice.effect.size() != voice.names.size() ||
      voice.noise.size() != voice.names.size()) {
    spec_invalid("voice parameter lists must match the feature names");
  }
}

int SyntheticPatientSpec::score_on(int day) const {
  int score = timeline.front().score;
  for (const auto& seg : timeline) {
    if (seg.start_day <= day) score = seg.score;
  }
  return score;
}

std::vector<int> SyntheticPatientSpec::exam_days() const {
  std::vector<int> out;
  for (int d = first_exam_day; d < days; d += exam_interval_days) out.push_back(d);
  return out;
}

std::vector<int> SyntheticPatientSpec::change_days() const {
  std::vector<int> out;
  for (int d = 0; d < days; ++d) {
    if (score_on(d) != timeline.front().score) out.push_back(d);
  }
  return out;
}

PatientDataset generate_patient(const SyntheticPatientSpec& spec, const StudyConfig& cfg) {
  spec.validate();
  PatientDataset ds;
  ds.patient_id = spec.patient_id;
  ds.utc_offset_minutes = spec.utc_offset_minutes;
  // Each stream draws from its own generator so that toggling one stream
  // leaves the others unchanged.
  Rng master(spec.seed);
  Rng accel_rng(master.next_u64());
  Rng gps_rng(master.next_u64());
  Rng call_rng(master.next_u64());
  gen_accel(spec, cfg, accel_rng, ds);
  gen_gps(spec, gps_rng, ds);
  gen_calls_and_voice(spec, call_rng, ds);
  for (int d : spec.exam_days()) ds.exams.push_back({spec.start_date + d, spec.score_on(d)});
  return ds;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "WRITE_FAILED", "cannot write " + p.string());
  return f;
}

void finish(std::ofstream& f, const std::filesystem::path& p) {
  f.flush();
  if (!f) throw Error(ErrorKind::Io, "WRITE_FAILED", "error while writing " + p.string());
}

}  // namespace

void write_patient(const PatientDataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "WRITE_FAILED", "cannot create " + dir.string() + ": " + ec.message());

  fmt::memory_buffer buf;
  auto flush_to = [&](const char* name) {
    const auto p = dir / name;
    auto f = open_out(p);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    finish(f, p);
    buf.clear();
  };

  fmt::format_to(std::back_inserter(buf), "t,x,y,z\n");
  for (const auto& s : ds.accel) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", format_rfc3339(s.t), s.x, s.y, s.z);
  }
  flush_to("accel.csv");

  fmt::format_to(std::back_inserter(buf), "t,lat,lon,accuracy_m\n");
  for (const auto& g : ds.gps) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", format_rfc3339(g.t), g.lat, g.lon, g.accuracy_m);
  }
  flush_to("gps.csv");

  fmt::format_to(std::back_inserter(buf), "t,direction,duration_s,contact\n");
  for (const auto& c : ds.calls) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", format_rfc3339(c.t),
                   c.direction == CallDirection::Out ? "out" : "in", c.duration_s, c.contact);
  }
  flush_to("calls.csv");

  fmt::format_to(std::back_inserter(buf), "call_id,t");
  for (const auto& name : ds.voice_columns) fmt::format_to(std::back_inserter(buf), ",{}", name);
  buf.push_back('\n');
  for (const auto& v : ds.voice) {
    fmt::format_to(std::back_inserter(buf), "{},{}", v.call_id, format_rfc3339(v.t));
    for (double x : v.values) fmt::format_to(std::back_inserter(buf), ",{}", x);
    buf.push_back('\n');
  }
  flush_to("voice.csv");

  fmt::format_to(std::back_inserter(buf), "date,score\n");
  for (const auto& e : ds.exams) fmt::format_to(std::back_inserter(buf), "{},{}\n", format_date(e.date), e.score);
  flush_to("exams.csv");
}

CohortTemplate default_cohort_template() {
  CohortTemplate t;
  t.timelines = {
      {{0, 0}, {21, -2}, {63, 0}},
      {{0, 0}, {21, 2}, {63, 0}},
      {{0, 0}, {42, -2}},
      {{0, -1}, {21, 1}, {42, -1}, {63, 1}},
      {{0, 0}},
      {{0, 1}, {35, -1}},
  };
  return t;
}

namespace {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) it->get_to(out);
}

LocalDate date_from_json(const nlohmann::json& j) {
  const auto d = parse_date(j.get<std::string>());
  if (!d) spec_invalid("bad date " + j.dump());
  return *d;
}

}  // namespace

void to_json(nlohmann::json& j, const StateSegment& s) { j = {{"start_day", s.start_day}, {"score", s.score}}; }

void from_json(const nlohmann::json& j, StateSegment& s) {
  j.at("start_day").get_to(s.start_day);
  j.at("score").get_to(s.score);
}

void to_json(nlohmann::json& j, const SyntheticPatientSpec& s) {
  j = nlohmann::json{
      {"patient_id", s.patient_id},
      {"utc_offset_minutes", s.utc_offset_minutes},
      {"start_date", format_date(s.start_date)},
      {"days", s.days},
      {"timeline", s.timeline},
      {"first_exam_day", s.first_exam_day},
      {"exam_interval_days", s.exam_interval_days},
      {"seed", s.seed},
      {"activity",
       {{"baseline_std", s.activity.baseline_std},
        {"effect_per_score", s.activity.effect_per_score},
        {"day_noise", s.activity.day_noise},
        {"bins_per_hour", s.activity.bins_per_hour},
        {"samples_per_bin", s.activity.samples_per_bin},
        {"sample_spacing_ms", s.activity.sample_spacing_ms}}},
      {"mobility",
       {{"home_lat", s.mobility.home_lat},
        {"home_lon", s.mobility.home_lon},
        {"outings_per_day", s.mobility.outings_per_day},
        {"outing_effect", s.mobility.outing_effect},
        {"place_radius_m", s.mobility.place_radius_m},
        {"radius_effect", s.mobility.radius_effect},
        {"fix_interval_s", s.mobility.fix_interval_s},
        {"jitter_m", s.mobility.jitter_m},
        {"bad_fix_prob", s.mobility.bad_fix_prob}}},
      {"calls",
       {{"enabled", s.calls.enabled},
        {"calls_per_day", s.calls.calls_per_day},
        {"rate_effect", s.calls.rate_effect},
        {"duration_log_mean", s.calls.duration_log_mean},
        {"duration_log_sd", s.calls.duration_log_sd},
        {"duration_effect", s.calls.duration_effect},
        {"outgoing_prob", s.calls.outgoing_prob},
        {"outgoing_effect", s.calls.outgoing_effect},
        {"contacts", s.calls.contacts},
        {"night_fraction", s.calls.night_fraction}}},
      {"voice",
       {{"enabled", s.voice.enabled},
        {"names", s.voice.names},
        {"baseline", s.voice.baseline},
        {"effect", s.voice.effect},
        {"noise", s.voice.noise}}},
  };
}

void from_json(const nlohmann::json& j, SyntheticPatientSpec& s) {
  read_opt(j, "patient_id", s.patient_id);
  read_opt(j, "utc_offset_minutes", s.utc_offset_minutes);
  if (j.contains("start_date")) s.start_date = date_from_json(j.at("start_date"));
  read_opt(j, "days", s.days);
  read_opt(j, "timeline", s.timeline);
  read_opt(j, "first_exam_day", s.first_exam_day);
  read_opt(j, "exam_interval_days", s.exam_interval_days);
  read_opt(j, "seed", s.seed);
  if (auto it = j.find("activity"); it != j.end()) {
    read_opt(*it, "baseline_std", s.activity.baseline_std);
    read_opt(*it, "effect_per_score", s.activity.effect_per_score);
    read_opt(*it, "day_noise", s.activity.day_noise);
    read_opt(*it, "bins_per_hour", s.activity.bins_per_hour);
    read_opt(*it, "samples_per_bin", s.activity.samples_per_bin);
    read_opt(*it, "sample_spacing_ms", s.activity.sample_spacing_ms);
  }
  if (auto it = j.find("mobility"); it != j.end()) {
    read_opt(*it, "home_lat", s.mobility.home_lat);
    read_opt(*it, "home_lon", s.mobility.home_lon);
    read_opt(*it, "outings_per_day", s.mobility.outings_per_day);
    read_opt(*it, "outing_effect", s.mobility.outing_effect);
    read_opt(*it, "place_radius_m", s.mobility.place_radius_m);
    read_opt(*it, "radius_effect", s.mobility.radius_effect);
    read_opt(*it, "fix_interval_s", s.mobility.fix_interval_s);
    read_opt(*it, "jitter_m", s.mobility.jitter_m);
    read_opt(*it, "bad_fix_prob", s.mobility.bad_fix_prob);
  }
  if (auto it = j.find("calls"); it != j.end()) {
    read_opt(*it, "enabled", s.calls.enabled);
    read_opt(*it, "calls_per_day", s.calls.calls_per_day);
    read_opt(*it, "rate_effect", s.calls.rate_effect);
    read_opt(*it, "duration_log_mean", s.calls.duration_log_mean);
    read_opt(*it, "duration_log_sd", s.calls.duration_log_sd);
    read_opt(*it, "duration_effect", s.calls.duration_effect);
    read_opt(*it, "outgoing_prob", s.calls.outgoing_prob);
    read_opt(*it, "outgoing_effect", s.calls.outgoing_effect);
    read_opt(*it, "contacts", s.calls.contacts);
    read_opt(*it, "night_fraction", s.calls.night_fraction);
  }
  if (auto it = j.find("voice"); it != j.end()) {
    read_opt(*it, "enabled", s.voice.enabled);
    read_opt(*it, "names", s.voice.names);
    read_opt(*it, "baseline", s.voice.baseline);
    read_opt(*it, "effect", s.voice.effect);
    read_opt(*it, "noise", s.voice.noise);
  }
}

void to_json(nlohmann::json& j, const CohortTemplate& t) {
  j = nlohmann::json{{"base", t.base}, {"timelines", t.timelines}};
}

void from_json(const nlohmann::json& j, CohortTemplate& t) {
  t = default_cohort_template();
  read_opt(j, "base", t.base);
  read_opt(j, "timelines", t.timelines);
}

CohortTemplate load_cohort_template(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::Io, "TEMPLATE_UNREADABLE", "cannot read " + path.string());
  try {
    return nlohmann::json::parse(f).get<CohortTemplate>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "TEMPLATE_INVALID", path.string() + ": " + e.what());
  }
}

std::vector<SyntheticPatientSpec> cohort_specs(int n, const CohortTemplate& tmpl, std::uint64_t master_seed) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "COHORT_SIZE", "cohort size must be >= 1");
  Rng master(master_seed);
  std::vector<SyntheticPatientSpec> out;
  for (int i = 0; i < n; ++i) {
    SyntheticPatientSpec s = tmpl.base;
    s.patient_id = fmt::format("p{:04d}", i + 1);
    s.seed = master.next_u64();
    if (!tmpl.timelines.empty()) s.timeline = tmpl.timelines[static_cast<std::size_t>(i) % tmpl.timelines.size()];
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

nlohmann::json cohort_manifest(std::span<const SyntheticPatientSpec> specs, std::uint64_t master_seed) {
  nlohmann::json patients = nlohmann::json::array();
  for (const auto& s : specs) {
    nlohmann::json timeline = nlohmann::json::array();
    for (const auto& seg : s.timeline) {
      timeline.push_back({{"start_date", format_date(s.start_date + seg.start_day)}, {"score", seg.score}});
    }
    nlohmann::json exams = nlohmann::json::array();
    for (int d : s.exam_days()) exams.push_back({{"date", format_date(s.start_date + d)}, {"score", s.score_on(d)}});
    nlohmann::json change = nlohmann::json::array();
    for (int d : s.change_days()) change.push_back(format_date(s.start_date + d));
    patients.push_back({
        {"patient_id", s.patient_id},
        {"seed", s.seed},
        {"utc_offset_minutes", s.utc_offset_minutes},
        {"start_date", format_date(s.start_date)},
        {"days", s.days},
        {"timeline", timeline},
        {"exams", exams},
        {"change_days", change},
    });
  }
  return {{"schema_version", 1}, {"master_seed", master_seed}, {"patients", patients}};
}

std::vector<SyntheticPatientSpec> generate_cohort(int n, const CohortTemplate& tmpl, std::uint64_t master_seed,
                                                  const std::filesystem::path& out_dir, const StudyConfig& cfg) {
  auto specs = cohort_specs(n, tmpl, master_seed);
  for (const auto& s : specs) write_patient(generate_patient(s, cfg), out_dir / s.patient_id);
  const auto path = out_dir / "manifest.json";
  auto f = open_out(path);
  f << cohort_manifest(specs, master_seed).dump(2) << '\n';
  finish(f, path);
  return specs;
}

}  // namespace moodsense
