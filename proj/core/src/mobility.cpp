#include <algorithm>
#include <cmath>
#include <numbers>

#include "moodsense/features.hpp"

namespace moodsense {
namespace {

constexpr double kEarthRadiusM = 6371008.8;

double rad(double deg) { return deg * std::numbers::pi / 180.0; }

struct Place {
  double lat, lon;
  double stay_ms = 0;
};

}  // namespace

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  const double dlat = rad(lat2 - lat1);
  const double dlon = rad(lon2 - lon1);
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(rad(lat1)) * std::cos(rad(lat2)) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

std::vector<GpsFix> usable_fixes(std::span<const GpsFix> fixes, const MobilityParams& params) {
  std::vector<GpsFix> out;
  out.reserve(fixes.size());
  const double max_mps = params.max_speed_kmh / 3.6;
  for (const auto& f : fixes) {
    if (!(f.accuracy_m <= params.max_accuracy_m)) continue;
    if (!out.empty()) {
      const auto& prev = out.back();
      const double dist = haversine_m(prev.lat, prev.lon, f.lat, f.lon);
      const double dt = static_cast<double>(f.t - prev.t) / 1000.0;
      if (dist > 0.0 && (dt <= 0.0 || dist / dt > max_mps)) continue;
    }
    out.push_back(f);
  }
  return out;
}

std::vector<StayPoint> detect_stay_points(std::span<const GpsFix> usable, const MobilityParams& params) {
  std::vector<StayPoint> out;
  const auto min_ms = static_cast<TimestampMs>(params.stay_min_seconds * 1000.0);
  std::size_t i = 0;
  while (i < usable.size()) {
    std::size_t j = i + 1;
    while (j < usable.size() &&
           haversine_m(usable[i].lat, usable[i].lon, usable[j].lat, usable[j].lon) <= params.stay_radius_m) {
      ++j;
    }
    if (usable[j - 1].t - usable[i].t >= min_ms) {
      StayPoint sp{0, 0, usable[i].t, usable[j - 1].t};
      for (std::size_t k = i; k < j; ++k) {
        sp.lat += usable[k].lat;
        sp.lon += usable[k].lon;
      }
      sp.lat /= static_cast<double>(j - i);
      sp.lon /= static_cast<double>(j - i);
      out.push_back(sp);
      i = j;
    } else {
      ++i;
    }
  }
  return out;
}

MobilityFeatures mobility_features(std::span<const GpsFix> fixes, const MobilityParams& params) {
  MobilityFeatures f;
  const auto usable = usable_fixes(fixes, params);
  f.fix_count = static_cast<int>(usable.size());
  if (usable.empty()) return f;

  for (std::size_t i = 1; i < usable.size(); ++i) {
    f.total_distance_m += haversine_m(usable[i - 1].lat, usable[i - 1].lon, usable[i].lat, usable[i].lon);
  }

  if (usable.size() >= 2) {
    // Centroid in a local equirectangular projection around the mean latitude.
    double lat0 = 0;
    for (const auto& u : usable) lat0 += u.lat;
    lat0 /= static_cast<double>(usable.size());
    const double lon_ref = usable.front().lon;
    const double kx = std::cos(rad(lat0));
    double cx = 0, cy = 0;
    for (const auto& u : usable) {
      cx += rad(u.lon - lon_ref) * kx;
      cy += rad(u.lat);
    }
    cx /= static_cast<double>(usable.size());
    cy /= static_cast<double>(usable.size());
    const double c_lat = cy * 180.0 / std::numbers::pi;
    const double c_lon = lon_ref + (kx > 0 ? cx / kx : 0.0) * 180.0 / std::numbers::pi;

    double ss = 0;
    for (const auto& u : usable) {
      const double d = haversine_m(u.lat, u.lon, c_lat, c_lon);
      ss += d * d;
    }
    f.radius_of_gyration_m = std::sqrt(ss / static_cast<double>(usable.size()));
  }

  // Leader clustering of stay points into places.
  std::vector<Place> places;
  for (const auto& sp : detect_stay_points(usable, params)) {
    const double dur = static_cast<double>(sp.leave - sp.arrive);
    auto it = std::find_if(places.begin(), places.end(), [&](const Place& p) {
      return haversine_m(p.lat, p.lon, sp.lat, sp.lon) <= params.place_merge_m;
    });
    if (it == places.end()) {
      places.push_back({sp.lat, sp.lon, dur});
    } else {
      it->stay_ms += dur;
    }
  }
  f.place_count = static_cast<int>(places.size());
  double total = 0, top = 0;
  for (const auto& p : places) {
    total += p.stay_ms;
    top = std::max(top, p.stay_ms);
  }
  if (!places.empty()) f.top_place_fraction = total > 0 ? top / total : 1.0 / static_cast<double>(places.size());
  return f;
}

}  // namespace moodsense
