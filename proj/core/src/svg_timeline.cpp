#include <algorithm>
#include <array>
#include <string_view>

#include <fmt/format.h>

#include "moodsense/report.hpp"

namespace moodsense {
namespace {

constexpr double kWidth = 960;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTitle = 22;
constexpr double kUnit = 20;  // pixels per score unit
constexpr double kPlot = 6 * kUnit;
constexpr double kLane = 11;
constexpr double kGap = 24;

struct Lane {
  std::string_view code;
  std::string_view color;
};
constexpr std::array<Lane, 5> kLanes{{{"A", "#d62728"}, {"G", "#1f77b4"}, {"P", "#2ca02c"}, {"S", "#9467bd"},
                                      {"all", "#ff7f0e"}}};

constexpr double kPanel = kTitle + kPlot + 10 + kLanes.size() * kLane + kGap;

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

template <typename... T>
void put(fmt::memory_buffer& out, fmt::format_string<T...> f, T&&... args) {
  fmt::format_to(std::back_inserter(out), f, std::forward<T>(args)...);
}

}  // namespace

std::string render_timeline(std::span<const TimelinePanel> panels) {
  int lo = 0, hi = 1;
  bool any = false;
  auto widen = [&](LocalDate d) {
    if (!any) {
      lo = d.days;
      hi = d.days + 1;
      any = true;
    }
    lo = std::min(lo, d.days);
    hi = std::max(hi, d.days + 1);
  };
  for (const auto& p : panels) {
    for (const auto& e : p.exams) widen(e.date);
    for (const auto& d : p.decisions) widen(d.epoch);
  }
  const double span_days = std::max(1, hi - lo);
  const double plot_w = kWidth - kLeft - kRight;
  auto x_of = [&](double day) { return kLeft + (day - lo) / span_days * plot_w; };

  const double height = std::max(1.0, static_cast<double>(panels.size())) * kPanel + 30;
  fmt::memory_buffer out;

  put(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      kWidth, height, kWidth, height);
  put(out, "<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"#ffffff\"/>\n", kWidth, height);
  if (any) {
    put(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" fill=\"#555555\">{}</text>\n", kLeft, height - 10.0, format_date(LocalDate{lo}));
    put(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" fill=\"#555555\" text-anchor=\"end\">{}</text>\n", kWidth - kRight,
        height - 10.0, format_date(LocalDate{hi - 1}));
  }

  for (std::size_t k = 0; k < panels.size(); ++k) {
    const auto& p = panels[k];
    const double top = static_cast<double>(k) * kPanel + 10;
    const double plot_top = top + kTitle;
    auto y_of = [&](double score) { return plot_top + (3.0 - score) * kUnit; };

    put(out, "<g id=\"{}\">\n", escape(p.patient_id));
    put(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" font-weight=\"bold\">{}</text>\n", kLeft, top + 14, escape(p.patient_id));
    for (int s = -3; s <= 3; ++s) {
      put(out, "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"1\"/>\n", kLeft,
          y_of(s), kWidth - kRight, y_of(s), s == 0 ? "#999999" : "#e5e5e5");
      put(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" fill=\"#555555\">{:+d}</text>\n", kLeft - 8, y_of(s) + 4,
          s);
    }

    if (!p.exams.empty()) {
      put(out, "<polyline fill=\"none\" stroke=\"#222222\" stroke-width=\"2\" points=\"");
      for (std::size_t i = 0; i < p.exams.size(); ++i) {
        const double x0 = x_of(p.exams[i].date.days);
        const double x1 = i + 1 < p.exams.size() ? x_of(p.exams[i + 1].date.days) : x_of(hi);
        const double y = y_of(p.exams[i].score);
        put(out, "{}{:.2f},{:.2f} {:.2f},{:.2f}", i ? " " : "", x0, y, x1, y);
      }
      put(out, "\"/>\n");
      for (const auto& e : p.exams) {
        put(out, "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3.5\" fill=\"#222222\"/>\n", x_of(e.date.days), y_of(e.score));
      }
    }

    const double lanes_top = plot_top + kPlot + 10;
    for (std::size_t l = 0; l < kLanes.size(); ++l) {
      const double y = lanes_top + (static_cast<double>(l) + 0.5) * kLane;
      put(out, "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" fill=\"{}\">{}</text>\n", kLeft - 8, y + 4,
          kLanes[l].color, kLanes[l].code);
      for (const auto& d : p.decisions) {
        if (!d.fired || d.modality != kLanes[l].code) continue;
        put(out, "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", x_of(d.epoch.days + 0.5), y,
            kLanes[l].color);
      }
    }
    put(out, "</g>\n");
  }
  put(out, "</svg>\n");
  return fmt::to_string(out);
}

}  // namespace moodsense
