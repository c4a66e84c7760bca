#include "postfeas/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace postfeas::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double lo = 0.0;
  double hi = 1.0;

  double y(double v) const {
    const double h = kHeight - kTop - kBottom;
    return kTop + h * (1.0 - (v - lo) / (hi - lo));
  }
};

Frame make_frame(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
  if (hi <= lo) hi = lo + (lo == 0.0 ? 1.0 : std::abs(lo) * 0.1);
  const double pad = 0.05 * (hi - lo);
  return {lo < 0.0 ? lo - pad : std::max(0.0, lo - pad), hi + pad};
}

std::string header(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                  num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       escape(title) + "</text>\n";
  return s;
}

std::string y_axis(const Frame& f, const std::string& label) {
  std::string s;
  const double x0 = kLeft;
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(x0) + "\" y2=\"" +
       num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" + num(kWidth - kRight) +
       "\" y2=\"" + num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = f.lo + (f.hi - f.lo) * t / 4.0;
    const double y = f.y(v);
    s += "<line x1=\"" + num(x0 - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(v) + "</text>\n";
  }
  s += "<text x=\"16\" y=\"" + num((kTop + kHeight - kBottom) / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
       num((kTop + kHeight - kBottom) / 2) + ")\">" + escape(label) + "</text>\n";
  return s;
}

std::string dashed_line(const Frame& f, double v) {
  const double y = f.y(v);
  return "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kWidth - kRight) + "\" y2=\"" + num(y) +
         "\" stroke=\"#c44e52\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
}

std::string x_label(double cx, const std::string& text) {
  return "<text x=\"" + num(cx) + "\" y=\"" + num(kHeight - kBottom + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(text) + "</text>\n";
}

}  // namespace

std::string bar_chart(const std::string& title, const std::string& y_label, const std::vector<Bar>& bars,
                      std::optional<double> ref_line) {
  double hi = ref_line.value_or(0.0);
  double lo = 0.0;
  for (const auto& b : bars) {
    if (std::isfinite(b.value)) {
      hi = std::max(hi, b.value);
      lo = std::min(lo, b.value);
    }
  }
  const Frame f = make_frame(lo, hi);
  std::string s = header(title) + y_axis(f, y_label);
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(1, bars.size()));
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double v = std::isfinite(bars[i].value) ? bars[i].value : 0.0;
    const double y0 = f.y(std::max(0.0, f.lo));
    const double y1 = f.y(v);
    s += "<rect x=\"" + num(cx - slot * 0.3) + "\" y=\"" + num(std::min(y0, y1)) + "\" width=\"" + num(slot * 0.6) +
         "\" height=\"" + num(std::abs(y0 - y1)) + "\" fill=\"" + kPalette[i % 7] + "\"/>\n";
    s += x_label(cx, bars[i].label);
  }
  if (ref_line) s += dashed_line(f, *ref_line);
  return s + "</svg>\n";
}

std::string calibration_scatter(const std::string& title, const std::string& x_label_text,
                                const std::string& y_label, const std::vector<Point>& points) {
  double hi = 0.0;
  for (const auto& p : points) hi = std::max({hi, p.x, p.y});
  const Frame f = make_frame(0.0, hi);
  const double w = kWidth - kLeft - kRight - 110.0;  // room for the legend
  auto px = [&](double v) { return kLeft + w * (v - f.lo) / (f.hi - f.lo); };

  std::string s = header(title) + y_axis(f, y_label);
  s += "<line x1=\"" + num(px(f.lo)) + "\" y1=\"" + num(f.y(f.lo)) + "\" x2=\"" + num(px(f.hi)) + "\" y2=\"" +
       num(f.y(f.hi)) + "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = f.lo + (f.hi - f.lo) * t / 4.0;
    s += "<text x=\"" + num(px(v)) + "\" y=\"" + num(kHeight - kBottom + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(v) + "</text>\n";
  }
  s += "<text x=\"" + num(kLeft + w / 2) + "\" y=\"" + num(kHeight - 16) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape(x_label_text) + "</text>\n";

  std::vector<std::string> groups;
  for (const auto& p : points) {
    if (std::find(groups.begin(), groups.end(), p.group) == groups.end()) groups.push_back(p.group);
  }
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
    const auto gi = static_cast<std::size_t>(std::find(groups.begin(), groups.end(), p.group) - groups.begin());
    s += "<circle cx=\"" + num(px(p.x)) + "\" cy=\"" + num(f.y(p.y)) + "\" r=\"2.5\" fill=\"" + kPalette[gi % 7] +
         "\" fill-opacity=\"0.7\"/>\n";
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double ly = kTop + 16.0 * static_cast<double>(g);
    const double lx = kLeft + w + 20.0;
    s += "<circle cx=\"" + num(lx) + "\" cy=\"" + num(ly) + "\" r=\"4\" fill=\"" + kPalette[g % 7] + "\"/>\n";
    s += "<text x=\"" + num(lx + 8) + "\" y=\"" + num(ly + 4) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
         escape(groups[g]) + "</text>\n";
  }
  return s + "</svg>\n";
}

std::string boxplot(const std::string& title, const std::string& y_label, const std::vector<BoxStats>& boxes,
                    std::optional<double> ref_line) {
  double lo = ref_line.value_or(boxes.empty() ? 0.0 : boxes.front().whisker_lo);
  double hi = lo;
  for (const auto& b : boxes) {
    lo = std::min(lo, b.whisker_lo);
    hi = std::max(hi, b.whisker_hi);
  }
  const Frame f = make_frame(lo, hi);
  std::string s = header(title) + y_axis(f, y_label);
  const double slot = (kWidth - kLeft - kRight) / static_cast<double>(std::max<std::size_t>(1, boxes.size()));
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
    const double half = slot * 0.25;
    s += "<line x1=\"" + num(cx) + "\" y1=\"" + num(f.y(b.whisker_lo)) + "\" x2=\"" + num(cx) + "\" y2=\"" +
         num(f.y(b.whisker_hi)) + "\" stroke=\"black\"/>\n";
    s += "<rect x=\"" + num(cx - half) + "\" y=\"" + num(f.y(b.q3)) + "\" width=\"" + num(2 * half) + "\" height=\"" +
         num(std::max(0.0, f.y(b.q1) - f.y(b.q3))) + "\" fill=\"" + kPalette[i % 7] +
         "\" fill-opacity=\"0.6\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(cx - half) + "\" y1=\"" + num(f.y(b.median)) + "\" x2=\"" + num(cx + half) + "\" y2=\"" +
         num(f.y(b.median)) + "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    s += x_label(cx, b.label);
  }
  if (ref_line) s += dashed_line(f, *ref_line);
  return s + "</svg>\n";
}

}  // namespace postfeas::svg
