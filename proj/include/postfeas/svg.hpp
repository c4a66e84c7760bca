#pragma once

#include <optional>
#include <string>
#include <vector>

namespace postfeas::svg {

struct Bar {
  std::string label;
  double value = 0.0;
};

/// Vertical bars, optional dashed horizontal reference line.
std::string bar_chart(const std::string& title, const std::string& y_label, const std::vector<Bar>& bars,
                      std::optional<double> ref_line = std::nullopt);

struct Point {
  double x = 0.0;
  double y = 0.0;
  std::string group;
};

/// Scatter with a dashed y = x diagonal; one colour per group (legend in first-seen order).
std::string calibration_scatter(const std::string& title, const std::string& x_label, const std::string& y_label,
                                const std::vector<Point>& points);

struct BoxStats {
  std::string label;
  double whisker_lo = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_hi = 0.0;
};

std::string boxplot(const std::string& title, const std::string& y_label, const std::vector<BoxStats>& boxes,
                    std::optional<double> ref_line = std::nullopt);

}  // namespace postfeas::svg
