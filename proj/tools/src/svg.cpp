#include "balkwise/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "balkwise/cli/stats.hpp"

namespace balkwise::cli {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.04 * (hi - lo);
  lo -= pad;
  hi += pad;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

void open_svg(std::ostream& os, const Frame& f, const PlotLabels& labels) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(labels.title) << "</text>\n";
  const double bx = kLeft, by = kHeight - kBottom;
  os << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << kWidth - kRight
     << "\" y2=\"" << by << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << bx << "\" y1=\"" << by << "\" x2=\"" << bx << "\" y2=\"" << kTop
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    os << "<text x=\"" << f.px(xv) << "\" y=\"" << by + 16 << "\" text-anchor=\"middle\">"
       << num(xv) << "</text>\n";
    os << "<text x=\"" << bx - 6 << "\" y=\"" << f.py(yv) + 4 << "\" text-anchor=\"end\">"
       << num(yv) << "</text>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10
     << "\" text-anchor=\"middle\">" << escape(labels.x) << "</text>\n";
  os << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kHeight / 2 << ")\">" << escape(labels.y) << "</text>\n";
}

}  // namespace

void write_line_plot(std::ostream& os, const std::vector<Series>& series,
                     const PlotLabels& labels) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  widen(x0, x1);
  widen(y0, y1);
  const Frame f{x0, x1, y0, y1};
  open_svg(os, f, labels);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    if (s.points) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << "<circle cx=\"" << f.px(s.x[i]) << "\" cy=\"" << f.py(s.y[i])
           << "\" r=\"2\" fill=\"" << color << "\" fill-opacity=\"0.6\"/>\n";
      }
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        os << f.px(s.x[i]) << ',' << f.py(s.y[i]) << ' ';
      }
      os << "\"/>\n";
    }
    os << "<text x=\"" << kWidth - kRight - 4 << "\" y=\"" << kTop + 14 * (k + 1)
       << "\" text-anchor=\"end\" fill=\"" << color << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
}

void write_histogram(std::ostream& os, const std::vector<double>& sample, int bins,
                     const PlotLabels& labels, bool normal_overlay) {
  if (sample.empty() || bins < 1) {
    write_line_plot(os, {}, labels);
    return;
  }
  const auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
  double lo = *mn, hi = *mx;
  if (!(hi > lo)) hi = lo + 1.0;
  const double width = (hi - lo) / bins;
  std::vector<double> density(bins, 0.0);
  for (double v : sample) {
    const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
    density[b] += 1.0;
  }
  for (double& d : density) d /= sample.size() * width;

  double top = *std::max_element(density.begin(), density.end());
  double m = 0.0, s = 0.0;
  if (normal_overlay && sample.size() > 1) {
    m = mean(sample);
    s = stddev(sample);
    if (s > 0.0) top = std::max(top, 1.0 / (s * std::sqrt(2.0 * std::numbers::pi)));
  }
  const Frame f{lo, hi, 0.0, top * 1.05};
  open_svg(os, f, labels);
  for (int b = 0; b < bins; ++b) {
    const double x = lo + b * width;
    os << "<rect x=\"" << f.px(x) << "\" y=\"" << f.py(density[b]) << "\" width=\""
       << f.px(x + width) - f.px(x) << "\" height=\"" << f.py(0.0) - f.py(density[b])
       << "\" fill=\"#9ecae1\" stroke=\"#3182bd\"/>\n";
  }
  if (normal_overlay && s > 0.0) {
    os << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i <= 200; ++i) {
      const double x = lo + (hi - lo) * i / 200.0;
      const double z = (x - m) / s;
      const double d = std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * std::numbers::pi));
      os << f.px(x) << ',' << f.py(d) << ' ';
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace balkwise::cli
