#include "spinhydro/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "spinhydro/error.hpp"

namespace spinhydro::harness {
namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// 1-2-5 tick spacing giving roughly `target` intervals.
double tick_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1 : f < 3.5 ? 2 : f < 7.5 ? 5 : 10) * mag;
}

}  // namespace

SvgLinePlot::SvgLinePlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgLinePlot::add(SvgSeries series) {
  if (series.x.size() != series.y.size()) {
    throw PreconditionError("svg series '" + series.label + "' has mismatched x/y lengths");
  }
  series_.push_back(std::move(series));
}

std::string SvgLinePlot::render(int width, int height) const {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series_) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 <= 0) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 <= 0) {
    const double pad = std::max(std::fabs(y0) * 0.05, 1e-12);
    y0 -= pad, y1 += pad;
  }
  const double ypad = (y1 - y0) * 0.05;
  y0 -= ypad, y1 += ypad;

  const double left = 80, right = 20, top = 40, bottom = 55;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title_)
    << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#444\"/>\n";

  const double xs = tick_step(x1 - x0, 6);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + xs * 1e-9; t += xs) {
    const double X = px(t);
    o << "<line x1=\"" << X << "\" y1=\"" << top << "\" x2=\"" << X << "\" y2=\"" << top + ph
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << X << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
      << num(std::fabs(t) < xs * 1e-9 ? 0.0 : t) << "</text>\n";
  }
  const double ys = tick_step(y1 - y0, 5);
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + ys * 1e-9; t += ys) {
    const double Y = py(t);
    o << "<line x1=\"" << left << "\" y1=\"" << Y << "\" x2=\"" << left + pw << "\" y2=\"" << Y
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\">"
      << num(std::fabs(t) < ys * 1e-9 ? 0.0 : t) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
    << escape(x_label_) << "</text>\n";
  o << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << top + ph / 2 << ")\">" << escape(y_label_) << "</text>\n";

  for (std::size_t k = 0; k < series_.size(); ++k) {
    const auto& s = series_[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::ostringstream path;
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        pen_down = false;
        continue;
      }
      path << (pen_down ? " L" : " M") << num(px(s.x[i])) << "," << num(py(s.y[i]));
      pen_down = true;
    }
    o << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    const double ly = top + 14 + 16 * static_cast<double>(k);
    o << "<line x1=\"" << left + pw - 130 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw - 110 << "\" y2=\""
      << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw - 105 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void SvgLinePlot::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << render();
}

}  // namespace spinhydro::harness
