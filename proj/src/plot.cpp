#include "wcons/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "wcons/error.hpp"

namespace wcons {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 80, kRight = 20, kTop = 36, kBottom = 56;
constexpr int kTicks = 5;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double parse_cell(const std::string& cell, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || *end != '\0')
    throw ParseError(ErrorCode::SyntaxError, "line " + std::to_string(line), "malformed number '" + cell + "'",
                     ErrorCode::SyntaxError);
  return v;
}

void widen(double& lo, double& hi, double pad) {
  if (hi - lo < 1e-300) {
    lo -= pad;
    hi += pad;
  }
}

}  // namespace

std::string_view to_string(PlotKind k) noexcept { return k == PlotKind::Diameter ? "diameter" : "lyapunov"; }

PlotKind parse_plot_kind(std::string_view name) {
  if (name == "diameter") return PlotKind::Diameter;
  if (name == "lyapunov") return PlotKind::Lyapunov;
  throw ParseError(ErrorCode::SchemaError, "kind", "expected diameter or lyapunov", ErrorCode::SchemaError);
}

PlotSeries read_series(std::string_view csv, PlotKind kind) {
  PlotSeries s;
  const std::size_t col = kind == PlotKind::Lyapunov ? 1 : 2;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const auto nl = csv.find('\n', pos);
    std::string line(csv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "t,lyapunov,diameter,dist_to_limit")
        throw ParseError(ErrorCode::SyntaxError, "line 1", "unexpected CSV header", ErrorCode::SyntaxError);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t c = line.find(','); c != std::string::npos; c = line.find(',', start)) {
      cells.push_back(line.substr(start, c - start));
      start = c + 1;
    }
    cells.push_back(line.substr(start));
    if (cells.size() != 4)
      throw ParseError(ErrorCode::SyntaxError, "line " + std::to_string(line_no), "expected 4 columns",
                       ErrorCode::SyntaxError);
    s.t.push_back(parse_cell(cells[0], line_no));
    s.y.push_back(parse_cell(cells[col], line_no));
  }
  return s;
}

std::string emit_plot(std::string_view csv, PlotKind kind, bool log_scale) {
  const auto raw = read_series(csv, kind);
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < raw.t.size(); ++i) {
    const double y = raw.y[i];
    if (!std::isfinite(y)) continue;
    if (log_scale) {
      if (y <= 0.0) continue;
      ys.push_back(std::log10(y));
    } else {
      ys.push_back(y);
    }
    xs.push_back(raw.t[i]);
  }
  if (xs.empty()) throw Error(ErrorCode::EmptyData, "no plottable rows in diagnostics CSV");

  double x0 = *std::min_element(xs.begin(), xs.end()), x1 = *std::max_element(xs.begin(), xs.end());
  double y0 = *std::min_element(ys.begin(), ys.end()), y1 = *std::max_element(ys.begin(), ys.end());
  widen(x0, x1, 0.5);
  widen(y0, y1, log_scale ? 1.0 : std::max(0.5, std::abs(y0) * 0.1));

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  const std::string quantity(to_string(kind));
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" + quantity +
         (log_scale ? " (log scale)" : "") + "</text>\n";

  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + fmt("%.3f", kLeft) + "\" y1=\"" + fmt("%.3f", kTop + ph) + "\" x2=\"" +
         fmt("%.3f", kLeft + pw) + "\" y2=\"" + fmt("%.3f", kTop + ph) + "\"/>\n";
  svg += "<line x1=\"" + fmt("%.3f", kLeft) + "\" y1=\"" + fmt("%.3f", kTop) + "\" x2=\"" + fmt("%.3f", kLeft) +
         "\" y2=\"" + fmt("%.3f", kTop + ph) + "\"/>\n";
  svg += "</g>\n";

  svg += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= kTicks; ++k) {
    const double xv = x0 + (x1 - x0) * k / kTicks;
    const double yv = y0 + (y1 - y0) * k / kTicks;
    svg += "<text x=\"" + fmt("%.3f", px(xv)) + "\" y=\"" + fmt("%.3f", kTop + ph + 16) +
           "\" text-anchor=\"middle\">" + fmt("%.4g", xv) + "</text>\n";
    svg += "<text x=\"" + fmt("%.3f", kLeft - 6) + "\" y=\"" + fmt("%.3f", py(yv) + 4) + "\" text-anchor=\"end\">" +
           fmt("%.3g", log_scale ? std::pow(10.0, yv) : yv) + "</text>\n";
  }
  svg += "</g>\n";
  svg += "<text x=\"" + fmt("%.3f", kLeft + pw / 2) + "\" y=\"" + fmt("%.3f", kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">step t</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt("%.3f", kTop + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         fmt("%.3f", kTop + ph / 2) + ")\">" + quantity + "</text>\n";

  svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) svg += ' ';
    svg += fmt("%.3f", px(xs[i])) + "," + fmt("%.3f", py(ys[i]));
  }
  svg += "\"/>\n</svg>\n";
  return svg;
}

}  // namespace wcons
