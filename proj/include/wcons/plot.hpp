#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wcons {

enum class PlotKind { Diameter, Lyapunov };

std::string_view to_string(PlotKind k) noexcept;
/// "diameter" or "lyapunov"; anything else throws SchemaError.
PlotKind parse_plot_kind(std::string_view name);

struct PlotSeries {
  std::vector<double> t;
  std::vector<double> y;
};

/// Reads one column of a diagnostics CSV (header `t,lyapunov,diameter,dist_to_limit`).
PlotSeries read_series(std::string_view csv, PlotKind kind);

/// Standalone SVG line chart of the chosen column against the step index.
/// With `log_scale`, non-positive values are dropped and the y axis is log10.
/// Throws EmptyData when nothing remains to draw.
std::string emit_plot(std::string_view csv, PlotKind kind, bool log_scale);

}  // namespace wcons
