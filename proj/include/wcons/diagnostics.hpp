#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wcons/kernels.hpp"
#include "wcons/measure.hpp"
#include "wcons/state.hpp"

namespace wcons {

using Envelope = kernels::Envelope;

struct DiagnosticsRecord {
  std::size_t t = 0;
  double lyapunov = 0.0;
  double diameter = 0.0;
  std::optional<double> dist_to_limit;
  Envelope envelope;
};

struct RateFit {
  double fitted_rate = 1.0;
  double reference_rate = 0.0;
  std::size_t fit_begin = 0;  // first step index used (inclusive)
  std::size_t fit_end = 0;    // one past the last
  double r_squared = 1.0;
};

/// max over agent pairs of l_p^p. Quantile states on `g` use the parallel
/// kernel; Gaussian states at p = 2 use the closed form.
double lyapunov(const ConsensusState& state, WassersteinOrder ord, const GridSpec& g);
Envelope envelope(const ConsensusState& state, const GridSpec& g);

/// Geometric decay rate of `diameters` (index = step, offset by `first_step`),
/// fitted by least squares on log diameter over the tail half of the points
/// above the numerical floor. Throws InsufficientData below 10 usable points.
RateFit fit_rate(std::span<const double> diameters, double reference, std::size_t first_step = 0);

inline constexpr double kHullSlack = 1e-9;

bool hull_membership(const Measure& final, const ConsensusState& initial, const GridSpec& g);
/// Envelope `inner` lies inside `outer` at every level, with slack.
bool envelope_nested(const Envelope& inner, const Envelope& outer, double slack = kHullSlack);

DiagnosticsRecord make_record(const ConsensusState& state, WassersteinOrder ord, const GridSpec& g,
                              const Measure* limit = nullptr);

/// Agents' quantile values stacked row-major on `g`.
std::vector<double> stack_quantiles(const ConsensusState& state, const GridSpec& g);

}  // namespace wcons
