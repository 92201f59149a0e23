#include "wcons/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wcons {

namespace {

bool all_quantile_on(const ConsensusState& s, const GridSpec& g) {
  return std::all_of(s.agents.begin(), s.agents.end(), [&](const Measure& m) {
    const auto* q = std::get_if<QuantileMeasure>(&m);
    return q && q->grid == g;
  });
}

bool all_gaussian(const ConsensusState& s) {
  return std::all_of(s.agents.begin(), s.agents.end(),
                     [](const Measure& m) { return std::holds_alternative<Gaussian1D>(m); });
}

}  // namespace

std::vector<double> stack_quantiles(const ConsensusState& state, const GridSpec& g) {
  const std::size_t m = g.size();
  std::vector<double> out(state.agents.size() * m);
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    const auto q = to_quantile(state.agents[i], g);
    std::copy(q.values.begin(), q.values.end(), out.begin() + static_cast<std::ptrdiff_t>(i * m));
  }
  return out;
}

double lyapunov(const ConsensusState& state, WassersteinOrder ord, const GridSpec& g) {
  const std::size_t n = state.agents.size();
  if (n < 2) return 0.0;
  if (all_quantile_on(state, g)) {
    const auto data = stack_quantiles(state, g);
    return kernels::omp::max_pairwise_pow({data, n, g.size()}, ord.value()).value;
  }
  double best = 0.0;
  const bool closed_form = ord.is_two() && all_gaussian(state);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v;
      if (closed_form) {
        const double d = gaussian_w2(std::get<Gaussian1D>(state.agents[i]), std::get<Gaussian1D>(state.agents[j]));
        v = d * d;
      } else {
        v = std::pow(wasserstein(state.agents[i], state.agents[j], ord, g), ord.value());
      }
      best = std::max(best, v);
    }
  return best;
}

Envelope envelope(const ConsensusState& state, const GridSpec& g) {
  const auto data = stack_quantiles(state, g);
  return kernels::omp::envelope({data, state.agents.size(), g.size()});
}

RateFit fit_rate(std::span<const double> diameters, double reference, std::size_t first_step) {
  constexpr double kFloor = 100.0 * std::numeric_limits<double>::epsilon();
  std::size_t usable = 0;
  while (usable < diameters.size() && diameters[usable] > kFloor && std::isfinite(diameters[usable])) ++usable;
  if (usable < 10)
    throw Error(ErrorCode::InsufficientData, "need at least 10 points above the floor, have " + std::to_string(usable));

  const std::size_t begin = usable / 2;
  const auto count = static_cast<double>(usable - begin);
  double mx = 0.0, my = 0.0;
  for (std::size_t k = begin; k < usable; ++k) {
    mx += static_cast<double>(k);
    my += std::log(diameters[k]);
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = begin; k < usable; ++k) {
    const double dx = static_cast<double>(k) - mx, dy = std::log(diameters[k]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const double slope = sxy / sxx;
  const double ss_res = std::max(0.0, syy - slope * sxy);

  RateFit fit;
  fit.fitted_rate = std::exp(slope);
  fit.reference_rate = reference;
  fit.fit_begin = first_step + begin;
  fit.fit_end = first_step + usable;
  // A flat series is fitted perfectly by slope zero.
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

bool envelope_nested(const Envelope& inner, const Envelope& outer, double slack) {
  if (inner.lo.size() != outer.lo.size()) throw Error(ErrorCode::GridMismatch, "envelopes on different grids");
  for (std::size_t k = 0; k < inner.lo.size(); ++k)
    if (inner.lo[k] < outer.lo[k] - slack || inner.hi[k] > outer.hi[k] + slack) return false;
  return true;
}

bool hull_membership(const Measure& final, const ConsensusState& initial, const GridSpec& g) {
  const auto env = envelope(initial, g);
  const auto q = to_quantile(final, g);
  for (std::size_t k = 0; k < q.values.size(); ++k)
    if (q.values[k] < env.lo[k] - kHullSlack || q.values[k] > env.hi[k] + kHullSlack) return false;
  return true;
}

DiagnosticsRecord make_record(const ConsensusState& state, WassersteinOrder ord, const GridSpec& g,
                              const Measure* limit) {
  DiagnosticsRecord rec;
  rec.t = state.t;
  rec.lyapunov = lyapunov(state, ord, g);
  rec.diameter = ord.is_two() ? std::sqrt(rec.lyapunov) : std::pow(rec.lyapunov, 1.0 / ord.value());
  rec.envelope = envelope(state, g);
  if (limit) {
    double worst = 0.0;
    for (const auto& m : state.agents) worst = std::max(worst, wasserstein(m, *limit, ord, g));
    rec.dist_to_limit = worst;
  }
  return rec;
}

}  // namespace wcons
