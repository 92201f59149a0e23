#include "wcons/engine.hpp"

#include <algorithm>

#include "wcons/barycenter.hpp"
#include "wcons/kernels.hpp"

namespace wcons {

std::string_view to_string(Termination t) noexcept {
  return t == Termination::Converged ? "converged" : "max_steps";
}

std::string_view to_string(Representation r) noexcept {
  return r == Representation::Quantile ? "quantile" : "gaussian_closed_form";
}

WeightMatrix weights_at(const ConsensusConfig& cfg, const NetworkSnapshot& snap, std::size_t t) {
  if (std::holds_alternative<MetropolisScheme>(cfg.scheme)) return metropolis_weights(snap);
  if (const auto* lazy = std::get_if<LazyUniformScheme>(&cfg.scheme))
    return lazy_uniform_weights(snap, lazy->self_weight);
  const auto& ex = std::get<ExplicitScheme>(cfg.scheme);
  if (ex.matrices.empty()) throw Error(ErrorCode::SizeMismatch, "explicit scheme has no matrices");
  return restrict_to(ex.matrices[t % ex.matrices.size()], snap);
}

ConsensusState prepare(ConsensusState state, const ConsensusConfig& cfg) {
  for (auto& m : state.agents) m = validate(std::move(m));
  if (cfg.representation == Representation::GaussianClosedForm) {
    if (!cfg.order.is_two()) throw Error(ErrorCode::UnsupportedOrder, "closed-form Gaussian consensus needs p = 2");
    for (const auto& m : state.agents)
      if (!std::holds_alternative<Gaussian1D>(m))
        throw Error(ErrorCode::RepresentationMismatch, "closed-form Gaussian consensus needs Gaussian agents");
    return state;
  }
  for (auto& m : state.agents) m = to_quantile(m, cfg.grid);
  return state;
}

ConsensusState step(const ConsensusState& state, const NetworkSnapshot& snap, const WeightMatrix& w,
                    const ConsensusConfig& cfg) {
  const std::size_t n = state.agents.size();
  if (snap.size() != n || w.size() != n) throw Error(ErrorCode::SizeMismatch, "agent count differs from network");
  if (!w.is_consistent_with(snap)) throw Error(ErrorCode::SparsityMismatch, "weight on a non-edge");

  ConsensusState next{state.t + 1, {}};
  next.agents.reserve(n);

  if (cfg.representation == Representation::GaussianClosedForm) {
    std::vector<Gaussian1D> gs;
    gs.reserve(n);
    for (const auto& m : state.agents) {
      const auto* g = std::get_if<Gaussian1D>(&m);
      if (!g) throw Error(ErrorCode::RepresentationMismatch, "closed-form step on a non-Gaussian agent");
      gs.push_back(*g);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = w.row(i);
      next.agents.emplace_back(barycenter_gaussian_1d(gs, WeightVector::normalized({row.begin(), row.end()}), cfg.order));
    }
    return next;
  }

  const GridSpec& g = cfg.grid;
  const auto in = stack_quantiles(state, g);
  std::vector<double> out(in.size());
  const kernels::StackedView view{in, n, g.size()};
  if (cfg.order.is_two())
    kernels::omp::mix_linear(w.data(), view, out);
  else
    kernels::omp::mix_lp(w.data(), view, out, cfg.order.value());
  for (std::size_t i = 0; i < n; ++i) {
    const auto first = out.begin() + static_cast<std::ptrdiff_t>(i * g.size());
    next.agents.emplace_back(QuantileMeasure{g, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(g.size()))});
  }
  return next;
}

Measure predicted_limit(const ConsensusState& initial, const ConsensusConfig& cfg) {
  const auto w = WeightVector::uniform(initial.agents.size());
  const bool gaussian = std::all_of(initial.agents.begin(), initial.agents.end(),
                                    [](const Measure& m) { return std::holds_alternative<Gaussian1D>(m); });
  if (gaussian && cfg.order.is_two()) {
    std::vector<Gaussian1D> gs;
    for (const auto& m : initial.agents) gs.push_back(std::get<Gaussian1D>(m));
    return barycenter_gaussian_1d(gs, w);
  }
  std::vector<QuantileMeasure> qs;
  for (const auto& m : initial.agents) qs.push_back(to_quantile(validate(m), cfg.grid));
  return barycenter_quantile(qs, w, cfg.order);
}

bool limit_is_claimed(const TopologySchedule& sched, const ConsensusConfig& cfg) {
  if (!sched.is_static()) return false;
  if (const auto* ex = std::get_if<ExplicitScheme>(&cfg.scheme); ex && ex->matrices.size() != 1) return false;
  const auto snap = sched.at(0);
  return is_connected(snap) && weights_at(cfg, snap, 0).is_doubly_stochastic();
}

RunResult run(const ConsensusState& initial, const TopologySchedule& sched, const ConsensusConfig& cfg) {
  if (initial.agents.size() != sched.size())
    throw Error(ErrorCode::SizeMismatch, "agent count differs from schedule size");
  if (!(cfg.stop.epsilon > 0.0) || cfg.stop.max_steps < 1)
    throw Error(ErrorCode::OutOfDomain, "stop rule needs epsilon > 0 and max_steps >= 1");

  RunResult result;
  ConsensusState state = prepare(initial, cfg);
  state.t = 0;
  if (limit_is_claimed(sched, cfg)) result.predicted = predicted_limit(state, cfg);
  const Measure* limit = result.predicted ? &*result.predicted : nullptr;

  std::optional<WeightMatrix> fixed;
  if (sched.is_static() && !(std::holds_alternative<ExplicitScheme>(cfg.scheme) &&
                             std::get<ExplicitScheme>(cfg.scheme).matrices.size() > 1))
    fixed = weights_at(cfg, sched.at(0), 0);

  for (;;) {
    result.diagnostics.push_back(make_record(state, cfg.order, cfg.grid, limit));
    if (result.diagnostics.back().diameter <= cfg.stop.epsilon) {
      result.terminated_by = Termination::Converged;
      break;
    }
    if (state.t >= cfg.stop.max_steps) {
      result.terminated_by = Termination::MaxSteps;
      break;
    }
    const auto snap = sched.at(state.t);
    state = step(state, snap, fixed ? *fixed : weights_at(cfg, snap, state.t), cfg);
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace wcons
