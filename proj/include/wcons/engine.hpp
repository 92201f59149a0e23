#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "wcons/diagnostics.hpp"
#include "wcons/measure.hpp"
#include "wcons/network.hpp"
#include "wcons/state.hpp"

namespace wcons {

struct MetropolisScheme {};

struct LazyUniformScheme {
  double self_weight = 0.5;
};

/// Matrices used in turn (step t uses matrices[t % size]), each restricted to
/// the active snapshot's edges with rows rescaled to sum 1.
struct ExplicitScheme {
  std::vector<WeightMatrix> matrices;
};

using WeightScheme = std::variant<MetropolisScheme, LazyUniformScheme, ExplicitScheme>;

enum class Representation { Quantile, GaussianClosedForm };

struct StopRule {
  double epsilon = 1e-8;
  std::size_t max_steps = 1000;
};

struct ConsensusConfig {
  WassersteinOrder order{2.0};
  GridSpec grid{1024};
  WeightScheme scheme = MetropolisScheme{};
  StopRule stop;
  Representation representation = Representation::Quantile;
};

enum class Termination { Converged, MaxSteps };

std::string_view to_string(Termination t) noexcept;
std::string_view to_string(Representation r) noexcept;

struct RunResult {
  ConsensusState final_state;
  std::vector<DiagnosticsRecord> diagnostics;  // one per step, t = 0 included
  Termination terminated_by = Termination::MaxSteps;
  std::optional<Measure> predicted;            // set when a limit is claimed
};

/// Weights for step t of the schedule under the configured scheme.
WeightMatrix weights_at(const ConsensusConfig& cfg, const NetworkSnapshot& snap, std::size_t t);

/// Initial state in the configured representation: quantile states are
/// resampled onto cfg.grid; the closed form requires all-Gaussian agents.
ConsensusState prepare(ConsensusState state, const ConsensusConfig& cfg);

/// One synchronous round: every agent becomes the weighted barycenter of its
/// neighbourhood at time t. Throws SparsityMismatch, RepresentationMismatch.
ConsensusState step(const ConsensusState& state, const NetworkSnapshot& snap, const WeightMatrix& w,
                    const ConsensusConfig& cfg);

RunResult run(const ConsensusState& initial, const TopologySchedule& sched, const ConsensusConfig& cfg);

/// Uniform-weight barycenter of the initial measures: the limit under a
/// static connected graph with doubly stochastic weights.
Measure predicted_limit(const ConsensusState& initial, const ConsensusConfig& cfg);

/// True when the run's limit is the uniform barycenter: static schedule,
/// connected graph and doubly stochastic weights.
bool limit_is_claimed(const TopologySchedule& sched, const ConsensusConfig& cfg);

}  // namespace wcons
