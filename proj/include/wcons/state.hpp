#pragma once

#include <cstddef>
#include <vector>

#include "wcons/measure.hpp"

namespace wcons {

/// All agents' measures at step t.
struct ConsensusState {
  std::size_t t = 0;
  std::vector<Measure> agents;
};

}  // namespace wcons
